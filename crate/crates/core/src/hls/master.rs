use std::collections::HashSet;
use std::fmt::Write as _;

use super::{
    check_header, lines, parse_integer, set_once, tag_value, HlsError, UnknownTag, EXTM3U, TAG_STREAM_INF, TAG_VERSION,
};

type Attributes = Vec<(String, String)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub bandwidth_bps: u64,
    /// Attributes other than `BANDWIDTH`, as `(name, raw value)` with quotes
    /// kept.
    pub other_attributes: Vec<(String, String)>,
    pub uri: String,
}

impl Variant {
    pub fn new(bandwidth_bps: u64, uri: impl Into<String>) -> Self {
        Variant {
            bandwidth_bps,
            other_attributes: Vec::new(),
            uri: uri.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasterPlaylist {
    pub version: Option<u64>,
    pub variants: Vec<Variant>,
    pub unknown_tags: Vec<UnknownTag>,
}

impl MasterPlaylist {
    pub fn new(variants: Vec<Variant>) -> Result<Self, HlsError> {
        let m = MasterPlaylist {
            version: None,
            variants,
            unknown_tags: Vec::new(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn parse(text: &str) -> Result<Self, HlsError> {
        let mut it = lines(text);
        check_header(&mut it)?;
        let mut version = None;
        let mut variants = Vec::new();
        let mut unknown_tags = Vec::new();
        let mut pending: Option<(usize, u64, Attributes)> = None;
        for (n, line) in it {
            if let Some(v) = tag_value(line, TAG_STREAM_INF) {
                if let Some((prev, ..)) = pending {
                    return Err(HlsError::MissingUri {
                        line: prev,
                        tag: TAG_STREAM_INF,
                    });
                }
                let mut bandwidth = None;
                let mut others = Vec::new();
                for (name, value) in parse_attributes(v).map_err(|message| HlsError::Syntax { line: n, message })? {
                    if name == "BANDWIDTH" {
                        set_once(
                            &mut bandwidth,
                            parse_integer(n, TAG_STREAM_INF, &value)?,
                            n,
                            TAG_STREAM_INF,
                        )?;
                    } else {
                        others.push((name, value));
                    }
                }
                let bandwidth = bandwidth.filter(|&b| b > 0).ok_or_else(|| HlsError::Syntax {
                    line: n,
                    message: "#EXT-X-STREAM-INF needs a positive BANDWIDTH".into(),
                })?;
                pending = Some((n, bandwidth, others));
            } else if let Some(v) = tag_value(line, TAG_VERSION) {
                set_once(&mut version, parse_integer(n, TAG_VERSION, v)?, n, TAG_VERSION)?;
            } else if line.starts_with('#') {
                unknown_tags.push(UnknownTag {
                    position: variants.len(),
                    line: line.to_string(),
                });
            } else if let Some((_, bandwidth_bps, other_attributes)) = pending.take() {
                variants.push(Variant {
                    bandwidth_bps,
                    other_attributes,
                    uri: line.to_string(),
                });
            } else {
                return Err(HlsError::Syntax {
                    line: n,
                    message: format!("URI `{line}` without a preceding #EXT-X-STREAM-INF"),
                });
            }
        }
        if let Some((line, ..)) = pending {
            return Err(HlsError::MissingUri {
                line,
                tag: TAG_STREAM_INF,
            });
        }
        let m = MasterPlaylist {
            version,
            variants,
            unknown_tags,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), HlsError> {
        if self.variants.is_empty() {
            return Err(HlsError::NoVariants);
        }
        let mut seen = HashSet::new();
        for v in &self.variants {
            if !seen.insert(v.bandwidth_bps) {
                return Err(HlsError::DuplicateBandwidth(v.bandwidth_bps));
            }
        }
        Ok(())
    }

    /// Variants from lowest to highest bandwidth; position `q` is the
    /// variant of ladder level `q`.
    pub fn variants_by_bandwidth(&self) -> Vec<&Variant> {
        let mut v: Vec<&Variant> = self.variants.iter().collect();
        v.sort_by_key(|v| v.bandwidth_bps);
        v
    }

    pub fn emit(&self) -> String {
        let mut out = String::new();
        out.push_str(EXTM3U);
        out.push('\n');
        if let Some(v) = self.version {
            let _ = writeln!(out, "{TAG_VERSION}:{v}");
        }
        let mut unknown = self.unknown_tags.iter().peekable();
        for (i, v) in self.variants.iter().enumerate() {
            while let Some(tag) = unknown.next_if(|t| t.position <= i) {
                out.push_str(&tag.line);
                out.push('\n');
            }
            let _ = write!(out, "{TAG_STREAM_INF}:BANDWIDTH={}", v.bandwidth_bps);
            for (name, value) in &v.other_attributes {
                let _ = write!(out, ",{name}={value}");
            }
            out.push('\n');
            out.push_str(&v.uri);
            out.push('\n');
        }
        for tag in unknown {
            out.push_str(&tag.line);
            out.push('\n');
        }
        out
    }
}

/// Splits an attribute list `A=1,B="x,y"` into name/value pairs. Quoted
/// values keep their quotes.
fn parse_attributes(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let (name, after) = rest
            .split_once('=')
            .ok_or_else(|| format!("attribute without value in `{text}`"))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(format!("empty attribute name in `{text}`"));
        }
        let after = after.trim_start();
        let (value, tail) = if let Some(quoted) = after.strip_prefix('"') {
            let end = quoted
                .find('"')
                .ok_or_else(|| format!("unterminated quote in `{text}`"))?;
            (&after[..end + 2], &quoted[end + 1..])
        } else {
            after.split_at(after.find(',').unwrap_or(after.len()))
        };
        out.push((name.to_string(), value.trim().to_string()));
        let tail = tail.trim_start();
        rest = match tail.strip_prefix(',') {
            Some(t) => t.trim_start(),
            None if tail.is_empty() => tail,
            None => return Err(format!("expected `,` after attribute {name}")),
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attributes_with_quotes() {
        let a = parse_attributes(r#"BANDWIDTH=1,CODECS="avc1,mp4a",RESOLUTION=640x360"#).unwrap();
        assert_eq!(
            a,
            vec![
                ("BANDWIDTH".to_string(), "1".to_string()),
                ("CODECS".to_string(), "\"avc1,mp4a\"".to_string()),
                ("RESOLUTION".to_string(), "640x360".to_string()),
            ]
        );
        assert!(parse_attributes("BANDWIDTH").is_err());
        assert!(parse_attributes(r#"C="x"#).is_err());
    }

    #[test]
    fn single_variant_and_extra_attributes() {
        let text = "#EXTM3U\n#EXT-X-STREAM-INF:BANDWIDTH=800000,CODECS=\"avc1,mp4a\"\nlow/index.m3u8\n";
        let m = MasterPlaylist::parse(text).unwrap();
        assert_eq!(m.variants.len(), 1);
        assert_eq!(m.variants[0].bandwidth_bps, 800_000);
        assert_eq!(m.emit(), text);
    }

    #[test]
    fn bandwidth_order_and_errors() {
        let m = MasterPlaylist::new(vec![Variant::new(3, "c"), Variant::new(1, "a"), Variant::new(2, "b")]).unwrap();
        let order: Vec<_> = m.variants_by_bandwidth().iter().map(|v| v.uri.as_str()).collect();
        assert_eq!(order, ["a", "b", "c"]);
        assert_eq!(
            MasterPlaylist::parse("#EXTM3U\n#EXT-X-STREAM-INF:BANDWIDTH=5\na\n#EXT-X-STREAM-INF:BANDWIDTH=5\nb\n"),
            Err(HlsError::DuplicateBandwidth(5))
        );
        assert!(MasterPlaylist::parse("#EXTM3U\n#EXT-X-STREAM-INF:BANDWIDTH=5\n").is_err());
        assert!(MasterPlaylist::parse("#EXTM3U\n").is_err());
        assert!(MasterPlaylist::parse("#EXTM3U\n#EXT-X-STREAM-INF:RESOLUTION=1x1\na\n").is_err());
        assert!(MasterPlaylist::parse("#EXT-X-STREAM-INF:BANDWIDTH=5\na\n").is_err());
    }
}
