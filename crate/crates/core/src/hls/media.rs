use std::fmt::Write as _;

use super::{
    check_header, lines, parse_integer, set_once, tag_value, HlsError, UnknownTag, EXTM3U, TAG_BUFFER_SIZE,
    TAG_END_LIST, TAG_INF, TAG_REFRESH, TAG_TARGET_DURATION, TAG_VERSION,
};

#[derive(Debug, Clone, PartialEq)]
pub struct MediaEntry {
    pub duration_seconds: f64,
    /// Text after the comma of `#EXTINF`, usually empty.
    pub title: String,
    pub uri: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediaPlaylist {
    pub version: Option<u64>,
    pub target_duration_seconds: u64,
    /// Segments the player should keep buffered.
    pub buffer_size: Option<u64>,
    /// Seconds between playlist re-fetches.
    pub refresh_seconds: Option<u64>,
    pub entries: Vec<MediaEntry>,
    pub end_list: bool,
    pub unknown_tags: Vec<UnknownTag>,
}

impl MediaPlaylist {
    pub fn new(target_duration_seconds: u64) -> Self {
        MediaPlaylist {
            version: None,
            target_duration_seconds,
            buffer_size: None,
            refresh_seconds: None,
            entries: Vec::new(),
            end_list: false,
            unknown_tags: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, HlsError> {
        let mut it = lines(text);
        check_header(&mut it)?;
        let mut version = None;
        let mut target = None;
        let mut buffer_size = None;
        let mut refresh = None;
        let mut end_list = false;
        let mut entries: Vec<MediaEntry> = Vec::new();
        let mut unknown_tags = Vec::new();
        // (line, duration, title) of an #EXTINF still waiting for its URI.
        let mut pending: Option<(usize, f64, String)> = None;

        for (n, line) in it {
            if let Some(v) = tag_value(line, TAG_INF) {
                if let Some((prev, ..)) = pending {
                    return Err(HlsError::MissingUri {
                        line: prev,
                        tag: TAG_INF,
                    });
                }
                let (duration, title) = v.split_once(',').unwrap_or((v, ""));
                let duration: f64 = duration.trim().parse().map_err(|_| HlsError::Syntax {
                    line: n,
                    message: format!("invalid #EXTINF duration `{duration}`"),
                })?;
                if !duration.is_finite() || duration < 0.0 {
                    return Err(HlsError::Syntax {
                        line: n,
                        message: format!("invalid #EXTINF duration `{duration}`"),
                    });
                }
                pending = Some((n, duration, title.to_string()));
            } else if let Some(v) = tag_value(line, TAG_VERSION) {
                set_once(&mut version, parse_integer(n, TAG_VERSION, v)?, n, TAG_VERSION)?;
            } else if let Some(v) = tag_value(line, TAG_TARGET_DURATION) {
                let value = parse_integer(n, TAG_TARGET_DURATION, v)?;
                set_once(&mut target, value, n, TAG_TARGET_DURATION)?;
            } else if let Some(v) = tag_value(line, TAG_BUFFER_SIZE) {
                set_once(
                    &mut buffer_size,
                    parse_integer(n, TAG_BUFFER_SIZE, v)?,
                    n,
                    TAG_BUFFER_SIZE,
                )?;
            } else if let Some(v) = tag_value(line, TAG_REFRESH) {
                set_once(&mut refresh, parse_integer(n, TAG_REFRESH, v)?, n, TAG_REFRESH)?;
            } else if line.trim_end() == TAG_END_LIST {
                end_list = true;
            } else if line.trim_end() == EXTM3U {
                return Err(HlsError::Syntax {
                    line: n,
                    message: "repeated #EXTM3U".into(),
                });
            } else if line.starts_with('#') {
                unknown_tags.push(UnknownTag {
                    position: entries.len(),
                    line: line.to_string(),
                });
            } else if let Some((_, duration_seconds, title)) = pending.take() {
                entries.push(MediaEntry {
                    duration_seconds,
                    title,
                    uri: line.to_string(),
                });
            } else {
                return Err(HlsError::Syntax {
                    line: n,
                    message: format!("URI `{line}` without a preceding #EXTINF"),
                });
            }
        }
        if let Some((line, ..)) = pending {
            return Err(HlsError::MissingUri { line, tag: TAG_INF });
        }
        let playlist = MediaPlaylist {
            version,
            target_duration_seconds: target.ok_or(HlsError::MissingTargetDuration)?,
            buffer_size,
            refresh_seconds: refresh,
            entries,
            end_list,
            unknown_tags,
        };
        playlist.validate()?;
        Ok(playlist)
    }

    pub fn validate(&self) -> Result<(), HlsError> {
        for (index, e) in self.entries.iter().enumerate() {
            if e.duration_seconds > self.target_duration_seconds as f64 {
                return Err(HlsError::DurationExceedsTarget {
                    index,
                    duration: e.duration_seconds,
                    target: self.target_duration_seconds,
                });
            }
        }
        if self.end_list && self.entries.is_empty() {
            return Err(HlsError::EmptyEndList);
        }
        Ok(())
    }

    pub fn emit(&self) -> String {
        let mut out = String::new();
        out.push_str(EXTM3U);
        out.push('\n');
        if let Some(v) = self.version {
            let _ = writeln!(out, "{TAG_VERSION}:{v}");
        }
        let _ = writeln!(out, "{TAG_TARGET_DURATION}:{}", self.target_duration_seconds);
        if let Some(b) = self.buffer_size {
            let _ = writeln!(out, "{TAG_BUFFER_SIZE}:{b}");
        }
        if let Some(r) = self.refresh_seconds {
            let _ = writeln!(out, "{TAG_REFRESH}:{r}");
        }
        let mut unknown = self.unknown_tags.iter().peekable();
        for (i, e) in self.entries.iter().enumerate() {
            while let Some(tag) = unknown.next_if(|t| t.position <= i) {
                out.push_str(&tag.line);
                out.push('\n');
            }
            let _ = writeln!(out, "{TAG_INF}:{},{}", e.duration_seconds, e.title);
            out.push_str(&e.uri);
            out.push('\n');
        }
        for tag in unknown {
            out.push_str(&tag.line);
            out.push('\n');
        }
        if self.end_list {
            out.push_str(TAG_END_LIST);
            out.push('\n');
        }
        out
    }
}
