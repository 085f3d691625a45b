//! HLS media and master playlists with the `#EXT-X-BUFFERSIZE` and
//! `#EXT-X-REFRESH` extension tags, and the join of a multi-variant stream
//! into one schedule-driven media playlist.
//!
//! Parsing accepts LF or CRLF line endings and an optional space after the
//! colon of integer tags. Emission is canonical: LF endings, no spaces, a
//! fixed tag order. Tags the parser does not recognise are kept verbatim
//! together with their position and written back in place.

mod join;
mod master;
mod media;

use thiserror::Error;

pub use join::{buffer_size_for_slot, join_playlists, schedule_horizon};
pub use master::{MasterPlaylist, Variant};
pub use media::{MediaEntry, MediaPlaylist};

pub const EXTM3U: &str = "#EXTM3U";
pub const TAG_VERSION: &str = "#EXT-X-VERSION";
pub const TAG_TARGET_DURATION: &str = "#EXT-X-TARGETDURATION";
pub const TAG_BUFFER_SIZE: &str = "#EXT-X-BUFFERSIZE";
pub const TAG_REFRESH: &str = "#EXT-X-REFRESH";
pub const TAG_INF: &str = "#EXTINF";
pub const TAG_END_LIST: &str = "#EXT-X-ENDLIST";
pub const TAG_STREAM_INF: &str = "#EXT-X-STREAM-INF";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HlsError {
    #[error("playlist does not start with #EXTM3U")]
    MissingHeader,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {tag} is not followed by a URI")]
    MissingUri { line: usize, tag: &'static str },
    #[error("line {line}: {tag} expects a non-negative integer, got `{value}`")]
    InvalidInteger {
        line: usize,
        tag: &'static str,
        value: String,
    },
    #[error("line {line}: {tag} appears more than once")]
    DuplicateTag { line: usize, tag: &'static str },
    #[error("media playlist has no #EXT-X-TARGETDURATION")]
    MissingTargetDuration,
    #[error("entry {index} lasts {duration} s, longer than the target duration {target} s")]
    DurationExceedsTarget { index: usize, duration: f64, target: u64 },
    #[error("playlist is marked complete but has no entries")]
    EmptyEndList,
    #[error("master playlist lists no variants")]
    NoVariants,
    #[error("two variants share BANDWIDTH={0}")]
    DuplicateBandwidth(u64),
    #[error("no media playlist supplied for variant `{0}`")]
    MissingVariant(String),
    #[error("variant `{uri}` has {found} entries, expected {expected}")]
    EntryCountMismatch { uri: String, expected: usize, found: usize },
    #[error("entry {index} of variant `{uri}` lasts {found} s, expected {expected} s")]
    DurationMismatch {
        uri: String,
        index: usize,
        expected: f64,
        found: f64,
    },
    #[error("schedule has {schedule} segments but the playlists have {playlist} entries")]
    ScheduleLengthMismatch { schedule: usize, playlist: usize },
    #[error("schedule has no user {user}")]
    UserOutOfRange { user: usize },
    #[error("slot {slot} is beyond the schedule horizon of {horizon} slots")]
    SlotOutOfRange { slot: usize, horizon: usize },
    #[error("segment {segment} is not scheduled")]
    UnscheduledSegment { segment: usize },
    #[error("segment {segment} uses quality {quality} but only {variants} variants exist")]
    QualityWithoutVariant {
        segment: usize,
        quality: usize,
        variants: usize,
    },
}

/// A tag line the parser does not interpret. `position` is the number of
/// entries (or variants) that precede it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownTag {
    pub position: usize,
    pub line: String,
}

/// Splits text into `(line_number, line)` pairs without line terminators,
/// skipping blank lines.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Returns the value after `tag:` when `line` is that tag.
fn tag_value<'a>(line: &'a str, tag: &str) -> Option<&'a str> {
    line.strip_prefix(tag)?.strip_prefix(':')
}

fn parse_integer(line: usize, tag: &'static str, value: &str) -> Result<u64, HlsError> {
    let trimmed = value.strip_prefix(' ').unwrap_or(value);
    if trimmed.is_empty() || !trimmed.bytes().all(|b| b.is_ascii_digit()) {
        return Err(HlsError::InvalidInteger {
            line,
            tag,
            value: value.to_string(),
        });
    }
    trimmed.parse().map_err(|_| HlsError::InvalidInteger {
        line,
        tag,
        value: value.to_string(),
    })
}

fn check_header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<(), HlsError> {
    match lines.next() {
        Some((_, l)) if l.trim_end() == EXTM3U => Ok(()),
        _ => Err(HlsError::MissingHeader),
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T, line: usize, tag: &'static str) -> Result<(), HlsError> {
    if slot.replace(value).is_some() {
        return Err(HlsError::DuplicateTag { line, tag });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_tags() {
        assert_eq!(parse_integer(1, TAG_BUFFER_SIZE, "2"), Ok(2));
        assert_eq!(parse_integer(1, TAG_BUFFER_SIZE, " 2"), Ok(2));
        assert_eq!(parse_integer(1, TAG_BUFFER_SIZE, "0"), Ok(0));
        for bad in ["", " ", "-1", "2.5", "two", "  2", "+2"] {
            assert!(parse_integer(1, TAG_BUFFER_SIZE, bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn line_splitting_handles_crlf_and_blanks() {
        let got: Vec<_> = lines("#EXTM3U\r\n\r\nabc\n").collect();
        assert_eq!(got, vec![(1, "#EXTM3U"), (3, "abc")]);
    }
}
