use std::collections::HashMap;

use super::{HlsError, MasterPlaylist, MediaEntry, MediaPlaylist};
use crate::model::{Schedule, UserSchedule};

/// Segments the player should hold at the end of `slot`: downloads so far
/// minus segments already played, never negative. Agrees with
/// [`crate::metrics::buffer_timeline`] at every slot of the horizon.
pub fn buffer_size_for_slot(schedule: &UserSchedule, slot: usize) -> usize {
    let downloaded = schedule
        .placements
        .iter()
        .filter(|p| p.is_some_and(|p| p.slot <= slot))
        .count();
    downloaded.saturating_sub(slot + 1)
}

/// Slots covered by a schedule: enough for every segment's playout and
/// every download.
pub fn schedule_horizon(schedule: &UserSchedule) -> usize {
    let last_download = schedule
        .placements
        .iter()
        .flatten()
        .map(|p| p.slot + 1)
        .max()
        .unwrap_or(0);
    schedule.len().max(last_download)
}

/// Builds the single-variant playlist the player sees during `current_slot`.
///
/// Ladder level `q` is the master's `q`-th variant by ascending bandwidth,
/// and `variants` maps each variant URI (as written in the master) to its
/// media playlist. Entry `i` comes from the variant of segment `i`'s
/// scheduled quality. Header fields and unrecognised tags are taken from the
/// lowest variant; the target duration is the largest over all variants.
pub fn join_playlists(
    master: &MasterPlaylist,
    variants: &HashMap<String, MediaPlaylist>,
    schedule: &Schedule,
    user: usize,
    current_slot: usize,
    refresh_seconds: u64,
) -> Result<MediaPlaylist, HlsError> {
    master.validate()?;
    let ordered = master.variants_by_bandwidth();
    let playlists = ordered
        .iter()
        .map(|v| {
            variants
                .get(&v.uri)
                .ok_or_else(|| HlsError::MissingVariant(v.uri.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let base = playlists[0];
    for (v, p) in ordered.iter().zip(&playlists).skip(1) {
        if p.entries.len() != base.entries.len() {
            return Err(HlsError::EntryCountMismatch {
                uri: v.uri.clone(),
                expected: base.entries.len(),
                found: p.entries.len(),
            });
        }
        for (index, (a, b)) in base.entries.iter().zip(&p.entries).enumerate() {
            if a.duration_seconds != b.duration_seconds {
                return Err(HlsError::DurationMismatch {
                    uri: v.uri.clone(),
                    index,
                    expected: a.duration_seconds,
                    found: b.duration_seconds,
                });
            }
        }
    }

    let us = schedule.users.get(user).ok_or(HlsError::UserOutOfRange { user })?;
    if us.len() != base.entries.len() {
        return Err(HlsError::ScheduleLengthMismatch {
            schedule: us.len(),
            playlist: base.entries.len(),
        });
    }
    let horizon = schedule_horizon(us);
    if current_slot >= horizon {
        return Err(HlsError::SlotOutOfRange {
            slot: current_slot,
            horizon,
        });
    }

    let entries = us
        .placements
        .iter()
        .enumerate()
        .map(|(segment, p)| {
            let p = p.ok_or(HlsError::UnscheduledSegment { segment })?;
            let playlist = playlists.get(p.quality).ok_or(HlsError::QualityWithoutVariant {
                segment,
                quality: p.quality,
                variants: playlists.len(),
            })?;
            Ok::<MediaEntry, HlsError>(playlist.entries[segment].clone())
        })
        .collect::<Result<Vec<_>, _>>()?;

    let joined = MediaPlaylist {
        version: base.version,
        target_duration_seconds: playlists.iter().map(|p| p.target_duration_seconds).max().unwrap_or(0),
        buffer_size: Some(buffer_size_for_slot(us, current_slot) as u64),
        refresh_seconds: Some(refresh_seconds),
        entries,
        end_list: base.end_list,
        unknown_tags: base.unknown_tags.clone(),
    };
    joined.validate()?;
    Ok(joined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hls::Variant;
    use crate::metrics::buffer_timeline;

    fn variant_playlist(label: &str, n: usize) -> MediaPlaylist {
        let mut p = MediaPlaylist::new(10);
        p.version = Some(3);
        p.end_list = true;
        p.entries = (1..=n)
            .map(|i| MediaEntry {
                duration_seconds: 10.0,
                title: String::new(),
                uri: format!("http://h/{label}/{i:03}.ts"),
            })
            .collect();
        p
    }

    fn setup(n: usize) -> (MasterPlaylist, HashMap<String, MediaPlaylist>) {
        let master = MasterPlaylist::new(vec![
            Variant::new(3_000_000, "high.m3u8"),
            Variant::new(1_000_000, "low.m3u8"),
        ])
        .unwrap();
        let map = [("low.m3u8", "low"), ("high.m3u8", "high")]
            .into_iter()
            .map(|(k, l)| (k.to_string(), variant_playlist(l, n)))
            .collect();
        (master, map)
    }

    #[test]
    fn buffer_sizes() {
        let jit = UserSchedule::from_slots(&[0, 1, 2], &[0, 0, 0]);
        assert!((0..3).all(|t| buffer_size_for_slot(&jit, t) == 0));
        let front = UserSchedule::from_slots(&[0, 0, 0], &[0, 0, 0]);
        let got: Vec<_> = (0..3).map(|t| buffer_size_for_slot(&front, t)).collect();
        assert_eq!(got, [2, 1, 0]);
        assert_eq!(got, buffer_timeline(&front, 3));
    }

    #[test]
    fn picks_entries_by_bandwidth_rank() {
        let (master, map) = setup(3);
        let s = Schedule::new(vec![UserSchedule::from_slots(&[0, 0, 2], &[1, 0, 1])]);
        let j = join_playlists(&master, &map, &s, 0, 0, 10).unwrap();
        let uris: Vec<_> = j.entries.iter().map(|e| e.uri.as_str()).collect();
        assert_eq!(
            uris,
            ["http://h/high/001.ts", "http://h/low/002.ts", "http://h/high/003.ts"]
        );
        assert_eq!(j.buffer_size, Some(1));
        assert_eq!(j.refresh_seconds, Some(10));
    }

    #[test]
    fn single_variant_only_gains_tags() {
        let master = MasterPlaylist::new(vec![Variant::new(1, "only.m3u8")]).unwrap();
        let p = variant_playlist("only", 2);
        let map = HashMap::from([("only.m3u8".to_string(), p.clone())]);
        let s = Schedule::new(vec![UserSchedule::from_slots(&[0, 1], &[0, 0])]);
        let j = join_playlists(&master, &map, &s, 0, 1, 10).unwrap();
        assert_eq!(j.entries, p.entries);
        assert_eq!(j.buffer_size, Some(0));
    }

    #[test]
    fn consistency_errors() {
        let (master, mut map) = setup(3);
        let short = Schedule::new(vec![UserSchedule::from_slots(&[0, 1], &[0, 0])]);
        assert!(matches!(
            join_playlists(&master, &map, &short, 0, 0, 10),
            Err(HlsError::ScheduleLengthMismatch { .. })
        ));
        let s = Schedule::new(vec![UserSchedule::from_slots(&[0, 1, 2], &[0, 0, 2])]);
        assert!(matches!(
            join_playlists(&master, &map, &s, 0, 0, 10),
            Err(HlsError::QualityWithoutVariant { .. })
        ));
        let s = Schedule::new(vec![UserSchedule::from_slots(&[0, 1, 2], &[0, 0, 0])]);
        assert!(matches!(
            join_playlists(&master, &map, &s, 1, 0, 10),
            Err(HlsError::UserOutOfRange { .. })
        ));
        assert!(matches!(
            join_playlists(&master, &map, &s, 0, 3, 10),
            Err(HlsError::SlotOutOfRange { .. })
        ));
        map.insert("high.m3u8".into(), variant_playlist("high", 4));
        assert!(matches!(
            join_playlists(&master, &map, &s, 0, 0, 10),
            Err(HlsError::EntryCountMismatch { .. })
        ));
        map.remove("high.m3u8");
        assert!(matches!(
            join_playlists(&master, &map, &s, 0, 0, 10),
            Err(HlsError::MissingVariant(_))
        ));
    }
}
