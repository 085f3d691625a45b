//! CSV exchange formats for scenarios and schedules.
//!
//! Users, segments and slots are numbered from 1 in files; quality indices
//! are 0-based positions on the ladder, lowest first.
//!
//! Scenario: `user,slot,capacity_mb`, one row per (user, slot), capacities
//! with six decimals.
//!
//! Schedule: `user,segment,slot,quality_index,quality_mb`, sorted by (user,
//! segment). A segment that was never downloaded has empty `slot`,
//! `quality_index` and `quality_mb` fields.

use std::io::{Read, Write};

use crate::error::FormatError;
use crate::model::{Placement, QualityLadder, Scenario, Schedule, UserSchedule};

pub const SCENARIO_HEADER: [&str; 3] = ["user", "slot", "capacity_mb"];
pub const SCHEDULE_HEADER: [&str; 5] = ["user", "segment", "slot", "quality_index", "quality_mb"];

pub fn write_scenario_csv<W: Write>(scenario: &Scenario, out: W) -> Result<(), FormatError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(SCENARIO_HEADER)?;
    for (u, row) in scenario.capacity_matrix().iter().enumerate() {
        for (t, c) in row.iter().enumerate() {
            w.write_record([(u + 1).to_string(), (t + 1).to_string(), format!("{c:.6}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a scenario CSV. Rows may come in any order but every (user, slot)
/// pair must appear exactly once. `num_segments` defaults to the slot count.
pub fn read_scenario_csv<R: Read>(
    input: R,
    num_segments: Option<usize>,
    slot_seconds: f64,
) -> Result<Scenario, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(rdr.headers()?, &SCENARIO_HEADER)?;
    let mut cells: Vec<(usize, usize, f64)> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let user: usize = parse_field(&record, 0, line)?;
        let slot: usize = parse_field(&record, 1, line)?;
        let cap: f64 = parse_field(&record, 2, line)?;
        if user == 0 || slot == 0 {
            return Err(FormatError::syntax(line, "user and slot numbers start at 1"));
        }
        cells.push((user - 1, slot - 1, cap));
    }
    let users = cells.iter().map(|c| c.0 + 1).max().unwrap_or(0);
    let slots = cells.iter().map(|c| c.1 + 1).max().unwrap_or(0);
    let mut matrix = vec![vec![None; slots]; users];
    for (u, t, c) in cells {
        if matrix[u][t].replace(c).is_some() {
            return Err(FormatError::syntax(
                0,
                format!("duplicate row for user {} slot {}", u + 1, t + 1),
            ));
        }
    }
    let capacity = matrix
        .into_iter()
        .enumerate()
        .map(|(u, row)| {
            row.into_iter()
                .enumerate()
                .map(|(t, c)| {
                    c.ok_or_else(|| FormatError::Missing(format!("capacity for user {} slot {}", u + 1, t + 1)))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Scenario::new(capacity, num_segments.unwrap_or(slots), slot_seconds)?)
}

pub fn write_schedule_csv<W: Write>(schedule: &Schedule, ladder: &QualityLadder, out: W) -> Result<(), FormatError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(SCHEDULE_HEADER)?;
    for (u, us) in schedule.users.iter().enumerate() {
        for (s, p) in us.placements.iter().enumerate() {
            let (slot, q, mb) = match p {
                Some(p) => (
                    (p.slot + 1).to_string(),
                    p.quality.to_string(),
                    ladder
                        .levels()
                        .get(p.quality)
                        .map_or(String::new(), |l| l.size_mb.to_string()),
                ),
                None => (String::new(), String::new(), String::new()),
            };
            w.write_record([(u + 1).to_string(), (s + 1).to_string(), slot, q, mb])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a schedule CSV. The `quality_mb` column is informational and ignored.
pub fn read_schedule_csv<R: Read>(input: R) -> Result<Schedule, FormatError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    check_header(rdr.headers()?, &SCHEDULE_HEADER)?;
    let mut rows: Vec<(usize, usize, Option<Placement>)> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let user: usize = parse_field(&record, 0, line)?;
        let segment: usize = parse_field(&record, 1, line)?;
        if user == 0 || segment == 0 {
            return Err(FormatError::syntax(line, "user and segment numbers start at 1"));
        }
        let slot_text = record.get(2).unwrap_or("");
        let placement = if slot_text.is_empty() {
            None
        } else {
            let slot: usize = parse_field(&record, 2, line)?;
            if slot == 0 {
                return Err(FormatError::syntax(line, "slot numbers start at 1"));
            }
            Some(Placement {
                slot: slot - 1,
                quality: parse_field(&record, 3, line)?,
            })
        };
        rows.push((user - 1, segment - 1, placement));
    }
    let users = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
    let mut per_user: Vec<Vec<Option<Option<Placement>>>> = vec![Vec::new(); users];
    for (u, s, p) in rows {
        let list = &mut per_user[u];
        if list.len() <= s {
            list.resize(s + 1, None);
        }
        if list[s].replace(p).is_some() {
            return Err(FormatError::syntax(
                0,
                format!("duplicate row for user {} segment {}", u + 1, s + 1),
            ));
        }
    }
    let users = per_user
        .into_iter()
        .enumerate()
        .map(|(u, list)| {
            list.into_iter()
                .enumerate()
                .map(|(s, p)| {
                    p.ok_or_else(|| FormatError::Missing(format!("row for user {} segment {}", u + 1, s + 1)))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(UserSchedule::new)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Schedule::new(users))
}

/// Parses a ladder given on the command line: `reference`, or comma
/// separated levels lowest first, each `size_mb[:bandwidth_bps[:label]]`.
/// Missing bandwidths default to 1000 bit/s times the level number.
pub fn parse_ladder_spec(spec: &str) -> Result<QualityLadder, FormatError> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("reference") {
        return Ok(QualityLadder::reference());
    }
    let mut sizes = Vec::new();
    let mut bandwidths = Vec::new();
    let mut labels = Vec::new();
    for (i, item) in spec.split(',').enumerate() {
        let mut parts = item.trim().split(':');
        let bad = || FormatError::syntax(1, format!("invalid ladder level `{}`", item.trim()));
        let size: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let bandwidth: u64 = match parts.next() {
            Some(b) => b.trim().parse().map_err(|_| bad())?,
            None => 1000 * (i as u64 + 1),
        };
        let label = parts.next().map_or_else(|| format!("q{i}"), |l| l.trim().to_string());
        if parts.next().is_some() {
            return Err(bad());
        }
        sizes.push(size);
        bandwidths.push(bandwidth);
        labels.push(label);
    }
    Ok(QualityLadder::from_columns(&sizes, &bandwidths, Some(&labels))?)
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<(), FormatError> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(FormatError::syntax(
            1,
            format!("expected header `{}`", expected.join(",")),
        ));
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, index: usize, line: usize) -> Result<T, FormatError> {
    let text = record.get(index).unwrap_or("");
    text.parse()
        .map_err(|_| FormatError::syntax(line, format!("invalid value `{text}` in column {}", index + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_csv_layout() {
        let sc = Scenario::new(vec![vec![1.0, 2.5], vec![0.0, 1.0 / 3.0]], 2, 10.0).unwrap();
        let mut buf = Vec::new();
        write_scenario_csv(&sc, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "user,slot,capacity_mb\n1,1,1.000000\n1,2,2.500000\n2,1,0.000000\n2,2,0.333333\n"
        );
        let back = read_scenario_csv(text.as_bytes(), None, 10.0).unwrap();
        assert_eq!(back.capacity(0), &[1.0, 2.5]);
        assert_eq!(back.capacity(1)[1], 0.333333);
    }

    #[test]
    fn scenario_csv_errors() {
        assert!(read_scenario_csv("user,slot\n1,1\n".as_bytes(), None, 10.0).is_err());
        assert!(read_scenario_csv("user,slot,capacity_mb\n1,2,1.0\n".as_bytes(), None, 10.0).is_err());
        assert!(read_scenario_csv("user,slot,capacity_mb\n1,1,x\n".as_bytes(), None, 10.0).is_err());
        assert!(read_scenario_csv("user,slot,capacity_mb\n1,1,1\n1,1,2\n".as_bytes(), None, 10.0).is_err());
        assert!(read_scenario_csv("user,slot,capacity_mb\n0,1,1\n".as_bytes(), None, 10.0).is_err());
    }

    #[test]
    fn ladder_specs() {
        assert_eq!(parse_ladder_spec("reference").unwrap(), QualityLadder::reference());
        assert_eq!(
            parse_ladder_spec("1.77:1000000:low, 3.69:1500000:med,4.51:3000000:high").unwrap(),
            QualityLadder::reference()
        );
        let l = parse_ladder_spec("1,2,3").unwrap();
        assert_eq!(l.sizes().collect::<Vec<_>>(), [1.0, 2.0, 3.0]);
        assert_eq!(l.levels()[2].bandwidth_bps, 3000);
        for bad in ["", "x", "2,1", "1:0", "1:5:a:b"] {
            assert!(parse_ladder_spec(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn schedule_csv_layout() {
        let ladder = QualityLadder::reference();
        let s = Schedule::new(vec![UserSchedule::new(vec![
            Some(Placement { slot: 0, quality: 2 }),
            None,
        ])]);
        let mut buf = Vec::new();
        write_schedule_csv(&s, &ladder, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "user,segment,slot,quality_index,quality_mb\n1,1,1,2,4.51\n1,2,,,\n"
        );
        assert_eq!(read_schedule_csv(text.as_bytes()).unwrap(), s);
        assert!(read_schedule_csv("user,segment,slot,quality_index,quality_mb\n1,2,1,0,1\n".as_bytes()).is_err());
    }
}
