//! Fixed-buffer greedy baselines modelled on stock HLS players.
//!
//! Both walk the slots in order and keep downloading the next segments while
//! the end-of-slot buffer stays within `max_buffer_segments`. Segments that
//! fall behind are fetched in the first later slot with room; segments still
//! missing at the horizon stay unplaced.

use super::{get_best_quality, get_segments_for_quality, GreedyConfig};
use crate::model::{fits, Placement, QualityLadder, Scenario, Schedule, UserSchedule};

#[derive(Clone, Copy)]
enum Policy {
    BufferFirst,
    QualityFirst,
}

/// Fills the buffer with as many lowest-quality segments as fit, then spends
/// leftover capacity on upgrading them, most recent segment first.
pub fn buffer_first(scenario: &Scenario, ladder: &QualityLadder, config: &GreedyConfig) -> Schedule {
    run(scenario, ladder, config, Policy::BufferFirst)
}

/// Downloads each next segment at the best quality the remaining slot
/// capacity allows, and repeats while buffer space and capacity remain.
pub fn quality_first(scenario: &Scenario, ladder: &QualityLadder, config: &GreedyConfig) -> Schedule {
    run(scenario, ladder, config, Policy::QualityFirst)
}

fn run(scenario: &Scenario, ladder: &QualityLadder, config: &GreedyConfig, policy: Policy) -> Schedule {
    Schedule::new(
        (0..scenario.num_users())
            .map(|u| {
                greedy_user(
                    scenario.capacity(u),
                    scenario.num_segments(),
                    ladder,
                    config.max_buffer_segments(),
                    policy,
                )
            })
            .collect(),
    )
}

fn greedy_user(
    capacity: &[f64],
    num_segments: usize,
    ladder: &QualityLadder,
    max_buffer: usize,
    policy: Policy,
) -> UserSchedule {
    let mut schedule = UserSchedule::unplaced(num_segments);
    let mut next = 0;
    for (t, &cap) in capacity.iter().enumerate() {
        if next == num_segments {
            break;
        }
        // End-of-slot buffer is (downloaded - (t + 1)); keep it <= max_buffer.
        let room = (t + 1 + max_buffer).saturating_sub(next).min(num_segments - next);
        let qualities = match policy {
            Policy::BufferFirst => buffer_first_slot(cap, room, ladder),
            Policy::QualityFirst => quality_first_slot(cap, room, ladder),
        };
        for q in qualities {
            schedule.placements[next] = Some(Placement { slot: t, quality: q });
            next += 1;
        }
    }
    schedule
}

fn buffer_first_slot(cap: f64, room: usize, ladder: &QualityLadder) -> Vec<usize> {
    let count = room.min(get_segments_for_quality(ladder.lowest_size(), cap));
    let mut qualities = vec![0; count];
    let mut used = count as f64 * ladder.lowest_size();
    for q in qualities.iter_mut().rev() {
        let base = used - ladder.size(*q);
        if let Some(best) = (0..ladder.len()).rev().find(|&c| fits(base + ladder.size(c), cap)) {
            if best > *q {
                used = base + ladder.size(best);
                *q = best;
            }
        }
    }
    qualities
}

fn quality_first_slot(cap: f64, room: usize, ladder: &QualityLadder) -> Vec<usize> {
    let mut qualities = Vec::new();
    let mut used = 0.0;
    while qualities.len() < room {
        match get_best_quality(ladder, cap - used) {
            Some(q) => {
                used += ladder.size(q);
                qualities.push(q);
            }
            None => break,
        }
    }
    qualities
}
