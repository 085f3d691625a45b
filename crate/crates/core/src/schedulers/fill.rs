//! Fill: keep the buffer minimal and only prefetch ahead of an outage.
//!
//! Walking forward, each slot takes one new segment at the best quality it
//! supports. When a slot cannot carry even the lowest quality, the scheduler
//! walks back `g = t, t-1, ..., 0` until the slots `g..=t` can hold every
//! segment already placed there plus the new one at a single quality, and
//! repacks them earliest slot first at the best such quality.

use super::{get_best_quality, get_best_quality_range, get_segments_for_quality};
use crate::model::{fits, Placement, QualityLadder, Scenario, Schedule, UserSchedule};

pub fn fill(scenario: &Scenario, ladder: &QualityLadder) -> Schedule {
    Schedule::new(
        (0..scenario.num_users())
            .map(|u| fill_user(scenario.capacity(u), scenario.num_segments(), ladder))
            .collect(),
    )
}

fn fill_user(capacity: &[f64], num_segments: usize, ladder: &QualityLadder) -> UserSchedule {
    let mut schedule = UserSchedule::unplaced(num_segments);
    let mut scheduled = 0;
    for t in 0..capacity.len() {
        if scheduled == num_segments {
            break;
        }
        if schedule_segment(&mut schedule.placements, t, scheduled, ladder, capacity) {
            scheduled += 1;
        }
    }
    place_leftovers(&mut schedule, scheduled, ladder, capacity);
    schedule
}

/// Tries to place segment `next` by slot `t`. Returns `false` when even a
/// backtrack to the first slot cannot make room; the segment then runs late.
fn schedule_segment(
    placements: &mut [Option<Placement>],
    t: usize,
    next: usize,
    ladder: &QualityLadder,
    capacity: &[f64],
) -> bool {
    if let Some(quality) = get_best_quality(ladder, capacity[t]) {
        placements[next] = Some(Placement { slot: t, quality });
        return true;
    }
    for g in (0..=t).rev() {
        // Placed segments have nondecreasing slots, so those inside g..=t are
        // the contiguous run first..next.
        let first = placements[..next]
            .iter()
            .position(|p| p.is_some_and(|p| p.slot >= g))
            .unwrap_or(next);
        let count = next - first + 1;
        let range = &capacity[g..=t];
        let Some(quality) = get_best_quality_range(ladder, count, range) else {
            continue;
        };
        let size = ladder.size(quality);
        let mut segment = first;
        for (offset, &cap) in range.iter().enumerate() {
            let fit = get_segments_for_quality(size, cap);
            for _ in 0..fit {
                if segment > next {
                    break;
                }
                placements[segment] = Some(Placement {
                    slot: g + offset,
                    quality,
                });
                segment += 1;
            }
        }
        debug_assert!(segment > next);
        return true;
    }
    false
}

/// Segments the main pass never reached go to the first slot at or after
/// their playout slot with room for the lowest quality.
fn place_leftovers(schedule: &mut UserSchedule, scheduled: usize, ladder: &QualityLadder, capacity: &[f64]) {
    if scheduled == schedule.len() {
        return;
    }
    let mut used = schedule.slot_usage(ladder, capacity.len());
    let lowest = ladder.lowest_size();
    for segment in scheduled..schedule.len() {
        let slot = (segment..capacity.len()).find(|&r| fits(used[r] + lowest, capacity[r]));
        if let Some(slot) = slot {
            used[slot] += lowest;
            schedule.placements[segment] = Some(Placement { slot, quality: 0 });
        }
    }
}
