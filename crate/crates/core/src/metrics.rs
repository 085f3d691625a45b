//! Lateness, buffer fill, the weighted objective and schedule validation.

use std::fmt;

use crate::model::{fits, ObjectiveWeights, QualityLadder, Scenario, Schedule, UserSchedule};

/// Slots by which a download in `download_slot` misses the playout slot of
/// `segment`. Early downloads are not rewarded.
#[inline]
pub fn lateness(download_slot: usize, segment: usize) -> usize {
    download_slot.saturating_sub(segment)
}

/// Lateness of one placement; unplaced segments are charged up to the horizon.
#[inline]
fn placement_lateness(slot: Option<usize>, segment: usize, num_slots: usize) -> usize {
    lateness(slot.unwrap_or(num_slots), segment)
}

/// Downloaded-but-unplayed segments at the end of every slot.
///
/// Entry `t` is `max(#{s : d[s] <= t} - (t + 1), 0)`: by the end of slot `t`
/// the segments `0..=t` have been due for playout.
pub fn buffer_timeline(schedule: &UserSchedule, num_slots: usize) -> Vec<usize> {
    let mut downloads = vec![0usize; num_slots];
    for p in schedule.placements.iter().flatten() {
        if p.slot < num_slots {
            downloads[p.slot] += 1;
        }
    }
    let mut cumulative = 0;
    downloads
        .iter()
        .enumerate()
        .map(|(t, n)| {
            cumulative += n;
            cumulative.saturating_sub(t + 1)
        })
        .collect()
}

/// Unweighted sums that make up the objective.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ObjectiveTerms {
    pub lateness_slots: f64,
    pub quality_mb: f64,
    pub buffer_segments: f64,
}

impl ObjectiveTerms {
    pub fn weighted(&self, weights: &ObjectiveWeights) -> f64 {
        weights.lateness() * self.lateness_slots - weights.quality() * self.quality_mb
            + weights.buffer() * self.buffer_segments
    }

    fn add(&mut self, other: ObjectiveTerms) {
        self.lateness_slots += other.lateness_slots;
        self.quality_mb += other.quality_mb;
        self.buffer_segments += other.buffer_segments;
    }
}

pub fn user_objective_terms(schedule: &UserSchedule, num_slots: usize, ladder: &QualityLadder) -> ObjectiveTerms {
    let mut terms = ObjectiveTerms::default();
    for (s, p) in schedule.placements.iter().enumerate() {
        terms.lateness_slots += placement_lateness(p.map(|p| p.slot), s, num_slots) as f64;
        if let Some(p) = p {
            terms.quality_mb += ladder.size(p.quality);
        }
    }
    terms.buffer_segments = buffer_timeline(schedule, num_slots).iter().sum::<usize>() as f64;
    terms
}

pub fn objective_terms(schedule: &Schedule, num_slots: usize, ladder: &QualityLadder) -> ObjectiveTerms {
    let mut terms = ObjectiveTerms::default();
    for us in &schedule.users {
        terms.add(user_objective_terms(us, num_slots, ladder));
    }
    terms
}

/// Weighted objective summed over users; lower is better.
pub fn objective_value(
    schedule: &Schedule,
    num_slots: usize,
    ladder: &QualityLadder,
    weights: &ObjectiveWeights,
) -> f64 {
    objective_terms(schedule, num_slots, ladder).weighted(weights)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Segments scheduled in a slot exceed the user's capacity by `excess_mb`.
    CapacityOverrun {
        user: usize,
        slot: usize,
        used_mb: f64,
        capacity_mb: f64,
        excess_mb: f64,
    },
    SlotOutOfRange {
        user: usize,
        segment: usize,
        slot: usize,
    },
    QualityOutOfRange {
        user: usize,
        segment: usize,
        quality: usize,
    },
    /// The schedule does not have one entry per user and segment.
    Shape {
        detail: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CapacityOverrun {
                user,
                slot,
                used_mb,
                capacity_mb,
                excess_mb,
            } => write!(
                f,
                "user {user} slot {slot}: {used_mb:.6} MB scheduled, capacity {capacity_mb:.6} MB (over by {excess_mb:.6} MB)"
            ),
            Violation::SlotOutOfRange {
                user,
                segment,
                slot,
            } => write!(f, "user {user} segment {segment}: slot {slot} is outside the horizon"),
            Violation::QualityOutOfRange {
                user,
                segment,
                quality,
            } => write!(f, "user {user} segment {segment}: quality index {quality} is not on the ladder"),
            Violation::Shape { detail } => write!(f, "{detail}"),
        }
    }
}

/// Lists every constraint the schedule breaks. An empty list means valid.
/// Unplaced segments are not violations; they show up as lateness.
pub fn validate_schedule(schedule: &Schedule, scenario: &Scenario, ladder: &QualityLadder) -> Vec<Violation> {
    if let Err(e) = schedule.check_shape(scenario) {
        return vec![Violation::Shape { detail: e.to_string() }];
    }
    let num_slots = scenario.num_slots();
    let mut violations = Vec::new();
    for (u, us) in schedule.users.iter().enumerate() {
        for (s, p) in us.placements.iter().enumerate() {
            let Some(p) = p else { continue };
            if p.slot >= num_slots {
                violations.push(Violation::SlotOutOfRange {
                    user: u,
                    segment: s,
                    slot: p.slot,
                });
            }
            if p.quality >= ladder.len() {
                violations.push(Violation::QualityOutOfRange {
                    user: u,
                    segment: s,
                    quality: p.quality,
                });
            }
        }
        let capacity = scenario.capacity(u);
        for (t, used) in us.slot_usage(ladder, num_slots).into_iter().enumerate() {
            if !fits(used, capacity[t]) {
                violations.push(Violation::CapacityOverrun {
                    user: u,
                    slot: t,
                    used_mb: used,
                    capacity_mb: capacity[t],
                    excess_mb: used - capacity[t],
                });
            }
        }
    }
    violations
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserMetrics {
    /// Mean size of the downloaded segments, 0 when nothing was downloaded.
    pub avg_quality_mb: f64,
    pub lateness_slots: usize,
    pub lateness_seconds: f64,
    pub avg_buffer_segments: f64,
    pub delivered_segments: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// Mean size over all downloaded segments of all users.
    pub avg_quality_mb: f64,
    /// Per-user total lateness, averaged over users, in seconds.
    pub avg_lateness_seconds: f64,
    /// Mean lateness per segment in seconds (diagnostic).
    pub avg_segment_lateness_seconds: f64,
    /// Mean end-of-slot buffer fill over all users and slots.
    pub avg_buffer_segments: f64,
    pub objective_value: f64,
    pub per_user: Vec<UserMetrics>,
}

pub fn compute_metrics(
    schedule: &Schedule,
    scenario: &Scenario,
    ladder: &QualityLadder,
    weights: &ObjectiveWeights,
) -> MetricsReport {
    let num_slots = scenario.num_slots();
    let slot_seconds = scenario.slot_seconds();
    let mut per_user = Vec::with_capacity(schedule.users.len());
    let mut total = ObjectiveTerms::default();
    let mut delivered_total = 0;
    for us in &schedule.users {
        let terms = user_objective_terms(us, num_slots, ladder);
        let delivered = us.placements.iter().flatten().count();
        let lateness_slots = terms.lateness_slots as usize;
        per_user.push(UserMetrics {
            avg_quality_mb: if delivered == 0 {
                0.0
            } else {
                terms.quality_mb / delivered as f64
            },
            lateness_slots,
            lateness_seconds: lateness_slots as f64 * slot_seconds,
            avg_buffer_segments: terms.buffer_segments / num_slots as f64,
            delivered_segments: delivered,
        });
        delivered_total += delivered;
        total.add(terms);
    }
    let users = schedule.users.len().max(1) as f64;
    let segments = (schedule.users.len() * scenario.num_segments()).max(1) as f64;
    MetricsReport {
        avg_quality_mb: if delivered_total == 0 {
            0.0
        } else {
            total.quality_mb / delivered_total as f64
        },
        avg_lateness_seconds: total.lateness_slots / users * slot_seconds,
        avg_segment_lateness_seconds: total.lateness_slots / segments * slot_seconds,
        avg_buffer_segments: total.buffer_segments / (users * num_slots as f64),
        objective_value: total.weighted(weights),
        per_user,
    }
}
