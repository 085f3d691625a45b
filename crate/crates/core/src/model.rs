//! Domain values shared by every scheduler: the quality ladder, the per-user
//! capacity matrix, schedules and objective weights.
//!
//! Slots and segments are 0-based here. Slot `t` is also the playout slot of
//! segment `t`, so a segment downloaded in slot `d <= s` is on time.

use crate::error::ModelError;

/// Absolute slack (in MB) applied to every capacity comparison so that a slot
/// filled exactly to its capacity is accepted despite float rounding.
pub const CAPACITY_TOLERANCE_MB: f64 = 1e-9;

/// `true` when `used` megabytes fit into `capacity` megabytes.
#[inline]
pub fn fits(used: f64, capacity: f64) -> bool {
    used <= capacity + CAPACITY_TOLERANCE_MB
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityLevel {
    /// Segment size in megabytes.
    pub size_mb: f64,
    /// Advertised variant bandwidth in bit/s.
    pub bandwidth_bps: u64,
    pub label: String,
}

/// Quality levels ordered from lowest to highest. Index 0 is the lowest level.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityLadder {
    levels: Vec<QualityLevel>,
}

impl QualityLadder {
    pub fn new(levels: Vec<QualityLevel>) -> Result<Self, ModelError> {
        if levels.is_empty() {
            return Err(ModelError::EmptyLadder);
        }
        for (i, level) in levels.iter().enumerate() {
            if !(level.size_mb.is_finite() && level.size_mb > 0.0) {
                return Err(ModelError::LadderSizeOrder { index: i });
            }
            if level.bandwidth_bps == 0 {
                return Err(ModelError::LadderBandwidthOrder { index: i });
            }
            if i > 0 {
                let prev = &levels[i - 1];
                if level.size_mb <= prev.size_mb {
                    return Err(ModelError::LadderSizeOrder { index: i });
                }
                if level.bandwidth_bps <= prev.bandwidth_bps {
                    return Err(ModelError::LadderBandwidthOrder { index: i });
                }
            }
        }
        Ok(QualityLadder { levels })
    }

    /// Builds a ladder from parallel columns. Missing labels default to `q<i>`.
    pub fn from_columns(
        sizes_mb: &[f64],
        bandwidths_bps: &[u64],
        labels: Option<&[String]>,
    ) -> Result<Self, ModelError> {
        let label_count = labels.map_or(sizes_mb.len(), <[String]>::len);
        if sizes_mb.len() != bandwidths_bps.len() || label_count != sizes_mb.len() {
            return Err(ModelError::LadderShape {
                sizes: sizes_mb.len(),
                bandwidths: bandwidths_bps.len(),
                labels: label_count,
            });
        }
        let levels = sizes_mb
            .iter()
            .zip(bandwidths_bps)
            .enumerate()
            .map(|(i, (&size_mb, &bandwidth_bps))| QualityLevel {
                size_mb,
                bandwidth_bps,
                label: labels.map_or_else(|| format!("q{i}"), |l| l[i].clone()),
            })
            .collect();
        QualityLadder::new(levels)
    }

    /// Ladder used by the simulation study: low, medium and high segments of
    /// 1.77, 3.69 and 4.51 MB.
    pub fn reference() -> Self {
        QualityLadder::from_columns(
            &[1.77, 3.69, 4.51],
            &[1_000_000, 1_500_000, 3_000_000],
            Some(&["low".to_string(), "med".to_string(), "high".to_string()]),
        )
        .expect("reference ladder is valid")
    }

    pub fn levels(&self) -> &[QualityLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn size(&self, quality: usize) -> f64 {
        self.levels[quality].size_mb
    }

    pub fn lowest_size(&self) -> f64 {
        self.levels[0].size_mb
    }

    pub fn highest(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn sizes(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels.iter().map(|l| l.size_mb)
    }

    /// Same ladder with every size multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, ModelError> {
        QualityLadder::new(
            self.levels
                .iter()
                .map(|l| QualityLevel {
                    size_mb: l.size_mb * factor,
                    ..l.clone()
                })
                .collect(),
        )
    }
}

/// Anticipated per-user download capacity in megabytes for every slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    num_segments: usize,
    slot_seconds: f64,
    capacity: Vec<Vec<f64>>,
}

impl Scenario {
    /// `capacity[u][t]` is the number of megabytes user `u` can fetch in slot `t`.
    pub fn new(capacity: Vec<Vec<f64>>, num_segments: usize, slot_seconds: f64) -> Result<Self, ModelError> {
        if capacity.is_empty() {
            return Err(ModelError::Scenario("at least one user is required".into()));
        }
        let num_slots = capacity[0].len();
        if num_slots == 0 {
            return Err(ModelError::Scenario("at least one slot is required".into()));
        }
        if num_segments == 0 || num_segments > num_slots {
            return Err(ModelError::Scenario(format!(
                "segment count {num_segments} must be in 1..={num_slots}"
            )));
        }
        if !(slot_seconds.is_finite() && slot_seconds > 0.0) {
            return Err(ModelError::Scenario("slot length must be positive".into()));
        }
        for (u, row) in capacity.iter().enumerate() {
            if row.len() != num_slots {
                return Err(ModelError::Scenario(format!(
                    "user {u} has {} slots, expected {num_slots}",
                    row.len()
                )));
            }
            if let Some(t) = row.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
                return Err(ModelError::Scenario(format!(
                    "capacity of user {u} in slot {t} must be finite and nonnegative"
                )));
            }
        }
        Ok(Scenario {
            num_segments,
            slot_seconds,
            capacity,
        })
    }

    /// One user, one segment per slot, 10 second slots.
    pub fn single_user(capacity: Vec<f64>) -> Result<Self, ModelError> {
        let n = capacity.len();
        Scenario::new(vec![capacity], n, 10.0)
    }

    pub fn num_users(&self) -> usize {
        self.capacity.len()
    }

    pub fn num_slots(&self) -> usize {
        self.capacity[0].len()
    }

    pub fn num_segments(&self) -> usize {
        self.num_segments
    }

    pub fn slot_seconds(&self) -> f64 {
        self.slot_seconds
    }

    pub fn capacity(&self, user: usize) -> &[f64] {
        &self.capacity[user]
    }

    pub fn capacity_matrix(&self) -> &[Vec<f64>] {
        &self.capacity
    }

    /// Same scenario with every capacity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, ModelError> {
        Scenario::new(
            self.capacity
                .iter()
                .map(|row| row.iter().map(|c| c * factor).collect())
                .collect(),
            self.num_segments,
            self.slot_seconds,
        )
    }
}

/// Where and in which quality a segment is downloaded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Placement {
    pub slot: usize,
    pub quality: usize,
}

/// Download plan of one user. `None` marks a segment that no slot up to the
/// horizon could carry (a stalled run); it is charged lateness up to the
/// horizon and contributes no quality.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UserSchedule {
    pub placements: Vec<Option<Placement>>,
}

impl UserSchedule {
    pub fn new(placements: Vec<Option<Placement>>) -> Self {
        UserSchedule { placements }
    }

    /// Builds a fully placed schedule from parallel slot and quality vectors.
    pub fn from_slots(slots: &[usize], qualities: &[usize]) -> Self {
        assert_eq!(slots.len(), qualities.len());
        UserSchedule {
            placements: slots
                .iter()
                .zip(qualities)
                .map(|(&slot, &quality)| Some(Placement { slot, quality }))
                .collect(),
        }
    }

    pub fn unplaced(num_segments: usize) -> Self {
        UserSchedule {
            placements: vec![None; num_segments],
        }
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.placements.iter().all(Option::is_some)
    }

    pub fn slot(&self, segment: usize) -> Option<usize> {
        self.placements[segment].map(|p| p.slot)
    }

    pub fn quality(&self, segment: usize) -> Option<usize> {
        self.placements[segment].map(|p| p.quality)
    }

    /// Megabytes scheduled in every slot, for a horizon of `num_slots`.
    /// Out-of-range slots are ignored.
    pub fn slot_usage(&self, ladder: &QualityLadder, num_slots: usize) -> Vec<f64> {
        let mut used = vec![0.0; num_slots];
        for p in self.placements.iter().flatten() {
            if p.slot < num_slots && p.quality < ladder.len() {
                used[p.slot] += ladder.size(p.quality);
            }
        }
        used
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub users: Vec<UserSchedule>,
}

impl Schedule {
    pub fn new(users: Vec<UserSchedule>) -> Self {
        Schedule { users }
    }

    pub fn user(&self, user: usize) -> &UserSchedule {
        &self.users[user]
    }

    pub fn is_complete(&self) -> bool {
        self.users.iter().all(UserSchedule::is_complete)
    }

    /// Checks that the schedule has one entry per user and per segment.
    pub fn check_shape(&self, scenario: &Scenario) -> Result<(), ModelError> {
        if self.users.len() != scenario.num_users() {
            return Err(ModelError::ScheduleShape(format!(
                "{} users scheduled, scenario has {}",
                self.users.len(),
                scenario.num_users()
            )));
        }
        for (u, us) in self.users.iter().enumerate() {
            if us.len() != scenario.num_segments() {
                return Err(ModelError::ScheduleShape(format!(
                    "user {u} has {} segments, scenario has {}",
                    us.len(),
                    scenario.num_segments()
                )));
            }
        }
        Ok(())
    }
}

/// Weights of the lateness, quality and buffer terms of the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveWeights {
    lateness: f64,
    quality: f64,
    buffer: f64,
}

impl ObjectiveWeights {
    pub fn new(lateness: f64, quality: f64, buffer: f64) -> Result<Self, ModelError> {
        let ok = |w: f64| w.is_finite() && w >= 0.0;
        if !(ok(lateness) && ok(quality) && ok(buffer)) || lateness + quality + buffer == 0.0 {
            return Err(ModelError::DegenerateWeights);
        }
        Ok(ObjectiveWeights {
            lateness,
            quality,
            buffer,
        })
    }

    pub fn lateness(&self) -> f64 {
        self.lateness
    }

    pub fn quality(&self) -> f64 {
        self.quality
    }

    pub fn buffer(&self) -> f64 {
        self.buffer
    }
}

impl Default for ObjectiveWeights {
    /// Lateness before quality before buffering: 440 / 10 / 1.
    fn default() -> Self {
        ObjectiveWeights {
            lateness: 440.0,
            quality: 10.0,
            buffer: 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_rejects_unordered_levels() {
        assert_eq!(
            QualityLadder::from_columns(&[2.0, 1.0], &[1, 2], None),
            Err(ModelError::LadderSizeOrder { index: 1 })
        );
        assert_eq!(
            QualityLadder::from_columns(&[1.0, 2.0], &[5, 5], None),
            Err(ModelError::LadderBandwidthOrder { index: 1 })
        );
        assert_eq!(
            QualityLadder::from_columns(&[], &[], None),
            Err(ModelError::EmptyLadder)
        );
        assert!(QualityLadder::from_columns(&[0.0], &[1], None).is_err());
    }

    #[test]
    fn reference_ladder() {
        let ladder = QualityLadder::reference();
        assert_eq!(ladder.len(), 3);
        assert_eq!(ladder.size(2), 4.51);
        assert_eq!(ladder.levels()[0].label, "low");
    }

    #[test]
    fn scenario_validation() {
        assert!(Scenario::new(vec![vec![1.0, 2.0]], 3, 10.0).is_err());
        assert!(Scenario::new(vec![vec![1.0, 2.0], vec![1.0]], 1, 10.0).is_err());
        assert!(Scenario::new(vec![vec![1.0, f64::NAN]], 1, 10.0).is_err());
        assert!(Scenario::new(vec![vec![1.0, -1.0]], 1, 10.0).is_err());
        assert!(Scenario::new(vec![vec![1.0]], 1, 0.0).is_err());
        let s = Scenario::new(vec![vec![1.0, 2.0], vec![0.0, 0.0]], 2, 10.0).unwrap();
        assert_eq!((s.num_users(), s.num_slots(), s.num_segments()), (2, 2, 2));
    }

    #[test]
    fn zero_weights_rejected() {
        assert_eq!(ObjectiveWeights::new(0.0, 0.0, 0.0), Err(ModelError::DegenerateWeights));
        assert!(ObjectiveWeights::new(-1.0, 1.0, 1.0).is_err());
        assert!(ObjectiveWeights::new(0.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn exact_fill_fits() {
        assert!(fits(4.51, 4.51));
        assert!(fits(4.51 + 4.51, 9.02));
        assert!(!fits(9.02, 4.51));
    }
}
