//! Offline schedule generators. Every scheduler plans each user separately
//! against that user's full row of anticipated capacities.

mod exact;
mod fill;
mod greedy;
pub mod oracle;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

pub use exact::{exact_optimize, exact_optimize_user, ExactError};
pub use fill::fill;
pub use greedy::{buffer_first, quality_first};

use crate::model::{fits, ObjectiveWeights, QualityLadder, Scenario, Schedule, CAPACITY_TOLERANCE_MB};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreedyConfig {
    max_buffer_segments: usize,
}

impl GreedyConfig {
    pub fn new(max_buffer_segments: usize) -> Option<Self> {
        (max_buffer_segments >= 1).then_some(GreedyConfig { max_buffer_segments })
    }

    pub fn max_buffer_segments(&self) -> usize {
        self.max_buffer_segments
    }
}

impl Default for GreedyConfig {
    /// Three segments, the VLC default.
    fn default() -> Self {
        GreedyConfig { max_buffer_segments: 3 }
    }
}

/// Limits for the exact solver. `None` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolverBudget {
    pub max_nodes: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl SolverBudget {
    pub fn unlimited() -> Self {
        SolverBudget::default()
    }

    pub fn new(max_nodes: Option<u64>, time_limit: Option<Duration>) -> Option<Self> {
        if max_nodes == Some(0) || time_limit == Some(Duration::ZERO) {
            return None;
        }
        Some(SolverBudget { max_nodes, time_limit })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchedulerKind {
    BufferFirst,
    QualityFirst,
    Fill,
    Exact,
}

impl SchedulerKind {
    pub const ALL: [SchedulerKind; 4] = [
        SchedulerKind::BufferFirst,
        SchedulerKind::QualityFirst,
        SchedulerKind::Fill,
        SchedulerKind::Exact,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SchedulerKind::BufferFirst => "bufferFirst",
            SchedulerKind::QualityFirst => "qualityFirst",
            SchedulerKind::Fill => "fill",
            SchedulerKind::Exact => "exact",
        }
    }
}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownScheduler(pub String);

impl fmt::Display for UnknownScheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown scheduler `{}` (expected bufferFirst, qualityFirst, fill or exact)",
            self.0
        )
    }
}

impl std::error::Error for UnknownScheduler {}

impl FromStr for SchedulerKind {
    type Err = UnknownScheduler;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .flat_map(char::to_lowercase)
            .collect();
        match key.as_str() {
            "bufferfirst" => Ok(SchedulerKind::BufferFirst),
            "qualityfirst" => Ok(SchedulerKind::QualityFirst),
            "fill" => Ok(SchedulerKind::Fill),
            "exact" | "miqcp" | "optimal" => Ok(SchedulerKind::Exact),
            _ => Err(UnknownScheduler(s.to_string())),
        }
    }
}

/// Everything a scheduler may need besides the instance.
#[derive(Debug, Clone, Copy, Default)]
pub struct SchedulerOptions {
    pub greedy: GreedyConfig,
    pub weights: ObjectiveWeights,
    pub budget: SolverBudget,
}

/// Runs `kind` on every user of `scenario`. Only the exact solver can fail.
pub fn run_scheduler(
    kind: SchedulerKind,
    scenario: &Scenario,
    ladder: &QualityLadder,
    options: &SchedulerOptions,
) -> Result<Schedule, ExactError> {
    match kind {
        SchedulerKind::BufferFirst => Ok(buffer_first(scenario, ladder, &options.greedy)),
        SchedulerKind::QualityFirst => Ok(quality_first(scenario, ladder, &options.greedy)),
        SchedulerKind::Fill => Ok(fill(scenario, ladder)),
        SchedulerKind::Exact => exact_optimize(scenario, ladder, &options.weights, &options.budget),
    }
}

/// Highest level whose segment fits into `capacity_mb`.
pub fn get_best_quality(ladder: &QualityLadder, capacity_mb: f64) -> Option<usize> {
    (0..ladder.len()).rev().find(|&q| fits(ladder.size(q), capacity_mb))
}

/// Whole segments of `quality_size_mb` that fit into `capacity_mb`.
pub fn get_segments_for_quality(quality_size_mb: f64, capacity_mb: f64) -> usize {
    debug_assert!(quality_size_mb > 0.0);
    if capacity_mb <= 0.0 {
        return 0;
    }
    ((capacity_mb + CAPACITY_TOLERANCE_MB) / quality_size_mb).floor() as usize
}

/// Highest level at which `n` segments can be packed into the slots
/// `capacities`, each segment wholly inside one slot.
pub fn get_best_quality_range(ladder: &QualityLadder, n: usize, capacities: &[f64]) -> Option<usize> {
    (0..ladder.len()).rev().find(|&q| {
        let size = ladder.size(q);
        capacities
            .iter()
            .map(|&c| get_segments_for_quality(size, c))
            .sum::<usize>()
            >= n
    })
}
