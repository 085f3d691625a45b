//! Simulation sweep over removal counts and seeds, with per-point confidence
//! intervals and plot-ready CSV output.

mod plot;
mod stats;

use std::fmt::Write as _;
use std::time::Duration;

use thiserror::Error;

pub use plot::{emit_plot_data, Metric, PlotData};
pub use stats::{confidence_interval, IntervalError};

use crate::channel::{build_scenario, ChannelError, RadioParams, ScenarioConfig};
use crate::error::FormatError;
use crate::kv::KvConfig;
use crate::metrics::{compute_metrics, validate_schedule, Violation};
use crate::model::{ObjectiveWeights, QualityLadder, Schedule};
use crate::schedulers::{run_scheduler, ExactError, GreedyConfig, SchedulerKind, SchedulerOptions, SolverBudget};

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Template for every cell; `num_removed` and `rng_seed` are overwritten.
    pub scenario: ScenarioConfig,
    pub radio: RadioParams,
    pub removal_counts: Vec<usize>,
    pub runs_per_point: usize,
    pub schedulers: Vec<SchedulerKind>,
    pub weights: ObjectiveWeights,
    pub ladder: QualityLadder,
    pub greedy: GreedyConfig,
    pub budget: SolverBudget,
    pub base_seed: u64,
    pub confidence_level: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: ScenarioConfig::default(),
            radio: RadioParams::default(),
            removal_counts: (0..=20).step_by(2).collect(),
            runs_per_point: 30,
            schedulers: SchedulerKind::ALL.to_vec(),
            weights: ObjectiveWeights::default(),
            ladder: QualityLadder::reference(),
            greedy: GreedyConfig::default(),
            budget: SolverBudget::new(Some(50_000_000), Some(Duration::from_secs(60))).expect("positive budget"),
            base_seed: 2016,
            confidence_level: 0.95,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("{scheduler} produced an invalid schedule (removed {removed}, run {run}): {violation}")]
    InvalidSchedule {
        scheduler: SchedulerKind,
        removed: usize,
        run: usize,
        violation: Violation,
    },
}

impl ExperimentConfig {
    /// Parses `key=value` text on top of the defaults. Besides the channel
    /// keys it understands `removalCounts`, `runsPerPoint`, `schedulers`,
    /// `weights` (lateness,quality,buffer), `ladderSizesMb`,
    /// `ladderBandwidthsBps`, `ladderLabels`, `maxBufferSegments`,
    /// `exactMaxNodes`, `exactTimeLimitSeconds`, `baseSeed` and
    /// `confidenceLevel`.
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let mut kv = KvConfig::parse(text)?;
        let mut c = ExperimentConfig::default();
        for key in ["numRemoved", "rngSeed"] {
            if kv.take::<String>(key)?.is_some() {
                return Err(ExperimentError::Config(format!(
                    "`{key}` is set per cell; use removalCounts and baseSeed"
                )));
            }
        }
        c.scenario.apply_kv(&mut kv)?;
        c.radio.apply_kv(&mut kv)?;
        if let Some(v) = kv.take_list("removalCounts")? {
            c.removal_counts = v;
        }
        kv.set("runsPerPoint", &mut c.runs_per_point)?;
        if let Some(v) = kv.take_list::<SchedulerKind>("schedulers")? {
            c.schedulers = v;
        }
        if let Some(v) = kv.take_list::<f64>("weights")? {
            let [l, q, b] = v[..] else {
                return Err(ExperimentError::Config("weights needs three values".into()));
            };
            c.weights = ObjectiveWeights::new(l, q, b).map_err(FormatError::from)?;
        }
        let sizes = kv.take_list::<f64>("ladderSizesMb")?;
        let bandwidths = kv.take_list::<u64>("ladderBandwidthsBps")?;
        let labels = kv.take_list::<String>("ladderLabels")?;
        if sizes.is_some() || bandwidths.is_some() || labels.is_some() {
            let (Some(sizes), Some(bandwidths)) = (sizes, bandwidths) else {
                return Err(ExperimentError::Config(
                    "ladderSizesMb and ladderBandwidthsBps must be given together".into(),
                ));
            };
            c.ladder =
                QualityLadder::from_columns(&sizes, &bandwidths, labels.as_deref()).map_err(FormatError::from)?;
        }
        if let Some(n) = kv.take::<usize>("maxBufferSegments")? {
            c.greedy = GreedyConfig::new(n)
                .ok_or_else(|| ExperimentError::Config("maxBufferSegments must be at least 1".into()))?;
        }
        let nodes = kv.take::<u64>("exactMaxNodes")?;
        let seconds = kv.take::<f64>("exactTimeLimitSeconds")?;
        if nodes.is_some() || seconds.is_some() {
            let limit = seconds
                .map(|s| Duration::try_from_secs_f64(s).map_err(|e| ExperimentError::Config(e.to_string())))
                .transpose()?;
            c.budget = SolverBudget::new(nodes.or(c.budget.max_nodes), limit.or(c.budget.time_limit))
                .ok_or_else(|| ExperimentError::Config("solver budget must be positive".into()))?;
        }
        kv.set("baseSeed", &mut c.base_seed)?;
        kv.set("confidenceLevel", &mut c.confidence_level)?;
        kv.finish()?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let fail = |m: String| Err(ExperimentError::Config(m));
        if self.runs_per_point == 0 {
            return fail("runsPerPoint must be at least 1".into());
        }
        if self.removal_counts.is_empty() {
            return fail("removalCounts is empty".into());
        }
        if self.schedulers.is_empty() {
            return fail("schedulers is empty".into());
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return fail("confidenceLevel must lie in (0, 1)".into());
        }
        for &r in &self.removal_counts {
            let mut s = self.scenario.clone();
            s.num_removed = r;
            s.validate()?;
        }
        self.radio.validate()?;
        Ok(())
    }
}

/// Seed of cell `(removed, run)`: `base_seed` xor a splitmix64 hash of the
/// pair, so adding removal counts or runs leaves existing cells unchanged.
pub fn cell_seed(base_seed: u64, removed: usize, run: usize) -> u64 {
    base_seed ^ splitmix64(splitmix64(removed as u64) ^ run as u64)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    /// The exact solver proved that some user cannot receive every segment.
    Infeasible,
    /// The exact solver ran out of budget.
    BudgetExceeded,
}

impl CellStatus {
    pub fn name(&self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Infeasible => "infeasible",
            CellStatus::BudgetExceeded => "budget_exceeded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMetrics {
    pub avg_quality_mb: f64,
    pub avg_lateness_seconds: f64,
    pub avg_buffer_segments: f64,
    pub objective_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub removed: usize,
    pub run: usize,
    pub seed: u64,
    pub scheduler: SchedulerKind,
    pub status: CellStatus,
    /// Present for `Ok` rows only.
    pub metrics: Option<CellMetrics>,
}

/// Runs every (removal count, run, scheduler) cell. Rows are ordered by
/// removal count, run and scheduler. Every schedule is validated against its
/// scenario before metrics are taken.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>, ExperimentError> {
    config.validate()?;
    let mut removal_counts = config.removal_counts.clone();
    removal_counts.sort_unstable();
    removal_counts.dedup();
    let mut schedulers = config.schedulers.clone();
    schedulers.sort_unstable();
    schedulers.dedup();

    let cells: Vec<(usize, usize)> = removal_counts
        .iter()
        .flat_map(|&r| (0..config.runs_per_point).map(move |run| (r, run)))
        .collect();
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(cells.len())
        .max(1);
    let chunk = cells.len().div_ceil(workers);
    let results: Vec<Result<Vec<ResultRow>, ExperimentError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .chunks(chunk)
            .map(|part| {
                let schedulers = &schedulers;
                scope.spawn(move || {
                    let mut rows = Vec::new();
                    for &(removed, run) in part {
                        rows.extend(run_cell(config, schedulers, removed, run)?);
                    }
                    Ok(rows)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut rows = Vec::with_capacity(cells.len() * schedulers.len());
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

fn run_cell(
    config: &ExperimentConfig,
    schedulers: &[SchedulerKind],
    removed: usize,
    run: usize,
) -> Result<Vec<ResultRow>, ExperimentError> {
    let seed = cell_seed(config.base_seed, removed, run);
    let mut scenario_config = config.scenario.clone();
    scenario_config.num_removed = removed;
    scenario_config.rng_seed = seed;
    let scenario = build_scenario(&scenario_config, &config.radio)?.scenario;
    let options = SchedulerOptions {
        greedy: config.greedy,
        weights: config.weights,
        budget: config.budget,
    };
    let mut rows = Vec::with_capacity(schedulers.len());
    for &kind in schedulers {
        let (status, schedule) = match run_scheduler(kind, &scenario, &config.ladder, &options) {
            Ok(s) => (CellStatus::Ok, Some(s)),
            Err(ExactError::Infeasible { .. }) => (CellStatus::Infeasible, None),
            Err(ExactError::BudgetExceeded { .. }) => (CellStatus::BudgetExceeded, None),
        };
        let metrics = schedule
            .map(|s: Schedule| {
                if let Some(violation) = validate_schedule(&s, &scenario, &config.ladder).into_iter().next() {
                    return Err(ExperimentError::InvalidSchedule {
                        scheduler: kind,
                        removed,
                        run,
                        violation,
                    });
                }
                let m = compute_metrics(&s, &scenario, &config.ladder, &config.weights);
                Ok(CellMetrics {
                    avg_quality_mb: m.avg_quality_mb,
                    avg_lateness_seconds: m.avg_lateness_seconds,
                    avg_buffer_segments: m.avg_buffer_segments,
                    objective_value: m.objective_value,
                })
            })
            .transpose()?;
        rows.push(ResultRow {
            removed,
            run,
            seed,
            scheduler: kind,
            status,
            metrics,
        });
    }
    Ok(rows)
}

pub const RESULTS_HEADER: &str =
    "removed_bs,run,seed,scheduler,status,avg_quality_mb,avg_lateness_s,avg_buffer_segments,objective";

/// One line per row; metric fields are empty for rows without metrics.
pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            r.removed,
            r.run,
            r.seed,
            r.scheduler,
            r.status.name()
        );
        match r.metrics {
            Some(m) => {
                let _ = writeln!(
                    out,
                    ",{:.6},{:.6},{:.6},{:.6}",
                    m.avg_quality_mb, m.avg_lateness_seconds, m.avg_buffer_segments, m.objective_value
                );
            }
            None => out.push_str(",,,,\n"),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(cell_seed(7, 2, 3), cell_seed(7, 2, 3));
        assert_ne!(cell_seed(7, 2, 3), cell_seed(7, 3, 2));
        assert_ne!(cell_seed(7, 0, 0), cell_seed(8, 0, 0));
        // Reference value of splitmix64 for input 0.
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn config_keys() {
        let c = ExperimentConfig::parse(
            "removalCounts=0,4\nrunsPerPoint=2\nschedulers=fill,exact\nweights=1,2,3\nnumUsers=2\nbaseSeed=9\nexactTimeLimitSeconds=5\n",
        )
        .unwrap();
        assert_eq!(c.removal_counts, [0, 4]);
        assert_eq!(c.schedulers, [SchedulerKind::Fill, SchedulerKind::Exact]);
        assert_eq!(c.weights.buffer(), 3.0);
        assert_eq!(c.scenario.num_users, 2);
        assert_eq!(c.budget.time_limit, Some(Duration::from_secs(5)));
        let d = ExperimentConfig::default();
        assert_eq!(d.removal_counts, [0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20]);
        assert_eq!(d.runs_per_point, 30);
        for bad in [
            "runsPerPoint=0",
            "numRemoved=3",
            "weights=1,2",
            "schedulers=greedy",
            "removalCounts=41",
            "ladderSizesMb=1,2",
            "bogus=1",
        ] {
            assert!(ExperimentConfig::parse(bad).is_err(), "{bad}");
        }
    }

    fn small_config() -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.scenario.num_base_stations = 12;
        c.scenario.num_users = 2;
        c.removal_counts = vec![0, 4];
        c.runs_per_point = 2;
        c
    }

    #[test]
    fn rows_are_complete_sorted_and_deterministic() {
        let c = small_config();
        let rows = run_experiment(&c).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 4);
        let keys: Vec<_> = rows.iter().map(|r| (r.removed, r.run, r.scheduler)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(results_csv(&rows), results_csv(&run_experiment(&c).unwrap()));
    }

    #[test]
    fn fill_alone_on_full_coverage() {
        let c = ExperimentConfig {
            removal_counts: vec![0],
            runs_per_point: 1,
            schedulers: vec![SchedulerKind::Fill],
            ..ExperimentConfig::default()
        };
        let rows = run_experiment(&c).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].metrics.unwrap().avg_lateness_seconds, 0.0);
    }
}
