use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{confidence_interval, CellMetrics, CellStatus, ResultRow};
use crate::model::QualityLadder;
use crate::schedulers::SchedulerKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Quality,
    Lateness,
    Buffering,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Quality, Metric::Lateness, Metric::Buffering];

    pub fn file_name(&self) -> &'static str {
        match self {
            Metric::Quality => "quality.csv",
            Metric::Lateness => "lateness.csv",
            Metric::Buffering => "buffering.csv",
        }
    }

    pub fn of(&self, m: &CellMetrics) -> f64 {
        match self {
            Metric::Quality => m.avg_quality_mb,
            Metric::Lateness => m.avg_lateness_seconds,
            Metric::Buffering => m.avg_buffer_segments,
        }
    }
}

pub const PLOT_HEADER: &str = "removed_bs,scheduler,mean,ci_halfwidth";

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub quality: String,
    pub lateness: String,
    pub buffering: String,
    /// Human-readable remarks about excluded or omitted points.
    pub notes: Vec<String>,
}

impl PlotData {
    pub fn get(&self, metric: Metric) -> &str {
        match metric {
            Metric::Quality => &self.quality,
            Metric::Lateness => &self.lateness,
            Metric::Buffering => &self.buffering,
        }
    }
}

/// Aggregates result rows into one CSV per metric, sorted by scheduler and
/// removal count. Only `ok` rows enter the mean. A point with no `ok` row is
/// left out and reported in `notes`; a point with a single row has an empty
/// half-width. The quality file also carries one constant
/// `reference_<label>` series per ladder level.
pub fn emit_plot_data(rows: &[ResultRow], ladder: &QualityLadder, level: f64) -> PlotData {
    let mut points: BTreeMap<(SchedulerKind, usize), (Vec<CellMetrics>, usize, usize)> = BTreeMap::new();
    for r in rows {
        let entry = points.entry((r.scheduler, r.removed)).or_default();
        match (r.status, r.metrics) {
            (CellStatus::Ok, Some(m)) => entry.0.push(m),
            (CellStatus::Infeasible, _) => entry.1 += 1,
            _ => entry.2 += 1,
        }
    }
    let mut removal_counts: Vec<usize> = rows.iter().map(|r| r.removed).collect();
    removal_counts.sort_unstable();
    removal_counts.dedup();

    let mut notes = Vec::new();
    let mut files: Vec<String> = Metric::ALL.iter().map(|_| format!("{PLOT_HEADER}\n")).collect();
    for (&(kind, removed), (samples, infeasible, over_budget)) in &points {
        if samples.is_empty() {
            notes.push(format!(
                "{kind} at removed_bs={removed}: no usable runs ({infeasible} infeasible, {over_budget} over budget); point omitted"
            ));
            continue;
        }
        if infeasible + over_budget > 0 {
            notes.push(format!(
                "{kind} at removed_bs={removed}: {infeasible} infeasible and {over_budget} over-budget runs excluded from the mean"
            ));
        }
        for (metric, out) in Metric::ALL.iter().zip(files.iter_mut()) {
            let values: Vec<f64> = samples.iter().map(|m| metric.of(m)).collect();
            let (mean, half) = match confidence_interval(&values, level) {
                Ok((m, h)) => (m, format!("{h:.6}")),
                Err(_) => (values[0], String::new()),
            };
            let _ = writeln!(out, "{removed},{kind},{mean:.6},{half}");
        }
    }
    for l in ladder.levels() {
        for &removed in &removal_counts {
            let _ = writeln!(files[0], "{removed},reference_{},{:.6},{:.6}", l.label, l.size_mb, 0.0);
        }
    }
    let mut it = files.into_iter();
    PlotData {
        quality: it.next().unwrap_or_default(),
        lateness: it.next().unwrap_or_default(),
        buffering: it.next().unwrap_or_default(),
        notes,
    }
}
