//! Exhaustive reference solver and random small instances for checking the
//! exact solver. Enumerates every `(slot, level)` for every segment, so it is
//! only usable for a handful of segments.

use rand::Rng;

use super::{exact_optimize_user, SolverBudget};
use crate::metrics::user_objective_terms;
use crate::model::{fits, ObjectiveWeights, Placement, QualityLadder, Scenario, UserSchedule};

/// Optimal objective and the first optimal schedule in enumeration order
/// (segments in index order, slots then levels ascending), or `None` when no
/// assignment respects every slot's capacity.
pub fn brute_force_user(
    capacity: &[f64],
    num_segments: usize,
    ladder: &QualityLadder,
    weights: &ObjectiveWeights,
) -> Option<(f64, UserSchedule)> {
    let mut search = Search {
        capacity,
        ladder,
        weights,
        used: vec![0.0; capacity.len()],
        current: UserSchedule::unplaced(num_segments),
        best: None,
    };
    search.descend(0);
    search.best
}

struct Search<'a> {
    capacity: &'a [f64],
    ladder: &'a QualityLadder,
    weights: &'a ObjectiveWeights,
    used: Vec<f64>,
    current: UserSchedule,
    best: Option<(f64, UserSchedule)>,
}

impl Search<'_> {
    fn descend(&mut self, segment: usize) {
        if segment == self.current.len() {
            let value = user_objective_terms(&self.current, self.capacity.len(), self.ladder).weighted(self.weights);
            let improves = match &self.best {
                None => true,
                Some((best, _)) => value < best - 1e-9 * (1.0 + best.abs()),
            };
            if improves {
                self.best = Some((value, self.current.clone()));
            }
            return;
        }
        for slot in 0..self.capacity.len() {
            for quality in 0..self.ladder.len() {
                let size = self.ladder.size(quality);
                if !fits(self.used[slot] + size, self.capacity[slot]) {
                    continue;
                }
                self.used[slot] += size;
                self.current.placements[segment] = Some(Placement { slot, quality });
                self.descend(segment + 1);
                self.used[slot] -= size;
            }
        }
        self.current.placements[segment] = None;
    }
}

/// Limits for [`random_instance`].
#[derive(Debug, Clone, Copy)]
pub struct InstanceShape {
    pub max_slots: usize,
    pub max_segments: usize,
    pub max_levels: usize,
}

impl Default for InstanceShape {
    fn default() -> Self {
        InstanceShape {
            max_slots: 5,
            max_segments: 5,
            max_levels: 3,
        }
    }
}

/// A random single-user instance. Sizes and capacities are multiples of
/// 0.25 MB so that exact fits and quality ties occur often; about a quarter
/// of the slots are outages.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, shape: InstanceShape) -> (Scenario, QualityLadder) {
    let slots = rng.random_range(1..=shape.max_slots);
    let segments = rng.random_range(1..=shape.max_segments.min(slots));
    let levels = rng.random_range(1..=shape.max_levels);
    let mut sizes: Vec<f64> = Vec::with_capacity(levels);
    while sizes.len() < levels {
        let s = rng.random_range(2..=20) as f64 * 0.25;
        if !sizes.contains(&s) {
            sizes.push(s);
        }
    }
    sizes.sort_by(f64::total_cmp);
    let bandwidths: Vec<u64> = (1..=levels as u64).map(|i| i * 500_000).collect();
    let ladder = QualityLadder::from_columns(&sizes, &bandwidths, None).expect("sorted distinct sizes");
    let capacity: Vec<f64> = (0..slots)
        .map(|_| {
            if rng.random_bool(0.25) {
                0.0
            } else {
                rng.random_range(0..=48) as f64 * 0.25
            }
        })
        .collect();
    let scenario = Scenario::new(vec![capacity], segments, 10.0).expect("valid dimensions");
    (scenario, ladder)
}

/// Outcome of comparing the exact solver with [`brute_force_user`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleReport {
    pub instances: usize,
    pub infeasible: usize,
    /// `(instance, exact objective, oracle objective)`; `NaN` marks a
    /// feasibility disagreement.
    pub mismatches: Vec<(usize, f64, f64)>,
}

/// Draws `instances` random instances and checks that the exact solver
/// reaches the exhaustive optimum on each.
pub fn check_against_brute_force<R: Rng + ?Sized>(
    rng: &mut R,
    shape: InstanceShape,
    instances: usize,
    weights: &ObjectiveWeights,
) -> OracleReport {
    let mut report = OracleReport {
        instances,
        ..OracleReport::default()
    };
    let budget = SolverBudget::unlimited();
    for i in 0..instances {
        let (sc, ladder) = random_instance(rng, shape);
        let cap = sc.capacity(0);
        let n = sc.num_segments();
        let oracle = brute_force_user(cap, n, &ladder, weights);
        let exact = exact_optimize_user(cap, n, &ladder, weights, &budget).ok().flatten();
        match (oracle, exact) {
            (None, None) => report.infeasible += 1,
            (Some((best, _)), Some(us)) => {
                let got = user_objective_terms(&us, cap.len(), &ladder).weighted(weights);
                if (got - best).abs() > 1e-9 * (1.0 + best.abs()) {
                    report.mismatches.push((i, got, best));
                }
            }
            (Some((best, _)), None) => report.mismatches.push((i, f64::NAN, best)),
            (None, Some(us)) => {
                let got = user_objective_terms(&us, cap.len(), &ladder).weighted(weights);
                report.mismatches.push((i, got, f64::NAN));
            }
        }
    }
    report
}
