//! Exact minimiser of the weighted lateness / quality / buffer objective.
//!
//! Two facts make the search small. Within a slot only the number of
//! downloads and the sum of their sizes matter, so each (slot, count) pair
//! has one best quality mix, found by enumerating multisets of levels. And
//! some optimum downloads segments in index order (swapping two out-of-order
//! segments never increases lateness and leaves quality and buffer alone),
//! so a schedule is a path through states "k segments downloaded before
//! slot t". Dynamic programming over those states gives the optimum.
//!
//! Ties are broken towards the lexicographically smallest sequence
//! `(d[0], p[0], d[1], p[1], ...)`.

use std::cmp::Ordering;
use std::time::Instant;

use thiserror::Error;

use super::{fill, SolverBudget};
use crate::model::{fits, ObjectiveWeights, Placement, QualityLadder, Scenario, Schedule, UserSchedule};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    /// No assignment of slots and qualities downloads every segment of this
    /// user before the horizon.
    #[error("no feasible schedule for user {user}")]
    Infeasible { user: usize },
    /// The budget ran out before optimality was proven. The incumbent, when
    /// present, is a complete capacity-respecting schedule.
    #[error("solver budget exhausted")]
    BudgetExceeded { incumbent: Option<Box<Schedule>> },
}

/// Relative tolerance used when comparing objective values.
const COST_EPS: f64 = 1e-9;

fn same_cost(a: f64, b: f64) -> bool {
    (a - b).abs() <= COST_EPS * (1.0 + a.abs().max(b.abs()))
}

pub fn exact_optimize(
    scenario: &Scenario,
    ladder: &QualityLadder,
    weights: &ObjectiveWeights,
    budget: &SolverBudget,
) -> Result<Schedule, ExactError> {
    let mut meter = Meter::new(budget);
    let mut users = Vec::with_capacity(scenario.num_users());
    for u in 0..scenario.num_users() {
        match solve_user(
            scenario.capacity(u),
            scenario.num_segments(),
            ladder,
            weights,
            &mut meter,
        ) {
            Ok(Some(us)) => users.push(us),
            Ok(None) => return Err(ExactError::Infeasible { user: u }),
            Err(OutOfBudget) => {
                let incumbent = fill(scenario, ladder);
                return Err(ExactError::BudgetExceeded {
                    incumbent: incumbent.is_complete().then(|| Box::new(incumbent)),
                });
            }
        }
    }
    Ok(Schedule::new(users))
}

/// Solves a single user's row. `Ok(None)` means infeasible.
pub fn exact_optimize_user(
    capacity: &[f64],
    num_segments: usize,
    ladder: &QualityLadder,
    weights: &ObjectiveWeights,
    budget: &SolverBudget,
) -> Result<Option<UserSchedule>, ExactError> {
    solve_user(capacity, num_segments, ladder, weights, &mut Meter::new(budget))
        .map_err(|_| ExactError::BudgetExceeded { incumbent: None })
}

struct OutOfBudget;

struct Meter {
    nodes: u64,
    max_nodes: Option<u64>,
    deadline: Option<Instant>,
}

impl Meter {
    fn new(budget: &SolverBudget) -> Self {
        Meter {
            nodes: 0,
            max_nodes: budget.max_nodes,
            deadline: budget.time_limit.map(|d| Instant::now() + d),
        }
    }

    fn tick(&mut self) -> Result<(), OutOfBudget> {
        self.nodes += 1;
        if self.max_nodes.is_some_and(|m| self.nodes > m) {
            return Err(OutOfBudget);
        }
        if self.nodes % 1024 == 0 && self.deadline.is_some_and(|d| Instant::now() >= d) {
            return Err(OutOfBudget);
        }
        Ok(())
    }
}

/// Best quality mix for `m` downloads in one slot: largest total size that
/// fits, ties to the lexicographically smallest ascending level list.
#[derive(Debug, Clone)]
struct SlotMix {
    total_mb: f64,
    levels: Vec<usize>,
}

/// `mixes[m]` for `m = 0..=max`, where `max` is the most segments the slot
/// can hold at the lowest level (capped at `limit`).
fn slot_mixes(cap: f64, limit: usize, ladder: &QualityLadder, meter: &mut Meter) -> Result<Vec<SlotMix>, OutOfBudget> {
    let lowest = ladder.lowest_size();
    let mut mixes = vec![SlotMix {
        total_mb: 0.0,
        levels: Vec::new(),
    }];
    for m in 1..=limit {
        if !fits(m as f64 * lowest, cap) {
            break;
        }
        let mut best: Option<SlotMix> = None;
        let mut current = Vec::with_capacity(m);
        enumerate_mixes(m, 0, 0.0, cap, ladder, &mut current, &mut best, meter)?;
        mixes.push(best.expect("m lowest-level segments fit"));
    }
    Ok(mixes)
}

/// Depth-first over ascending level lists, in lexicographic order, so the
/// first list reaching the best total wins ties.
#[allow(clippy::too_many_arguments)]
fn enumerate_mixes(
    remaining: usize,
    min_level: usize,
    used: f64,
    cap: f64,
    ladder: &QualityLadder,
    current: &mut Vec<usize>,
    best: &mut Option<SlotMix>,
    meter: &mut Meter,
) -> Result<(), OutOfBudget> {
    meter.tick()?;
    if remaining == 0 {
        let better = match best {
            None => true,
            Some(b) => used > b.total_mb && !same_cost(used, b.total_mb),
        };
        if better {
            *best = Some(SlotMix {
                total_mb: used,
                levels: current.clone(),
            });
        }
        return Ok(());
    }
    for level in min_level..ladder.len() {
        // Every later pick is at least this level.
        if !fits(used + remaining as f64 * ladder.size(level), cap) {
            break;
        }
        current.push(level);
        enumerate_mixes(
            remaining - 1,
            level,
            used + ladder.size(level),
            cap,
            ladder,
            current,
            best,
            meter,
        )?;
        current.pop();
    }
    Ok(())
}

/// Lateness in slots of segments `first..first + m` downloaded in slot `t`.
fn batch_lateness(t: usize, first: usize, m: usize) -> usize {
    (first..first + m).map(|s| t.saturating_sub(s)).sum()
}

/// Order of two slot choices in the tie-break: the appended `(t, level)`
/// pairs compare lexicographically, and a proper prefix ranks after the
/// longer list because the following segment then lands in a later slot.
fn tie_order(a: &[usize], b: &[usize]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    b.len().cmp(&a.len())
}

fn solve_user(
    capacity: &[f64],
    num_segments: usize,
    ladder: &QualityLadder,
    weights: &ObjectiveWeights,
    meter: &mut Meter,
) -> Result<Option<UserSchedule>, OutOfBudget> {
    let slots = capacity.len();
    let n = num_segments;
    let mixes: Vec<Vec<SlotMix>> = capacity
        .iter()
        .map(|&c| slot_mixes(c, n, ladder, meter))
        .collect::<Result<_, _>>()?;

    // cost[t][k]: best cost of slots t.. given k segments downloaded before t.
    let mut cost = vec![vec![f64::INFINITY; n + 1]; slots + 1];
    cost[slots][n] = 0.0;
    for t in (0..slots).rev() {
        for k in 0..=n {
            let mut best = f64::INFINITY;
            for (m, mix) in mixes[t].iter().enumerate().take(n - k + 1) {
                meter.tick()?;
                let rest = cost[t + 1][k + m];
                if rest.is_infinite() {
                    continue;
                }
                let c = stage_cost(t, k, m, mix, weights) + rest;
                if c < best {
                    best = c;
                }
            }
            cost[t][k] = best;
        }
    }
    if cost[0][0].is_infinite() {
        return Ok(None);
    }

    let mut placements = Vec::with_capacity(n);
    let mut k = 0;
    for t in 0..slots {
        let target = cost[t][k];
        let mut choice: Option<usize> = None;
        for (m, mix) in mixes[t].iter().enumerate().take(n - k + 1) {
            let rest = cost[t + 1][k + m];
            if rest.is_infinite() || !same_cost(stage_cost(t, k, m, mix, weights) + rest, target) {
                continue;
            }
            let better = match choice {
                None => true,
                Some(c) => tie_order(&mix.levels, &mixes[t][c].levels) == Ordering::Less,
            };
            if better {
                choice = Some(m);
            }
        }
        let m = choice.expect("an optimal transition exists on a finite-cost state");
        for &quality in &mixes[t][m].levels {
            placements.push(Some(Placement { slot: t, quality }));
        }
        k += m;
    }
    debug_assert_eq!(k, n);
    Ok(Some(UserSchedule::new(placements)))
}

fn stage_cost(t: usize, k: usize, m: usize, mix: &SlotMix, weights: &ObjectiveWeights) -> f64 {
    let lateness = batch_lateness(t, k, m) as f64;
    let buffered = (k + m).saturating_sub(t + 1) as f64;
    weights.lateness() * lateness - weights.quality() * mix.total_mb + weights.buffer() * buffered
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::objective_value;

    fn ladder(sizes: &[f64]) -> QualityLadder {
        let bw: Vec<u64> = (1..=sizes.len() as u64).collect();
        QualityLadder::from_columns(sizes, &bw, None).unwrap()
    }

    fn solve(cap: Vec<f64>, sizes: &[f64]) -> Result<Schedule, ExactError> {
        let sc = Scenario::single_user(cap).unwrap();
        exact_optimize(
            &sc,
            &ladder(sizes),
            &ObjectiveWeights::default(),
            &SolverBudget::unlimited(),
        )
    }

    #[test]
    fn two_slot_examples() {
        let l = ladder(&[1.0, 2.0]);
        let w = ObjectiveWeights::default();
        let s = solve(vec![2.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(s.users[0], UserSchedule::from_slots(&[0, 1], &[1, 1]));
        assert_eq!(objective_value(&s, 2, &l, &w), -40.0);

        let s = solve(vec![4.0, 0.0], &[1.0, 2.0]).unwrap();
        assert_eq!(s.users[0], UserSchedule::from_slots(&[0, 0], &[1, 1]));
        assert_eq!(objective_value(&s, 2, &l, &w), -39.0);

        assert_eq!(
            solve(vec![0.0, 0.0], &[1.0, 2.0]),
            Err(ExactError::Infeasible { user: 0 })
        );
    }

    #[test]
    fn beats_fill_on_the_outage_example() {
        let s = solve(vec![3.0, 9.0, 3.0, 0.0, 0.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            s.users[0],
            UserSchedule::from_slots(&[0, 1, 1, 1, 2, 5], &[2, 2, 2, 2, 2, 2])
        );
    }

    #[test]
    fn tie_break_prefers_smaller_levels_then_longer_batches() {
        assert_eq!(tie_order(&[0, 2], &[1, 1]), Ordering::Less);
        assert_eq!(tie_order(&[1], &[1, 1]), Ordering::Greater);
        assert_eq!(tie_order(&[], &[0]), Ordering::Greater);
        assert_eq!(tie_order(&[2], &[2]), Ordering::Equal);
    }

    #[test]
    fn slot_mix_prefers_lexicographically_small_ties() {
        let l = ladder(&[1.0, 2.0, 3.0]);
        let mut meter = Meter::new(&SolverBudget::unlimited());
        let mixes = slot_mixes(4.0, 4, &l, &mut meter).ok().unwrap();
        assert_eq!(mixes.len(), 5);
        assert_eq!(mixes[1].levels, vec![2]);
        // {1,3} and {2,2} both total 4.
        assert_eq!(mixes[2].levels, vec![0, 2]);
        assert_eq!(mixes[4].levels, vec![0, 0, 0, 0]);
    }

    #[test]
    fn budget_exhaustion_reports_incumbent() {
        let sc = Scenario::single_user(vec![9.0; 10]).unwrap();
        let budget = SolverBudget::new(Some(5), None).unwrap();
        match exact_optimize(&sc, &QualityLadder::reference(), &ObjectiveWeights::default(), &budget) {
            Err(ExactError::BudgetExceeded { incumbent: Some(s) }) => assert!(s.is_complete()),
            other => panic!("unexpected {other:?}"),
        }
    }
}
