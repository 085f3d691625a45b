use proptest::prelude::*;

use vsched::channel::{build_scenario, path_loss_db, shannon_rate_mbps, RadioParams, ScenarioConfig};
use vsched::metrics::{buffer_timeline, lateness, objective_terms};
use vsched::{Placement, QualityLadder, Schedule, UserSchedule};

fn schedule_strategy() -> impl Strategy<Value = (UserSchedule, usize)> {
    (1usize..10).prop_flat_map(|slots| {
        (
            proptest::collection::vec(proptest::option::weighted(0.9, (0..slots, 0usize..3)), 1..=slots),
            Just(slots),
        )
            .prop_map(|(v, slots)| {
                let placements = v
                    .into_iter()
                    .map(|p| p.map(|(slot, quality)| Placement { slot, quality }))
                    .collect();
                (UserSchedule::new(placements), slots)
            })
    })
}

proptest! {
    #[test]
    fn lateness_is_zero_exactly_when_on_time(d in 0usize..50, s in 0usize..50) {
        prop_assert_eq!(lateness(d, s) == 0, d <= s);
        prop_assert!(lateness(d + 1, s) >= lateness(d, s));
    }

    #[test]
    fn buffer_ends_empty_without_stalls((us, slots) in schedule_strategy()) {
        let timeline = buffer_timeline(&us, slots);
        prop_assert_eq!(timeline.len(), slots);
        let delivered_on_time = us.placements.iter().enumerate().all(|(s, p)| p.is_some_and(|p| p.slot <= s));
        if us.len() == slots && delivered_on_time {
            prop_assert_eq!(*timeline.last().unwrap(), 0);
        }
    }

    #[test]
    fn earlier_download_trades_lateness_for_buffer((us, slots) in schedule_strategy(), pick in any::<prop::sample::Index>()) {
        let ladder = QualityLadder::reference();
        let movable: Vec<usize> = (0..us.len()).filter(|&s| us.slot(s).is_some_and(|d| d > 0)).collect();
        prop_assume!(!movable.is_empty());
        let s = movable[pick.index(movable.len())];
        let mut earlier = us.clone();
        if let Some(p) = earlier.placements[s].as_mut() {
            p.slot -= 1;
        }
        let before = objective_terms(&Schedule::new(vec![us]), slots, &ladder);
        let after = objective_terms(&Schedule::new(vec![earlier]), slots, &ladder);
        prop_assert!(after.lateness_slots <= before.lateness_slots);
        prop_assert!(after.buffer_segments >= before.buffer_segments);
    }

    #[test]
    fn path_loss_grows_with_distance(a in 0.001f64..50.0, b in 0.001f64..50.0, shadow in -30.0f64..30.0) {
        prop_assume!(a < b);
        prop_assert!(path_loss_db(a, shadow).unwrap() < path_loss_db(b, shadow).unwrap());
    }

    #[test]
    fn rate_falls_with_path_loss(a in 40.0f64..250.0, b in 40.0f64..250.0) {
        let p = RadioParams::default();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let r_lo = shannon_rate_mbps(&p, lo);
        let r_hi = shannon_rate_mbps(&p, hi);
        prop_assert!(r_hi <= r_lo);
        prop_assert!((0.0..=p.cell_cap_mbps).contains(&r_lo));
        prop_assert!((0.0..=p.cell_cap_mbps).contains(&r_hi));
    }

    #[test]
    fn protected_edges_are_never_removed(seed in any::<u64>(), removed in 0usize..=40) {
        let config = ScenarioConfig { num_removed: removed, rng_seed: seed, ..ScenarioConfig::default() };
        let built = build_scenario(&config, &RadioParams::default()).unwrap();
        prop_assert_eq!(built.removed.len(), removed);
        prop_assert!(built.removed.iter().all(|&r| (2..42).contains(&r)));
    }
}

#[test]
fn removing_stations_lowers_mean_capacity() {
    let total = |removed: usize, seed: u64| {
        let config = ScenarioConfig {
            num_removed: removed,
            rng_seed: seed,
            ..ScenarioConfig::default()
        };
        let s = build_scenario(&config, &RadioParams::default()).unwrap().scenario;
        s.capacity_matrix().iter().flatten().sum::<f64>()
    };
    let mean = |removed: usize| (0..30u64).map(|seed| total(removed, 1000 + seed)).sum::<f64>() / 30.0;
    let means: Vec<f64> = [0, 5, 10, 15, 20].into_iter().map(mean).collect();
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}
