use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vsched::metrics::user_objective_terms;
use vsched::schedulers::oracle::{brute_force_user, random_instance, InstanceShape};
use vsched::schedulers::{exact_optimize_user, SolverBudget};
use vsched::{validate_schedule, ObjectiveWeights, Schedule};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * (1.0 + a.abs().max(b.abs()))
}

fn check_weights(weights: ObjectiveWeights, seed: u64, instances: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = SolverBudget::unlimited();
    for i in 0..instances {
        let (sc, ladder) = random_instance(&mut rng, InstanceShape::default());
        let cap = sc.capacity(0);
        let n = sc.num_segments();
        let oracle = brute_force_user(cap, n, &ladder, &weights);
        let exact = exact_optimize_user(cap, n, &ladder, &weights, &budget).unwrap();
        match (oracle, exact) {
            (None, None) => {}
            (Some((best, _)), Some(us)) => {
                let got = user_objective_terms(&us, cap.len(), &ladder).weighted(&weights);
                assert!(
                    close(got, best),
                    "instance {i}: exact {got} vs oracle {best}, cap {cap:?}, n {n}, ladder {:?}",
                    ladder.sizes().collect::<Vec<_>>()
                );
                let s = Schedule::new(vec![us]);
                assert!(validate_schedule(&s, &sc, &ladder).is_empty());
            }
            (o, e) => panic!(
                "instance {i}: feasibility differs, oracle {:?} exact {:?}",
                o.is_some(),
                e.is_some()
            ),
        }
    }
}

#[test]
fn exact_matches_brute_force_default_weights() {
    check_weights(ObjectiveWeights::default(), 1, 400);
}

#[test]
fn exact_matches_brute_force_other_weights() {
    check_weights(ObjectiveWeights::new(1.0, 10.0, 1.0).unwrap(), 2, 300);
    check_weights(ObjectiveWeights::new(0.0, 1.0, 5.0).unwrap(), 3, 300);
    check_weights(ObjectiveWeights::new(2.0, 0.0, 0.0).unwrap(), 4, 200);
}
