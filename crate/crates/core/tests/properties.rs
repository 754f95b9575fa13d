//! Property-based invariants.

use bayesmdp::agents::DeltaSchedule;
use bayesmdp::envs::{riverswim_model, toy_model, RiverSwimParams, ToyFamily, ToyParams};
use bayesmdp::inference::{GridPosterior, SufficientCounts, NORMALIZATION_TOL};
use bayesmdp::mdp::Trajectory;
use bayesmdp::metrics::{d_mu, hellinger_sq, param_l2_error, uniform_weights};
use bayesmdp::rng::RngStream;
use proptest::prelude::*;
use rand::Rng;

fn simplex(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(1e-6..1.0f64, len).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    })
}

proptest! {
    #[test]
    fn hellinger_is_symmetric_and_in_range(p in simplex(5), q in simplex(5)) {
        let ab = hellinger_sq(&p, &q).unwrap();
        let ba = hellinger_sq(&q, &p).unwrap();
        prop_assert!((ab - ba).abs() < 1e-14);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&ab));
    }

    #[test]
    fn param_l2_is_a_metric_on_pairs(a in 0.01..0.99f64, b in 0.01..0.99f64,
                                     c in 0.01..0.99f64, d in 0.01..0.99f64) {
        let x = [a, b];
        let y = [c, d];
        prop_assert!(param_l2_error(&x, &y) >= 0.0);
        prop_assert!((param_l2_error(&x, &y) - param_l2_error(&y, &x)).abs() < 1e-15);
        prop_assert_eq!(param_l2_error(&x, &x), 0.0);
    }

    #[test]
    fn schedule_values_never_leave_the_unit_interval(
        c in 0.0..=1.0f64,
        p in -3.0..3.0f64,
        t in 0usize..100_000,
    ) {
        for sched in [DeltaSchedule::Constant(c), DeltaSchedule::InverseT, DeltaSchedule::Power(p)] {
            let v = sched.value(t);
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn grid_posterior_normalizes_for_any_counts(succ in 0u64..2000, fail in 0u64..2000) {
        let prior = GridPosterior::uniform(1, 128);
        let mut counts = SufficientCounts::new(1);
        for _ in 0..succ { counts.record_success(0); }
        for _ in 0..fail { counts.record_failure(0); }
        let post = prior.updated(&counts);
        let sum: f64 = post.marginal_weights(0).iter().sum();
        prop_assert!((sum - 1.0).abs() < NORMALIZATION_TOL);
    }

    #[test]
    fn model_rows_are_distributions_for_any_admissible_parameter(
        t1 in 0.01..=0.99f64,
        t2 in 0.01..=0.99f64,
    ) {
        let toy = toy_model(&ToyParams::new(t1, t2).unwrap(), 0.25);
        for s in 0..2 {
            for a in 0..2 {
                let sum: f64 = toy.transition_row(s, a).iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-12);
                prop_assert!(toy.transition_row(s, a).iter().all(|&p| p >= 0.0));
            }
        }
        let river = riverswim_model(&RiverSwimParams::new(t1).unwrap(), 0.99);
        for s in 0..6 {
            for a in 0..2 {
                let sum: f64 = river.transition_row(s, a).iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trajectory_relation_holds_for_any_step_sequence(steps in proptest::collection::vec((0usize..2, 0usize..2), 0..200)) {
        let mut traj = Trajectory::new(0);
        for (a, next) in steps {
            traj.record_step(a, 0.0, next);
            prop_assert!(traj.length_relation_holds());
        }
    }
}

#[test]
fn d_mu_satisfies_the_triangle_inequality_on_random_triples() {
    let family = ToyFamily { gamma: 0.25 };
    let weights = uniform_weights(&family);
    let mut rng = RngStream::new(555, 0);
    let mut draw = |rng: &mut RngStream| {
        [
            0.01 + 0.98 * rng.random::<f64>(),
            0.01 + 0.98 * rng.random::<f64>(),
        ]
    };
    for _ in 0..1000 {
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let c = draw(&mut rng);
        let ab = d_mu(&family, &a, &b, &weights).unwrap();
        let bc = d_mu(&family, &b, &c, &weights).unwrap();
        let ac = d_mu(&family, &a, &c, &weights).unwrap();
        assert!(ac <= ab + bc + 1e-12, "triangle violated: {ac} > {ab} + {bc}");
        assert!((ab - d_mu(&family, &b, &a, &weights).unwrap()).abs() < 1e-14);
    }
}
