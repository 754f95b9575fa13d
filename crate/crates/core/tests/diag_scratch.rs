//! Temporary diagnostics (removed before finalizing).

use bayesmdp::envs::{MdpFamily, RiverSwimFamily, ToyFamily};
use bayesmdp::planning::{value_iteration, DEFAULT_MAX_ITERS, DEFAULT_TOL};

#[test]
#[ignore]
fn toy_policy_map_over_theta() {
    let family = ToyFamily { gamma: 0.25 };
    let mut policies = std::collections::HashMap::new();
    let n = 99;
    for i in 0..n {
        for j in 0..n {
            let t1 = 0.01 + 0.98 * i as f64 / (n - 1) as f64;
            let t2 = 0.01 + 0.98 * j as f64 / (n - 1) as f64;
            let plan = value_iteration(&family.build(&[t1, t2]), DEFAULT_TOL, DEFAULT_MAX_ITERS)
                .unwrap();
            let key = (
                plan.policy.deterministic_action(0).unwrap(),
                plan.policy.deterministic_action(1).unwrap(),
            );
            *policies.entry(key).or_insert(0usize) += 1;
        }
    }
    println!("toy policy map (gamma=0.25): {policies:?}");
    // Min gaps at the true parameter
    let plan = value_iteration(
        &family.build(&[0.2, 0.4]),
        DEFAULT_TOL,
        DEFAULT_MAX_ITERS,
    )
    .unwrap();
    println!(
        "toy theta0 Q: s0 {:?} s1 {:?}, V {:?}",
        plan.q.row(0),
        plan.q.row(1),
        plan.values
    );
}

#[test]
#[ignore]
fn riverswim_policy_boundary() {
    let family = RiverSwimFamily { gamma: 0.99 };
    let mut prev: Option<Vec<usize>> = None;
    for i in 0..980 {
        let theta = 0.01 + 0.98 * i as f64 / 979.0;
        let plan =
            value_iteration(&family.build(&[theta]), DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        let policy: Vec<usize> = (0..6)
            .map(|s| plan.policy.deterministic_action(s).unwrap())
            .collect();
        if prev.as_ref() != Some(&policy) {
            println!("theta={theta:.4}: policy {policy:?}");
            prev = Some(policy);
        }
    }
}
