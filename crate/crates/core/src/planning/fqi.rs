//! Fitted Q iteration over batches of transition tuples.

use rand::Rng;

use super::trees::{ExtraTreesConfig, ExtraTreesRegressor};
use super::PlanningError;
use crate::envs::{glucose_init_state, glucose_step, GlucoseParams, GlucoseState, GLUCOSE_N_ACTIONS};
use crate::mdp::argmax_lowest;
use crate::rng::RngStream;

/// One observed or simulated transition in feature space.
#[derive(Debug, Clone)]
pub struct TransitionTuple {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
}

impl TransitionTuple {
    pub fn is_finite(&self) -> bool {
        self.reward.is_finite()
            && self.state.iter().all(|x| x.is_finite())
            && self.next_state.iter().all(|x| x.is_finite())
    }
}

/// Which regressor backs each iteration.
#[derive(Debug, Clone, Copy)]
pub enum RegressorKind {
    ExtraTrees { n_trees: usize, min_leaf: usize },
    Knn { k: usize },
}

impl Default for RegressorKind {
    fn default() -> Self {
        RegressorKind::ExtraTrees {
            n_trees: 25,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FqiConfig {
    pub n_iterations: usize,
    pub discount: f64,
    pub n_actions: usize,
    pub regressor: RegressorKind,
    /// Backup targets are clipped to `[-clip, clip]`; chosen large enough to
    /// be non-binding in normal operation.
    pub clip: f64,
    pub seed: u64,
    pub stream_base: u64,
}

impl FqiConfig {
    pub fn new(n_iterations: usize, discount: f64) -> Self {
        Self {
            n_iterations,
            discount,
            n_actions: GLUCOSE_N_ACTIONS,
            regressor: RegressorKind::default(),
            clip: 1000.0,
            seed: 0,
            stream_base: 0,
        }
    }

    pub fn with_key(mut self, seed: u64, stream_base: u64) -> Self {
        self.seed = seed;
        self.stream_base = stream_base;
        self
    }
}

#[derive(Debug, Clone)]
enum Regressor {
    Zero,
    Trees(ExtraTreesRegressor),
    Knn { k: usize, xs: Vec<Vec<f64>>, ys: Vec<f64> },
}

impl Regressor {
    fn predict(&self, x: &[f64]) -> f64 {
        match self {
            Regressor::Zero => 0.0,
            Regressor::Trees(t) => t.predict(x),
            Regressor::Knn { k, xs, ys } => {
                if xs.is_empty() {
                    return 0.0;
                }
                let mut dists: Vec<(f64, f64)> = xs
                    .iter()
                    .zip(ys.iter())
                    .map(|(row, &y)| {
                        let d: f64 = row
                            .iter()
                            .zip(x.iter())
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum();
                        (d, y)
                    })
                    .collect();
                dists.sort_by(|a, b| a.0.total_cmp(&b.0));
                let k = (*k).min(dists.len()).max(1);
                dists[..k].iter().map(|(_, y)| y).sum::<f64>() / k as f64
            }
        }
    }
}

/// The regressed Q function: one regressor per action.
#[derive(Debug, Clone)]
pub struct FittedQ {
    per_action: Vec<Regressor>,
    n_iterations: usize,
}

impl FittedQ {
    pub fn n_iterations(&self) -> usize {
        self.n_iterations
    }

    pub fn n_actions(&self) -> usize {
        self.per_action.len()
    }

    pub fn value(&self, state_features: &[f64], action: usize) -> f64 {
        self.per_action[action].predict(state_features)
    }

    /// Greedy action over the regressed values, ties to the lowest index.
    pub fn greedy(&self, state_features: &[f64]) -> usize {
        let values: Vec<f64> = (0..self.n_actions())
            .map(|a| self.value(state_features, a))
            .collect();
        argmax_lowest(&values)
    }
}

fn fit_regressor(
    kind: &RegressorKind,
    xs: &[&[f64]],
    ys: &[f64],
    seed: u64,
    stream_base: u64,
) -> Regressor {
    if xs.is_empty() {
        return Regressor::Zero;
    }
    match kind {
        RegressorKind::ExtraTrees { n_trees, min_leaf } => {
            let config = ExtraTreesConfig {
                n_trees: *n_trees,
                min_leaf: *min_leaf,
            };
            Regressor::Trees(ExtraTreesRegressor::fit(xs, ys, &config, seed, stream_base))
        }
        RegressorKind::Knn { k } => Regressor::Knn {
            k: *k,
            xs: xs.iter().map(|r| r.to_vec()).collect(),
            ys: ys.to_vec(),
        },
    }
}

/// Fit the Q function by iterating one-step backups: iteration `k` regresses
/// `clip(r + discount * max_a Q_{k-1}(s', a))` on `(s, a)`, starting from
/// `Q_0 = 0`. The regressor streams depend only on the config key, not on
/// the iteration index, so the fit is deterministic and a zero discount
/// reproduces the one-iteration result exactly.
pub fn fitted_q_iteration(
    data: &[TransitionTuple],
    config: &FqiConfig,
) -> Result<FittedQ, PlanningError> {
    if data.is_empty() {
        return Err(PlanningError::InvalidInput("empty training set".into()));
    }
    if config.n_iterations == 0 {
        return Err(PlanningError::InvalidInput(
            "need at least one iteration".into(),
        ));
    }
    if !(config.discount >= 0.0 && config.discount < 1.0) {
        return Err(PlanningError::InvalidInput(format!(
            "discount {} not in [0, 1)",
            config.discount
        )));
    }
    for tuple in data {
        if tuple.action >= config.n_actions {
            return Err(PlanningError::InvalidInput(format!(
                "tuple action {} out of range for {} actions",
                tuple.action, config.n_actions
            )));
        }
        if !tuple.is_finite() {
            return Err(PlanningError::InvalidInput(
                "non-finite transition tuple".into(),
            ));
        }
    }

    // Partition tuple indices by action once.
    let mut by_action: Vec<Vec<usize>> = vec![Vec::new(); config.n_actions];
    for (i, tuple) in data.iter().enumerate() {
        by_action[tuple.action].push(i);
    }

    let mut q = FittedQ {
        per_action: vec![Regressor::Zero; config.n_actions],
        n_iterations: 0,
    };
    // Per-action stream blocks keep tree keys disjoint between actions.
    let trees_per_fit = match config.regressor {
        RegressorKind::ExtraTrees { n_trees, .. } => n_trees as u64,
        RegressorKind::Knn { .. } => 1,
    };
    for _ in 0..config.n_iterations {
        let targets: Vec<f64> = data
            .iter()
            .map(|tuple| {
                let future: f64 = (0..config.n_actions)
                    .map(|a| q.value(&tuple.next_state, a))
                    .fold(f64::NEG_INFINITY, f64::max);
                let target = tuple.reward + config.discount * future;
                target.clamp(-config.clip, config.clip)
            })
            .collect();
        let mut per_action = Vec::with_capacity(config.n_actions);
        for (a, indices) in by_action.iter().enumerate() {
            let xs: Vec<&[f64]> = indices.iter().map(|&i| data[i].state.as_slice()).collect();
            let ys: Vec<f64> = indices.iter().map(|&i| targets[i]).collect();
            per_action.push(fit_regressor(
                &config.regressor,
                &xs,
                &ys,
                config.seed,
                config.stream_base + a as u64 * trees_per_fit,
            ));
        }
        q = FittedQ {
            per_action,
            n_iterations: q.n_iterations + 1,
        };
    }
    Ok(q)
}

/// Greedy action of a fitted Q function in a glucose state.
pub fn fitted_q_act(q: &FittedQ, state: &GlucoseState) -> usize {
    q.greedy(&state.features())
}

/// Roll out the glucose process under uniformly random actions, restarting
/// from the initialization distribution every `episode_len` steps, and
/// flatten the result into exactly `n_tuples` transition tuples.
pub fn simulate_dataset(
    dynamics: &GlucoseParams,
    n_tuples: usize,
    episode_len: usize,
    rng: &mut RngStream,
) -> Result<Vec<TransitionTuple>, PlanningError> {
    if n_tuples == 0 {
        return Err(PlanningError::InvalidInput(
            "need at least one tuple".into(),
        ));
    }
    if episode_len == 0 {
        return Err(PlanningError::InvalidInput(
            "episode length must be positive".into(),
        ));
    }
    let mut tuples = Vec::with_capacity(n_tuples);
    'outer: loop {
        let mut state = glucose_init_state(dynamics, rng);
        for _ in 0..episode_len {
            let action = rng.random_range(0..GLUCOSE_N_ACTIONS);
            let (next, reward) = glucose_step(dynamics, &state, action, rng);
            tuples.push(TransitionTuple {
                state: state.features().to_vec(),
                action,
                reward,
                next_state: next.features().to_vec(),
            });
            if tuples.len() == n_tuples {
                break 'outer;
            }
            state = next;
        }
    }
    Ok(tuples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::MixtureParams;

    fn deterministic_params() -> GlucoseParams {
        let quiet = MixtureParams {
            mean: 0.0,
            sd: 10.0,
            prob_active: 0.0,
        };
        GlucoseParams::new(
            GlucoseParams::default().beta,
            0.0,
            quiet,
            quiet,
        )
        .unwrap()
    }

    #[test]
    fn zero_tuples_is_rejected() {
        let mut rng = RngStream::new(1, 0);
        assert!(simulate_dataset(&GlucoseParams::default(), 0, 30, &mut rng).is_err());
    }

    #[test]
    fn tuple_count_is_exact() {
        let mut rng = RngStream::new(2, 0);
        let tuples = simulate_dataset(&GlucoseParams::default(), 501, 30, &mut rng).unwrap();
        assert_eq!(tuples.len(), 501);
        assert!(tuples.iter().all(TransitionTuple::is_finite));
    }

    #[test]
    fn noise_free_tuples_follow_the_recursion_exactly() {
        let params = deterministic_params();
        let mut rng = RngStream::new(3, 0);
        let tuples = simulate_dataset(&params, 60, 30, &mut rng).unwrap();
        for tuple in &tuples {
            let mut expected = 0.0;
            let row = [
                1.0,
                tuple.state[0],
                tuple.state[1],
                tuple.state[2],
                tuple.state[3],
                tuple.state[4],
                tuple.state[5],
                tuple.state[6],
                tuple.action as f64,
            ];
            for (x, b) in row.iter().zip(params.beta.iter()) {
                expected += x * b;
            }
            assert!((tuple.next_state[0] - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn one_iteration_regresses_immediate_rewards() {
        // Two feature cells with different rewards; a single backup must
        // reproduce the rewards themselves.
        let mut data = Vec::new();
        for i in 0..200 {
            let x = if i % 2 == 0 { 0.0 } else { 1.0 };
            data.push(TransitionTuple {
                state: vec![x],
                action: i % 2,
                reward: if x == 0.0 { 1.0 } else { -2.0 },
                next_state: vec![x],
            });
        }
        let config = FqiConfig::new(1, 0.9).with_key(5, 0);
        let q = fitted_q_iteration(&data, &config).unwrap();
        assert!((q.value(&[0.0], 0) - 1.0).abs() < 1e-9);
        assert!((q.value(&[1.0], 1) - -2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_discount_matches_single_iteration_for_any_depth() {
        let mut rng = RngStream::new(6, 0);
        let data = simulate_dataset(&GlucoseParams::default(), 300, 30, &mut rng).unwrap();
        let one = fitted_q_iteration(&data, &FqiConfig::new(1, 0.0).with_key(7, 0)).unwrap();
        let five = fitted_q_iteration(&data, &FqiConfig::new(5, 0.0).with_key(7, 0)).unwrap();
        for tuple in data.iter().take(50) {
            for a in 0..2 {
                assert_eq!(one.value(&tuple.state, a), five.value(&tuple.state, a));
            }
        }
    }

    #[test]
    fn greedy_ties_break_to_action_zero() {
        let data = vec![
            TransitionTuple {
                state: vec![0.0],
                action: 0,
                reward: 1.0,
                next_state: vec![0.0],
            },
            TransitionTuple {
                state: vec![0.0],
                action: 1,
                reward: 1.0,
                next_state: vec![0.0],
            },
        ];
        let q = fitted_q_iteration(&data, &FqiConfig::new(1, 0.0).with_key(8, 0)).unwrap();
        assert_eq!(q.value(&[0.0], 0), q.value(&[0.0], 1));
        assert_eq!(q.greedy(&[0.0]), 0);
    }

    #[test]
    fn higher_value_action_wins() {
        let data = vec![
            TransitionTuple {
                state: vec![0.0],
                action: 0,
                reward: 1.0,
                next_state: vec![0.0],
            },
            TransitionTuple {
                state: vec![0.0],
                action: 1,
                reward: 2.0,
                next_state: vec![0.0],
            },
        ];
        let q = fitted_q_iteration(&data, &FqiConfig::new(1, 0.0).with_key(9, 0)).unwrap();
        assert_eq!(q.greedy(&[0.0]), 1);
    }

    #[test]
    fn targets_stay_within_the_clip_bound() {
        let mut rng = RngStream::new(10, 0);
        let data = simulate_dataset(&GlucoseParams::default(), 400, 30, &mut rng).unwrap();
        let mut config = FqiConfig::new(5, 0.9).with_key(11, 0);
        config.clip = 0.25;
        let q = fitted_q_iteration(&data, &config).unwrap();
        for tuple in data.iter().take(100) {
            for a in 0..2 {
                assert!(q.value(&tuple.state, a).abs() <= 0.25 + 1e-12);
            }
        }
    }

    #[test]
    fn knn_backend_fits_and_predicts() {
        let data = vec![
            TransitionTuple {
                state: vec![0.0],
                action: 0,
                reward: 1.0,
                next_state: vec![0.0],
            },
            TransitionTuple {
                state: vec![1.0],
                action: 0,
                reward: 3.0,
                next_state: vec![1.0],
            },
        ];
        let mut config = FqiConfig::new(1, 0.0).with_key(12, 0);
        config.regressor = RegressorKind::Knn { k: 1 };
        let q = fitted_q_iteration(&data, &config).unwrap();
        assert_eq!(q.value(&[0.0], 0), 1.0);
        assert_eq!(q.value(&[1.0], 0), 3.0);
    }

    #[test]
    fn empty_data_is_rejected() {
        assert!(fitted_q_iteration(&[], &FqiConfig::new(5, 0.9)).is_err());
    }
}
