//! The six-state RiverSwim chain: swimming left (with the current) always
//! succeeds, swimming right (against it) succeeds with probability `theta`,
//! otherwise the swimmer stays put.

use super::{check_param_bounds, EnvError, MdpFamily};
use crate::inference::SufficientCounts;
use crate::mdp::FiniteMdpModel;

pub const LEFT: usize = 0;
pub const RIGHT: usize = 1;

const N_STATES: usize = 6;

/// Success probability of a rightward swim, in `[0.01, 0.99]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiverSwimParams {
    theta: f64,
}

impl RiverSwimParams {
    pub fn new(theta: f64) -> Result<Self, EnvError> {
        Ok(Self {
            theta: check_param_bounds("theta", theta)?,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Build the chain. States are indexed 0..=5 internally (1..=6 in the usual
/// presentation). Left always moves one state left, clamped at state 0.
/// Right moves one state right with probability `theta`, otherwise the agent
/// stays; at state 5 success and failure coincide, so right is a self-loop.
/// Rewards: 2 for (state 0, left), 10 for (state 5, right), 0 elsewhere.
pub fn riverswim_model(params: &RiverSwimParams, gamma: f64) -> FiniteMdpModel {
    let theta = params.theta;
    let mut transition = vec![vec![vec![0.0; N_STATES]; 2]; N_STATES];
    let mut reward = vec![vec![0.0; 2]; N_STATES];
    for s in 0..N_STATES {
        transition[s][LEFT][s.saturating_sub(1)] = 1.0;
        if s + 1 < N_STATES {
            transition[s][RIGHT][s + 1] = theta;
            transition[s][RIGHT][s] = 1.0 - theta;
        } else {
            transition[s][RIGHT][s] = 1.0;
        }
    }
    reward[0][LEFT] = 2.0;
    reward[N_STATES - 1][RIGHT] = 10.0;
    FiniteMdpModel::new(transition, reward, gamma)
        .expect("riverswim model construction is infallible")
}

/// The chain as a one-parameter family.
#[derive(Debug, Clone, Copy)]
pub struct RiverSwimFamily {
    pub gamma: f64,
}

impl MdpFamily for RiverSwimFamily {
    fn n_states(&self) -> usize {
        N_STATES
    }

    fn n_actions(&self) -> usize {
        2
    }

    fn param_dim(&self) -> usize {
        1
    }

    fn discount(&self) -> f64 {
        self.gamma
    }

    fn build(&self, theta: &[f64]) -> FiniteMdpModel {
        let params = RiverSwimParams::new(theta[0]).expect("theta within bounds");
        riverswim_model(&params, self.gamma)
    }

    // Only rightward swims below the top state carry information about
    // theta: advancing is a success, staying is a failure. Left moves are
    // deterministic and right at the top state is a self-loop either way.
    fn record_transition(&self, counts: &mut SufficientCounts, s: usize, a: usize, next: usize) {
        if a == RIGHT && s + 1 < N_STATES {
            if next == s + 1 {
                counts.record_success(0);
            } else {
                counts.record_failure(0);
            }
        }
    }

    fn grid_resolution(&self) -> usize {
        1024
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn left_always_moves_left() {
        // External state 3 is internal 2; left lands in external 2.
        let model = riverswim_model(&RiverSwimParams::new(0.5).unwrap(), 0.99);
        assert_eq!(model.transition_row(2, LEFT), &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn left_clamps_at_the_bank() {
        let model = riverswim_model(&RiverSwimParams::new(0.5).unwrap(), 0.99);
        assert_eq!(model.transition_row(0, LEFT), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(model.reward(0, LEFT), 2.0);
    }

    #[test]
    fn right_at_the_top_state_is_a_self_loop() {
        let model = riverswim_model(&RiverSwimParams::new(0.9).unwrap(), 0.99);
        assert_eq!(model.transition_row(5, RIGHT), &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(model.reward(5, RIGHT), 10.0);
    }

    #[test]
    fn right_splits_between_advance_and_stay() {
        // External state 2 is internal 1.
        let model = riverswim_model(&RiverSwimParams::new(0.5).unwrap(), 0.99);
        assert_eq!(model.transition_row(1, RIGHT), &[0.0, 0.5, 0.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn interior_rewards_are_zero() {
        let model = riverswim_model(&RiverSwimParams::new(0.5).unwrap(), 0.99);
        for s in 0..6 {
            for a in 0..2 {
                if (s, a) != (0, LEFT) && (s, a) != (5, RIGHT) {
                    assert_eq!(model.reward(s, a), 0.0);
                }
            }
        }
    }

    #[test]
    fn rows_sum_to_one_for_random_parameters() {
        let mut x = 0.37_f64;
        for _ in 0..50 {
            x = (x * 997.0).fract();
            let model =
                riverswim_model(&RiverSwimParams::new(0.01 + 0.98 * x).unwrap(), 0.99);
            for s in 0..6 {
                for a in 0..2 {
                    let sum: f64 = model.transition_row(s, a).iter().sum();
                    assert!((sum - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn only_rightward_swims_inform_the_counter() {
        let family = RiverSwimFamily { gamma: 0.99 };
        let mut counts = SufficientCounts::new(1);
        family.record_transition(&mut counts, 2, LEFT, 1);
        assert_eq!((counts.success(0), counts.failure(0)), (0, 0));
        family.record_transition(&mut counts, 5, RIGHT, 5);
        assert_eq!((counts.success(0), counts.failure(0)), (0, 0));
        family.record_transition(&mut counts, 2, RIGHT, 3);
        assert_eq!((counts.success(0), counts.failure(0)), (1, 0));
        family.record_transition(&mut counts, 2, RIGHT, 2);
        assert_eq!((counts.success(0), counts.failure(0)), (1, 1));
    }
}
