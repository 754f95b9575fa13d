//! A two-state, two-action switching chain whose four transition rows are
//! Bernoulli draws controlled by two parameters.

use super::{check_param_bounds, EnvError, MdpFamily};
use crate::inference::SufficientCounts;
use crate::mdp::FiniteMdpModel;

/// Dynamics parameters of the two-state chain. `theta1` drives transitions
/// out of state 1, `theta2` out of state 0; both live in `[0.01, 0.99]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyParams {
    theta1: f64,
    theta2: f64,
}

impl ToyParams {
    pub fn new(theta1: f64, theta2: f64) -> Result<Self, EnvError> {
        Ok(Self {
            theta1: check_param_bounds("theta1", theta1)?,
            theta2: check_param_bounds("theta2", theta2)?,
        })
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    pub fn as_vec(&self) -> Vec<f64> {
        vec![self.theta1, self.theta2]
    }
}

/// Build the two-state model:
///
/// * state 1, action 1: successor Bernoulli(theta1) on state 1, reward 1
/// * state 1, action 0: successor Bernoulli(1 - theta1), reward 0.5
/// * state 0, action 1: successor Bernoulli(theta2), reward 1.5
/// * state 0, action 0: successor Bernoulli(1 - theta2), reward 2
///
/// Rows are `(P(next = 0), P(next = 1))`.
pub fn toy_model(params: &ToyParams, gamma: f64) -> FiniteMdpModel {
    let t1 = params.theta1;
    let t2 = params.theta2;
    let transition = vec![
        vec![vec![t2, 1.0 - t2], vec![1.0 - t2, t2]],
        vec![vec![t1, 1.0 - t1], vec![1.0 - t1, t1]],
    ];
    let reward = vec![vec![2.0, 1.5], vec![0.5, 1.0]];
    FiniteMdpModel::new(transition, reward, gamma).expect("toy model construction is infallible")
}

/// The two-state chain as a parameter-indexed family with parameter order
/// `[theta1, theta2]`.
#[derive(Debug, Clone, Copy)]
pub struct ToyFamily {
    pub gamma: f64,
}

impl MdpFamily for ToyFamily {
    fn n_states(&self) -> usize {
        2
    }

    fn n_actions(&self) -> usize {
        2
    }

    fn param_dim(&self) -> usize {
        2
    }

    fn discount(&self) -> f64 {
        self.gamma
    }

    fn build(&self, theta: &[f64]) -> FiniteMdpModel {
        let params = ToyParams::new(theta[0], theta[1]).expect("theta within bounds");
        toy_model(&params, self.gamma)
    }

    // Which counter a transition informs, and with which sign:
    //   (1, 1): P(next = 1) = theta1        -> next = 1 is a theta1 success
    //   (1, 0): P(next = 1) = 1 - theta1    -> next = 1 is a theta1 failure
    //   (0, 1): P(next = 1) = theta2        -> next = 1 is a theta2 success
    //   (0, 0): P(next = 1) = 1 - theta2    -> next = 1 is a theta2 failure
    fn record_transition(&self, counts: &mut SufficientCounts, s: usize, a: usize, next: usize) {
        let param = if s == 1 { 0 } else { 1 };
        let success = (next == 1) == (a == 1);
        if success {
            counts.record_success(param);
        } else {
            counts.record_failure(param);
        }
    }

    fn grid_resolution(&self) -> usize {
        256
    }
}
