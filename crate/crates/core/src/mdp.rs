//! Core abstractions for finite Markov decision processes: models,
//! trajectories, policies and the sampling primitives shared by every agent.

use rand::Rng;
use thiserror::Error;

use crate::planning::QTable;
use crate::rng::RngStream;

/// Tolerance used when validating that distribution rows sum to one.
pub const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MdpError {
    #[error("state index {state} out of range for {n_states} states")]
    StateOutOfRange { state: usize, n_states: usize },
    #[error("action index {action} out of range for {n_actions} actions")]
    ActionOutOfRange { action: usize, n_actions: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
}

/// A finite MDP: explicit transition tensor, reward table and discount.
///
/// `transition[s][a][s']` is the probability of moving to `s'` after taking
/// action `a` in state `s`; `reward[s][a]` is the (deterministic) reward for
/// that pair.
#[derive(Debug, Clone)]
pub struct FiniteMdpModel {
    n_states: usize,
    n_actions: usize,
    transition: Vec<Vec<Vec<f64>>>,
    reward: Vec<Vec<f64>>,
    discount: f64,
}

impl FiniteMdpModel {
    pub fn new(
        transition: Vec<Vec<Vec<f64>>>,
        reward: Vec<Vec<f64>>,
        discount: f64,
    ) -> Result<Self, MdpError> {
        let n_states = transition.len();
        if n_states == 0 {
            return Err(MdpError::InvalidModel("no states".into()));
        }
        let n_actions = transition[0].len();
        if n_actions == 0 {
            return Err(MdpError::InvalidModel("no actions".into()));
        }
        if reward.len() != n_states {
            return Err(MdpError::InvalidModel(format!(
                "reward table has {} state rows, expected {n_states}",
                reward.len()
            )));
        }
        if !(discount > 0.0 && discount < 1.0) {
            return Err(MdpError::InvalidModel(format!(
                "discount {discount} not in (0, 1)"
            )));
        }
        for (s, per_action) in transition.iter().enumerate() {
            if per_action.len() != n_actions {
                return Err(MdpError::InvalidModel(format!(
                    "state {s} has {} action rows, expected {n_actions}",
                    per_action.len()
                )));
            }
            if reward[s].len() != n_actions {
                return Err(MdpError::InvalidModel(format!(
                    "reward row {s} has {} entries, expected {n_actions}",
                    reward[s].len()
                )));
            }
            for (a, row) in per_action.iter().enumerate() {
                if row.len() != n_states {
                    return Err(MdpError::InvalidModel(format!(
                        "transition row ({s},{a}) has {} entries, expected {n_states}",
                        row.len()
                    )));
                }
                let mut sum = 0.0;
                for &p in row {
                    if !(p >= 0.0) {
                        return Err(MdpError::InvalidModel(format!(
                            "negative probability in row ({s},{a})"
                        )));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(MdpError::InvalidModel(format!(
                        "row ({s},{a}) sums to {sum}, expected 1"
                    )));
                }
                if !reward[s][a].is_finite() {
                    return Err(MdpError::InvalidModel(format!(
                        "non-finite reward at ({s},{a})"
                    )));
                }
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            transition,
            reward,
            discount,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        &self.transition[s][a]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s][a]
    }

    /// Largest absolute reward; bounds every value function by
    /// `max_abs_reward / (1 - discount)`.
    pub fn max_abs_reward(&self) -> f64 {
        self.reward
            .iter()
            .flatten()
            .fold(0.0_f64, |m, r| m.max(r.abs()))
    }

    fn check_indices(&self, s: usize, a: usize) -> Result<(), MdpError> {
        if s >= self.n_states {
            return Err(MdpError::StateOutOfRange {
                state: s,
                n_states: self.n_states,
            });
        }
        if a >= self.n_actions {
            return Err(MdpError::ActionOutOfRange {
                action: a,
                n_actions: self.n_actions,
            });
        }
        Ok(())
    }
}

/// Draw the successor state by inverse CDF over `P[s][a][.]` and return it
/// together with the reward `R[s][a]`.
pub fn step_finite(
    model: &FiniteMdpModel,
    s: usize,
    a: usize,
    rng: &mut RngStream,
) -> Result<(usize, f64), MdpError> {
    model.check_indices(s, a)?;
    let row = model.transition_row(s, a);
    let next = sample_index(row, rng);
    Ok((next, model.reward(s, a)))
}

/// Inverse-CDF draw from a probability vector. The final index absorbs any
/// floating-point slack in the row sum.
pub(crate) fn sample_index(probs: &[f64], rng: &mut RngStream) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Index of the maximum entry, ties broken toward the lowest index.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// A stationary policy over a finite state space.
#[derive(Debug, Clone)]
pub enum Policy {
    /// One action per state.
    Deterministic(Vec<usize>),
    /// One distribution over actions per state.
    Stochastic(Vec<Vec<f64>>),
    /// Greedy with respect to a Q table, ties to the lowest action index.
    QGreedy(QTable),
}

impl Policy {
    /// Validating constructor for stochastic tables: every row must sum to
    /// one within [`ROW_SUM_TOL`].
    pub fn stochastic(rows: Vec<Vec<f64>>) -> Result<Self, MdpError> {
        for (s, row) in rows.iter().enumerate() {
            let mut sum = 0.0;
            for &p in row {
                if !(p >= 0.0) {
                    return Err(MdpError::InvalidPolicy(format!(
                        "negative probability in row {s}"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(MdpError::InvalidPolicy(format!(
                    "row {s} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Policy::Stochastic(rows))
    }

    pub fn n_states(&self) -> usize {
        match self {
            Policy::Deterministic(t) => t.len(),
            Policy::Stochastic(rows) => rows.len(),
            Policy::QGreedy(q) => q.n_states(),
        }
    }

    /// The action a deterministic or q-greedy policy takes in `s`, if the
    /// policy needs no random draw.
    pub fn deterministic_action(&self, s: usize) -> Option<usize> {
        match self {
            Policy::Deterministic(t) => t.get(s).copied(),
            Policy::QGreedy(q) => (s < q.n_states()).then(|| q.greedy_action(s)),
            Policy::Stochastic(_) => None,
        }
    }
}

/// Select an action in state `s` under `policy`.
pub fn policy_action(policy: &Policy, s: usize, rng: &mut RngStream) -> Result<usize, MdpError> {
    match policy {
        Policy::Deterministic(table) => table.get(s).copied().ok_or(MdpError::StateOutOfRange {
            state: s,
            n_states: table.len(),
        }),
        Policy::Stochastic(rows) => {
            let row = rows.get(s).ok_or(MdpError::StateOutOfRange {
                state: s,
                n_states: rows.len(),
            })?;
            Ok(sample_index(row, rng))
        }
        Policy::QGreedy(q) => {
            if s >= q.n_states() {
                return Err(MdpError::StateOutOfRange {
                    state: s,
                    n_states: q.n_states(),
                });
            }
            Ok(q.greedy_action(s))
        }
    }
}

/// A rollout history: states, actions and rewards appended in step order.
/// After every complete step `states.len() == actions.len() + 1 ==
/// rewards.len() + 1`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    states: Vec<usize>,
    actions: Vec<usize>,
    rewards: Vec<f64>,
}

impl Trajectory {
    pub fn new(initial_state: usize) -> Self {
        Self {
            states: vec![initial_state],
            actions: Vec::new(),
            rewards: Vec::new(),
        }
    }

    /// Append one complete step: the action taken in the current state, the
    /// reward received and the successor state.
    pub fn record_step(&mut self, action: usize, reward: f64, next_state: usize) {
        self.actions.push(action);
        self.rewards.push(reward);
        self.states.push(next_state);
        debug_assert!(self.length_relation_holds());
    }

    /// Number of completed steps.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn current_state(&self) -> usize {
        *self.states.last().expect("trajectory always has a state")
    }

    pub fn states(&self) -> &[usize] {
        &self.states
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn length_relation_holds(&self) -> bool {
        self.states.len() == self.actions.len() + 1 && self.states.len() == self.rewards.len() + 1
    }
}
