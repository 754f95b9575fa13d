//! Exact solvers for finite MDPs.

use nalgebra::{DMatrix, DVector};

use super::PlanningError;
use crate::mdp::{argmax_lowest, FiniteMdpModel, Policy};

/// State-action values together with the discount they were computed under.
/// Every entry is bounded by `max_abs_reward / (1 - discount)`.
#[derive(Debug, Clone)]
pub struct QTable {
    values: Vec<Vec<f64>>,
    discount: f64,
}

impl QTable {
    pub fn new(values: Vec<Vec<f64>>, discount: f64) -> Self {
        Self { values, discount }
    }

    pub fn n_states(&self) -> usize {
        self.values.len()
    }

    pub fn n_actions(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn value(&self, s: usize, a: usize) -> f64 {
        self.values[s][a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.values[s]
    }

    /// Greedy action, ties to the lowest index.
    pub fn greedy_action(&self, s: usize) -> usize {
        argmax_lowest(&self.values[s])
    }
}

/// Output of [`value_iteration`]: the optimal values, the Q table they
/// induce, and the greedy policy.
#[derive(Debug, Clone)]
pub struct Plan {
    pub values: Vec<f64>,
    pub q: QTable,
    pub policy: Policy,
}

fn backup(model: &FiniteMdpModel, values: &[f64], s: usize, a: usize) -> f64 {
    let row = model.transition_row(s, a);
    let mut expect = 0.0;
    for (next, &p) in row.iter().enumerate() {
        if p > 0.0 {
            expect += p * values[next];
        }
    }
    model.reward(s, a) + model.discount() * expect
}

/// Sup-norm Bellman residual `||TV - V||_inf` of a value vector.
pub fn bellman_residual(model: &FiniteMdpModel, values: &[f64]) -> f64 {
    let mut residual = 0.0_f64;
    for s in 0..model.n_states() {
        let best = (0..model.n_actions())
            .map(|a| backup(model, values, s, a))
            .fold(f64::NEG_INFINITY, f64::max);
        residual = residual.max((best - values[s]).abs());
    }
    residual
}

/// Iterate the Bellman optimality operator until the sup-norm residual of
/// the returned values is at most `tol`; derive the Q table from those
/// values and a greedy policy with lowest-index tie breaking.
pub fn value_iteration(
    model: &FiniteMdpModel,
    tol: f64,
    max_iters: usize,
) -> Result<Plan, PlanningError> {
    if !(tol > 0.0) {
        return Err(PlanningError::InvalidInput(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let n = model.n_states();
    let gamma = model.discount();
    let mut values = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut converged = false;
    let mut delta = f64::INFINITY;
    for _ in 0..max_iters {
        delta = 0.0;
        for s in 0..n {
            let best = (0..model.n_actions())
                .map(|a| backup(model, &values, s, a))
                .fold(f64::NEG_INFINITY, f64::max);
            delta = delta.max((best - values[s]).abs());
            next[s] = best;
        }
        std::mem::swap(&mut values, &mut next);
        // ||TV' - V'|| <= gamma * ||V' - V|| for the iterate just written.
        if gamma * delta <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(PlanningError::NotConverged {
            residual: delta,
            iterations: max_iters,
            tol,
        });
    }
    let q_values: Vec<Vec<f64>> = (0..n)
        .map(|s| {
            (0..model.n_actions())
                .map(|a| backup(model, &values, s, a))
                .collect()
        })
        .collect();
    let table: Vec<usize> = q_values.iter().map(|row| argmax_lowest(row)).collect();
    Ok(Plan {
        values,
        q: QTable::new(q_values, gamma),
        policy: Policy::Deterministic(table),
    })
}

fn action_distribution(policy: &Policy, s: usize, n_actions: usize) -> Result<Vec<f64>, PlanningError> {
    match policy {
        Policy::Deterministic(table) => {
            let a = *table
                .get(s)
                .ok_or_else(|| PlanningError::InvalidInput(format!("policy lacks state {s}")))?;
            let mut row = vec![0.0; n_actions];
            row[a] = 1.0;
            Ok(row)
        }
        Policy::Stochastic(rows) => rows
            .get(s)
            .cloned()
            .ok_or_else(|| PlanningError::InvalidInput(format!("policy lacks state {s}"))),
        Policy::QGreedy(q) => {
            if s >= q.n_states() {
                return Err(PlanningError::InvalidInput(format!("policy lacks state {s}")));
            }
            let mut row = vec![0.0; n_actions];
            row[q.greedy_action(s)] = 1.0;
            Ok(row)
        }
    }
}

/// Evaluate a stationary policy by solving its Bellman equation
/// `(I - gamma * P_pi) V = R_pi` directly; the result is checked against
/// `tol` in sup norm.
pub fn policy_evaluation(
    model: &FiniteMdpModel,
    policy: &Policy,
    tol: f64,
) -> Result<Vec<f64>, PlanningError> {
    if !(tol > 0.0) {
        return Err(PlanningError::InvalidInput(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let n = model.n_states();
    let gamma = model.discount();
    let mut system = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for s in 0..n {
        let dist = action_distribution(policy, s, model.n_actions())?;
        for (a, &w) in dist.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            rhs[s] += w * model.reward(s, a);
            for (next, &p) in model.transition_row(s, a).iter().enumerate() {
                system[(s, next)] -= gamma * w * p;
            }
        }
    }
    let values = system
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| PlanningError::SingularSystem(format!("{n}x{n} policy system")))?;

    // Residual check of the fixed point equation.
    let mut residual = 0.0_f64;
    for s in 0..n {
        let dist = action_distribution(policy, s, model.n_actions())?;
        let mut backup = 0.0;
        for (a, &w) in dist.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let mut expect = 0.0;
            for (next, &p) in model.transition_row(s, a).iter().enumerate() {
                expect += p * values[next];
            }
            backup += w * (model.reward(s, a) + gamma * expect);
        }
        residual = residual.max((backup - values[s]).abs());
    }
    if residual > tol {
        return Err(PlanningError::NotConverged {
            residual,
            iterations: 1,
            tol,
        });
    }
    Ok(values.iter().copied().collect())
}
