//! Evaluation quantities: Hellinger-based semi-distance between dynamics,
//! value and regret gaps, optimal-action proportions, parameter errors and
//! log-log rate slopes, plus the small containers experiment runners use to
//! collect them.

use thiserror::Error;

use crate::envs::MdpFamily;
use crate::mdp::{Policy, Trajectory};
use crate::planning::{
    policy_evaluation, value_iteration, PlanningError, DEFAULT_MAX_ITERS, DEFAULT_TOL,
};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("distributions have different support sizes: {0} vs {1}")]
    SupportMismatch(usize, usize),
    #[error("negative weight {weight} at pair index {index}")]
    NegativeWeight { index: usize, weight: f64 },
    #[error("series value {value} at t={t} is not positive")]
    NonPositiveValue { t: u64, value: f64 },
    #[error("need at least {needed} points, have {have}")]
    TooFewPoints { needed: usize, have: usize },
    #[error("policy must be deterministic for this metric")]
    NonDeterministicPolicy,
    #[error(transparent)]
    Planning(#[from] PlanningError),
}

/// Squared Hellinger distance between two discrete distributions on the
/// same support: `sum_x (sqrt(p(x)) - sqrt(q(x)))^2`, in `[0, 2]`.
pub fn hellinger_sq(p: &[f64], q: &[f64]) -> Result<f64, MetricsError> {
    if p.len() != q.len() {
        return Err(MetricsError::SupportMismatch(p.len(), q.len()));
    }
    Ok(p.iter()
        .zip(q.iter())
        .map(|(a, b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum())
}

/// Uniform weights over the family's state-action pairs, indexed
/// `s * n_actions + a`.
pub fn uniform_weights<F: MdpFamily>(family: &F) -> Vec<f64> {
    let n = family.n_states() * family.n_actions();
    vec![1.0 / n as f64; n]
}

/// Weighted Hellinger semi-distance between the transition kernels of two
/// parameters: the square root of
/// `sum_(s,a) hellinger_sq(p_theta(.|s,a), p_theta'(.|s,a)) * mu(s,a)`
/// with the counting measure over pairs.
pub fn d_mu<F: MdpFamily>(
    family: &F,
    theta: &[f64],
    theta_prime: &[f64],
    weights: &[f64],
) -> Result<f64, MetricsError> {
    let n_pairs = family.n_states() * family.n_actions();
    if weights.len() != n_pairs {
        return Err(MetricsError::SupportMismatch(weights.len(), n_pairs));
    }
    for (index, &weight) in weights.iter().enumerate() {
        if !(weight >= 0.0) {
            return Err(MetricsError::NegativeWeight { index, weight });
        }
    }
    let model_a = family.build(theta);
    let model_b = family.build(theta_prime);
    let mut total = 0.0;
    for s in 0..family.n_states() {
        for a in 0..family.n_actions() {
            let h2 = hellinger_sq(model_a.transition_row(s, a), model_b.transition_row(s, a))?;
            total += h2 * weights[s * family.n_actions() + a];
        }
    }
    Ok(total.sqrt())
}

/// Value-based error quantities of a sampled parameter against the truth,
/// both evaluated at a fixed state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretParts {
    /// `|V_theta(pi*_theta) - V_theta0(pi*_theta0)|`: error of the
    /// estimated optimal value.
    pub v_error: f64,
    /// `|V_theta0(pi*_theta) - V_theta0(pi*_theta0)|`: value lost by
    /// planning with the sampled parameter, under the true dynamics.
    pub regret: f64,
}

/// Compute [`RegretParts`] at evaluation state `s_eval`. The optimal values
/// come from value iteration; the sampled policy is re-evaluated under the
/// true dynamics by a direct linear solve.
pub fn regret_quantities<F: MdpFamily>(
    family: &F,
    theta_sample: &[f64],
    theta0: &[f64],
    s_eval: usize,
) -> Result<RegretParts, MetricsError> {
    let model0 = family.build(theta0);
    let plan0 = value_iteration(&model0, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
    let model_s = family.build(theta_sample);
    let plan_s = value_iteration(&model_s, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
    let v_true = plan0.values[s_eval];
    let v_sample = plan_s.values[s_eval];
    let v_cross = policy_evaluation(&model0, &plan_s.policy, DEFAULT_TOL)?[s_eval];
    Ok(RegretParts {
        v_error: (v_sample - v_true).abs(),
        regret: (v_cross - v_true).abs(),
    })
}

/// Fraction of steps whose action matches the reference policy's action in
/// the visited state.
pub fn optimal_action_proportion(
    trajectory: &Trajectory,
    reference: &Policy,
) -> Result<f64, MetricsError> {
    if trajectory.is_empty() {
        return Err(MetricsError::TooFewPoints { needed: 1, have: 0 });
    }
    let mut matches = 0usize;
    for (s, a) in trajectory
        .states()
        .iter()
        .zip(trajectory.actions().iter())
    {
        let best = reference
            .deterministic_action(*s)
            .ok_or(MetricsError::NonDeterministicPolicy)?;
        matches += (*a == best) as usize;
    }
    Ok(matches as f64 / trajectory.len() as f64)
}

/// Euclidean norm of the difference between two parameter vectors.
pub fn param_l2_error(theta: &[f64], theta0: &[f64]) -> f64 {
    assert_eq!(theta.len(), theta0.len(), "parameter dimensions must match");
    theta
        .iter()
        .zip(theta0.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// One named per-step metric stream of one run.
#[derive(Debug, Clone)]
pub struct MetricSeries {
    pub name: String,
    pub times: Vec<u64>,
    pub values: Vec<f64>,
    pub run_id: u64,
    pub agent: String,
    pub scenario: String,
}

impl MetricSeries {
    pub fn new(scenario: &str, agent: &str, run_id: u64, name: &str) -> Self {
        Self {
            name: name.to_string(),
            times: Vec::new(),
            values: Vec::new(),
            run_id,
            agent: agent.to_string(),
            scenario: scenario.to_string(),
        }
    }

    /// Append a point; times must be strictly increasing.
    pub fn push(&mut self, t: u64, value: f64) {
        if let Some(&last) = self.times.last() {
            assert!(t > last, "times must be strictly increasing");
        }
        self.times.push(t);
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Value at an exact time index, if recorded.
    pub fn value_at(&self, t: u64) -> Option<f64> {
        self.times
            .iter()
            .position(|&x| x == t)
            .map(|i| self.values[i])
    }
}

/// Ordinary-least-squares slope of `log(value)` against `log(t)` over
/// `t >= t_min`.
pub fn loglog_slope(series: &MetricSeries, t_min: u64) -> Result<f64, MetricsError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in series.times.iter().zip(series.values.iter()) {
        if t < t_min.max(1) {
            continue;
        }
        if !(v > 0.0) {
            return Err(MetricsError::NonPositiveValue { t, value: v });
        }
        xs.push((t as f64).ln());
        ys.push(v.ln());
    }
    if xs.len() < 2 {
        return Err(MetricsError::TooFewPoints {
            needed: 2,
            have: xs.len(),
        });
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        cov += (x - mean_x) * (y - mean_y);
        var += (x - mean_x) * (x - mean_x);
    }
    if var == 0.0 {
        return Err(MetricsError::TooFewPoints {
            needed: 2,
            have: 1,
        });
    }
    Ok(cov / var)
}

/// Mean and standard error (sample s.d. over sqrt(n)). A single value has
/// standard error zero by convention; the caller sees `n` alongside. The
/// reduction sorts its inputs first so it is invariant to run order.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    assert!(!values.is_empty(), "need at least one value");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    if sorted.len() == 1 {
        return (mean, 0.0);
    }
    let var = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One row of a summary table: a per-run scalar reduced across runs.
#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub scenario: String,
    pub agent: String,
    pub variant: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub n_runs: usize,
}

/// A collection of summary rows.
#[derive(Debug, Clone, Default)]
pub struct AggregateTable {
    pub rows: Vec<AggregateRow>,
}
