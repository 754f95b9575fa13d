//! A continuous-state glucose process for a simulated diabetic patient.
//!
//! Glucose follows a second-order autoregression on past glucose, dietary
//! intake, exercise and insulin actions; diet and exercise are zero-inflated
//! Gaussians. The reward penalizes departures from normal glucose levels
//! through a piecewise quadratic in the *next* glucose value.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{check_unit_interval, EnvError};
use crate::rng::RngStream;

pub const GLUCOSE_N_ACTIONS: usize = 2;
/// Number of state features: (gl, di, ex, gl_prev, di_prev, ex_prev, a_prev).
pub const GLUCOSE_FEATURES: usize = 7;

/// Zero-inflated Gaussian: `N(mean, sd^2)` with probability `prob_active`,
/// otherwise exactly zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureParams {
    pub mean: f64,
    pub sd: f64,
    pub prob_active: f64,
}

/// Dynamics of the glucose process.
///
/// `beta` are the nine autoregression coefficients, ordered to match the
/// design row `(1, gl, di, ex, gl_prev, di_prev, ex_prev, a_prev, a)`;
/// `noise_sd` is the known residual standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlucoseParams {
    pub beta: [f64; 9],
    pub noise_sd: f64,
    pub diet: MixtureParams,
    pub exercise: MixtureParams,
}

impl GlucoseParams {
    pub fn new(
        beta: [f64; 9],
        noise_sd: f64,
        diet: MixtureParams,
        exercise: MixtureParams,
    ) -> Result<Self, EnvError> {
        for (i, b) in beta.iter().enumerate() {
            if !b.is_finite() {
                return Err(EnvError::NotFinite {
                    name: "beta",
                    value: beta[i],
                });
            }
        }
        if !(noise_sd >= 0.0) || !noise_sd.is_finite() {
            return Err(EnvError::NotFinite {
                name: "noise_sd",
                value: noise_sd,
            });
        }
        check_unit_interval("diet.prob_active", diet.prob_active)?;
        check_unit_interval("exercise.prob_active", exercise.prob_active)?;
        Ok(Self {
            beta,
            noise_sd,
            diet,
            exercise,
        })
    }

    /// Same covariate mixtures and noise, different regression coefficients.
    pub fn with_beta(&self, beta: [f64; 9]) -> Self {
        Self { beta, ..*self }
    }
}

impl Default for GlucoseParams {
    /// The generative model used throughout the experiments: contractive
    /// glucose autoregression with a strong two-step insulin effect.
    fn default() -> Self {
        let mixture = MixtureParams {
            mean: 0.0,
            sd: 10.0,
            prob_active: 0.6,
        };
        Self {
            beta: [10.0, 0.9, 0.1, -0.01, 0.0, 0.1, -0.01, -10.0, -4.0],
            noise_sd: 5.0,
            diet: mixture,
            exercise: mixture,
        }
    }
}

/// Markov state of one patient: current and previous covariates plus the
/// previous action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlucoseState {
    pub gl: f64,
    pub di: f64,
    pub ex: f64,
    pub gl_prev: f64,
    pub di_prev: f64,
    pub ex_prev: f64,
    pub a_prev: usize,
}

impl GlucoseState {
    pub fn features(&self) -> [f64; GLUCOSE_FEATURES] {
        [
            self.gl,
            self.di,
            self.ex,
            self.gl_prev,
            self.di_prev,
            self.ex_prev,
            self.a_prev as f64,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.features().iter().all(|x| x.is_finite())
    }
}

/// Reward as a function of the glucose level:
/// `-0.005 gl^2 + 0.95 gl - 45` below 70, `-0.0002 gl^2 + 0.022 gl - 0.5`
/// at or above 70.
pub fn glucose_reward(gl: f64) -> f64 {
    if gl < 70.0 {
        -0.005 * gl * gl + 0.95 * gl - 45.0
    } else {
        -0.0002 * gl * gl + 0.022 * gl - 0.5
    }
}

/// Regression row for the transition taken from `state` under `action`:
/// `(1, gl, di, ex, gl_prev, di_prev, ex_prev, a_prev, a)`. The response is
/// the next glucose value.
pub fn glucose_design_row(state: &GlucoseState, action: usize) -> [f64; 9] {
    [
        1.0,
        state.gl,
        state.di,
        state.ex,
        state.gl_prev,
        state.di_prev,
        state.ex_prev,
        state.a_prev as f64,
        action as f64,
    ]
}

fn sample_mixture(m: &MixtureParams, rng: &mut RngStream) -> f64 {
    let u: f64 = rng.random();
    if u < m.prob_active {
        let z: f64 = StandardNormal.sample(rng);
        m.mean + m.sd * z
    } else {
        0.0
    }
}

/// Advance one patient by one step; returns the successor state and the
/// reward computed from the next glucose value.
pub fn glucose_step(
    params: &GlucoseParams,
    state: &GlucoseState,
    action: usize,
    rng: &mut RngStream,
) -> (GlucoseState, f64) {
    debug_assert!(action < GLUCOSE_N_ACTIONS);
    let row = glucose_design_row(state, action);
    let mut next_gl = 0.0;
    for (x, b) in row.iter().zip(params.beta.iter()) {
        next_gl += x * b;
    }
    if params.noise_sd > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        next_gl += params.noise_sd * z;
    }
    let next = GlucoseState {
        gl: next_gl,
        di: sample_mixture(&params.diet, rng),
        ex: sample_mixture(&params.exercise, rng),
        gl_prev: state.gl,
        di_prev: state.di,
        ex_prev: state.ex,
        a_prev: action,
    };
    (next, glucose_reward(next_gl))
}

/// Initial state for one patient: glucose starts at the normal baseline 100
/// (both lags), diet and exercise are drawn from their mixtures at both
/// lags, and the previous action is 0.
pub fn glucose_init_state(params: &GlucoseParams, rng: &mut RngStream) -> GlucoseState {
    GlucoseState {
        gl: 100.0,
        di: sample_mixture(&params.diet, rng),
        ex: sample_mixture(&params.exercise, rng),
        gl_prev: 100.0,
        di_prev: sample_mixture(&params.diet, rng),
        ex_prev: sample_mixture(&params.exercise, rng),
        a_prev: 0,
    }
}
