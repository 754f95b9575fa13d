//! The three simulation environments: a two-state switching chain, the
//! six-state RiverSwim chain, and a continuous-state glucose process.
//!
//! The finite environments are exposed both as concrete model builders and
//! through [`MdpFamily`], which ties a parameter vector to the model it
//! induces and to the Bernoulli counters its transitions inform.

mod glucose;
mod riverswim;
mod toy;

pub use glucose::{
    glucose_design_row, glucose_init_state, glucose_reward, glucose_step, GlucoseParams,
    GlucoseState, MixtureParams, GLUCOSE_FEATURES, GLUCOSE_N_ACTIONS,
};
pub use riverswim::{riverswim_model, RiverSwimFamily, RiverSwimParams, LEFT, RIGHT};
pub use toy::{toy_model, ToyFamily, ToyParams};

use thiserror::Error;

use crate::inference::SufficientCounts;
use crate::mdp::FiniteMdpModel;

/// Lower bound of every transition-parameter component.
pub const PARAM_LO: f64 = 0.01;
/// Upper bound of every transition-parameter component.
pub const PARAM_HI: f64 = 0.99;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("parameter {name}={value} outside [{lo}, {hi}]")]
    ParamOutOfBounds {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("parameter {name}={value} must be finite")]
    NotFinite { name: &'static str, value: f64 },
}

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<f64, EnvError> {
    if !value.is_finite() {
        return Err(EnvError::NotFinite { name, value });
    }
    if !(0.0..=1.0).contains(&value) {
        return Err(EnvError::ParamOutOfBounds {
            name,
            value,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(value)
}

pub(crate) fn check_param_bounds(name: &'static str, value: f64) -> Result<f64, EnvError> {
    if !value.is_finite() {
        return Err(EnvError::NotFinite { name, value });
    }
    if !(PARAM_LO..=PARAM_HI).contains(&value) {
        return Err(EnvError::ParamOutOfBounds {
            name,
            value,
            lo: PARAM_LO,
            hi: PARAM_HI,
        });
    }
    Ok(value)
}

/// A family of finite MDPs indexed by a low-dimensional dynamics parameter.
///
/// Each component of the parameter vector is the success probability of one
/// Bernoulli transition mechanism, so a transition either says nothing about
/// the parameter or increments exactly one success/failure counter.
pub trait MdpFamily: Sync {
    fn n_states(&self) -> usize;
    fn n_actions(&self) -> usize;
    fn param_dim(&self) -> usize;
    fn discount(&self) -> f64;

    /// Build the model induced by `theta`. Components must lie in
    /// `[PARAM_LO, PARAM_HI]`.
    fn build(&self, theta: &[f64]) -> FiniteMdpModel;

    /// Fold one observed transition into the sufficient counts.
    fn record_transition(&self, counts: &mut SufficientCounts, s: usize, a: usize, next: usize);

    /// Grid resolution per parameter dimension used by posterior inference.
    fn grid_resolution(&self) -> usize;
}
