//! Cohort agents for the glucose process.
//!
//! One agent serves a whole cohort: the plan (a fitted Q function) is
//! refreshed at the cohort level once per time step at most, while actions
//! and exploration coins are drawn per patient.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use thiserror::Error;

use super::schedule::DeltaSchedule;
use crate::envs::{glucose_design_row, glucose_reward, GlucoseParams, GlucoseState, GLUCOSE_N_ACTIONS};
use crate::inference::{blr_sample, blr_update, InferenceError};
use crate::planning::{
    fitted_q_iteration, simulate_dataset, FittedQ, FqiConfig, PlanningError, TransitionTuple,
};
use crate::rng::RngStream;

#[derive(Debug, Error)]
pub enum GlucoseAgentError {
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Planning(#[from] PlanningError),
}

/// How the cohort plan is produced and refreshed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GlucosePlanKind {
    /// Resample the coefficients from their posterior and refit once per
    /// time step; explore per patient at rate `delta`.
    EpsilonGreedyTs { delta: DeltaSchedule },
    /// Resample and refit only at steps 1, 2, 4, 8, ...
    Doubling,
    /// Fit once under the true coefficients and never touch the data.
    Gold,
    /// Model-free: refit on the observed history each step; act uniformly
    /// until at least `min_history` transitions exist.
    NaiveFqi { min_history: usize },
    /// Uniform random actions.
    Uniform,
}

#[derive(Debug, Clone)]
pub struct GlucoseAgentConfig {
    pub fqi: FqiConfig,
    /// Simulated training-set size for model-based planning.
    pub n_tuples: usize,
    /// Episode length used when simulating training data.
    pub episode_len: usize,
    /// Prior over the nine coefficients.
    pub prior_mean: DVector<f64>,
    pub prior_cov: DMatrix<f64>,
}

/// The independent streams a cohort agent consumes.
#[derive(Debug, Clone)]
pub struct GlucoseAgentStreams {
    pub coin: RngStream,
    pub explore: RngStream,
    pub posterior: RngStream,
    pub simulate: RngStream,
}

pub struct GlucoseAgent {
    kind: GlucosePlanKind,
    config: GlucoseAgentConfig,
    /// Generative structure known to the agent; only `beta` is inferred.
    env_template: GlucoseParams,
    rows: Vec<Vec<f64>>,
    responses: Vec<f64>,
    history: Vec<TransitionTuple>,
    plan: Option<FittedQ>,
    sampled_beta: Option<[f64; 9]>,
    streams: GlucoseAgentStreams,
    refits: usize,
}

impl GlucoseAgent {
    /// `true_params` is the environment's generative model: the agent keeps
    /// its mixtures and noise (they are known) and, for the gold plan,
    /// also its coefficients.
    pub fn new(
        kind: GlucosePlanKind,
        config: GlucoseAgentConfig,
        true_params: &GlucoseParams,
        streams: GlucoseAgentStreams,
    ) -> Result<Self, GlucoseAgentError> {
        let mut agent = Self {
            kind,
            config,
            env_template: *true_params,
            rows: Vec::new(),
            responses: Vec::new(),
            history: Vec::new(),
            plan: None,
            sampled_beta: None,
            streams,
            refits: 0,
        };
        match kind {
            GlucosePlanKind::Gold => {
                let data = simulate_dataset(
                    &agent.env_template,
                    agent.config.n_tuples,
                    agent.config.episode_len,
                    &mut agent.streams.simulate,
                )?;
                agent.plan = Some(fitted_q_iteration(&data, &agent.config.fqi)?);
                agent.refits += 1;
            }
            GlucosePlanKind::Doubling => {
                // Initial plan from a prior draw; later refits follow the
                // doubling schedule.
                agent.resample_and_refit()?;
            }
            _ => {}
        }
        Ok(agent)
    }

    pub fn refit_count(&self) -> usize {
        self.refits
    }

    pub fn sampled_beta(&self) -> Option<&[f64; 9]> {
        self.sampled_beta.as_ref()
    }

    pub fn observed_transitions(&self) -> usize {
        self.history.len()
    }

    /// Posterior over the coefficients given everything observed so far.
    pub fn posterior(&self) -> Result<crate::inference::GaussianPosterior, InferenceError> {
        blr_update(
            &self.config.prior_mean,
            &self.config.prior_cov,
            &self.rows,
            &self.responses,
            self.env_template.noise_sd,
        )
    }

    fn resample_and_refit(&mut self) -> Result<(), GlucoseAgentError> {
        let posterior = self.posterior()?;
        let draw = blr_sample(&posterior, &mut self.streams.posterior)?;
        let mut beta = [0.0; 9];
        for (b, v) in beta.iter_mut().zip(draw.iter()) {
            *b = *v;
        }
        let sampled = self.env_template.with_beta(beta);
        let data = simulate_dataset(
            &sampled,
            self.config.n_tuples,
            self.config.episode_len,
            &mut self.streams.simulate,
        )?;
        self.plan = Some(fitted_q_iteration(&data, &self.config.fqi)?);
        self.sampled_beta = Some(beta);
        self.refits += 1;
        Ok(())
    }

    /// Cohort-level plan refresh for step `t`; call once before the
    /// patients act.
    pub fn begin_step(&mut self, t: usize) -> Result<(), GlucoseAgentError> {
        match self.kind {
            GlucosePlanKind::EpsilonGreedyTs { .. } => self.resample_and_refit(),
            GlucosePlanKind::Doubling => {
                if t >= 1 && t.is_power_of_two() {
                    self.resample_and_refit()?;
                }
                Ok(())
            }
            GlucosePlanKind::NaiveFqi { min_history } => {
                if self.history.len() >= min_history {
                    self.plan = Some(fitted_q_iteration(&self.history, &self.config.fqi)?);
                    self.refits += 1;
                } else {
                    self.plan = None;
                }
                Ok(())
            }
            GlucosePlanKind::Gold | GlucosePlanKind::Uniform => Ok(()),
        }
    }

    /// Action for one patient at step `t`.
    pub fn act(&mut self, state: &GlucoseState, t: usize) -> usize {
        let uniform =
            |rng: &mut RngStream| -> usize { rng.random_range(0..GLUCOSE_N_ACTIONS) };
        match self.kind {
            GlucosePlanKind::Uniform => uniform(&mut self.streams.explore),
            GlucosePlanKind::NaiveFqi { .. } => match &self.plan {
                Some(plan) => plan.greedy(&state.features()),
                None => uniform(&mut self.streams.explore),
            },
            GlucosePlanKind::Gold | GlucosePlanKind::Doubling => self
                .plan
                .as_ref()
                .expect("plan exists after construction")
                .greedy(&state.features()),
            GlucosePlanKind::EpsilonGreedyTs { delta } => {
                let u: f64 = self.streams.coin.random();
                if u > delta.value(t) {
                    self.plan
                        .as_ref()
                        .expect("plan exists after begin_step")
                        .greedy(&state.features())
                } else {
                    uniform(&mut self.streams.explore)
                }
            }
        }
    }

    /// Record one observed patient transition.
    pub fn observe(&mut self, state: &GlucoseState, action: usize, next: &GlucoseState) {
        self.rows.push(glucose_design_row(state, action).to_vec());
        self.responses.push(next.gl);
        self.history.push(TransitionTuple {
            state: state.features().to_vec(),
            action,
            reward: glucose_reward(next.gl),
            next_state: next.features().to_vec(),
        });
    }
}
