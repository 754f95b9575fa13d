//! Experiment configuration, validation and error-to-exit-code mapping.

use std::path::PathBuf;
use std::str::FromStr;

use bayesmdp::agents::{DeltaSchedule, GlucoseAgentError};
use bayesmdp::inference::InferenceError;
use bayesmdp::metrics::MetricsError;
use bayesmdp::planning::PlanningError;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<PlanningError> for CliError {
    fn from(e: PlanningError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<InferenceError> for CliError {
    fn from(e: InferenceError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<GlucoseAgentError> for CliError {
    fn from(e: GlucoseAgentError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

/// Which decision loop drives a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    /// Epsilon-greedy Thompson sampling.
    Ets,
    /// Thompson sampling on a doubling resample schedule.
    DsPsrl,
    /// Thompson sampling that resamples on visits to the start state.
    TsMdp,
    /// Thompson sampling with dynamic episodes.
    TsDe,
    /// Uniform random actions.
    Uniform,
    /// Planner given the true dynamics (glucose only).
    Gold,
    /// Model-free fitted Q on the observed history (glucose only).
    NaiveFqi,
}

impl AgentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AgentKind::Ets => "ets",
            AgentKind::DsPsrl => "dspsrl",
            AgentKind::TsMdp => "tsmdp",
            AgentKind::TsDe => "tsde",
            AgentKind::Uniform => "uniform",
            AgentKind::Gold => "gold",
            AgentKind::NaiveFqi => "naive_fqi",
        }
    }
}

impl FromStr for AgentKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ets" => Ok(AgentKind::Ets),
            "dspsrl" => Ok(AgentKind::DsPsrl),
            "tsmdp" => Ok(AgentKind::TsMdp),
            "tsde" => Ok(AgentKind::TsDe),
            "uniform" => Ok(AgentKind::Uniform),
            "gold" => Ok(AgentKind::Gold),
            "naive_fqi" => Ok(AgentKind::NaiveFqi),
            other => Err(CliError::Config(format!(
                "unknown agent '{other}' (expected ets, dspsrl, tsmdp, tsde, uniform, gold or naive_fqi)"
            ))),
        }
    }
}

/// Scenario-specific settings.
#[derive(Debug, Clone)]
pub enum ScenarioConfig {
    Toy {
        theta0: [f64; 2],
        gamma: f64,
        start_state: usize,
        grid_resolution: usize,
    },
    RiverSwim {
        theta0: f64,
        gamma: f64,
        /// Start state in external 1..=6 numbering.
        start_state: usize,
        grid_resolution: usize,
    },
    Glucose {
        n_patients: usize,
        fqi_iters: usize,
        fqi_tuples: usize,
        fqi_gamma: f64,
        episode_len: usize,
        cold_start_min: usize,
    },
}

impl ScenarioConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioConfig::Toy { .. } => "toy",
            ScenarioConfig::RiverSwim { .. } => "riverswim",
            ScenarioConfig::Glucose { .. } => "glucose",
        }
    }

    pub fn toy_defaults() -> Self {
        ScenarioConfig::Toy {
            theta0: [0.2, 0.4],
            gamma: 0.25,
            start_state: 0,
            grid_resolution: 256,
        }
    }

    pub fn riverswim_defaults() -> Self {
        ScenarioConfig::RiverSwim {
            theta0: 0.5,
            gamma: 0.99,
            start_state: 1,
            grid_resolution: 1024,
        }
    }

    pub fn glucose_defaults() -> Self {
        ScenarioConfig::Glucose {
            n_patients: 20,
            fqi_iters: 5,
            fqi_tuples: 2000,
            fqi_gamma: 0.9,
            episode_len: 30,
            cold_start_min: 50,
        }
    }

    /// Short label distinguishing scenario variants in summary tables.
    pub fn variant(&self, horizon: usize) -> String {
        match self {
            ScenarioConfig::Toy { theta0, .. } => {
                format!("theta0={}|{}", theta0[0], theta0[1])
            }
            ScenarioConfig::RiverSwim {
                theta0,
                start_state,
                ..
            } => format!("s0={start_state}|theta0={theta0}"),
            ScenarioConfig::Glucose { n_patients, .. } => {
                format!("T={horizon}|patients={n_patients}")
            }
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub agent: AgentKind,
    pub horizon: usize,
    pub n_runs: usize,
    pub seed: u64,
    pub delta: DeltaSchedule,
    /// Execute Monte-Carlo runs through the worker pool; results are
    /// identical either way.
    pub parallel: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.horizon < 1 {
            return Err(CliError::Config("horizon must be at least 1".into()));
        }
        if self.n_runs < 1 {
            return Err(CliError::Config("runs must be at least 1".into()));
        }
        let finite_only = matches!(self.agent, AgentKind::TsMdp | AgentKind::TsDe);
        let glucose_only = matches!(self.agent, AgentKind::Gold | AgentKind::NaiveFqi);
        match &self.scenario {
            ScenarioConfig::Toy {
                theta0,
                gamma,
                start_state,
                grid_resolution,
            } => {
                if glucose_only {
                    return Err(CliError::Config(format!(
                        "agent '{}' is only available in the glucose scenario",
                        self.agent.as_str()
                    )));
                }
                for t in theta0 {
                    if !(0.01..=0.99).contains(t) {
                        return Err(CliError::Config(format!(
                            "theta0 component {t} outside [0.01, 0.99]"
                        )));
                    }
                }
                if !(*gamma > 0.0 && *gamma < 1.0) {
                    return Err(CliError::Config(format!("gamma {gamma} not in (0,1)")));
                }
                if *start_state > 1 {
                    return Err(CliError::Config(format!(
                        "start state {start_state} outside 0..=1"
                    )));
                }
                if *grid_resolution < 2 {
                    return Err(CliError::Config("grid resolution must be >= 2".into()));
                }
            }
            ScenarioConfig::RiverSwim {
                theta0,
                gamma,
                start_state,
                grid_resolution,
            } => {
                if glucose_only {
                    return Err(CliError::Config(format!(
                        "agent '{}' is only available in the glucose scenario",
                        self.agent.as_str()
                    )));
                }
                if !(0.01..=0.99).contains(theta0) {
                    return Err(CliError::Config(format!(
                        "theta0 {theta0} outside [0.01, 0.99]"
                    )));
                }
                if !(*gamma > 0.0 && *gamma < 1.0) {
                    return Err(CliError::Config(format!("gamma {gamma} not in (0,1)")));
                }
                if !(1..=6).contains(start_state) {
                    return Err(CliError::Config(format!(
                        "start state {start_state} outside 1..=6"
                    )));
                }
                if *grid_resolution < 2 {
                    return Err(CliError::Config("grid resolution must be >= 2".into()));
                }
            }
            ScenarioConfig::Glucose {
                n_patients,
                fqi_iters,
                fqi_tuples,
                fqi_gamma,
                episode_len,
                ..
            } => {
                if finite_only {
                    return Err(CliError::Config(format!(
                        "agent '{}' needs a finite environment",
                        self.agent.as_str()
                    )));
                }
                if *n_patients < 1 {
                    return Err(CliError::Config("need at least one patient".into()));
                }
                if *n_patients > 1000 {
                    return Err(CliError::Config("at most 1000 patients supported".into()));
                }
                if *fqi_iters < 1 {
                    return Err(CliError::Config("fqi-iters must be >= 1".into()));
                }
                if *fqi_tuples < 1 {
                    return Err(CliError::Config("fqi-tuples must be >= 1".into()));
                }
                if !(*fqi_gamma >= 0.0 && *fqi_gamma < 1.0) {
                    return Err(CliError::Config(format!(
                        "fqi gamma {fqi_gamma} not in [0,1)"
                    )));
                }
                if *episode_len < 1 {
                    return Err(CliError::Config("episode length must be >= 1".into()));
                }
            }
        }
        Ok(())
    }

    pub fn variant(&self) -> String {
        self.scenario.variant(self.horizon)
    }

    /// JSON mirror written next to the outputs for provenance.
    pub fn to_json(&self) -> Value {
        let scenario = match &self.scenario {
            ScenarioConfig::Toy {
                theta0,
                gamma,
                start_state,
                grid_resolution,
            } => json!({
                "theta0": theta0,
                "gamma": gamma,
                "start_state": start_state,
                "grid_resolution": grid_resolution,
            }),
            ScenarioConfig::RiverSwim {
                theta0,
                gamma,
                start_state,
                grid_resolution,
            } => json!({
                "theta0": theta0,
                "gamma": gamma,
                "start_state": start_state,
                "grid_resolution": grid_resolution,
            }),
            ScenarioConfig::Glucose {
                n_patients,
                fqi_iters,
                fqi_tuples,
                fqi_gamma,
                episode_len,
                cold_start_min,
            } => json!({
                "n_patients": n_patients,
                "fqi_iters": fqi_iters,
                "fqi_tuples": fqi_tuples,
                "fqi_gamma": fqi_gamma,
                "episode_len": episode_len,
                "cold_start_min": cold_start_min,
            }),
        };
        json!({
            "scenario": self.scenario.name(),
            "agent": self.agent.as_str(),
            "horizon": self.horizon,
            "n_runs": self.n_runs,
            "seed": self.seed,
            "delta": self.delta.to_string(),
            "scenario_params": scenario,
        })
    }
}

/// Output destination of one invocation.
#[derive(Debug, Clone)]
pub struct OutputSpec {
    pub dir: PathBuf,
}
