//! Scenario orchestration: Monte-Carlo run loops for the three scenarios.

use std::time::{Duration, Instant};

use bayesmdp::agents::{
    AgentStreams, DeltaSchedule, GlucoseAgent, GlucoseAgentConfig, GlucosePlanKind, ReplanRule,
    ThompsonAgent,
};
use bayesmdp::envs::{
    glucose_init_state, glucose_step, GlucoseParams, MdpFamily, RiverSwimFamily, ToyFamily,
};
use bayesmdp::inference::default_beta_prior;
use bayesmdp::mdp::{step_finite, Policy, Trajectory};
use bayesmdp::metrics::{
    optimal_action_proportion, param_l2_error, regret_quantities, MetricSeries,
};
use bayesmdp::planning::{value_iteration, FqiConfig, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use bayesmdp::rng::{stream_id, RngStream, StreamPurpose};
use rayon::prelude::*;

use crate::config::{AgentKind, CliError, ExperimentConfig, ScenarioConfig};

/// Everything one Monte-Carlo run produced.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub run_id: u64,
    pub series: Vec<MetricSeries>,
    pub scalars: Vec<(String, f64)>,
    pub duration: Duration,
}

/// Stream index used by the glucose data simulator, disjoint from the tree
/// stream block of the same purpose.
const SIMULATE_STREAM_INDEX: u64 = 512;

fn map_runs<F>(n_runs: usize, parallel: bool, f: F) -> Result<Vec<RunRecord>, CliError>
where
    F: Fn(u64) -> Result<RunRecord, CliError> + Sync,
{
    if parallel {
        (0..n_runs as u64)
            .into_par_iter()
            .map(&f)
            .collect::<Result<Vec<_>, _>>()
    } else {
        (0..n_runs as u64).map(f).collect()
    }
}

fn finite_rule(
    agent: AgentKind,
    delta: DeltaSchedule,
    start_state: usize,
) -> Result<ReplanRule, CliError> {
    Ok(match agent {
        AgentKind::Ets => ReplanRule::EpsilonGreedy(delta),
        AgentKind::Uniform => ReplanRule::EpsilonGreedy(DeltaSchedule::Constant(1.0)),
        AgentKind::DsPsrl => ReplanRule::Doubling,
        AgentKind::TsMdp => ReplanRule::OnReferenceState(start_state),
        AgentKind::TsDe => ReplanRule::EpisodeDriven,
        other => {
            return Err(CliError::Config(format!(
                "agent '{}' not available here",
                other.as_str()
            )))
        }
    })
}

/// Run the two-state scenario: per step, record the parameter error of the
/// step's posterior sample, the induced value error and regret at the start
/// state, and whether the action matched the true optimal policy.
pub fn run_toy(config: &ExperimentConfig) -> Result<Vec<RunRecord>, CliError> {
    config.validate()?;
    let ScenarioConfig::Toy {
        theta0,
        gamma,
        start_state,
        grid_resolution: _,
    } = config.scenario
    else {
        return Err(CliError::Config("run_toy needs the toy scenario".into()));
    };
    let family = ToyFamily { gamma };
    let scenario = config.scenario.name();
    let agent_name = config.agent.as_str();
    let rule = finite_rule(config.agent, config.delta, start_state)?;
    let reference = value_iteration(&family.build(&theta0), DEFAULT_TOL, DEFAULT_MAX_ITERS)?;

    map_runs(config.n_runs, config.parallel, |run| {
        let started = Instant::now();
        let mut env = RngStream::for_run(config.seed, run, StreamPurpose::Environment);
        let mut metrics_rng = RngStream::for_run(config.seed, run, StreamPurpose::Metrics);
        let mut agent =
            ThompsonAgent::new(&family, rule, AgentStreams::for_run(config.seed, run))?;
        let model0 = family.build(&theta0);

        let mut param_l2 = MetricSeries::new(scenario, agent_name, run, "param_l2");
        let mut v_error = MetricSeries::new(scenario, agent_name, run, "v_error");
        let mut regret = MetricSeries::new(scenario, agent_name, run, "regret");
        let mut opt_action = MetricSeries::new(scenario, agent_name, run, "opt_action");
        let mut trajectory = Trajectory::new(start_state);

        for t in 0..config.horizon {
            let s = trajectory.current_state();
            let a = agent.act(s, t)?;
            let (next, reward) = step_finite(&model0, s, a, &mut env)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let theta_sample = agent.theta_for_metrics(&mut metrics_rng);
            let step = (t + 1) as u64;
            param_l2.push(step, param_l2_error(&theta_sample, &theta0));
            let parts = regret_quantities(&family, &theta_sample, &theta0, start_state)?;
            v_error.push(step, parts.v_error);
            regret.push(step, parts.regret);
            let best = reference
                .policy
                .deterministic_action(s)
                .expect("reference policy is deterministic");
            opt_action.push(step, f64::from(a == best));
            agent.observe(s, a, next);
            trajectory.record_step(a, reward, next);
        }

        let proportion = optimal_action_proportion(&trajectory, &reference.policy)?;
        let scalars = vec![
            ("opt_action".to_string(), proportion),
            (
                "param_l2_final".to_string(),
                *param_l2.values.last().expect("horizon >= 1"),
            ),
            (
                "v_error_final".to_string(),
                *v_error.values.last().expect("horizon >= 1"),
            ),
            (
                "regret_final".to_string(),
                *regret.values.last().expect("horizon >= 1"),
            ),
        ];
        Ok(RunRecord {
            run_id: run,
            series: vec![param_l2, v_error, regret, opt_action],
            scalars,
            duration: started.elapsed(),
        })
    })
}

/// Reference power-law curves emitted alongside the toy series for overlay
/// plotting: `t^-1/2`, `t^-9/20` and `t^-1/4`.
pub fn reference_curves(scenario: &str, horizon: usize) -> Vec<MetricSeries> {
    [(-0.5, "ref:t^-0.50"), (-0.45, "ref:t^-0.45"), (-0.25, "ref:t^-0.25")]
        .iter()
        .map(|&(power, label)| {
            let mut series = MetricSeries::new(scenario, label, 0, "param_l2");
            for t in 1..=horizon as u64 {
                series.push(t, (t as f64).powf(power));
            }
            series
        })
        .collect()
}

/// Run the RiverSwim scenario: per step, record the absolute error of the
/// step's posterior sample and the optimal-action indicator.
pub fn run_riverswim(config: &ExperimentConfig) -> Result<Vec<RunRecord>, CliError> {
    config.validate()?;
    let ScenarioConfig::RiverSwim {
        theta0,
        gamma,
        start_state,
        grid_resolution: _,
    } = config.scenario
    else {
        return Err(CliError::Config(
            "run_riverswim needs the riverswim scenario".into(),
        ));
    };
    let family = RiverSwimFamily { gamma };
    let scenario = config.scenario.name();
    let agent_name = config.agent.as_str();
    let start_internal = start_state - 1;
    let rule = finite_rule(config.agent, config.delta, start_internal)?;
    let reference = value_iteration(&family.build(&[theta0]), DEFAULT_TOL, DEFAULT_MAX_ITERS)?;

    map_runs(config.n_runs, config.parallel, |run| {
        let started = Instant::now();
        let mut env = RngStream::for_run(config.seed, run, StreamPurpose::Environment);
        let mut metrics_rng = RngStream::for_run(config.seed, run, StreamPurpose::Metrics);
        let mut agent =
            ThompsonAgent::new(&family, rule, AgentStreams::for_run(config.seed, run))?;
        let model0 = family.build(&[theta0]);

        let mut theta_err = MetricSeries::new(scenario, agent_name, run, "theta_abs_err");
        let mut opt_action = MetricSeries::new(scenario, agent_name, run, "opt_action");
        let mut trajectory = Trajectory::new(start_internal);

        for t in 0..config.horizon {
            let s = trajectory.current_state();
            let a = agent.act(s, t)?;
            let (next, reward) = step_finite(&model0, s, a, &mut env)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let theta_sample = agent.theta_for_metrics(&mut metrics_rng);
            let step = (t + 1) as u64;
            theta_err.push(step, (theta_sample[0] - theta0).abs());
            let best = reference
                .policy
                .deterministic_action(s)
                .expect("reference policy is deterministic");
            opt_action.push(step, f64::from(a == best));
            agent.observe(s, a, next);
            trajectory.record_step(a, reward, next);
        }

        let proportion = optimal_action_proportion(&trajectory, &reference.policy)?;
        let scalars = vec![
            ("opt_action".to_string(), proportion),
            (
                "theta_abs_err_final".to_string(),
                *theta_err.values.last().expect("horizon >= 1"),
            ),
        ];
        Ok(RunRecord {
            run_id: run,
            series: vec![theta_err, opt_action],
            scalars,
            duration: started.elapsed(),
        })
    })
}

fn glucose_plan_kind(
    agent: AgentKind,
    delta: DeltaSchedule,
    cold_start_min: usize,
) -> Result<GlucosePlanKind, CliError> {
    Ok(match agent {
        AgentKind::Ets => GlucosePlanKind::EpsilonGreedyTs { delta },
        AgentKind::DsPsrl => GlucosePlanKind::Doubling,
        AgentKind::Gold => GlucosePlanKind::Gold,
        AgentKind::NaiveFqi => GlucosePlanKind::NaiveFqi {
            min_history: cold_start_min,
        },
        AgentKind::Uniform => GlucosePlanKind::Uniform,
        other => {
            return Err(CliError::Config(format!(
                "agent '{}' not available here",
                other.as_str()
            )))
        }
    })
}

/// Run the glucose scenario: a cohort of patients is stepped synchronously;
/// the per-step series is the cumulative reward so far averaged per patient.
pub fn run_glucose(config: &ExperimentConfig) -> Result<Vec<RunRecord>, CliError> {
    config.validate()?;
    let ScenarioConfig::Glucose {
        n_patients,
        fqi_iters,
        fqi_tuples,
        fqi_gamma,
        episode_len,
        cold_start_min,
    } = config.scenario
    else {
        return Err(CliError::Config(
            "run_glucose needs the glucose scenario".into(),
        ));
    };
    let scenario = config.scenario.name();
    let agent_name = config.agent.as_str();
    let kind = glucose_plan_kind(config.agent, config.delta, cold_start_min)?;
    let true_params = GlucoseParams::default();

    map_runs(config.n_runs, config.parallel, |run| {
        let started = Instant::now();
        let (prior_mean, prior_cov) = default_beta_prior();
        let agent_config = GlucoseAgentConfig {
            fqi: FqiConfig::new(fqi_iters, fqi_gamma)
                .with_key(config.seed, stream_id(run, StreamPurpose::Planner, 0)),
            n_tuples: fqi_tuples,
            episode_len,
            prior_mean,
            prior_cov,
        };
        let streams = bayesmdp::agents::GlucoseAgentStreams {
            coin: RngStream::for_run(config.seed, run, StreamPurpose::ExploreCoin),
            explore: RngStream::for_run(config.seed, run, StreamPurpose::ExploreAction),
            posterior: RngStream::for_run(config.seed, run, StreamPurpose::PosteriorDraw),
            simulate: RngStream::for_run_indexed(
                config.seed,
                run,
                StreamPurpose::Planner,
                SIMULATE_STREAM_INDEX,
            ),
        };
        let mut agent = GlucoseAgent::new(kind, agent_config, &true_params, streams)?;

        let mut env_streams: Vec<RngStream> = (0..n_patients)
            .map(|i| {
                RngStream::for_run_indexed(
                    config.seed,
                    run,
                    StreamPurpose::Environment,
                    i as u64,
                )
            })
            .collect();
        let mut init_rng = RngStream::for_run(config.seed, run, StreamPurpose::Init);
        let mut states: Vec<_> = (0..n_patients)
            .map(|_| glucose_init_state(&true_params, &mut init_rng))
            .collect();

        let mut cum_reward = MetricSeries::new(scenario, agent_name, run, "cum_reward");
        let mut total = 0.0;
        for t in 0..config.horizon {
            agent.begin_step(t)?;
            for i in 0..n_patients {
                let a = agent.act(&states[i], t);
                let (next, reward) =
                    glucose_step(&true_params, &states[i], a, &mut env_streams[i]);
                total += reward;
                agent.observe(&states[i], a, &next);
                states[i] = next;
            }
            cum_reward.push((t + 1) as u64, total / n_patients as f64);
        }

        let scalars = vec![(
            "cum_reward".to_string(),
            *cum_reward.values.last().expect("horizon >= 1"),
        )];
        Ok(RunRecord {
            run_id: run,
            series: vec![cum_reward],
            scalars,
            duration: started.elapsed(),
        })
    })
}

/// Dispatch on the configured scenario.
pub fn run(config: &ExperimentConfig) -> Result<Vec<RunRecord>, CliError> {
    match config.scenario {
        ScenarioConfig::Toy { .. } => run_toy(config),
        ScenarioConfig::RiverSwim { .. } => run_riverswim(config),
        ScenarioConfig::Glucose { .. } => run_glucose(config),
    }
}

/// True optimal policy of a finite scenario, for tests and reporting.
pub fn true_policy(config: &ExperimentConfig) -> Result<Option<Policy>, CliError> {
    match config.scenario {
        ScenarioConfig::Toy { theta0, gamma, .. } => {
            let family = ToyFamily { gamma };
            Ok(Some(
                value_iteration(&family.build(&theta0), DEFAULT_TOL, DEFAULT_MAX_ITERS)?.policy,
            ))
        }
        ScenarioConfig::RiverSwim { theta0, gamma, .. } => {
            let family = RiverSwimFamily { gamma };
            Ok(Some(
                value_iteration(&family.build(&[theta0]), DEFAULT_TOL, DEFAULT_MAX_ITERS)?
                    .policy,
            ))
        }
        ScenarioConfig::Glucose { .. } => Ok(None),
    }
}
