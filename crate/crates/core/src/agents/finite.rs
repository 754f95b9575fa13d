//! Thompson-sampling agents for finite MDP families.
//!
//! All agents share the same skeleton: maintain a grid posterior over the
//! dynamics parameter from sufficient counts, and cache a plan (the sampled
//! parameter plus the optimal policy computed for it by value iteration).
//! They differ only in *when* the plan is refreshed, captured by
//! [`ReplanRule`].

use rand::Rng;

use super::schedule::DeltaSchedule;
use crate::envs::MdpFamily;
use crate::inference::{GridPosterior, SufficientCounts};
use crate::planning::{value_iteration, PlanningError, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::rng::{RngStream, StreamPurpose};

/// Uniform draw over `n_actions` actions, independent of the state.
pub fn uniform_action(n_actions: usize, rng: &mut RngStream) -> usize {
    rng.random_range(0..n_actions)
}

/// When a Thompson agent resamples the parameter and replans.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReplanRule {
    /// Flip a coin with rate `delta_t`: explore uniformly on heads,
    /// otherwise draw a fresh parameter, replan and act greedily. A
    /// constant rate of 1 is the uniform-random baseline.
    EpsilonGreedy(DeltaSchedule),
    /// Resample only at step indices 1, 2, 4, 8, ...
    Doubling,
    /// Resample whenever the current state equals the reference state.
    OnReferenceState(usize),
    /// Resample when the episode grows one step longer than the previous
    /// one or when some state-action visit count has doubled since the
    /// episode began (a first visit counts as doubling).
    EpisodeDriven,
}

/// The independent random streams one agent consumes.
#[derive(Debug, Clone)]
pub struct AgentStreams {
    pub coin: RngStream,
    pub explore: RngStream,
    pub posterior: RngStream,
}

impl AgentStreams {
    pub fn for_run(seed: u64, run: u64) -> Self {
        Self {
            coin: RngStream::for_run(seed, run, StreamPurpose::ExploreCoin),
            explore: RngStream::for_run(seed, run, StreamPurpose::ExploreAction),
            posterior: RngStream::for_run(seed, run, StreamPurpose::PosteriorDraw),
        }
    }
}

#[derive(Debug, Clone)]
struct CachedPlan {
    theta: Vec<f64>,
    action_table: Vec<usize>,
}

#[derive(Debug, Clone)]
struct EpisodeBook {
    length: usize,
    prev_length: usize,
    start_counts: Vec<u64>,
}

/// A Thompson-sampling agent over a finite MDP family.
pub struct ThompsonAgent<'a, F: MdpFamily> {
    family: &'a F,
    rule: ReplanRule,
    posterior: GridPosterior,
    counts: SufficientCounts,
    posterior_stale: bool,
    plan: CachedPlan,
    streams: AgentStreams,
    visit_counts: Vec<u64>,
    episode: EpisodeBook,
    resamples: usize,
    explorations: usize,
    resampled_this_step: bool,
}

impl<'a, F: MdpFamily> ThompsonAgent<'a, F> {
    /// Create an agent with a uniform prior and an initial plan drawn from
    /// it. The construction draw is not counted as a rule-triggered
    /// resample.
    pub fn new(family: &'a F, rule: ReplanRule, mut streams: AgentStreams) -> Result<Self, PlanningError> {
        let posterior = GridPosterior::uniform(family.param_dim(), family.grid_resolution());
        let theta = posterior
            .sample(&mut streams.posterior)
            .expect("fresh prior is normalized");
        let action_table = plan_for(family, &theta)?;
        let sa = family.n_states() * family.n_actions();
        Ok(Self {
            family,
            rule,
            posterior,
            counts: SufficientCounts::new(family.param_dim()),
            posterior_stale: false,
            plan: CachedPlan {
                theta,
                action_table,
            },
            streams,
            visit_counts: vec![0; sa],
            episode: EpisodeBook {
                length: 0,
                prev_length: 0,
                start_counts: vec![0; sa],
            },
            resamples: 0,
            explorations: 0,
            resampled_this_step: false,
        })
    }

    /// Replace the posterior (for degenerate-belief setups in tests and
    /// reference runs). Clears staleness so the injected belief is used
    /// as-is until the next observation.
    pub fn set_posterior(&mut self, posterior: GridPosterior) {
        self.posterior = posterior;
        self.posterior_stale = false;
    }

    pub fn posterior(&mut self) -> &GridPosterior {
        self.refresh_posterior();
        &self.posterior
    }

    pub fn sampled_theta(&self) -> &[f64] {
        &self.plan.theta
    }

    /// Rule-triggered resamples so far.
    pub fn resample_count(&self) -> usize {
        self.resamples
    }

    /// Exploration branches taken so far.
    pub fn exploration_count(&self) -> usize {
        self.explorations
    }

    fn refresh_posterior(&mut self) {
        if self.posterior_stale {
            self.posterior = self.posterior.updated(&self.counts);
            self.posterior_stale = false;
        }
    }

    fn resample_and_replan(&mut self) -> Result<(), PlanningError> {
        self.refresh_posterior();
        let theta = self
            .posterior
            .sample(&mut self.streams.posterior)
            .expect("posterior is normalized after refresh");
        let action_table = plan_for(self.family, &theta)?;
        self.plan = CachedPlan {
            theta,
            action_table,
        };
        self.resamples += 1;
        self.resampled_this_step = true;
        Ok(())
    }

    /// Choose the action for state `s` at step `t`.
    pub fn act(&mut self, s: usize, t: usize) -> Result<usize, PlanningError> {
        self.resampled_this_step = false;
        match self.rule {
            ReplanRule::EpsilonGreedy(schedule) => {
                let delta = schedule.value(t);
                let u: f64 = self.streams.coin.random();
                if u > delta {
                    self.resample_and_replan()?;
                    Ok(self.plan.action_table[s])
                } else {
                    self.explorations += 1;
                    Ok(uniform_action(
                        self.family.n_actions(),
                        &mut self.streams.explore,
                    ))
                }
            }
            ReplanRule::Doubling => {
                if t >= 1 && t.is_power_of_two() {
                    self.resample_and_replan()?;
                }
                Ok(self.plan.action_table[s])
            }
            ReplanRule::OnReferenceState(reference) => {
                if s == reference {
                    self.resample_and_replan()?;
                }
                Ok(self.plan.action_table[s])
            }
            ReplanRule::EpisodeDriven => {
                let doubled = self
                    .visit_counts
                    .iter()
                    .zip(self.episode.start_counts.iter())
                    .any(|(&now, &at_start)| now >= (2 * at_start).max(1) && now > at_start);
                if self.episode.length >= self.episode.prev_length + 1 || doubled {
                    self.resample_and_replan()?;
                    self.episode.prev_length = self.episode.length;
                    self.episode.length = 0;
                    self.episode.start_counts.copy_from_slice(&self.visit_counts);
                }
                self.episode.length += 1;
                Ok(self.plan.action_table[s])
            }
        }
    }

    /// Fold one observed transition into the sufficient counts; the
    /// posterior is refreshed before its next use.
    pub fn observe(&mut self, s: usize, a: usize, next: usize) {
        self.family.record_transition(&mut self.counts, s, a, next);
        self.posterior_stale = true;
        self.visit_counts[s * self.family.n_actions() + a] += 1;
    }

    /// Parameter to report for this step's metrics: the plan drawn at this
    /// step if the agent resampled, otherwise a fresh draw from the current
    /// posterior using the caller's stream.
    pub fn theta_for_metrics(&mut self, rng: &mut RngStream) -> Vec<f64> {
        if self.resampled_this_step {
            self.plan.theta.clone()
        } else {
            self.refresh_posterior();
            self.posterior
                .sample(rng)
                .expect("posterior is normalized after refresh")
        }
    }
}

fn plan_for<F: MdpFamily>(family: &F, theta: &[f64]) -> Result<Vec<usize>, PlanningError> {
    let model = family.build(theta);
    let plan = value_iteration(&model, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
    let table = (0..model.n_states())
        .map(|s| {
            plan.policy
                .deterministic_action(s)
                .expect("value iteration returns a deterministic policy")
        })
        .collect();
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{riverswim_model, RiverSwimFamily, RiverSwimParams, ToyFamily};
    use crate::mdp::step_finite;
    use crate::planning::value_iteration;

    fn toy_family() -> ToyFamily {
        ToyFamily { gamma: 0.25 }
    }

    fn river_family() -> RiverSwimFamily {
        RiverSwimFamily { gamma: 0.99 }
    }

    #[test]
    fn delta_one_explores_uniformly_and_ignores_the_posterior() {
        let family = toy_family();
        let mut agent = ThompsonAgent::new(
            &family,
            ReplanRule::EpsilonGreedy(DeltaSchedule::Constant(1.0)),
            AgentStreams::for_run(1, 0),
        )
        .unwrap();
        let n = 10_000;
        let mut ones = 0;
        for t in 0..n {
            ones += agent.act(0, t).unwrap();
        }
        assert_eq!(agent.resample_count(), 0);
        assert_eq!(agent.exploration_count(), n);
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.02, "freq {freq}");
    }

    #[test]
    fn delta_zero_with_point_mass_posterior_plays_the_true_optimum() {
        let family = river_family();
        let theta0 = 0.9;
        let mut agent = ThompsonAgent::new(
            &family,
            ReplanRule::EpsilonGreedy(DeltaSchedule::Constant(0.0)),
            AgentStreams::for_run(2, 0),
        )
        .unwrap();
        agent.set_posterior(GridPosterior::point_mass_at(1, 1024, &[theta0]));
        let model = riverswim_model(&RiverSwimParams::new(theta0).unwrap(), 0.99);
        let plan = value_iteration(&model, 1e-10, 100_000).unwrap();
        for s in 0..6 {
            for t in 0..3 {
                let a = agent.act(s, t).unwrap();
                assert_eq!(Some(a), plan.policy.deterministic_action(s));
            }
        }
    }

    #[test]
    fn exploration_frequency_matches_the_schedule() {
        let family = toy_family();
        let mut agent = ThompsonAgent::new(
            &family,
            ReplanRule::EpsilonGreedy(DeltaSchedule::Constant(0.05)),
            AgentStreams::for_run(3, 0),
        )
        .unwrap();
        let n = 10_000;
        for t in 0..n {
            agent.act(t % 2, t).unwrap();
        }
        let freq = agent.exploration_count() as f64 / n as f64;
        assert!((freq - 0.05).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn every_non_exploration_step_resamples() {
        let family = toy_family();
        let mut agent = ThompsonAgent::new(
            &family,
            ReplanRule::EpsilonGreedy(DeltaSchedule::Constant(0.3)),
            AgentStreams::for_run(4, 0),
        )
        .unwrap();
        let n = 2_000;
        for t in 0..n {
            agent.act(t % 2, t).unwrap();
        }
        assert_eq!(agent.resample_count() + agent.exploration_count(), n);
    }

    #[test]
    fn doubling_rule_resamples_at_powers_of_two() {
        let family = river_family();
        let mut agent = ThompsonAgent::new(
            &family,
            ReplanRule::Doubling,
            AgentStreams::for_run(5, 0),
        )
        .unwrap();
        let mut resample_times = Vec::new();
        for t in 0..10_000 {
            let before = agent.resample_count();
            agent.act(0, t).unwrap();
            if agent.resample_count() > before {
                resample_times.push(t);
            }
        }
        assert_eq!(
            resample_times,
            vec![1, 2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192]
        );
        assert_eq!(agent.resample_count(), 14);
    }

    #[test]
    fn reference_state_rule_resamples_only_there() {
        let family = river_family();
        let mut agent = ThompsonAgent::new(
            &family,
            ReplanRule::OnReferenceState(2),
            AgentStreams::for_run(6, 0),
        )
        .unwrap();
        // Start at the reference state, then never revisit.
        agent.act(2, 0).unwrap();
        assert_eq!(agent.resample_count(), 1);
        for t in 1..200 {
            agent.act(3 + (t % 3), t).unwrap();
        }
        assert_eq!(agent.resample_count(), 1);
        // Sitting on the reference state resamples every step.
        for t in 200..210 {
            agent.act(2, t).unwrap();
        }
        assert_eq!(agent.resample_count(), 11);
    }

    #[test]
    fn episode_rule_growth_and_first_visit_trigger() {
        let family = toy_family();
        let mut agent = ThompsonAgent::new(
            &family,
            ReplanRule::EpisodeDriven,
            AgentStreams::for_run(7, 0),
        )
        .unwrap();
        // Episode lengths grow by at most one: record episode boundaries on
        // a fixed state with no observations (rule (a) only).
        let mut boundaries = Vec::new();
        for t in 0..64 {
            let before = agent.resample_count();
            agent.act(0, t).unwrap();
            if agent.resample_count() > before {
                boundaries.push(t);
            }
        }
        let mut lengths = Vec::new();
        let mut prev = 0;
        for &b in &boundaries {
            lengths.push(b - prev);
            prev = b;
        }
        for w in lengths.windows(2) {
            assert!(w[1] <= w[0] + 1, "episode lengths {lengths:?}");
        }

        // A first visit to a fresh state-action pair triggers rule (b).
        let mut agent = ThompsonAgent::new(
            &family,
            ReplanRule::EpisodeDriven,
            AgentStreams::for_run(8, 0),
        )
        .unwrap();
        agent.act(0, 0).unwrap();
        agent.observe(0, 1, 1);
        let before = agent.resample_count();
        agent.act(1, 1).unwrap();
        assert_eq!(agent.resample_count(), before + 1);
    }

    #[test]
    fn identical_seeds_give_identical_action_sequences() {
        let family = river_family();
        let run = |seed: u64| {
            let mut env = RngStream::for_run(seed, 0, StreamPurpose::Environment);
            let model = riverswim_model(&RiverSwimParams::new(0.5).unwrap(), 0.99);
            let mut agent = ThompsonAgent::new(
                &family,
                ReplanRule::EpsilonGreedy(DeltaSchedule::InverseT),
                AgentStreams::for_run(seed, 0),
            )
            .unwrap();
            let mut s = 0;
            let mut actions = Vec::new();
            for t in 0..300 {
                let a = agent.act(s, t).unwrap();
                let (next, _) = step_finite(&model, s, a, &mut env).unwrap();
                agent.observe(s, a, next);
                actions.push(a);
                s = next;
            }
            actions
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43));
    }

    #[test]
    fn point_mass_agent_reaches_near_optimal_proportion_under_exploration() {
        // With the true parameter known and delta = 0.05, the expected
        // optimal-action proportion is 1 - 0.05/2.
        let theta0 = 0.9;
        let family = river_family();
        let model = riverswim_model(&RiverSwimParams::new(theta0).unwrap(), 0.99);
        let plan = value_iteration(&model, 1e-10, 100_000).unwrap();
        let mut agent = ThompsonAgent::new(
            &family,
            ReplanRule::EpsilonGreedy(DeltaSchedule::Constant(0.05)),
            AgentStreams::for_run(9, 0),
        )
        .unwrap();
        agent.set_posterior(GridPosterior::point_mass_at(1, 1024, &[theta0]));
        let mut env = RngStream::for_run(9, 0, StreamPurpose::Environment);
        let mut s = 0;
        let horizon = 10_000;
        let mut optimal = 0;
        for t in 0..horizon {
            let a = agent.act(s, t).unwrap();
            if Some(a) == plan.policy.deterministic_action(s) {
                optimal += 1;
            }
            let (next, _) = step_finite(&model, s, a, &mut env).unwrap();
            // No observe: the belief stays degenerate at the truth.
            s = next;
        }
        let proportion = optimal as f64 / horizon as f64;
        assert!((proportion - 0.975).abs() < 0.01, "proportion {proportion}");
    }
}
