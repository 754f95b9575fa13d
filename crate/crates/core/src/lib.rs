//! Bayesian inference over Markov decision process dynamics, with
//! Thompson-sampling agents, exact and fitted planners, and the metrics
//! needed to evaluate posterior convergence and decision quality.
//!
//! * [`mdp`] — finite models, trajectories, policies and sampling.
//! * [`envs`] — the concrete simulation environments.
//! * [`inference`] — grid posteriors and conjugate linear regression.
//! * [`planning`] — value iteration, policy evaluation and fitted Q
//!   iteration.
//! * [`agents`] — Thompson-sampling decision loops with several
//!   replanning rules.
//! * [`metrics`] — Hellinger semi-distances, regret quantities, rate
//!   slopes and aggregation helpers.
//! * [`rng`] — keyed, reproducible random streams.

pub mod agents;
pub mod envs;
pub mod inference;
pub mod mdp;
pub mod metrics;
pub mod planning;
pub mod rng;
