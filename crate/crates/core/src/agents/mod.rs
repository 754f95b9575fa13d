//! Online decision-making loops: Thompson sampling over finite MDP families
//! with several replanning rules, a uniform-random baseline, and the cohort
//! agents for the continuous-state glucose process.

mod finite;
mod glucose;
mod schedule;

pub use finite::{uniform_action, AgentStreams, ReplanRule, ThompsonAgent};
pub use glucose::{
    GlucoseAgent, GlucoseAgentConfig, GlucoseAgentError, GlucoseAgentStreams, GlucosePlanKind,
};
pub use schedule::{DeltaSchedule, ScheduleParseError};
