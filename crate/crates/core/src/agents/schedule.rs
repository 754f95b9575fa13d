//! Exploration-rate schedules.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Exploration rate as a function of the step index. The value is always in
/// `[0, 1]`; the time-decaying kinds clamp to 1 at `t = 0` so the first step
/// explores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaSchedule {
    /// A constant rate `c`.
    Constant(f64),
    /// `min(1, 1/t)`.
    InverseT,
    /// `min(1, t^p)`.
    Power(f64),
}

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleParseError {
    #[error("unknown schedule '{0}', expected const:<c>, inv_t or pow:<p>")]
    UnknownKind(String),
    #[error("invalid number in schedule '{0}'")]
    BadNumber(String),
    #[error("constant rate {0} outside [0, 1]")]
    RateOutOfRange(f64),
}

impl DeltaSchedule {
    pub fn constant(c: f64) -> Result<Self, ScheduleParseError> {
        if !(0.0..=1.0).contains(&c) {
            return Err(ScheduleParseError::RateOutOfRange(c));
        }
        Ok(DeltaSchedule::Constant(c))
    }

    /// Rate at step `t`.
    pub fn value(&self, t: usize) -> f64 {
        let rate = match self {
            DeltaSchedule::Constant(c) => *c,
            DeltaSchedule::InverseT => 1.0 / t.max(1) as f64,
            DeltaSchedule::Power(p) => (t.max(1) as f64).powf(*p),
        };
        rate.clamp(0.0, 1.0)
    }
}

impl fmt::Display for DeltaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaSchedule::Constant(c) => write!(f, "const:{c}"),
            DeltaSchedule::InverseT => write!(f, "inv_t"),
            DeltaSchedule::Power(p) => write!(f, "pow:{p}"),
        }
    }
}

impl FromStr for DeltaSchedule {
    type Err = ScheduleParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "inv_t" {
            return Ok(DeltaSchedule::InverseT);
        }
        if let Some(rest) = s.strip_prefix("const:") {
            let c: f64 = rest
                .parse()
                .map_err(|_| ScheduleParseError::BadNumber(s.to_string()))?;
            return DeltaSchedule::constant(c);
        }
        if let Some(rest) = s.strip_prefix("pow:") {
            let p: f64 = rest
                .parse()
                .map_err(|_| ScheduleParseError::BadNumber(s.to_string()))?;
            if !p.is_finite() {
                return Err(ScheduleParseError::BadNumber(s.to_string()));
            }
            return Ok(DeltaSchedule::Power(p));
        }
        Err(ScheduleParseError::UnknownKind(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decaying_kinds_clamp_to_one_at_time_zero() {
        assert_eq!(DeltaSchedule::InverseT.value(0), 1.0);
        assert_eq!(DeltaSchedule::InverseT.value(1), 1.0);
        assert_eq!(DeltaSchedule::InverseT.value(2), 0.5);
        assert_eq!(DeltaSchedule::Power(-0.25).value(0), 1.0);
        assert!((DeltaSchedule::Power(-0.25).value(16) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn values_stay_in_unit_interval() {
        for sched in [
            DeltaSchedule::Constant(0.05),
            DeltaSchedule::InverseT,
            DeltaSchedule::Power(-0.25),
            DeltaSchedule::Power(0.5),
        ] {
            for t in 0..10_000 {
                let v = sched.value(t);
                assert!((0.0..=1.0).contains(&v), "{sched} at {t} gave {v}");
            }
        }
    }

    #[test]
    fn parsing_round_trips() {
        for text in ["const:0.05", "inv_t", "pow:-0.25"] {
            let sched: DeltaSchedule = text.parse().unwrap();
            assert_eq!(sched.to_string(), text);
        }
    }

    #[test]
    fn parse_errors_are_typed() {
        assert_eq!(
            "boom".parse::<DeltaSchedule>(),
            Err(ScheduleParseError::UnknownKind("boom".into()))
        );
        assert_eq!(
            "const:x".parse::<DeltaSchedule>(),
            Err(ScheduleParseError::BadNumber("const:x".into()))
        );
        assert_eq!(
            "const:1.5".parse::<DeltaSchedule>(),
            Err(ScheduleParseError::RateOutOfRange(1.5))
        );
    }
}
