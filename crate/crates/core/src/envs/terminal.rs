//! Touchdown classification and the terminal-bonus channel.

use std::fmt;
use std::str::FromStr;

use super::config::EnvConfig;
use crate::sim::{LanderState, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    LandedSuccess,
    /// Touched down slowly enough but outside the position or glideslope limit.
    LandedMiss,
    /// Touched down at or above the velocity limit.
    CrashLimitViolation,
    Timeout,
    MassDepleted,
}

impl Termination {
    pub const ALL: [Termination; 5] = [
        Termination::LandedSuccess,
        Termination::LandedMiss,
        Termination::CrashLimitViolation,
        Termination::Timeout,
        Termination::MassDepleted,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::LandedSuccess => "landed-success",
            Termination::LandedMiss => "landed-miss",
            Termination::CrashLimitViolation => "crash-limit-violation",
            Termination::Timeout => "timeout",
            Termination::MassDepleted => "mass-depleted",
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Termination {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Termination::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown termination cause `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalStatus {
    pub done: bool,
    pub cause: Option<Termination>,
    pub glideslope: f64,
    pub r1: f64,
}

/// `|v_z| / |v_xy|`, with the horizontal speed floored at 1e-8.
pub fn glideslope(v: &Vec3) -> f64 {
    v.z.abs() / v.xy().norm().max(1e-8)
}

/// Classifies a state. `timed_out` marks the last permitted step.
pub fn terminal_check(state: &LanderState, timed_out: bool, config: &EnvConfig) -> TerminalStatus {
    let gs = glideslope(&state.v);
    let lim = &config.terminal;
    if state.r.z <= 0.0 {
        let speed_ok = state.v.norm() < lim.v_lim;
        let success = speed_ok && state.r.norm() < lim.r_lim && gs > lim.gs_lim;
        let cause = if success {
            Termination::LandedSuccess
        } else if speed_ok {
            Termination::LandedMiss
        } else {
            Termination::CrashLimitViolation
        };
        return TerminalStatus {
            done: true,
            cause: Some(cause),
            glideslope: gs,
            r1: if success { config.reward.eta } else { 0.0 },
        };
    }
    TerminalStatus {
        done: timed_out,
        cause: timed_out.then_some(Termination::Timeout),
        glideslope: gs,
        r1: 0.0,
    }
}
