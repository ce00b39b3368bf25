//! Target-velocity field and per-step shaping reward.

use super::config::{EnvConfig, ShapingMode};
use crate::sim::{ThrustCommand, Vec3};

/// Time-to-go reported when the relative velocity vanishes, s.
pub const T_GO_SENTINEL: f64 = 1.0e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetVelocity {
    pub v_targ: Vec3,
    pub t_go: f64,
    /// Relative position the field points away from.
    pub r_hat: Vec3,
    pub v_hat: Vec3,
    pub tau: f64,
    /// True when the relative velocity was zero and `t_go` is the sentinel.
    pub degenerate: bool,
}

/// Evaluates the shaping field at `(r, v)` for reference speed `v_o`.
pub fn target_velocity(r: &Vec3, v: &Vec3, v_o: f64, config: &EnvConfig) -> TargetVelocity {
    let s = &config.shaping;
    let (r_hat, v_hat, tau) = match s.mode {
        ShapingMode::Direct => (*r, *v, s.tau1),
        ShapingMode::Piecewise if r.z > s.switch_altitude => (
            r - Vec3::new(0.0, 0.0, s.switch_altitude),
            v - Vec3::new(0.0, 0.0, s.approach_vz),
            s.tau1,
        ),
        ShapingMode::Piecewise => (Vec3::new(0.0, 0.0, r.z), v - Vec3::new(0.0, 0.0, s.final_vz), s.tau2),
    };
    let r_norm = r_hat.norm();
    let v_norm = v_hat.norm();
    let degenerate = v_norm == 0.0;
    let t_go = if degenerate { T_GO_SENTINEL } else { (r_norm / v_norm).min(T_GO_SENTINEL) };
    let v_targ = if r_norm > 0.0 {
        -v_o * (r_hat / r_norm) * (1.0 - (-t_go / tau).exp())
    } else {
        Vec3::zeros()
    };
    TargetVelocity {
        v_targ,
        t_go,
        r_hat,
        v_hat,
        tau,
        degenerate,
    }
}

/// Per-step shaping term: velocity tracking error, normalized effort, and a
/// constant.
pub fn shaping_reward(v: &Vec3, v_targ: &Vec3, cmd: &ThrustCommand, config: &EnvConfig) -> f64 {
    let w = &config.reward;
    w.alpha * (v - v_targ).norm() + w.beta * (cmd.magnitude() / config.thrust.max) + w.gamma
}
