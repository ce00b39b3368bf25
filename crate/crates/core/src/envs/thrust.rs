//! Engine-failure sampling and the policy-output to thrust mapping.

use rand::Rng;

use super::config::{EnvConfig, ThrustModel};
use crate::sim::{ThrustCommand, Vec3};

/// Pulsed thrusters fire when the per-axis command leaves `(-1/3, 1/3)`.
pub const PULSE_THRESHOLD: f64 = 1.0 / 3.0;

/// Per-axis fraction of the rated maximum thrust still available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureState {
    pub multipliers: [f64; 3],
}

impl FailureState {
    pub fn nominal() -> Self {
        Self { multipliers: [1.0; 3] }
    }

    pub fn is_failed(&self) -> bool {
        self.multipliers != [1.0; 3]
    }

    /// Per-axis force caps, N.
    pub fn caps(&self, t_max: f64) -> [f64; 3] {
        self.multipliers.map(|m| m * t_max)
    }
}

/// Draws the episode's failure mode. A failure halves (by the lateral factor)
/// one of the two horizontal axes, chosen by a fair coin, and derates the
/// vertical axis.
pub fn sample_engine_failure<R: Rng + ?Sized>(rng: &mut R, config: &EnvConfig) -> FailureState {
    let f = &config.failure;
    if f.p_fail <= 0.0 || rng.random::<f64>() >= f.p_fail {
        return FailureState::nominal();
    }
    let mut multipliers = [1.0; 3];
    let axis = if rng.random::<bool>() { 0 } else { 1 };
    multipliers[axis] = 1.0 / f.lateral_factor;
    multipliers[2] = 1.0 / f.vertical_factor;
    FailureState { multipliers }
}

fn apply_caps(t: &mut Vec3, caps: &[f64; 3]) {
    for i in 0..3 {
        t[i] = t[i].clamp(-caps[i], caps[i]);
    }
}

/// Clamps a desired thrust vector to the magnitude band, then to the failure
/// caps, raising the magnitude back to the lower bound when the caps allow.
fn band_limit(mut t: Vec3, config: &EnvConfig, failure: &FailureState) -> Vec3 {
    let (t_min, t_max) = (config.thrust.min, config.thrust.max);
    let n = t.norm();
    if n == 0.0 || !n.is_finite() {
        t = Vec3::new(0.0, 0.0, t_min);
    } else {
        t *= n.clamp(t_min, t_max) / n;
    }
    let caps = failure.caps(t_max);
    apply_caps(&mut t, &caps);
    let n = t.norm();
    if n < t_min && n > 0.0 {
        t *= t_min / n;
        apply_caps(&mut t, &caps);
    }
    t
}

fn pulse(u: f64, cap: f64) -> f64 {
    if u > PULSE_THRESHOLD {
        cap
    } else if u < -PULSE_THRESHOLD {
        -cap
    } else {
        0.0
    }
}

/// Maps a raw policy output to a realizable thrust command.
///
/// Magnitude-band engines point along the action; the action norm, scaled so
/// that a unit vector per axis (`|a| = sqrt 3`) commands full thrust, sets the
/// magnitude between the band limits. Pulsed engines quantize each axis.
pub fn map_action_to_thrust(action: &[f64], config: &EnvConfig, failure: &FailureState) -> ThrustCommand {
    assert_eq!(action.len(), 3, "thrust actions are 3-vectors");
    let a = Vec3::new(action[0], action[1], action[2]);
    match config.thrust.model {
        ThrustModel::Pulsed => {
            let caps = failure.caps(config.thrust.max);
            ThrustCommand(Vec3::new(pulse(a.x, caps[0]), pulse(a.y, caps[1]), pulse(a.z, caps[2])))
        }
        ThrustModel::MagnitudeBand => {
            let n = a.norm();
            if !n.is_finite() {
                return ThrustCommand(band_limit(Vec3::zeros(), config, failure));
            }
            let (t_min, t_max) = (config.thrust.min, config.thrust.max);
            let frac = (n / 3f64.sqrt()).clamp(0.0, 1.0);
            let dir = if n > 0.0 { a / n } else { Vec3::new(0.0, 0.0, 1.0) };
            ThrustCommand(band_limit(dir * (t_min + (t_max - t_min) * frac), config, failure))
        }
    }
}

/// Realizes a thrust vector requested directly in newtons (classical
/// guidance), applying the same constraints as [`map_action_to_thrust`].
pub fn constrain_thrust(desired: &Vec3, config: &EnvConfig, failure: &FailureState) -> ThrustCommand {
    match config.thrust.model {
        ThrustModel::Pulsed => {
            let caps = failure.caps(config.thrust.max);
            let t_max = config.thrust.max;
            ThrustCommand(Vec3::new(
                pulse(desired.x / t_max, caps[0]),
                pulse(desired.y / t_max, caps[1]),
                pulse(desired.z / t_max, caps[2]),
            ))
        }
        ThrustModel::MagnitudeBand => ThrustCommand(band_limit(*desired, config, failure)),
    }
}
