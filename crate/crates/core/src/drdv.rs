//! Energy-optimal zero-miss/zero-velocity terminal guidance.

use crate::envs::{constrain_thrust, EnvConfig, FailureState};
use crate::sim::{BodyParams, LanderState, Vec3};

/// Time-to-go below which the law is replaced by gravity cancellation, s.
pub const HOVER_TGO: f64 = 0.5;

/// Commanded acceleration and whether the hover fallback produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelCommand {
    pub accel: Vec3,
    pub hover_fallback: bool,
}

/// `a = -6 r / t^2 - 4 v / t - g`, or `-g` once `t_go < HOVER_TGO`.
pub fn accel_command(r: &Vec3, v: &Vec3, g: &Vec3, t_go: f64) -> AccelCommand {
    if !(t_go >= HOVER_TGO) {
        return AccelCommand {
            accel: -g,
            hover_fallback: true,
        };
    }
    AccelCommand {
        accel: -6.0 * r / (t_go * t_go) - 4.0 * v / t_go - g,
        hover_fallback: false,
    }
}

/// Limits the time-to-go search must respect, as accelerations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TgoLimits {
    pub accel_min: f64,
    pub accel_max: f64,
    /// Reject trajectories dipping below the landing plane.
    pub keep_altitude: bool,
    /// Largest predicted speed when the hover fallback takes over, m/s.
    pub handoff_speed: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub grid_points: usize,
    pub refine_iters: usize,
}

impl TgoLimits {
    pub fn from_thrust(t_min: f64, t_max: f64, mass: f64) -> Self {
        Self {
            accel_min: t_min / mass,
            accel_max: t_max / mass,
            keep_altitude: true,
            handoff_speed: f64::INFINITY,
            t_lo: 0.5,
            t_hi: 1.0e4,
            grid_points: 120,
            refine_iters: 60,
        }
    }

    /// Same limits with time measured in units of `k`.
    pub fn rescaled(&self, k: f64) -> Self {
        Self {
            accel_min: self.accel_min / (k * k),
            accel_max: self.accel_max / (k * k),
            handoff_speed: self.handoff_speed / k,
            t_lo: self.t_lo * k,
            t_hi: self.t_hi * k,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TgoSolution {
    pub t_go: f64,
    /// False when no candidate met the limits and the fallback was used.
    pub feasible: bool,
    pub peak_accel: f64,
}

/// Peak thrust acceleration along the predicted closed-loop trajectory, or
/// `None` if it violates the limits.
fn evaluate(r: &Vec3, v: &Vec3, vf: &Vec3, g: &Vec3, t: f64, lim: &TgoLimits) -> Option<f64> {
    // Relative state that must reach zero at t.
    let (r, v) = (&(r + vf * t), &(v - vf));
    // Total acceleration is affine in time under the law: u(s) = c0 + c1 s.
    let c0 = -6.0 * r / (t * t) - 4.0 * v / t;
    let c1 = 12.0 * r / (t * t * t) + 6.0 * v / (t * t);
    let a0 = c0 - g;
    let a1 = a0 + c1 * t;
    let peak = a0.norm().max(a1.norm());
    if peak > lim.accel_max {
        return None;
    }
    let d = a1 - a0;
    let s = if d.norm_squared() > 0.0 {
        (-a0.dot(&d) / d.norm_squared()).clamp(0.0, 1.0)
    } else {
        0.0
    };
    if (a0 + d * s).norm() < lim.accel_min {
        return None;
    }
    if t > HOVER_TGO {
        let s = t - HOVER_TGO;
        if (v + c0 * s + c1 * (s * s / 2.0) + vf).norm() > lim.handoff_speed {
            return None;
        }
    }
    if lim.keep_altitude {
        const SAMPLES: usize = 64;
        for k in 1..SAMPLES {
            let s = t * k as f64 / SAMPLES as f64;
            let z = r.z + v.z * s + c0.z * s * s / 2.0 + c1.z * s * s * s / 6.0 - vf.z * (t - s);
            if z < 0.0 {
                return None;
            }
        }
    }
    Some(peak)
}

/// Time-to-go minimizing the peak commanded thrust subject to `lim`, found on
/// a log-spaced grid and refined by golden-section search.
pub fn solve_tgo(r: &Vec3, v: &Vec3, g: &Vec3, lim: &TgoLimits) -> TgoSolution {
    solve_tgo_to(r, v, &Vec3::zeros(), g, lim)
}

/// [`solve_tgo`] for arrival at velocity `vf` instead of rest.
pub fn solve_tgo_to(r: &Vec3, v: &Vec3, vf: &Vec3, g: &Vec3, lim: &TgoLimits) -> TgoSolution {
    let n = lim.grid_points.max(2);
    let ratio = (lim.t_hi / lim.t_lo).ln();
    let grid: Vec<f64> = (0..n).map(|i| lim.t_lo * (ratio * i as f64 / (n - 1) as f64).exp()).collect();
    let cost = |t: f64| evaluate(r, v, vf, g, t, lim).unwrap_or(f64::INFINITY);
    let costs: Vec<f64> = grid.iter().map(|&t| cost(t)).collect();
    let best = costs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i);
    let Some(i) = best else {
        return TgoSolution {
            t_go: 1.5 * r.norm() / v.norm().max(1e-6),
            feasible: false,
            peak_accel: f64::INFINITY,
        };
    };
    let (mut a, mut b) = (grid[i.saturating_sub(1)].ln(), grid[(i + 1).min(n - 1)].ln());
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (cost(x1.exp()), cost(x2.exp()));
    for _ in 0..lim.refine_iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = cost(x1.exp());
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = cost(x2.exp());
        }
    }
    let (t, c) = [(grid[i], costs[i]), (x1.exp(), f1), (x2.exp(), f2)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("non-empty");
    TgoSolution {
        t_go: t,
        feasible: true,
        peak_accel: c,
    }
}

/// Gravity the law compensates for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GravityModel {
    /// The episode's true gravity vector.
    Truth,
    Fixed(Vec3),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrdvConfig {
    pub gravity: GravityModel,
    /// Mass used to convert acceleration into thrust; `None` takes the
    /// episode's initial mass.
    pub mass: Option<f64>,
    /// Velocity targeted at touchdown, m/s.
    pub final_velocity: Vec3,
    pub keep_altitude: bool,
    /// See [`TgoLimits::handoff_speed`].
    pub handoff_speed: f64,
}

impl DrdvConfig {
    /// Mars default: true gravity, initial mass, 1 m/s vertical touchdown.
    pub fn planetary() -> Self {
        Self {
            gravity: GravityModel::Truth,
            mass: None,
            final_velocity: Vec3::new(0.0, 0.0, -1.0),
            keep_altitude: true,
            handoff_speed: 1.5,
        }
    }

    /// Asteroid default: fixed gravity parameter along every axis, arrival at
    /// rest.
    pub fn asteroid(gravity: f64) -> Self {
        Self {
            gravity: GravityModel::Fixed(Vec3::new(gravity, gravity, gravity)),
            mass: None,
            final_velocity: Vec3::zeros(),
            keep_altitude: false,
            handoff_speed: f64::INFINITY,
        }
    }

    pub fn for_scenario(config: &EnvConfig) -> Self {
        if config.scenario == "asteroid" {
            Self::asteroid(ASTEROID_GRAVITY)
        } else {
            Self::planetary()
        }
    }
}

/// Tuned asteroid gravity parameter, m/s^2.
pub const ASTEROID_GRAVITY: f64 = -1.0e-3;

/// Closed-loop DR/DV controller for one episode. `t_go` is solved at reset
/// and counted down each step.
#[derive(Debug, Clone)]
pub struct DrdvController {
    pub config: DrdvConfig,
    gravity: Vec3,
    mass: f64,
    t_go: f64,
    dt: f64,
    pub solution: TgoSolution,
}

impl DrdvController {
    pub fn new(config: DrdvConfig, env: &EnvConfig, state: &LanderState, body: &BodyParams) -> Self {
        let gravity = match config.gravity {
            GravityModel::Truth => body.g,
            GravityModel::Fixed(g) => g,
        };
        let mass = config.mass.unwrap_or(state.m);
        let mut lim = TgoLimits::from_thrust(env.thrust.min, env.thrust.max, mass);
        lim.keep_altitude = config.keep_altitude;
        lim.handoff_speed = config.handoff_speed;
        lim.t_hi = lim.t_hi.min(env.dt * env.max_steps as f64).max(lim.t_lo * 2.0);
        let solution = solve_tgo_to(&state.r, &state.v, &config.final_velocity, &gravity, &lim);
        Self {
            config,
            gravity,
            mass,
            t_go: solution.t_go,
            dt: env.dt,
            solution,
        }
    }

    pub fn t_go(&self) -> f64 {
        self.t_go
    }

    pub fn gravity(&self) -> Vec3 {
        self.gravity
    }

    /// Desired thrust for the current state, N, before actuator limits.
    /// Under the hover fallback the residual velocity error is also damped.
    pub fn desired_thrust(&self, state: &LanderState) -> Vec3 {
        let vf = self.config.final_velocity;
        let r = state.r + vf * self.t_go.max(0.0);
        let v = state.v - vf;
        let cmd = accel_command(&r, &v, &self.gravity, self.t_go);
        let accel = if cmd.hover_fallback {
            cmd.accel - v / self.dt
        } else {
            cmd.accel
        };
        accel * self.mass
    }

    /// Realizable thrust for the current state; advances the time-to-go.
    pub fn act(&mut self, state: &LanderState, env: &EnvConfig, failure: &FailureState) -> Vec3 {
        let t = constrain_thrust(&self.desired_thrust(state), env, failure).0;
        self.t_go -= self.dt;
        t
    }
}
