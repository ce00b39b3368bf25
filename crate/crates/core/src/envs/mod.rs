//! Landing scenarios as episodic environments.

pub mod config;
mod shaping;
mod terminal;
mod thrust;
mod toy;

pub use config::{ConfigError, EnvConfig, ObservationMode, ThrustModel, PRESETS};
pub use shaping::{shaping_reward, target_velocity, TargetVelocity, T_GO_SENTINEL};
pub use terminal::{glideslope, terminal_check, TerminalStatus, Termination};
pub use thrust::{constrain_thrust, map_action_to_thrust, sample_engine_failure, FailureState, PULSE_THRESHOLD};
pub use toy::PointMassEnv;

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::altimeter::{beam_directions, measure, BeamMode, BeamSet, TerrainMap, TerrainError};
use crate::sim::{sample_disturbance, step_dynamics, BodyParams, DynamicsError, LanderState, ThrustCommand, Vec3};

pub type SimRng = ChaCha8Rng;

/// Ground-truth bookkeeping attached to every step, for logging only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub position: Vec3,
    pub velocity: Vec3,
    pub glideslope: f64,
    pub fuel_used: f64,
    pub thrust: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// Terminal-bonus channel.
    pub r1: f64,
    /// Shaping channel.
    pub r2: f64,
    pub done: bool,
    pub cause: Option<Termination>,
    pub info: StepInfo,
}

/// An episodic task driven by a Gaussian policy.
pub trait Environment {
    fn obs_dim(&self) -> usize;
    fn act_dim(&self) -> usize;
    /// Typical magnitude of a useful action, used to size initial exploration.
    fn action_scale(&self) -> f64 {
        1.0
    }
    /// Mean action of a freshly initialized policy, if not zero.
    fn action_prior(&self) -> Option<Vec<f64>> {
        None
    }
    fn reset(&mut self, rng: &mut SimRng) -> Vec<f64>;
    fn step(&mut self, action: &[f64], rng: &mut SimRng) -> StepOutcome;
    /// Ground-truth summary of the current state.
    fn info(&self) -> StepInfo;
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn uniform3<R: Rng + ?Sized>(rng: &mut R, r: &config::Range3) -> Vec3 {
    Vec3::new(
        uniform(rng, r.min[0], r.max[0]),
        uniform(rng, r.min[1], r.max[1]),
        uniform(rng, r.min[2], r.max[2]),
    )
}

/// Randomized initial conditions of one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeInit {
    pub state: LanderState,
    pub body: BodyParams,
    pub failure: FailureState,
}

/// Draws initial state, body parameters and failure mode, in that order.
pub fn sample_episode<R: Rng + ?Sized>(rng: &mut R, config: &EnvConfig) -> Result<EpisodeInit, ConfigError> {
    config.validate()?;
    let ic = &config.initial;
    let r = uniform3(rng, &ic.position);
    let v = uniform3(rng, &ic.velocity);
    let b = &config.body;
    let g = uniform3(rng, &b.gravity);
    let omega = uniform3(rng, &b.omega);
    let srp = uniform3(rng, &b.srp);
    let m = uniform(rng, ic.mass[0], ic.mass[1]);
    let failure = sample_engine_failure(rng, config);
    let body = BodyParams {
        g,
        omega,
        r_offset: Vec3::from(b.r_offset),
        srp,
        isp: b.isp,
        g_ref: b.g_ref,
        f_env_sigma: Vec3::from(b.f_env_sigma),
        dry_mass: b.dry_mass,
    };
    Ok(EpisodeInit {
        state: LanderState::new(r, v, m),
        body,
        failure,
    })
}

/// Builds the terrain named by the scenario's observation settings, or `None`
/// for state observations.
pub fn scenario_terrain(config: &EnvConfig) -> Result<Option<Arc<TerrainMap>>, TerrainError> {
    if config.observation.mode == ObservationMode::State {
        return Ok(None);
    }
    let o = &config.observation;
    let map = if o.terrain == "synthetic" {
        TerrainMap::synthetic(o.terrain_seed)
    } else {
        TerrainMap::load(std::path::Path::new(&o.terrain))?
    };
    Ok(Some(Arc::new(if o.mirror { map.mirror() } else { map })))
}

/// Builds the observation vector. Altimeter modes need `terrain`.
pub fn observe(state: &LanderState, v_o: f64, config: &EnvConfig, terrain: Option<&TerrainMap>) -> Vec<f64> {
    let tv = target_velocity(&state.r, &state.v, v_o, config);
    match config.observation.mode {
        ObservationMode::State => {
            let e = state.v - tv.v_targ;
            vec![e.x, e.y, e.z, state.r.z, tv.t_go]
        }
        mode => {
            let map = terrain.expect("altimeter observations need a terrain map");
            let o = &config.observation;
            let offset = Vec3::from(o.target_in_map);
            let p = state.r + offset;
            let beam_mode = if mode == ObservationMode::Altimeter {
                BeamMode::VelocityAveraged
            } else {
                BeamMode::TargetPointing
            };
            let beams = beam_directions(&p, &state.v, beam_mode, &offset)
                .or_else(|_| BeamSet::around(Vec3::new(0.0, 0.0, -1.0)))
                .expect("nadir axis is valid");
            let reading = measure(map, &p, &beams);
            let mut obs: Vec<f64> = reading.ranges.iter().map(|r| r / o.range_scale).collect();
            obs.push(tv.t_go);
            obs
        }
    }
}

/// One lander episode under a scenario.
#[derive(Debug, Clone)]
pub struct LandingEnv {
    config: EnvConfig,
    terrain: Option<Arc<TerrainMap>>,
    state: LanderState,
    body: BodyParams,
    failure: FailureState,
    v_o: f64,
    steps: usize,
    done: bool,
    last_thrust: Vec3,
}

impl LandingEnv {
    /// `terrain` must be present for altimeter observation modes.
    pub fn new(config: EnvConfig, terrain: Option<Arc<TerrainMap>>) -> Result<Self, ConfigError> {
        config.validate()?;
        if config.observation.mode != ObservationMode::State && terrain.is_none() {
            return Err(ConfigError::Invalid("altimeter observations need a terrain map".into()));
        }
        let body = BodyParams::simple(Vec3::zeros(), config.body.isp, config.body.dry_mass);
        Ok(Self {
            config,
            terrain,
            state: LanderState::new(Vec3::new(0.0, 0.0, 1.0), Vec3::zeros(), 1.0),
            body,
            failure: FailureState::nominal(),
            v_o: 0.0,
            steps: 0,
            done: true,
            last_thrust: Vec3::zeros(),
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> &LanderState {
        &self.state
    }

    pub fn body(&self) -> &BodyParams {
        &self.body
    }

    pub fn failure(&self) -> &FailureState {
        &self.failure
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Reference speed of the shaping field for this episode.
    pub fn v_o(&self) -> f64 {
        self.v_o
    }

    /// Starts an episode from explicit initial conditions.
    pub fn reset_to(&mut self, init: EpisodeInit) -> Vec<f64> {
        self.state = init.state;
        self.body = init.body;
        self.failure = init.failure;
        self.v_o = match self.config.shaping.v_o_source {
            config::SpeedReference::InitialSpeed => init.state.v.norm(),
            config::SpeedReference::Fixed => self.config.shaping.v_o,
        };
        self.steps = 0;
        self.done = false;
        self.last_thrust = Vec3::zeros();
        self.observe()
    }

    pub fn observe(&self) -> Vec<f64> {
        observe(&self.state, self.v_o, &self.config, self.terrain.as_deref())
    }

    /// Advances one control interval under an already-realizable thrust.
    fn advance(&mut self, cmd: ThrustCommand, rng: &mut SimRng) -> StepOutcome {
        assert!(!self.done, "step called on a finished episode; call reset first");
        let f_env = sample_disturbance(rng, &self.body);
        self.steps += 1;
        self.last_thrust = cmd.0;
        let timed_out = self.steps >= self.config.max_steps;
        let prev = self.state;
        let (status, r2) = match step_dynamics(&prev, &cmd, &self.body, &f_env, self.config.dt) {
            Ok(next) => {
                let mut touchdown = next;
                if next.r.z <= 0.0 && prev.r.z > 0.0 {
                    let f = prev.r.z / (prev.r.z - next.r.z);
                    touchdown.r = prev.r + (next.r - prev.r) * f;
                    touchdown.r.z = 0.0;
                    touchdown.v = prev.v + (next.v - prev.v) * f;
                }
                self.state = touchdown;
                let tv = target_velocity(&self.state.r, &self.state.v, self.v_o, &self.config);
                let r2 = shaping_reward(&self.state.v, &tv.v_targ, &cmd, &self.config);
                (terminal_check(&self.state, timed_out, &self.config), r2)
            }
            Err(DynamicsError::DepletedMass { .. }) | Err(DynamicsError::InvalidStep(_)) => {
                let tv = target_velocity(&prev.r, &prev.v, self.v_o, &self.config);
                let r2 = shaping_reward(&prev.v, &tv.v_targ, &cmd, &self.config);
                let status = TerminalStatus {
                    done: true,
                    cause: Some(Termination::MassDepleted),
                    glideslope: glideslope(&prev.v),
                    r1: self.config.reward.abort_penalty,
                };
                (status, r2)
            }
        };
        self.done = status.done;
        StepOutcome {
            obs: self.observe(),
            reward: status.r1 + r2,
            r1: status.r1,
            r2,
            done: status.done,
            cause: status.cause,
            info: self.info(),
        }
    }

    /// Applies a thrust vector in newtons, constrained like a policy action.
    pub fn step_thrust(&mut self, desired: &Vec3, rng: &mut SimRng) -> StepOutcome {
        let cmd = constrain_thrust(desired, &self.config, &self.failure);
        self.advance(cmd, rng)
    }
}

/// Thrust-to-weight ratio of the initial policy mean.
const HOVER_PRIOR: f64 = 1.3;

impl Environment for LandingEnv {
    fn obs_dim(&self) -> usize {
        self.config.obs_dim()
    }

    fn act_dim(&self) -> usize {
        self.config.act_dim()
    }

    /// Magnitude-band thrust starts pointing up at 1.3 times the nominal
    /// weight; pulsed thrust starts idle.
    fn action_prior(&self) -> Option<Vec<f64>> {
        let c = &self.config;
        if c.thrust.model != ThrustModel::MagnitudeBand {
            return None;
        }
        let mass = 0.5 * (c.initial.mass[0] + c.initial.mass[1]);
        let g = 0.5 * (c.body.gravity.min[2] + c.body.gravity.max[2]);
        let frac = ((HOVER_PRIOR * mass * g.abs() - c.thrust.min) / (c.thrust.max - c.thrust.min)).clamp(0.0, 1.0);
        Some(vec![0.0, 0.0, frac * 3f64.sqrt()])
    }

    fn reset(&mut self, rng: &mut SimRng) -> Vec<f64> {
        let init = sample_episode(rng, &self.config).expect("configuration validated at construction");
        self.reset_to(init)
    }

    fn step(&mut self, action: &[f64], rng: &mut SimRng) -> StepOutcome {
        let cmd = map_action_to_thrust(action, &self.config, &self.failure);
        self.advance(cmd, rng)
    }

    fn info(&self) -> StepInfo {
        StepInfo {
            position: self.state.r,
            velocity: self.state.v,
            glideslope: glideslope(&self.state.v),
            fuel_used: self.state.fuel_used,
            thrust: self.last_thrust,
        }
    }
}
