//! Scenario descriptions, built-in presets, and the TOML override format.
//!
//! A scenario file names a preset and overrides any subset of its keys:
//!
//! ```toml
//! preset = "mars-engine-failure"
//!
//! [thrust]
//! max = 20000.0
//!
//! [failure]
//! p_fail = 0.25
//! ```
//!
//! Every field of [`EnvConfig`] is reachable this way; unknown keys are
//! rejected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown scenario preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("scenario file does not parse: {0}")]
    Parse(String),
}

/// Axis-aligned box `[min, max]` sampled uniformly per component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range3 {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Range3 {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Self { min, max }
    }

    pub fn point(p: [f64; 3]) -> Self {
        Self { min: p, max: p }
    }

    pub fn symmetric(half_width: f64) -> Self {
        Self::new([-half_width; 3], [half_width; 3])
    }

    fn check(&self, what: &str) -> Result<(), ConfigError> {
        for i in 0..3 {
            if !(self.min[i].is_finite() && self.max[i].is_finite()) || self.min[i] > self.max[i] {
                return Err(ConfigError::Invalid(format!(
                    "{what}: component {i} range [{}, {}] is inverted or non-finite",
                    self.min[i], self.max[i]
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConditions {
    /// m, target-centered frame
    pub position: Range3,
    /// m/s
    pub velocity: Range3,
    /// Wet mass range, kg.
    pub mass: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodyConfig {
    pub gravity: Range3,
    pub omega: Range3,
    pub srp: Range3,
    pub r_offset: [f64; 3],
    pub isp: f64,
    pub g_ref: f64,
    pub dry_mass: f64,
    pub f_env_sigma: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThrustModel {
    /// Thrust vector along the action direction with magnitude in `[min, max]`.
    MagnitudeBand,
    /// Each axis fires at `-max`, `0` or `+max`.
    Pulsed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThrustConfig {
    pub model: ThrustModel,
    /// N (magnitude-band only)
    pub min: f64,
    /// N; per axis for pulsed thrusters
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardWeights {
    /// Weight on the velocity tracking error.
    pub alpha: f64,
    /// Weight on thrust magnitude normalized by the maximum thrust.
    pub beta: f64,
    /// Constant per-step term.
    pub gamma: f64,
    /// Terminal bonus for a landing within limits.
    pub eta: f64,
    /// Terminal reward when the episode aborts on propellant depletion.
    pub abort_penalty: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapingMode {
    /// Aim point above the target with a vertical final segment.
    Piecewise,
    /// Single-branch field pointing straight at the target.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedReference {
    /// Speed at the start of the episode.
    InitialSpeed,
    /// The fixed value in [`ShapingConfig::v_o`].
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapingConfig {
    pub mode: ShapingMode,
    pub v_o_source: SpeedReference,
    /// m/s, used when `v_o_source = "fixed"`
    pub v_o: f64,
    /// s, above the switch altitude (or the only constant in direct mode)
    pub tau1: f64,
    /// s, below the switch altitude
    pub tau2: f64,
    /// Altitude of the aim point and of the branch switch, m.
    pub switch_altitude: f64,
    /// Vertical velocity targeted while approaching the aim point, m/s.
    pub approach_vz: f64,
    /// Vertical velocity targeted during the final vertical segment, m/s.
    pub final_vz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminalLimits {
    pub r_lim: f64,
    pub v_lim: f64,
    /// Minimum touchdown glideslope `|v_z| / |v_xy|`.
    pub gs_lim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discounts {
    /// Applied to the terminal-bonus channel.
    pub gamma1: f64,
    /// Applied to the shaping channel.
    pub gamma2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureModel {
    pub p_fail: f64,
    /// Divisor applied to the failed lateral axis.
    pub lateral_factor: f64,
    /// Divisor applied to the vertical axis.
    pub vertical_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservationMode {
    /// `[v - v_targ, r_z, t_go]`
    State,
    /// Four altimeter ranges around the velocity/nadir bisector, plus `t_go`.
    Altimeter,
    /// Four altimeter ranges around the line of sight to the target, plus `t_go`.
    AltimeterTargetPointing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationConfig {
    pub mode: ObservationMode,
    /// Ranges are divided by this before entering the observation, m.
    pub range_scale: f64,
    /// Landing target expressed in the terrain-map frame, m.
    pub target_in_map: [f64; 3],
    /// `"synthetic"` or a path to a grid file.
    pub terrain: String,
    pub terrain_seed: u64,
    /// Double the map by reflecting it about its last row.
    pub mirror: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    pub scenario: String,
    /// Control interval, s.
    pub dt: f64,
    pub max_steps: usize,
    pub initial: InitialConditions,
    pub body: BodyConfig,
    pub thrust: ThrustConfig,
    pub reward: RewardWeights,
    pub shaping: ShapingConfig,
    pub terminal: TerminalLimits,
    pub discount: Discounts,
    pub failure: FailureModel,
    pub observation: ObservationConfig,
}

pub const MARS_GRAVITY: f64 = -3.7114;

/// Names accepted by [`EnvConfig::preset`].
pub const PRESETS: &[&str] = &[
    "mars-nominal",
    "mars-deterministic",
    "mars-engine-failure",
    "mars-high-mass",
    "mars-altimeter",
    "mars-altimeter-pointing",
    "asteroid",
];

impl EnvConfig {
    fn mars_base() -> Self {
        let g = MARS_GRAVITY;
        Self {
            scenario: "mars-nominal".into(),
            dt: 0.2,
            max_steps: 600,
            initial: InitialConditions {
                position: Range3::new([0.0, -1000.0, 2300.0], [2000.0, 1000.0, 2400.0]),
                velocity: Range3::new([-70.0, -30.0, -90.0], [-10.0, 30.0, -70.0]),
                mass: [0.9 * 2000.0, 1.1 * 2000.0],
            },
            body: BodyConfig {
                gravity: Range3::new([0.0, 0.0, 1.05 * g], [0.0, 0.0, 0.95 * g]),
                omega: Range3::point([0.0; 3]),
                srp: Range3::point([0.0; 3]),
                r_offset: [0.0; 3],
                isp: 225.0,
                g_ref: 9.8,
                dry_mass: 200.0,
                f_env_sigma: [100.0; 3],
            },
            thrust: ThrustConfig {
                model: ThrustModel::MagnitudeBand,
                min: 2000.0,
                max: 15000.0,
            },
            reward: RewardWeights {
                alpha: -0.01,
                beta: -0.05,
                gamma: 0.01,
                eta: 10.0,
                abort_penalty: -10.0,
            },
            shaping: ShapingConfig {
                mode: ShapingMode::Piecewise,
                v_o_source: SpeedReference::InitialSpeed,
                v_o: 0.0,
                tau1: 20.0,
                tau2: 100.0,
                switch_altitude: 15.0,
                approach_vz: -2.0,
                final_vz: -1.0,
            },
            terminal: TerminalLimits {
                r_lim: 5.0,
                v_lim: 2.0,
                gs_lim: 5.0,
            },
            discount: Discounts {
                gamma1: 0.995,
                gamma2: 0.95,
            },
            failure: FailureModel {
                p_fail: 0.0,
                lateral_factor: 2.0,
                vertical_factor: 1.5,
            },
            observation: ObservationConfig {
                mode: ObservationMode::State,
                range_scale: 5000.0,
                target_in_map: [4000.0, 4000.0, 400.0],
                terrain: "synthetic".into(),
                terrain_seed: 7,
                mirror: true,
            },
        }
    }

    fn asteroid() -> Self {
        let mut c = Self::mars_base();
        c.scenario = "asteroid".into();
        c.dt = 6.0;
        c.max_steps = 500;
        c.initial = InitialConditions {
            position: Range3::new([900.0; 3], [1100.0; 3]),
            velocity: Range3::point([-1.0; 3]),
            mass: [450.0, 500.0],
        };
        c.body = BodyConfig {
            gravity: Range3::new([-100e-6; 3], [-1e-6; 3]),
            omega: Range3::symmetric(1e-3),
            srp: Range3::symmetric(1e-6),
            r_offset: [0.0, 0.0, 250.0],
            isp: 225.0,
            g_ref: 9.8,
            dry_mass: 300.0,
            f_env_sigma: [0.02; 3],
        };
        c.thrust = ThrustConfig {
            model: ThrustModel::Pulsed,
            min: 0.0,
            max: 2.0,
        };
        c.reward.alpha = -1.0;
        c.reward.beta = -0.01;
        c.shaping = ShapingConfig {
            mode: ShapingMode::Direct,
            v_o_source: SpeedReference::Fixed,
            v_o: 1.0,
            tau1: 300.0,
            tau2: 300.0,
            switch_altitude: 0.0,
            approach_vz: 0.0,
            final_vz: 0.0,
        };
        c.terminal = TerminalLimits {
            r_lim: 1.0,
            v_lim: 0.2,
            gs_lim: 0.0,
        };
        c
    }

    /// Built-in scenario by name (see [`PRESETS`]).
    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        let mut c = match name {
            "mars-nominal" => Self::mars_base(),
            "mars-deterministic" => {
                let mut c = Self::mars_base();
                c.initial.mass = [2000.0, 2000.0];
                c.body.gravity = Range3::point([0.0, 0.0, MARS_GRAVITY]);
                c.body.f_env_sigma = [0.0; 3];
                c
            }
            "mars-engine-failure" => {
                let mut c = Self::mars_base();
                c.thrust.max = 24000.0;
                c.failure.p_fail = 0.5;
                c
            }
            "mars-high-mass" => {
                let mut c = Self::mars_base();
                c.body.isp = 225.0 / 6.0;
                c
            }
            "mars-altimeter" => {
                let mut c = Self::mars_base();
                c.observation.mode = ObservationMode::Altimeter;
                c
            }
            "mars-altimeter-pointing" => {
                let mut c = Self::mars_base();
                c.observation.mode = ObservationMode::AltimeterTargetPointing;
                c.initial.position = Range3::new([0.0, -500.0, 1000.0], [1000.0, 500.0, 1000.0]);
                c.initial.velocity = Range3::new([-30.0, -30.0, -50.0], [-10.0, 30.0, -40.0]);
                c
            }
            "asteroid" => Self::asteroid(),
            other => return Err(ConfigError::UnknownPreset(other.to_string())),
        };
        c.scenario = name.to_string();
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        self.initial.position.check("initial.position")?;
        self.initial.velocity.check("initial.velocity")?;
        self.body.gravity.check("body.gravity")?;
        self.body.omega.check("body.omega")?;
        self.body.srp.check("body.srp")?;
        let [m_lo, m_hi] = self.initial.mass;
        if !(m_lo.is_finite() && m_hi.is_finite()) || m_lo > m_hi {
            return bad(format!("initial.mass range [{m_lo}, {m_hi}] is inverted"));
        }
        if m_lo <= self.body.dry_mass {
            return bad("initial mass must exceed the dry mass".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        if !(self.body.isp > 0.0) || !(self.body.g_ref > 0.0) {
            return bad("isp and g_ref must be positive".into());
        }
        if self.body.f_env_sigma.iter().any(|s| !(*s >= 0.0)) {
            return bad("f_env_sigma must be nonnegative".into());
        }
        if !(self.thrust.min >= 0.0 && self.thrust.min <= self.thrust.max && self.thrust.max > 0.0) {
            return bad(format!("thrust band [{}, {}] is invalid", self.thrust.min, self.thrust.max));
        }
        if !(0.0..=1.0).contains(&self.failure.p_fail) {
            return bad(format!("p_fail must lie in [0, 1], got {}", self.failure.p_fail));
        }
        if !(self.failure.lateral_factor >= 1.0 && self.failure.vertical_factor >= 1.0) {
            return bad("failure factors must be at least 1".into());
        }
        if !(self.terminal.r_lim > 0.0 && self.terminal.v_lim > 0.0) {
            return bad("r_lim and v_lim must be positive".into());
        }
        for g in [self.discount.gamma1, self.discount.gamma2] {
            if !(g > 0.0 && g < 1.0) {
                return bad(format!("discounts must lie in (0, 1), got {g}"));
            }
        }
        if !(self.shaping.tau1 > 0.0 && self.shaping.tau2 > 0.0) {
            return bad("shaping time constants must be positive".into());
        }
        if !(self.observation.range_scale > 0.0) {
            return bad("observation.range_scale must be positive".into());
        }
        Ok(())
    }

    /// Parses a scenario file: a `preset` key plus overrides.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        let preset = match table.remove("preset") {
            Some(toml::Value::String(s)) => s,
            Some(_) => return Err(ConfigError::Parse("`preset` must be a string".into())),
            None => return Err(ConfigError::Parse("missing `preset` key".into())),
        };
        let base = Self::preset(&preset)?;
        let mut merged = toml::Value::try_from(&base).map_err(|e| ConfigError::Parse(e.to_string()))?;
        merge(&mut merged, toml::Value::Table(table));
        let cfg: Self = merged.try_into().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn obs_dim(&self) -> usize {
        5
    }

    pub fn act_dim(&self) -> usize {
        3
    }
}

/// Recursively overlays `patch` onto `base`; tables merge, everything else
/// replaces.
fn merge(base: &mut toml::Value, patch: toml::Value) {
    match (base, patch) {
        (toml::Value::Table(b), toml::Value::Table(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(existing) => merge(existing, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}
