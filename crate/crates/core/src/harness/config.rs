use std::cmp::Ordering;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{io_err, HarnessError};
use crate::envs::EnvConfig;

/// Scenario key of the one-dimensional point-mass smoke environment.
pub const POINT_MASS: &str = "point-mass";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Drdv,
    Mlp,
    /// Recurrent policy unrolled over the given number of steps.
    Rnn(usize),
}

impl PolicyKind {
    /// Parses `drdv`, `mlp`, `rnn` (with `unroll`) or `rnnT`.
    pub fn parse(key: &str, unroll: Option<usize>) -> Result<Self, HarnessError> {
        let k = key.trim().to_ascii_lowercase();
        let bad = |m: String| Err(HarnessError::Config(m));
        match k.as_str() {
            "drdv" | "dr/dv" => Ok(Self::Drdv),
            "mlp" => Ok(Self::Mlp),
            "rnn" => match unroll {
                Some(t) if t >= 1 => Ok(Self::Rnn(t)),
                Some(_) => bad("unroll must be at least 1".into()),
                None => bad("policy `rnn` needs an unroll length".into()),
            },
            _ => {
                let Some(t) = k.strip_prefix("rnn").and_then(|s| s.parse::<usize>().ok()) else {
                    return bad(format!("unknown policy `{key}` (expected drdv, mlp, rnn or rnnT)"));
                };
                if t == 0 {
                    return bad("unroll must be at least 1".into());
                }
                if unroll.is_some_and(|u| u != t) {
                    return bad(format!("policy `{key}` conflicts with unroll {}", unroll.unwrap_or(0)));
                }
                Ok(Self::Rnn(t))
            }
        }
    }

    /// Directory-safe key, e.g. `rnn20`.
    pub fn key(&self) -> String {
        match self {
            Self::Drdv => "drdv".into(),
            Self::Mlp => "mlp".into(),
            Self::Rnn(t) => format!("rnn{t}"),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Drdv => "DR/DV".into(),
            Self::Mlp => "MLP".into(),
            Self::Rnn(t) => format!("RNN {t} steps"),
        }
    }

    fn rank(&self) -> (u8, usize) {
        match self {
            Self::Drdv => (0, 0),
            Self::Mlp => (1, 0),
            Self::Rnn(t) => (2, *t),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl Ord for PolicyKind {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

impl PartialOrd for PolicyKind {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Run file contents; every field is optional and command-line flags take
/// precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub scenario: Option<String>,
    pub policy: Option<String>,
    pub unroll: Option<usize>,
    pub seed: Option<u64>,
    pub updates: Option<usize>,
    pub episodes: Option<usize>,
    pub out: Option<PathBuf>,
    pub checkpoint_every: Option<usize>,
    pub warmup_episodes: Option<usize>,
    pub episodes_per_update: Option<usize>,
    pub drdv_gravity: Option<f64>,
    /// Scenario overrides, merged onto the preset named by `scenario`.
    pub env: Option<toml::Table>,
}

impl RunFile {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::parse(&std::fs::read_to_string(path).map_err(io_err(path))?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    /// `None` for the point-mass smoke scenario.
    pub env: Option<EnvConfig>,
    pub policy: PolicyKind,
    pub seed: u64,
    /// Training budget in PPO updates.
    pub updates: usize,
    pub eval_episodes: usize,
    pub out_dir: PathBuf,
    pub checkpoint_every: usize,
    pub warmup_episodes: usize,
    pub episodes_per_update: usize,
    /// Asteroid gravity parameter assumed by DR/DV, m/s^2.
    pub drdv_gravity: Option<f64>,
}

impl RunConfig {
    /// Desk-scale defaults for a scenario and policy.
    pub fn new(scenario: &str, policy: PolicyKind) -> Result<Self, HarnessError> {
        Self::from_file(RunFile {
            scenario: Some(scenario.into()),
            policy: Some(policy.key()),
            ..RunFile::default()
        })
    }

    pub fn from_file(file: RunFile) -> Result<Self, HarnessError> {
        let scenario = file.scenario.unwrap_or_else(|| "mars-nominal".into());
        let policy = PolicyKind::parse(file.policy.as_deref().unwrap_or("mlp"), file.unroll)?;
        let env = if scenario == POINT_MASS {
            if file.env.is_some() {
                return Err(HarnessError::Config(format!("`{POINT_MASS}` takes no env overrides")));
            }
            None
        } else {
            let mut table = file.env.unwrap_or_default();
            table.entry("preset").or_insert_with(|| toml::Value::String(scenario.clone()));
            let text = toml::to_string(&table).map_err(|e| HarnessError::Config(e.to_string()))?;
            Some(EnvConfig::from_toml_str(&text)?)
        };
        let cfg = Self {
            scenario,
            env,
            policy,
            seed: file.seed.unwrap_or(1),
            updates: file.updates.unwrap_or(400),
            eval_episodes: file.episodes.unwrap_or(1000),
            out_dir: file.out.unwrap_or_else(|| PathBuf::from("runs")),
            checkpoint_every: file.checkpoint_every.unwrap_or(50),
            warmup_episodes: file.warmup_episodes.unwrap_or(30),
            episodes_per_update: file.episodes_per_update.unwrap_or(30),
            drdv_gravity: file.drdv_gravity,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.into()));
        if self.eval_episodes == 0 {
            return bad("evaluation episode count must be at least 1");
        }
        if self.episodes_per_update == 0 {
            return bad("episodes_per_update must be at least 1");
        }
        if self.checkpoint_every == 0 {
            return bad("checkpoint_every must be at least 1");
        }
        if self.env.is_none() && self.policy == PolicyKind::Drdv {
            return bad("DR/DV needs a lander scenario");
        }
        if let Some(g) = self.drdv_gravity {
            if !g.is_finite() {
                return bad("drdv_gravity must be finite");
            }
        }
        Ok(())
    }
}
