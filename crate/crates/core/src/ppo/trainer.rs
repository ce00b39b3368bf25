//! Collect-then-update training loop.

use super::batch::{normalize_advantages, pad_for_unroll, returns_and_advantages};
use super::rollout::{collect_rollouts, ActionMode, Agent, Episode};
use super::update::{adapt_clip, ppo_update, PpoError, UpdateConfig};
use crate::envs::{Environment, Termination};
use crate::nets::{Adam, Checkpoint, LayerSpec, Network, ObsScaler};
use crate::seeding::{derive_seed, stream_rng, streams};
use crate::stats::Summary;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainerConfig {
    pub update: UpdateConfig,
    pub recurrent: bool,
    /// Steps per unrolled segment; ignored by non-recurrent networks.
    pub unroll: usize,
    pub seed: u64,
    /// Episodes used to initialize the observation scaler.
    pub warmup_episodes: usize,
}

/// Per-update learning-curve record.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateStats {
    pub update: usize,
    pub episodes: usize,
    pub steps: usize,
    pub mean_return: f64,
    pub success_rate: f64,
    pub terminal_position: Summary,
    pub terminal_velocity: Summary,
    pub kl: f64,
    /// Clip range used by this update.
    pub epsilon: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub clip_fraction: f64,
    pub policy_epochs: usize,
}

impl UpdateStats {
    pub const CSV_HEADER: [&'static str; 17] = [
        "update",
        "episodes",
        "steps",
        "mean_return",
        "success_rate",
        "r_f_mean",
        "r_f_std",
        "r_f_max",
        "v_f_mean",
        "v_f_std",
        "v_f_max",
        "kl",
        "epsilon",
        "policy_loss",
        "value_loss",
        "clip_fraction",
        "policy_epochs",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let f = |x: f64| x.to_string();
        vec![
            self.update.to_string(),
            self.episodes.to_string(),
            self.steps.to_string(),
            f(self.mean_return),
            f(self.success_rate),
            f(self.terminal_position.mean),
            f(self.terminal_position.std),
            f(self.terminal_position.max),
            f(self.terminal_velocity.mean),
            f(self.terminal_velocity.std),
            f(self.terminal_velocity.max),
            f(self.kl),
            f(self.epsilon),
            f(self.policy_loss),
            f(self.value_loss),
            f(self.clip_fraction),
            self.policy_epochs.to_string(),
        ]
    }
}

pub struct Trainer<E: Environment> {
    pub env: E,
    pub agent: Agent,
    pub epsilon: f64,
    /// Number of updates completed.
    pub updates_done: usize,
    pub config: TrainerConfig,
    policy_opt: Adam,
    value_opt: Adam,
}

impl<E: Environment> Trainer<E> {
    /// Initializes both networks from the seed and fits the observation scaler
    /// on warm-up episodes of the untrained policy.
    pub fn new(env: E, config: TrainerConfig) -> Self {
        let (od, ad) = (env.obs_dim(), env.act_dim());
        let mut init_rng = stream_rng(config.seed, &[streams::INIT]);
        let policy = Network::init(LayerSpec::policy(od, ad, config.recurrent), env.action_scale(), &mut init_rng);
        let mut policy = policy;
        if let Some(bias) = env.action_prior() {
            let b4 = policy.layout.b4;
            policy.params[b4..b4 + ad].copy_from_slice(&bias);
        }
        let value = Network::init(LayerSpec::value(od, config.recurrent), 1.0, &mut init_rng);
        let agent = Agent {
            policy,
            value,
            scaler: ObsScaler::new(od),
        };
        let mut t = Self::from_agent(env, agent, config);
        t.warm_up();
        t
    }

    /// Resumes from existing networks without warm-up.
    pub fn from_agent(env: E, agent: Agent, config: TrainerConfig) -> Self {
        let policy_opt = Adam::new(agent.policy.params.len(), config.update.policy_lr);
        let value_opt = Adam::new(agent.value.params.len(), config.update.value_lr);
        Self {
            env,
            agent,
            epsilon: config.update.initial_epsilon,
            updates_done: 0,
            config,
            policy_opt,
            value_opt,
        }
    }

    fn warm_up(&mut self) {
        let seed = self.config.seed;
        let eps = collect_rollouts(&mut self.env, &self.agent, self.config.warmup_episodes, ActionMode::Sample, |k| {
            (
                derive_seed(seed, &[streams::WARMUP, 0, k as u64]),
                derive_seed(seed, &[streams::WARMUP, 1, k as u64]),
            )
        });
        for e in &eps {
            self.agent.scaler.update(&e.raw_obs);
        }
    }

    pub fn unroll(&self) -> usize {
        if self.config.recurrent {
            self.config.unroll
        } else {
            1
        }
    }

    /// Collects the next training batch with the current policy.
    pub fn collect(&mut self) -> Vec<Episode> {
        let seed = self.config.seed;
        let u = self.updates_done as u64;
        collect_rollouts(
            &mut self.env,
            &self.agent,
            self.config.update.episodes_per_update,
            ActionMode::Sample,
            |k| {
                (
                    derive_seed(seed, &[streams::TRAIN_ENV, u, k as u64]),
                    derive_seed(seed, &[streams::TRAIN_ACTION, u, k as u64]),
                )
            },
        )
    }

    /// Runs one collect-and-update cycle.
    pub fn update(&mut self) -> Result<UpdateStats, PpoError> {
        let episodes = self.collect();
        let uc = &self.config.update;
        let batch = pad_for_unroll(&episodes, self.unroll(), uc.gamma1, uc.gamma2);
        let (_, mut adv) = returns_and_advantages(&batch, &self.agent.value)?;
        normalize_advantages(&mut adv, &batch.mask);
        let epsilon = self.epsilon;
        let diag = ppo_update(
            &mut self.agent.policy,
            &mut self.agent.value,
            &mut self.policy_opt,
            &mut self.value_opt,
            &batch,
            &adv,
            epsilon,
            uc,
        )?;
        self.epsilon = adapt_clip(diag.kl, epsilon, uc.kl_target);
        for e in &episodes {
            self.agent.scaler.update(&e.raw_obs);
        }
        let stats = UpdateStats {
            update: self.updates_done,
            episodes: episodes.len(),
            steps: batch.valid,
            mean_return: episodes.iter().map(Episode::total_reward).sum::<f64>() / episodes.len() as f64,
            success_rate: episodes.iter().filter(|e| e.cause == Some(Termination::LandedSuccess)).count() as f64
                / episodes.len() as f64,
            terminal_position: Summary::of(&episodes.iter().map(|e| e.terminal.position.norm()).collect::<Vec<_>>()),
            terminal_velocity: Summary::of(&episodes.iter().map(|e| e.terminal.velocity.norm()).collect::<Vec<_>>()),
            kl: diag.kl,
            epsilon,
            policy_loss: diag.policy_loss,
            value_loss: diag.value_loss,
            clip_fraction: diag.clip_fraction,
            policy_epochs: diag.policy_epochs,
        };
        self.updates_done += 1;
        Ok(stats)
    }

    pub fn checkpoint(&self, scenario: &str) -> Checkpoint {
        Checkpoint {
            scenario: scenario.to_string(),
            unroll: self.unroll(),
            update: self.updates_done as u64,
            clip_epsilon: self.epsilon,
            policy: self.agent.policy.clone(),
            value: self.agent.value.clone(),
            scaler: self.agent.scaler.clone(),
        }
    }
}
