//! Episode recording with the hidden states seen at sampling time.

use crate::envs::{Environment, SimRng, StepInfo, Termination};
use crate::nets::{sample_action, Network, ObsScaler, StepScratch};

/// How actions are chosen from the policy distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionMode {
    Sample,
    /// Use the distribution mean.
    Mean,
}

/// Policy, value function and the observation scaler they share.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub policy: Network,
    pub value: Network,
    pub scaler: ObsScaler,
}

impl Agent {
    pub fn obs_dim(&self) -> usize {
        self.policy.spec.obs_dim
    }

    pub fn act_dim(&self) -> usize {
        self.policy.spec.out
    }

    pub fn policy_hidden_dim(&self) -> usize {
        self.policy.spec.hidden_dim()
    }

    pub fn value_hidden_dim(&self) -> usize {
        self.value.spec.hidden_dim()
    }
}

/// One recorded episode. Per-step arrays are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    /// Observations as produced by the environment.
    pub raw_obs: Vec<f64>,
    /// Observations after scaling, as fed to the networks.
    pub obs: Vec<f64>,
    pub actions: Vec<f64>,
    /// Behavior-policy log density of each action.
    pub log_probs: Vec<f64>,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    /// Policy hidden state before each step.
    pub policy_hidden: Vec<f64>,
    /// Value-function hidden state before each step.
    pub value_hidden: Vec<f64>,
    pub cause: Option<Termination>,
    /// Ground truth at the end of the episode.
    pub terminal: StepInfo,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.r1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r1.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.r1.iter().sum::<f64>() + self.r2.iter().sum::<f64>()
    }
}

/// Runs one episode. Environment randomness comes from `env_rng`, action
/// noise from `act_rng`.
pub fn run_episode<E: Environment + ?Sized>(
    env: &mut E,
    agent: &Agent,
    mode: ActionMode,
    env_rng: &mut SimRng,
    act_rng: &mut SimRng,
) -> Episode {
    let (od, ad) = (agent.obs_dim(), agent.act_dim());
    let (hp, hv) = (agent.policy_hidden_dim(), agent.value_hidden_dim());
    let mut ps: StepScratch = agent.policy.step_scratch();
    let mut vs: StepScratch = agent.value.step_scratch();
    let mut h_p = vec![0.0; hp];
    let mut h_v = vec![0.0; hv];
    let mut mean = vec![0.0; ad];
    let mut v_out = [0.0];
    let mut scaled = vec![0.0; od];
    let log_std = agent.policy.log_std().to_vec();

    let mut ep = Episode {
        raw_obs: Vec::new(),
        obs: Vec::new(),
        actions: Vec::new(),
        log_probs: Vec::new(),
        r1: Vec::new(),
        r2: Vec::new(),
        policy_hidden: Vec::new(),
        value_hidden: Vec::new(),
        cause: None,
        terminal: env.info(),
    };
    let mut raw = env.reset(env_rng);
    loop {
        agent.scaler.apply(&raw, &mut scaled);
        ep.raw_obs.extend_from_slice(&raw);
        ep.obs.extend_from_slice(&scaled);
        ep.policy_hidden.extend_from_slice(&h_p);
        ep.value_hidden.extend_from_slice(&h_v);
        agent.policy.step(&scaled, &mut h_p, &mut ps, &mut mean);
        if hv > 0 {
            agent.value.step(&scaled, &mut h_v, &mut vs, &mut v_out);
        }
        let (action, lp) = match mode {
            ActionMode::Sample => sample_action(&mean, &log_std, act_rng),
            ActionMode::Mean => (mean.clone(), f64::NAN),
        };
        let out = env.step(&action, env_rng);
        ep.actions.extend_from_slice(&action);
        ep.log_probs.push(lp);
        ep.r1.push(out.r1);
        ep.r2.push(out.r2);
        if out.done {
            ep.cause = out.cause;
            ep.terminal = out.info;
            return ep;
        }
        raw = out.obs;
    }
}

/// Collects `n_episodes` episodes; episode `k` draws from streams seeded by
/// `seed_of(k)`, which returns `(environment seed, action seed)`.
pub fn collect_rollouts<E: Environment + ?Sized>(
    env: &mut E,
    agent: &Agent,
    n_episodes: usize,
    mode: ActionMode,
    mut seed_of: impl FnMut(usize) -> (u64, u64),
) -> Vec<Episode> {
    use rand::SeedableRng;
    (0..n_episodes)
        .map(|k| {
            let (es, as_) = seed_of(k);
            let mut env_rng = SimRng::seed_from_u64(es);
            let mut act_rng = SimRng::seed_from_u64(as_);
            run_episode(env, agent, mode, &mut env_rng, &mut act_rng)
        })
        .collect()
}
