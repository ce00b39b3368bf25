//! Proximal policy optimization with recurrent-aware rollout storage.

mod batch;
mod rollout;
mod trainer;
mod update;

pub use batch::{discounted_returns, normalize_advantages, pad_for_unroll, padded_len, returns_and_advantages, single_discount_returns, Batch};
pub use rollout::{collect_rollouts, run_episode, ActionMode, Agent, Episode};
pub use trainer::{Trainer, TrainerConfig, UpdateStats};
pub use update::{
    adapt_clip, clipped_objective, mean_kl, ppo_update, surrogate_loss, value_loss, PpoError, SurrogateStats, UpdateConfig,
    UpdateDiagnostics,
};
