//! Clipped-surrogate policy step and value regression.

use thiserror::Error;

use super::batch::Batch;
use crate::nets::{kl_divergence, log_prob, log_prob_grad, Adam, Network, ShapeError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PpoError {
    #[error("non-finite {what} loss; parameters restored")]
    NumericalDivergence { what: &'static str },
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateConfig {
    /// Discount of the terminal-bonus channel.
    pub gamma1: f64,
    /// Discount of the shaping channel.
    pub gamma2: f64,
    pub kl_target: f64,
    /// Policy epochs stop once the measured KL exceeds this multiple of the
    /// target.
    pub kl_cutoff_factor: f64,
    pub policy_lr: f64,
    pub value_lr: f64,
    pub policy_epochs: usize,
    pub value_epochs: usize,
    /// Contiguous chunks per epoch, each taking one optimizer step.
    pub minibatches: usize,
    pub episodes_per_update: usize,
    pub initial_epsilon: f64,
}

impl Default for UpdateConfig {
    fn default() -> Self {
        Self {
            gamma1: 0.995,
            gamma2: 0.95,
            kl_target: 0.001,
            kl_cutoff_factor: 4.0,
            policy_lr: 3e-4,
            value_lr: 1e-3,
            policy_epochs: 20,
            value_epochs: 10,
            minibatches: 4,
            episodes_per_update: 30,
            initial_epsilon: 0.2,
        }
    }
}

/// Clipped surrogate term `min(p A, clip(p, 1 - e, 1 + e) A)`.
pub fn clipped_objective(ratio: f64, advantage: f64, epsilon: f64) -> f64 {
    (ratio * advantage).min(ratio.clamp(1.0 - epsilon, 1.0 + epsilon) * advantage)
}

/// Steers the clip range toward the KL target.
pub fn adapt_clip(kl: f64, epsilon: f64, kl_target: f64) -> f64 {
    if kl > 2.0 * kl_target {
        (epsilon / 1.5).max(0.01)
    } else if kl < 0.5 * kl_target {
        (epsilon * 1.5).min(0.5)
    } else {
        epsilon
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SurrogateStats {
    /// Negated mean clipped objective over valid rows.
    pub loss: f64,
    pub clip_fraction: f64,
    /// Mean `KL(old || current)` over valid rows.
    pub kl: f64,
}

/// Mean of `KL(old || new)` over valid rows.
pub fn mean_kl(old_mean: &[f64], old_log_std: &[f64], new_mean: &[f64], new_log_std: &[f64], mask: &[f64], act_dim: usize) -> f64 {
    let n: f64 = mask.iter().sum();
    let mut total = 0.0;
    for (i, m) in mask.iter().enumerate() {
        if *m > 0.0 {
            let rows = i * act_dim..(i + 1) * act_dim;
            total += kl_divergence(&old_mean[rows.clone()], old_log_std, &new_mean[rows], new_log_std);
        }
    }
    if n > 0.0 {
        total / n
    } else {
        0.0
    }
}

/// Surrogate loss of the current policy on a batch and, when `grads` is
/// given, its gradient (accumulated, including the log-std block).
pub fn surrogate_loss(
    policy: &Network,
    batch: &Batch,
    advantages: &[f64],
    epsilon: f64,
    old_mean: Option<&[f64]>,
    old_log_std: &[f64],
    grads: Option<&mut [f64]>,
) -> Result<SurrogateStats, ShapeError> {
    let ad = batch.act_dim;
    let cache = policy.forward(&batch.obs, &batch.policy_h0, batch.unroll)?;
    let log_std = policy.log_std();
    let n: f64 = batch.mask.iter().sum();
    let inv_n = if n > 0.0 { 1.0 / n } else { 0.0 };
    let mut d_out = vec![0.0; cache.out.len()];
    let mut d_ls_total = vec![0.0; ad];
    let mut d_mean = vec![0.0; ad];
    let mut d_ls = vec![0.0; ad];
    let mut objective = 0.0;
    let mut clipped = 0.0;
    for i in 0..batch.rows {
        if batch.mask[i] == 0.0 {
            continue;
        }
        let rows = i * ad..(i + 1) * ad;
        let mean = &cache.out[rows.clone()];
        let action = &batch.actions[rows.clone()];
        let lp = log_prob(mean, log_std, action);
        let ratio = (lp - batch.log_probs[i]).exp();
        let a = advantages[i];
        objective += clipped_objective(ratio, a, epsilon);
        let active = (a > 0.0 && ratio > 1.0 + epsilon) || (a < 0.0 && ratio < 1.0 - epsilon);
        if active {
            clipped += 1.0;
            continue;
        }
        let coef = -ratio * a * inv_n;
        log_prob_grad(mean, log_std, action, &mut d_mean, &mut d_ls);
        for k in 0..ad {
            d_out[rows.start + k] = coef * d_mean[k];
            d_ls_total[k] += coef * d_ls[k];
        }
    }
    let kl = old_mean.map_or(0.0, |om| mean_kl(om, old_log_std, &cache.out, log_std, &batch.mask, ad));
    if let Some(g) = grads {
        policy.backward(&cache, &d_out, g);
        let l = policy.layout;
        for k in 0..ad {
            g[l.log_std + k] += d_ls_total[k];
        }
    }
    Ok(SurrogateStats {
        loss: -objective * inv_n,
        clip_fraction: clipped * inv_n,
        kl,
    })
}

/// Mean squared error of the value predictions against `targets` over valid
/// rows, with its gradient accumulated into `grads` when given.
pub fn value_loss(value: &Network, batch: &Batch, targets: &[f64], grads: Option<&mut [f64]>) -> Result<f64, ShapeError> {
    let cache = value.forward(&batch.obs, &batch.value_h0, batch.unroll)?;
    let n: f64 = batch.mask.iter().sum();
    let inv_n = if n > 0.0 { 1.0 / n } else { 0.0 };
    let mut d_out = vec![0.0; cache.out.len()];
    let mut loss = 0.0;
    for i in 0..batch.rows {
        if batch.mask[i] > 0.0 {
            let e = cache.out[i] - targets[i];
            loss += e * e;
            d_out[i] = 2.0 * e * inv_n;
        }
    }
    if let Some(g) = grads {
        value.backward(&cache, &d_out, g);
    }
    Ok(loss * inv_n)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UpdateDiagnostics {
    /// `KL(old || new)` after the last policy step.
    pub kl: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub clip_fraction: f64,
    pub policy_epochs: usize,
}

const MAX_BACKTRACKS: usize = 30;

/// One PPO update: policy epochs with KL early stopping, then value epochs.
/// An epoch that overshoots the KL cutoff ends the policy phase and is
/// shortened by step halving until the KL is at most twice the target.
/// On a non-finite loss both networks are restored and an error returned.
#[allow(clippy::too_many_arguments)]
pub fn ppo_update(
    policy: &mut Network,
    value: &mut Network,
    policy_opt: &mut Adam,
    value_opt: &mut Adam,
    batch: &Batch,
    advantages: &[f64],
    epsilon: f64,
    config: &UpdateConfig,
) -> Result<UpdateDiagnostics, PpoError> {
    let saved_policy = policy.params.clone();
    let saved_value = value.params.clone();
    let old_cache = policy.forward(&batch.obs, &batch.policy_h0, batch.unroll)?;
    let old_mean = old_cache.out;
    let old_log_std = policy.log_std().to_vec();
    let cutoff = config.kl_cutoff_factor * config.kl_target;
    let settle = 2.0 * config.kl_target;

    let chunks = batch.chunks(config.minibatches);
    let restore = |policy: &mut Network, value: &mut Network, what| {
        policy.params.clone_from(&saved_policy);
        value.params.clone_from(&saved_value);
        PpoError::NumericalDivergence { what }
    };

    let mut diag = UpdateDiagnostics::default();
    let mut grads = vec![0.0; policy.params.len()];
    let mut start = policy.params.clone();
    for epoch in 0..config.policy_epochs {
        start.clone_from(&policy.params);
        let mut loss = 0.0;
        let mut clipped = 0.0;
        for (chunk, rows) in &chunks {
            if chunk.valid == 0 {
                continue;
            }
            grads.fill(0.0);
            let stats = surrogate_loss(policy, chunk, &advantages[rows.clone()], epsilon, None, &[], Some(&mut grads))?;
            if !stats.loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(restore(policy, value, "policy"));
            }
            let w = chunk.valid as f64 / batch.valid.max(1) as f64;
            loss += stats.loss * w;
            clipped += stats.clip_fraction * w;
            policy_opt.step(&mut policy.params, &grads);
        }
        if epoch == 0 {
            diag.policy_loss = loss;
        }
        diag.clip_fraction = clipped;
        diag.policy_epochs = epoch + 1;

        let measure = |policy: &Network| -> Result<f64, ShapeError> {
            let cache = policy.forward(&batch.obs, &batch.policy_h0, batch.unroll)?;
            Ok(mean_kl(&old_mean, &old_log_std, &cache.out, policy.log_std(), &batch.mask, batch.act_dim))
        };
        diag.kl = measure(policy)?;
        if !diag.kl.is_finite() {
            return Err(restore(policy, value, "policy"));
        }
        if diag.kl > cutoff {
            // Halve the epoch's step until the KL is back inside the band
            // `adapt_clip` leaves alone.
            for _ in 0..MAX_BACKTRACKS {
                for (p, s) in policy.params.iter_mut().zip(&start) {
                    *p = s + 0.5 * (*p - s);
                }
                diag.kl = measure(policy)?;
                if diag.kl <= settle {
                    break;
                }
            }
            if diag.kl > settle {
                policy.params.clone_from(&start);
                diag.kl = measure(policy)?;
            }
            break;
        }
    }

    let mut vgrads = vec![0.0; value.params.len()];
    for epoch in 0..config.value_epochs {
        let mut total = 0.0;
        for (chunk, _) in &chunks {
            if chunk.valid == 0 {
                continue;
            }
            vgrads.fill(0.0);
            let loss = value_loss(value, chunk, &chunk.returns, Some(&mut vgrads))?;
            if !loss.is_finite() || vgrads.iter().any(|g| !g.is_finite()) {
                return Err(restore(policy, value, "value"));
            }
            total += loss * chunk.valid as f64 / batch.valid.max(1) as f64;
            value_opt.step(&mut value.params, &vgrads);
        }
        if epoch == 0 {
            diag.value_loss = total;
        }
    }
    Ok(diag)
}
