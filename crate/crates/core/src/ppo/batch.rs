//! Padded training batches and dual-discount return targets.

use std::ops::Range;

use super::rollout::Episode;
use crate::nets::{Network, ShapeError};

/// Discounted return per step with separate rates for the two reward
/// channels.
pub fn discounted_returns(r1: &[f64], r2: &[f64], gamma1: f64, gamma2: f64) -> Vec<f64> {
    let n = r1.len();
    let mut out = vec![0.0; n];
    let (mut g1, mut g2) = (0.0, 0.0);
    for t in (0..n).rev() {
        g1 = r1[t] + gamma1 * g1;
        g2 = r2[t] + gamma2 * g2;
        out[t] = g1 + g2;
    }
    out
}

/// Single-rate discounted return of the summed reward.
pub fn single_discount_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut g = 0.0;
    for t in (0..rewards.len()).rev() {
        g = rewards[t] + gamma * g;
        out[t] = g;
    }
    out
}

/// Episodes laid end to end, each padded to a multiple of the unroll length
/// so that every `unroll`-row segment belongs to a single episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub unroll: usize,
    pub rows: usize,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub obs: Vec<f64>,
    pub actions: Vec<f64>,
    pub log_probs: Vec<f64>,
    /// 1 for recorded steps, 0 for filler.
    pub mask: Vec<f64>,
    pub returns: Vec<f64>,
    /// Policy hidden state injected at the first step of each segment.
    pub policy_h0: Vec<f64>,
    pub value_h0: Vec<f64>,
    pub valid: usize,
}

impl Batch {
    pub fn segments(&self) -> usize {
        self.rows / self.unroll
    }

    /// Splits into at most `n` contiguous chunks of whole segments, in order.
    /// Each chunk comes with the row range it covers in `self`.
    pub fn chunks(&self, n: usize) -> Vec<(Batch, Range<usize>)> {
        let segs = self.segments();
        let n = n.clamp(1, segs.max(1));
        let hp = self.policy_h0.len() / segs.max(1);
        let hv = self.value_h0.len() / segs.max(1);
        let (od, ad, t) = (self.obs_dim, self.act_dim, self.unroll);
        (0..n)
            .map(|k| {
                let (s0, s1) = (k * segs / n, (k + 1) * segs / n);
                let rows = s0 * t..s1 * t;
                let mask = self.mask[rows.clone()].to_vec();
                let chunk = Batch {
                    unroll: t,
                    rows: rows.len(),
                    obs_dim: od,
                    act_dim: ad,
                    obs: self.obs[rows.start * od..rows.end * od].to_vec(),
                    actions: self.actions[rows.start * ad..rows.end * ad].to_vec(),
                    log_probs: self.log_probs[rows.clone()].to_vec(),
                    valid: mask.iter().filter(|&&m| m > 0.0).count(),
                    mask,
                    returns: self.returns[rows.clone()].to_vec(),
                    policy_h0: self.policy_h0[s0 * hp..s1 * hp].to_vec(),
                    value_h0: self.value_h0[s0 * hv..s1 * hv].to_vec(),
                };
                (chunk, rows)
            })
            .collect()
    }
}

/// Padded length of an episode of `len` steps.
pub fn padded_len(len: usize, unroll: usize) -> usize {
    len.div_ceil(unroll) * unroll
}

pub fn pad_for_unroll(episodes: &[Episode], unroll: usize, gamma1: f64, gamma2: f64) -> Batch {
    assert!(unroll >= 1, "unroll must be at least 1");
    let first = episodes.first().expect("at least one episode");
    let od = first.obs.len() / first.len().max(1);
    let ad = first.actions.len() / first.len().max(1);
    let hp = first.policy_hidden.len() / first.len().max(1);
    let hv = first.value_hidden.len() / first.len().max(1);
    let rows: usize = episodes.iter().map(|e| padded_len(e.len(), unroll)).sum();
    let mut b = Batch {
        unroll,
        rows,
        obs_dim: od,
        act_dim: ad,
        obs: Vec::with_capacity(rows * od),
        actions: Vec::with_capacity(rows * ad),
        log_probs: Vec::with_capacity(rows),
        mask: Vec::with_capacity(rows),
        returns: Vec::with_capacity(rows),
        policy_h0: Vec::new(),
        value_h0: Vec::new(),
        valid: 0,
    };
    for e in episodes {
        let n = e.len();
        let pad = padded_len(n, unroll) - n;
        b.obs.extend_from_slice(&e.obs);
        b.obs.extend(std::iter::repeat_n(0.0, pad * od));
        b.actions.extend_from_slice(&e.actions);
        b.actions.extend(std::iter::repeat_n(0.0, pad * ad));
        b.log_probs.extend_from_slice(&e.log_probs);
        b.log_probs.extend(std::iter::repeat_n(0.0, pad));
        b.mask.extend(std::iter::repeat_n(1.0, n));
        b.mask.extend(std::iter::repeat_n(0.0, pad));
        b.returns.extend(discounted_returns(&e.r1, &e.r2, gamma1, gamma2));
        b.returns.extend(std::iter::repeat_n(0.0, pad));
        for start in (0..n).step_by(unroll) {
            b.policy_h0.extend_from_slice(&e.policy_hidden[start * hp..(start + 1) * hp]);
            b.value_h0.extend_from_slice(&e.value_hidden[start * hv..(start + 1) * hv]);
        }
        b.valid += n;
    }
    b
}

/// Return targets and raw advantages `G - V(x)` for every row; filler rows
/// get zero advantage.
pub fn returns_and_advantages(batch: &Batch, value: &Network) -> Result<(Vec<f64>, Vec<f64>), ShapeError> {
    let cache = value.forward(&batch.obs, &batch.value_h0, batch.unroll)?;
    let adv = batch
        .returns
        .iter()
        .zip(&cache.out)
        .zip(&batch.mask)
        .map(|((g, v), m)| if *m > 0.0 { g - v } else { 0.0 })
        .collect();
    Ok((batch.returns.clone(), adv))
}

/// Shifts and scales the valid advantages to zero mean and unit standard
/// deviation.
pub fn normalize_advantages(adv: &mut [f64], mask: &[f64]) {
    let n: f64 = mask.iter().sum();
    if n == 0.0 {
        return;
    }
    let mean = adv.iter().zip(mask).map(|(a, m)| a * m).sum::<f64>() / n;
    let var = adv.iter().zip(mask).map(|(a, m)| m * (a - mean) * (a - mean)).sum::<f64>() / n;
    let sd = var.sqrt() + 1e-8;
    for (a, m) in adv.iter_mut().zip(mask) {
        *a = if *m > 0.0 { (*a - mean) / sd } else { 0.0 };
    }
}
