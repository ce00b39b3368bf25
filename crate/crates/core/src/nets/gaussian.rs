//! Diagonal Gaussian action distribution.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Exact log density of `action` under `N(mean, diag(exp(log_std))^2)`.
pub fn log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((m, ls), a)| {
            let z = (a - m) / ls.exp();
            -0.5 * z * z - ls - HALF_LN_2PI
        })
        .sum()
}

/// Draws an action and returns it with its log density.
pub fn sample_action<R: Rng + ?Sized>(mean: &[f64], log_std: &[f64], rng: &mut R) -> (Vec<f64>, f64) {
    let action: Vec<f64> = mean
        .iter()
        .zip(log_std)
        .map(|(m, ls)| {
            let n: f64 = StandardNormal.sample(rng);
            m + ls.exp() * n
        })
        .collect();
    let lp = log_prob(mean, log_std, &action);
    (action, lp)
}

/// `KL(old || new)` between two diagonal Gaussians.
pub fn kl_divergence(mean_old: &[f64], log_std_old: &[f64], mean_new: &[f64], log_std_new: &[f64]) -> f64 {
    let mut kl = 0.0;
    for i in 0..mean_old.len() {
        let var_old = (2.0 * log_std_old[i]).exp();
        let var_new = (2.0 * log_std_new[i]).exp();
        let dm = mean_old[i] - mean_new[i];
        kl += log_std_new[i] - log_std_old[i] + (var_old + dm * dm) / (2.0 * var_new) - 0.5;
    }
    kl
}

/// Gradients of [`log_prob`] with respect to the mean and the log-std.
pub fn log_prob_grad(mean: &[f64], log_std: &[f64], action: &[f64], d_mean: &mut [f64], d_log_std: &mut [f64]) {
    for i in 0..mean.len() {
        let inv_var = (-2.0 * log_std[i]).exp();
        let diff = action[i] - mean[i];
        d_mean[i] = diff * inv_var;
        d_log_std[i] = diff * diff * inv_var - 1.0;
    }
}
