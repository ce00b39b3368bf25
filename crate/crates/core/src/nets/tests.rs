use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn small_spec(recurrent: bool) -> LayerSpec {
    LayerSpec {
        obs_dim: 3,
        h1: 6,
        h2: 8,
        h3: 5,
        out: 2,
        recurrent,
        log_std: false,
    }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Loss `sum_i c_i * out_i` evaluated through the batched forward pass.
fn weighted_output(net: &Network, obs: &[f64], h0: &[f64], unroll: usize, c: &[f64]) -> f64 {
    let cache = net.forward(obs, h0, unroll).unwrap();
    cache.outputs().iter().zip(c).map(|(o, w)| o * w).sum()
}

fn finite_difference_check(net: &Network, obs: &[f64], h0: &[f64], unroll: usize, c: &[f64]) {
    let cache = net.forward(obs, h0, unroll).unwrap();
    let mut grads = vec![0.0; net.params.len()];
    net.backward(&cache, c, &mut grads);
    let step = 1e-5;
    let mut probe = net.clone();
    for i in 0..net.params.len() {
        let orig = probe.params[i];
        probe.params[i] = orig + step;
        let up = weighted_output(&probe, obs, h0, unroll, c);
        probe.params[i] = orig - step;
        let down = weighted_output(&probe, obs, h0, unroll, c);
        probe.params[i] = orig;
        let fd = (up - down) / (2.0 * step);
        let err = (fd - grads[i]).abs();
        let scale = fd.abs().max(grads[i].abs());
        assert!(
            err <= 1e-4 * scale + 1e-9,
            "param {i}: analytic {} vs finite difference {fd}",
            grads[i]
        );
    }
}

#[test]
fn table_widths() {
    let p = LayerSpec::policy(5, 3, true);
    assert_eq!((p.h1, p.h2, p.h3, p.out), (50, 39, 30, 3));
    let v = LayerSpec::value(5, true);
    assert_eq!((v.h1, v.h2, v.h3, v.out), (50, 16, 5, 1));
}

#[test]
fn gru_step_with_zero_weights() {
    let spec = LayerSpec {
        obs_dim: 1,
        h1: 2,
        h2: 2,
        h3: 1,
        out: 1,
        recurrent: true,
        log_std: false,
    };
    let net = Network::zeros(spec);
    let next = net.gru_step(&[1.0, -1.0], &[0.3, -0.8]);
    assert_eq!(next, vec![0.5, -0.5]);
}

#[test]
fn gru_zero_state_is_fixed_point_without_input_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut net = Network::init(small_spec(true), 1.0, &mut rng);
    let l = net.layout;
    let n = 6 * 3 * 8;
    net.params[l.w2..l.w2 + n].fill(0.0);
    net.params[l.b2..l.b2 + 24].fill(0.0);
    let next = net.gru_step(&[0.0; 8], &[0.4, -0.2, 0.9, 0.1, 0.0, -0.7]);
    assert!(next.iter().all(|&x| x == 0.0));
}

#[test]
fn unroll_of_one_is_per_step_injection() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let net = Network::init(small_spec(true), 1.0, &mut rng);
    let rows = 7;
    let obs = random_vec(&mut rng, rows * 3, 2.0);
    let hidden = random_vec(&mut rng, rows * 8, 0.9);
    let cache = net.forward(&obs, &hidden, 1).unwrap();
    let mut scratch = net.step_scratch();
    for r in 0..rows {
        let mut h = hidden[r * 8..(r + 1) * 8].to_vec();
        let mut out = [0.0; 2];
        net.step(&obs[r * 3..(r + 1) * 3], &mut h, &mut scratch, &mut out);
        assert_eq!(&cache.outputs()[r * 2..(r + 1) * 2], &out);
        assert_eq!(&cache.hidden_trace()[r * 8..(r + 1) * 8], &h[..]);
    }
}

#[test]
fn batched_unroll_reproduces_sequential_rollout() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let net = Network::init(small_spec(true), 1.0, &mut rng);
    for unroll in [1, 3, 5, 12] {
        let len = unroll * 4;
        let obs = random_vec(&mut rng, len * 3, 1.5);
        // sequential pass records the hidden state before each step
        let mut h = vec![0.0; 8];
        let mut before = Vec::new();
        let mut outs = Vec::new();
        let mut scratch = net.step_scratch();
        for t in 0..len {
            before.extend_from_slice(&h);
            let mut out = [0.0; 2];
            net.step(&obs[t * 3..(t + 1) * 3], &mut h, &mut scratch, &mut out);
            outs.extend_from_slice(&out);
        }
        let injected: Vec<f64> = (0..len / unroll)
            .flat_map(|s| before[s * unroll * 8..(s * unroll + 1) * 8].to_vec())
            .collect();
        let cache = net.forward(&obs, &injected, unroll).unwrap();
        assert_eq!(cache.outputs(), &outs[..], "unroll {unroll}");
    }
}

#[test]
fn indivisible_batch_is_rejected() {
    let net = Network::zeros(small_spec(true));
    let err = net.forward(&[0.0; 3 * 7], &[0.0; 8], 5).unwrap_err();
    assert_eq!(err, ShapeError::Indivisible { rows: 7, unroll: 5 });
    assert!(net.forward(&[0.0; 3 * 10], &[0.0; 8], 5).is_err());
    assert_eq!(net.forward(&[0.0; 3], &[], 0).unwrap_err(), ShapeError::ZeroUnroll);
}

#[test]
fn mlp_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let net = Network::init(small_spec(false), 1.0, &mut rng);
    let obs = random_vec(&mut rng, 9 * 3, 1.5);
    let c = random_vec(&mut rng, 9 * 2, 1.0);
    finite_difference_check(&net, &obs, &[], 1, &c);
}

#[test]
fn gru_gradients_match_finite_differences_through_unroll() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let net = Network::init(small_spec(true), 1.0, &mut rng);
    let unroll = 4;
    let rows = 12;
    let obs = random_vec(&mut rng, rows * 3, 1.5);
    let h0 = random_vec(&mut rng, rows / unroll * 8, 0.8);
    let c = random_vec(&mut rng, rows * 2, 1.0);
    finite_difference_check(&net, &obs, &h0, unroll, &c);
}

#[test]
fn doubling_unroll_with_zero_recurrence_leaves_input_weight_grads() {
    // With zero recurrent matrices and zero update-gate bias driving z to 1,
    // h' = tanh(W x + b) independent of h, so the unroll length is irrelevant.
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut net = Network::init(small_spec(true), 1.0, &mut rng);
    for r in net.recurrent_param_ranges() {
        net.params[r].fill(0.0);
    }
    let l = net.layout;
    let h = 8;
    // force z = sigmoid(big) == 1 exactly in f64
    for k in 0..6 {
        net.params[l.w2 + k * 3 * h..l.w2 + k * 3 * h + h].fill(0.0);
    }
    net.params[l.b2..l.b2 + h].fill(40.0);
    let rows = 8;
    let obs = random_vec(&mut rng, rows * 3, 1.0);
    let c = random_vec(&mut rng, rows * 2, 1.0);
    let run = |unroll: usize| {
        let h0 = vec![0.3; rows / unroll * h];
        let cache = net.forward(&obs, &h0, unroll).unwrap();
        let mut g = vec![0.0; net.params.len()];
        net.backward(&cache, &c, &mut g);
        g
    };
    let g2 = run(2);
    let g4 = run(4);
    for i in (l.w1..l.u_zr).chain(l.w3..l.total) {
        assert!((g2[i] - g4[i]).abs() < 1e-12, "param {i}");
    }
}

#[test]
fn mlp_reduction_matches_hand_backprop() {
    // A 1-1-1-1-1 MLP: gradient of the output w.r.t. the last bias is 1 and
    // w.r.t. the last weight is the layer-3 activation.
    let spec = LayerSpec {
        obs_dim: 1,
        h1: 1,
        h2: 1,
        h3: 1,
        out: 1,
        recurrent: false,
        log_std: false,
    };
    let net = Network::from_params(spec, vec![0.5, 0.1, -0.7, 0.2, 1.3, 0.0, 0.9, 0.4]).unwrap();
    let cache = net.forward(&[2.0], &[], 1).unwrap();
    let mut g = vec![0.0; 8];
    net.backward(&cache, &[1.0], &mut g);
    let a1 = (0.5f64 * 2.0 + 0.1).tanh();
    let a2 = (-0.7 * a1 + 0.2).tanh();
    let a3 = (1.3 * a2).tanh();
    assert!((cache.outputs()[0] - (0.9 * a3 + 0.4)).abs() < 1e-15);
    assert_eq!(g[7], 1.0);
    assert!((g[6] - a3).abs() < 1e-15);
    let d3 = 0.9 * (1.0 - a3 * a3);
    assert!((g[4] - d3 * a2).abs() < 1e-15);
    let d2 = d3 * 1.3 * (1.0 - a2 * a2);
    let d1 = d2 * -0.7 * (1.0 - a1 * a1);
    assert!((g[0] - d1 * 2.0).abs() < 1e-15);
}
