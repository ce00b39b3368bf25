//! Four-layer policy and value networks whose second layer is optionally a
//! GRU, with a batched forward pass that unrolls the recurrent layer over
//! fixed-length segments and an exact reverse pass through the unroll.
//!
//! A batch of `m` rows is a concatenation of segments of `T` consecutive
//! steps. Before the recurrent layer the layer-1 activations are reshaped
//! from `m x n` to `T x (m/T) x n` (time-major); at segment step 0 the GRU is
//! seeded with the hidden state recorded when the rollout was sampled, and
//! steps `1..T` evolve under the current parameters. The GRU output is then
//! reshaped back to `m x n` for layers 3 and 4.

use rand::Rng;
use thiserror::Error;

use super::kernels::{
    accumulate_bias_grad, accumulate_weight_grad, affine, backprop_input, matmul, sigmoid, transpose,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShapeError {
    #[error("batch of {rows} rows is not divisible by unroll length {unroll}")]
    Indivisible { rows: usize, unroll: usize },
    #[error("expected {expected} values for {what}, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("unroll length must be at least 1")]
    ZeroUnroll,
}

/// Layer widths of one network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub obs_dim: usize,
    pub h1: usize,
    pub h2: usize,
    pub h3: usize,
    pub out: usize,
    pub recurrent: bool,
    /// Whether the network carries a state-independent log standard deviation
    /// per output (policy networks).
    pub log_std: bool,
}

/// Geometric mean of the neighboring layer widths, rounded to nearest.
fn middle_width(h1: usize, h3: usize) -> usize {
    ((h1 * h3) as f64).sqrt().round().max(1.0) as usize
}

impl LayerSpec {
    pub fn policy(obs_dim: usize, act_dim: usize, recurrent: bool) -> Self {
        let h1 = 10 * obs_dim;
        let h3 = 10 * act_dim;
        Self {
            obs_dim,
            h1,
            h2: middle_width(h1, h3),
            h3,
            out: act_dim,
            recurrent,
            log_std: true,
        }
    }

    pub fn value(obs_dim: usize, recurrent: bool) -> Self {
        let h1 = 10 * obs_dim;
        let h3 = 5;
        Self {
            obs_dim,
            h1,
            h2: middle_width(h1, h3),
            h3,
            out: 1,
            recurrent,
            log_std: false,
        }
    }

    /// Width of the recurrent state carried between steps, zero for an MLP.
    pub fn hidden_dim(&self) -> usize {
        if self.recurrent {
            self.h2
        } else {
            0
        }
    }

    pub fn layout(&self) -> ParamLayout {
        ParamLayout::new(self)
    }

    pub fn param_count(&self) -> usize {
        self.layout().total
    }
}

/// Offsets of every parameter block inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamLayout {
    pub w1: usize,
    pub b1: usize,
    /// Dense: `h1 x h2`. GRU: input weights `h1 x 3 h2`, columns `[z | r | h]`.
    pub w2: usize,
    /// Dense: `h2`. GRU: `3 h2`.
    pub b2: usize,
    /// GRU only: recurrent gate weights `h2 x 2 h2`, columns `[z | r]`.
    pub u_zr: usize,
    /// GRU only: recurrent candidate weights `h2 x h2`.
    pub u_h: usize,
    pub w3: usize,
    pub b3: usize,
    pub w4: usize,
    pub b4: usize,
    pub log_std: usize,
    pub total: usize,
}

impl ParamLayout {
    fn new(s: &LayerSpec) -> Self {
        let mut at = 0;
        let mut take = |n: usize| {
            let o = at;
            at += n;
            o
        };
        let w1 = take(s.obs_dim * s.h1);
        let b1 = take(s.h1);
        let gates = if s.recurrent { 3 } else { 1 };
        let w2 = take(s.h1 * s.h2 * gates);
        let b2 = take(s.h2 * gates);
        let u_zr = take(if s.recurrent { s.h2 * 2 * s.h2 } else { 0 });
        let u_h = take(if s.recurrent { s.h2 * s.h2 } else { 0 });
        let w3 = take(s.h2 * s.h3);
        let b3 = take(s.h3);
        let w4 = take(s.h3 * s.out);
        let b4 = take(s.out);
        let log_std = take(if s.log_std { s.out } else { 0 });
        Self {
            w1,
            b1,
            w2,
            b2,
            u_zr,
            u_h,
            w3,
            b3,
            w4,
            b4,
            log_std,
            total: at,
        }
    }
}

/// Network weights stored as one flat vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub spec: LayerSpec,
    pub layout: ParamLayout,
    pub params: Vec<f64>,
}

/// Activations recorded by [`Network::forward`] for the reverse pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    rows: usize,
    unroll: usize,
    x: Vec<f64>,
    a1: Vec<f64>,
    /// Layer-2 output in original row order; for a GRU this is the hidden
    /// state after each step.
    a2: Vec<f64>,
    a3: Vec<f64>,
    pub out: Vec<f64>,
    gru: Option<GruCache>,
}

/// Time-major GRU intermediates, row `t * segments + s`.
#[derive(Debug, Clone)]
struct GruCache {
    segments: usize,
    h_prev: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    cand: Vec<f64>,
    rh: Vec<f64>,
}

impl ForwardCache {
    pub fn outputs(&self) -> &[f64] {
        &self.out
    }

    /// Layer-2 output per row (the GRU hidden state after each step).
    pub fn hidden_trace(&self) -> &[f64] {
        &self.a2
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
}

/// Scratch buffers for single-step evaluation during rollouts.
#[derive(Debug, Clone)]
pub struct StepScratch {
    a1: Vec<f64>,
    gx: Vec<f64>,
    a2: Vec<f64>,
    a3: Vec<f64>,
    gate_tmp: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    cand: Vec<f64>,
    rh: Vec<f64>,
}

fn tanh_in_place(v: &mut [f64]) {
    for x in v {
        *x = x.tanh();
    }
}

/// Reorders `T x S` blocks between row-major segment order (`s * T + t`) and
/// time-major order (`t * S + s`).
fn to_time_major(src: &[f64], width: usize, unroll: usize, segments: usize) -> Vec<f64> {
    let mut dst = vec![0.0; src.len()];
    for s in 0..segments {
        for t in 0..unroll {
            let from = (s * unroll + t) * width;
            let to = (t * segments + s) * width;
            dst[to..to + width].copy_from_slice(&src[from..from + width]);
        }
    }
    dst
}

fn from_time_major(src: &[f64], width: usize, unroll: usize, segments: usize) -> Vec<f64> {
    let mut dst = vec![0.0; src.len()];
    for s in 0..segments {
        for t in 0..unroll {
            let from = (t * segments + s) * width;
            let to = (s * unroll + t) * width;
            dst[to..to + width].copy_from_slice(&src[from..from + width]);
        }
    }
    dst
}

impl Network {
    pub fn zeros(spec: LayerSpec) -> Self {
        let layout = spec.layout();
        Self {
            spec,
            layout,
            params: vec![0.0; layout.total],
        }
    }

    /// Uniform Glorot initialization for weights, zero biases, and
    /// `log_std = ln(0.6 * action_scale)`.
    pub fn init<R: Rng + ?Sized>(spec: LayerSpec, action_scale: f64, rng: &mut R) -> Self {
        let mut net = Self::zeros(spec);
        let l = net.layout;
        let s = spec;
        let mut fill = |offset: usize, fan_in: usize, fan_out: usize, n: usize| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in &mut net.params[offset..offset + n] {
                *p = rng.random_range(-bound..bound);
            }
        };
        fill(l.w1, s.obs_dim, s.h1, s.obs_dim * s.h1);
        if s.recurrent {
            fill(l.w2, s.h1, s.h2, s.h1 * 3 * s.h2);
            fill(l.u_zr, s.h2, s.h2, s.h2 * 2 * s.h2);
            fill(l.u_h, s.h2, s.h2, s.h2 * s.h2);
        } else {
            fill(l.w2, s.h1, s.h2, s.h1 * s.h2);
        }
        fill(l.w3, s.h2, s.h3, s.h2 * s.h3);
        fill(l.w4, s.h3, s.out, s.h3 * s.out);
        if s.log_std {
            let v = (0.6 * action_scale).ln();
            net.params[l.log_std..l.log_std + s.out].fill(v);
        }
        net
    }

    pub fn from_params(spec: LayerSpec, params: Vec<f64>) -> Result<Self, ShapeError> {
        let layout = spec.layout();
        if params.len() != layout.total {
            return Err(ShapeError::Length {
                what: "parameters",
                expected: layout.total,
                got: params.len(),
            });
        }
        Ok(Self {
            spec,
            layout,
            params,
        })
    }

    fn block(&self, offset: usize, len: usize) -> &[f64] {
        &self.params[offset..offset + len]
    }

    pub fn log_std(&self) -> &[f64] {
        let n = if self.spec.log_std { self.spec.out } else { 0 };
        self.block(self.layout.log_std, n)
    }

    pub fn log_std_mut(&mut self) -> &mut [f64] {
        let n = if self.spec.log_std { self.spec.out } else { 0 };
        let o = self.layout.log_std;
        &mut self.params[o..o + n]
    }

    pub fn w2(&self) -> &[f64] {
        let g = if self.spec.recurrent { 3 } else { 1 };
        self.block(self.layout.w2, self.spec.h1 * self.spec.h2 * g)
    }

    fn b2(&self) -> &[f64] {
        let g = if self.spec.recurrent { 3 } else { 1 };
        self.block(self.layout.b2, self.spec.h2 * g)
    }

    fn u_zr(&self) -> &[f64] {
        self.block(self.layout.u_zr, self.spec.h2 * 2 * self.spec.h2)
    }

    fn u_h(&self) -> &[f64] {
        self.block(self.layout.u_h, self.spec.h2 * self.spec.h2)
    }

    /// Index ranges of the recurrent weight matrices, empty for an MLP.
    pub fn recurrent_param_ranges(&self) -> Vec<std::ops::Range<usize>> {
        if !self.spec.recurrent {
            return Vec::new();
        }
        let h = self.spec.h2;
        vec![
            self.layout.u_zr..self.layout.u_zr + 2 * h * h,
            self.layout.u_h..self.layout.u_h + h * h,
        ]
    }

    pub fn step_scratch(&self) -> StepScratch {
        let s = &self.spec;
        StepScratch {
            a1: vec![0.0; s.h1],
            gx: vec![0.0; 3 * s.h2],
            a2: vec![0.0; s.h2],
            a3: vec![0.0; s.h3],
            gate_tmp: vec![0.0; 2 * s.h2],
            z: vec![0.0; s.h2],
            r: vec![0.0; s.h2],
            cand: vec![0.0; s.h2],
            rh: vec![0.0; s.h2],
        }
    }

    /// One GRU update for a block of `segments` rows.
    ///
    /// `gx` holds the input projections plus biases (`segments x 3h`);
    /// `h_prev` the incoming hidden states. Writes the gate activations and
    /// the new hidden state.
    #[allow(clippy::too_many_arguments)]
    fn gru_block(
        &self,
        gx: &[f64],
        h_prev: &[f64],
        z: &mut [f64],
        r: &mut [f64],
        cand: &mut [f64],
        rh: &mut [f64],
        h_next: &mut [f64],
        tmp_zr: &mut [f64],
    ) {
        let h = self.spec.h2;
        matmul(h_prev, h, self.u_zr(), 2 * h, tmp_zr);
        let rows = h_prev.len() / h;
        for i in 0..rows {
            let g = &gx[i * 3 * h..(i + 1) * 3 * h];
            let u = &tmp_zr[i * 2 * h..(i + 1) * 2 * h];
            let hp = &h_prev[i * h..(i + 1) * h];
            for j in 0..h {
                z[i * h + j] = sigmoid(g[j] + u[j]);
                let rj = sigmoid(g[h + j] + u[h + j]);
                r[i * h + j] = rj;
                rh[i * h + j] = rj * hp[j];
            }
        }
        // candidate pre-activation reuses the first h columns of tmp_zr
        let tmp_h = &mut tmp_zr[..rows * h];
        matmul(rh, h, self.u_h(), h, tmp_h);
        for i in 0..rows {
            let g = &gx[i * 3 * h + 2 * h..(i + 1) * 3 * h];
            for j in 0..h {
                let k = i * h + j;
                let c = (g[j] + tmp_h[k]).tanh();
                cand[k] = c;
                h_next[k] = (1.0 - z[k]) * h_prev[k] + z[k] * c;
            }
        }
    }

    /// One GRU transition `h' = (1 - z) h + z tanh(W_h x + U_h (r h) + b_h)`
    /// for a single layer-2 input `x` (the layer-1 activation).
    pub fn gru_step(&self, h: &[f64], x: &[f64]) -> Vec<f64> {
        assert!(self.spec.recurrent, "gru_step on a non-recurrent network");
        let n = self.spec.h2;
        let mut gx = vec![0.0; 3 * n];
        affine(x, self.spec.h1, self.w2(), self.b2(), &mut gx);
        let (mut z, mut r, mut cand, mut rh) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        let mut next = vec![0.0; n];
        let mut tmp = vec![0.0; 2 * n];
        self.gru_block(&gx, h, &mut z, &mut r, &mut cand, &mut rh, &mut next, &mut tmp);
        next
    }

    /// Single-step evaluation used while sampling. `hidden` is updated in
    /// place for recurrent networks and ignored otherwise.
    pub fn step(&self, obs: &[f64], hidden: &mut [f64], scratch: &mut StepScratch, out: &mut [f64]) {
        let s = &self.spec;
        let l = &self.layout;
        affine(obs, s.obs_dim, self.block(l.w1, s.obs_dim * s.h1), self.block(l.b1, s.h1), &mut scratch.a1);
        tanh_in_place(&mut scratch.a1);
        if s.recurrent {
            affine(&scratch.a1, s.h1, self.w2(), self.b2(), &mut scratch.gx);
            self.gru_block(
                &scratch.gx,
                hidden,
                &mut scratch.z,
                &mut scratch.r,
                &mut scratch.cand,
                &mut scratch.rh,
                &mut scratch.a2,
                &mut scratch.gate_tmp,
            );
            hidden.copy_from_slice(&scratch.a2);
        } else {
            affine(&scratch.a1, s.h1, self.w2(), self.b2(), &mut scratch.a2);
            tanh_in_place(&mut scratch.a2);
        }
        affine(&scratch.a2, s.h2, self.block(l.w3, s.h2 * s.h3), self.block(l.b3, s.h3), &mut scratch.a3);
        tanh_in_place(&mut scratch.a3);
        affine(&scratch.a3, s.h3, self.block(l.w4, s.h3 * s.out), self.block(l.b4, s.out), out);
    }

    /// Batched forward pass over `rows = obs.len() / obs_dim` rows arranged as
    /// consecutive segments of `unroll` steps. `hidden0` carries one injected
    /// hidden state per segment (ignored for an MLP).
    pub fn forward(&self, obs: &[f64], hidden0: &[f64], unroll: usize) -> Result<ForwardCache, ShapeError> {
        let s = &self.spec;
        let l = &self.layout;
        if unroll == 0 {
            return Err(ShapeError::ZeroUnroll);
        }
        if obs.len() % s.obs_dim != 0 {
            return Err(ShapeError::Length {
                what: "observation batch",
                expected: obs.len() / s.obs_dim * s.obs_dim,
                got: obs.len(),
            });
        }
        let rows = obs.len() / s.obs_dim;
        let mut a1 = vec![0.0; rows * s.h1];
        affine(obs, s.obs_dim, self.block(l.w1, s.obs_dim * s.h1), self.block(l.b1, s.h1), &mut a1);
        tanh_in_place(&mut a1);

        let (a2, gru, unroll) = if s.recurrent {
            if rows % unroll != 0 {
                return Err(ShapeError::Indivisible { rows, unroll });
            }
            let segments = rows / unroll;
            let h = s.h2;
            if hidden0.len() != segments * h {
                return Err(ShapeError::Length {
                    what: "injected hidden states",
                    expected: segments * h,
                    got: hidden0.len(),
                });
            }
            let a1_tm = to_time_major(&a1, s.h1, unroll, segments);
            let mut gx = vec![0.0; rows * 3 * h];
            affine(&a1_tm, s.h1, self.w2(), self.b2(), &mut gx);

            let mut cache = GruCache {
                segments,
                h_prev: vec![0.0; rows * h],
                z: vec![0.0; rows * h],
                r: vec![0.0; rows * h],
                cand: vec![0.0; rows * h],
                rh: vec![0.0; rows * h],
            };
            let mut a2_tm = vec![0.0; rows * h];
            let mut tmp = vec![0.0; segments * 2 * h];
            let block = segments * h;
            for t in 0..unroll {
                let rng = t * block..(t + 1) * block;
                if t == 0 {
                    cache.h_prev[rng.clone()].copy_from_slice(hidden0);
                } else {
                    cache.h_prev[rng.clone()].copy_from_slice(&a2_tm[rng.start - block..rng.start]);
                }
                self.gru_block(
                    &gx[t * segments * 3 * h..(t + 1) * segments * 3 * h],
                    &cache.h_prev[rng.clone()],
                    &mut cache.z[rng.clone()],
                    &mut cache.r[rng.clone()],
                    &mut cache.cand[rng.clone()],
                    &mut cache.rh[rng.clone()],
                    &mut a2_tm[rng.clone()],
                    &mut tmp,
                );
            }
            (from_time_major(&a2_tm, h, unroll, segments), Some(cache), unroll)
        } else {
            let mut a2 = vec![0.0; rows * s.h2];
            affine(&a1, s.h1, self.w2(), self.b2(), &mut a2);
            tanh_in_place(&mut a2);
            (a2, None, unroll)
        };

        let mut a3 = vec![0.0; rows * s.h3];
        affine(&a2, s.h2, self.block(l.w3, s.h2 * s.h3), self.block(l.b3, s.h3), &mut a3);
        tanh_in_place(&mut a3);
        let mut out = vec![0.0; rows * s.out];
        affine(&a3, s.h3, self.block(l.w4, s.h3 * s.out), self.block(l.b4, s.out), &mut out);

        Ok(ForwardCache {
            rows,
            unroll,
            x: obs.to_vec(),
            a1,
            a2,
            a3,
            out,
            gru,
        })
    }

    /// Accumulates into `grads` the gradient of a scalar loss given its
    /// gradient `d_out` with respect to the network outputs. The log-std
    /// block is left untouched; the caller owns that term.
    pub fn backward(&self, cache: &ForwardCache, d_out: &[f64], grads: &mut [f64]) {
        let s = &self.spec;
        let l = &self.layout;
        let rows = cache.rows;
        assert_eq!(d_out.len(), rows * s.out);
        assert_eq!(grads.len(), l.total);

        // layer 4 (linear)
        accumulate_weight_grad(&cache.a3, s.h3, d_out, s.out, &mut grads[l.w4..l.w4 + s.h3 * s.out]);
        accumulate_bias_grad(d_out, &mut grads[l.b4..l.b4 + s.out]);
        let mut d3 = vec![0.0; rows * s.h3];
        backprop_input(d_out, s.out, self.block(l.w4, s.h3 * s.out), s.h3, &mut d3);
        for (d, a) in d3.iter_mut().zip(&cache.a3) {
            *d *= 1.0 - a * a;
        }

        // layer 3
        accumulate_weight_grad(&cache.a2, s.h2, &d3, s.h3, &mut grads[l.w3..l.w3 + s.h2 * s.h3]);
        accumulate_bias_grad(&d3, &mut grads[l.b3..l.b3 + s.h3]);
        let mut d2 = vec![0.0; rows * s.h2];
        backprop_input(&d3, s.h3, self.block(l.w3, s.h2 * s.h3), s.h2, &mut d2);

        // layer 2
        let d1 = match &cache.gru {
            None => {
                for (d, a) in d2.iter_mut().zip(&cache.a2) {
                    *d *= 1.0 - a * a;
                }
                accumulate_weight_grad(&cache.a1, s.h1, &d2, s.h2, &mut grads[l.w2..l.w2 + s.h1 * s.h2]);
                accumulate_bias_grad(&d2, &mut grads[l.b2..l.b2 + s.h2]);
                let mut d1 = vec![0.0; rows * s.h1];
                backprop_input(&d2, s.h2, self.w2(), s.h1, &mut d1);
                d1
            }
            Some(g) => self.gru_backward(cache, g, &d2, grads),
        };

        // layer 1
        let mut d1 = d1;
        for (d, a) in d1.iter_mut().zip(&cache.a1) {
            *d *= 1.0 - a * a;
        }
        accumulate_weight_grad(&cache.x, s.obs_dim, &d1, s.h1, &mut grads[l.w1..l.w1 + s.obs_dim * s.h1]);
        accumulate_bias_grad(&d1, &mut grads[l.b1..l.b1 + s.h1]);
    }

    /// Backpropagation through the unrolled GRU. Returns the gradient with
    /// respect to the layer-1 activations in original row order.
    fn gru_backward(&self, cache: &ForwardCache, g: &GruCache, d2: &[f64], grads: &mut [f64]) -> Vec<f64> {
        let s = &self.spec;
        let l = &self.layout;
        let h = s.h2;
        let unroll = cache.unroll;
        let segments = g.segments;
        let rows = cache.rows;
        let block = segments * h;

        let d2_tm = to_time_major(d2, h, unroll, segments);
        let mut dgx = vec![0.0; rows * 3 * h];
        let mut carry = vec![0.0; block];
        let mut d_zr = vec![0.0; segments * 2 * h];
        let mut d_cand_pre = vec![0.0; block];
        let mut d_rh = vec![0.0; block];
        let mut d_hprev = vec![0.0; block];

        let u_h_t = transpose(self.u_h(), h, h);
        let u_zr_t = transpose(self.u_zr(), h, 2 * h);
        let mut via_gates = vec![0.0; block];
        let mut g_uh = vec![0.0; h * h];
        let mut g_uzr = vec![0.0; h * 2 * h];

        for t in (0..unroll).rev() {
            let base = t * block;
            for i in 0..segments {
                for j in 0..h {
                    let k = i * h + j;
                    let tk = base + k;
                    let dh = d2_tm[tk] + carry[k];
                    let z = g.z[tk];
                    let c = g.cand[tk];
                    let hp = g.h_prev[tk];
                    d_hprev[k] = dh * (1.0 - z);
                    d_cand_pre[k] = dh * z * (1.0 - c * c);
                    d_zr[i * 2 * h + j] = dh * (c - hp) * z * (1.0 - z);
                }
            }
            // candidate: pre = gx_h + (r o h_prev) U_h
            accumulate_weight_grad(&g.rh[base..base + block], h, &d_cand_pre, h, &mut g_uh);
            matmul(&d_cand_pre, h, &u_h_t, h, &mut d_rh);
            for i in 0..segments {
                for j in 0..h {
                    let k = i * h + j;
                    let tk = base + k;
                    let r = g.r[tk];
                    let hp = g.h_prev[tk];
                    d_hprev[k] += d_rh[k] * r;
                    d_zr[i * 2 * h + h + j] = d_rh[k] * hp * r * (1.0 - r);
                }
            }
            // gates: pre = gx_zr + h_prev U_zr
            accumulate_weight_grad(&g.h_prev[base..base + block], h, &d_zr, 2 * h, &mut g_uzr);
            if t > 0 {
                matmul(&d_zr, 2 * h, &u_zr_t, h, &mut via_gates);
                for k in 0..block {
                    carry[k] = d_hprev[k] + via_gates[k];
                }
            }
            let dg = &mut dgx[t * segments * 3 * h..(t + 1) * segments * 3 * h];
            for i in 0..segments {
                let row = &mut dg[i * 3 * h..(i + 1) * 3 * h];
                row[..2 * h].copy_from_slice(&d_zr[i * 2 * h..(i + 1) * 2 * h]);
                row[2 * h..].copy_from_slice(&d_cand_pre[i * h..(i + 1) * h]);
            }
        }

        for (acc, v) in grads[l.u_h..l.u_h + h * h].iter_mut().zip(&g_uh) {
            *acc += v;
        }
        for (acc, v) in grads[l.u_zr..l.u_zr + 2 * h * h].iter_mut().zip(&g_uzr) {
            *acc += v;
        }
        let a1_tm = to_time_major(&cache.a1, s.h1, unroll, segments);
        accumulate_weight_grad(&a1_tm, s.h1, &dgx, 3 * h, &mut grads[l.w2..l.w2 + s.h1 * 3 * h]);
        accumulate_bias_grad(&dgx, &mut grads[l.b2..l.b2 + 3 * h]);
        let mut d1_tm = vec![0.0; rows * s.h1];
        backprop_input(&dgx, 3 * h, self.w2(), s.h1, &mut d1_tm);
        from_time_major(&d1_tm, s.h1, unroll, segments)
    }
}
