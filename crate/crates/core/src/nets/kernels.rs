//! Row-major dense kernels.
//!
//! Every row of a batch is computed with exactly the same sequence of
//! floating-point operations as a batch of one, so batched and per-step
//! evaluation agree bit-for-bit. Inner loops run along the output dimension,
//! which lets the compiler vectorize without reassociating any sum.

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `out[i] = bias + x[i] W` for every row `i`. `w` is `n_in x n_out`.
pub fn affine(x: &[f64], n_in: usize, w: &[f64], bias: &[f64], out: &mut [f64]) {
    let n_out = bias.len();
    debug_assert_eq!(w.len(), n_in * n_out);
    debug_assert_eq!(x.len() / n_in, out.len() / n_out);
    for (xr, or) in x.chunks_exact(n_in).zip(out.chunks_exact_mut(n_out)) {
        or.copy_from_slice(bias);
        for (k, &xk) in xr.iter().enumerate() {
            axpy(xk, &w[k * n_out..(k + 1) * n_out], or);
        }
    }
}

/// `out[i] = x[i] W`.
pub fn matmul(x: &[f64], n_in: usize, w: &[f64], n_out: usize, out: &mut [f64]) {
    debug_assert_eq!(w.len(), n_in * n_out);
    for (xr, or) in x.chunks_exact(n_in).zip(out.chunks_exact_mut(n_out)) {
        or.fill(0.0);
        for (k, &xk) in xr.iter().enumerate() {
            axpy(xk, &w[k * n_out..(k + 1) * n_out], or);
        }
    }
}

/// `gw += x^T d` where `x` is `m x n_in` and `d` is `m x n_out`.
pub fn accumulate_weight_grad(x: &[f64], n_in: usize, d: &[f64], n_out: usize, gw: &mut [f64]) {
    debug_assert_eq!(gw.len(), n_in * n_out);
    for (xr, dr) in x.chunks_exact(n_in).zip(d.chunks_exact(n_out)) {
        for (k, &xk) in xr.iter().enumerate() {
            if xk != 0.0 {
                axpy(xk, dr, &mut gw[k * n_out..(k + 1) * n_out]);
            }
        }
    }
}

/// `gb += sum_i d[i]`.
pub fn accumulate_bias_grad(d: &[f64], gb: &mut [f64]) {
    for dr in d.chunks_exact(gb.len()) {
        for (g, x) in gb.iter_mut().zip(dr) {
            *g += x;
        }
    }
}

pub fn transpose(w: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut t = vec![0.0; w.len()];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = w[r * cols + c];
        }
    }
    t
}

/// `dx = d W^T` where `W` is `n_in x n_out`.
pub fn backprop_input(d: &[f64], n_out: usize, w: &[f64], n_in: usize, dx: &mut [f64]) {
    let wt = transpose(w, n_in, n_out);
    matmul(d, n_out, &wt, n_in, dx);
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_matches_hand_product() {
        // x = [[1, 2], [3, 4]], W = [[1, 0, 2], [0, 1, -1]], b = [0.5, 0, 0]
        let x = [1.0, 2.0, 3.0, 4.0];
        let w = [1.0, 0.0, 2.0, 0.0, 1.0, -1.0];
        let b = [0.5, 0.0, 0.0];
        let mut out = [0.0; 6];
        affine(&x, 2, &w, &b, &mut out);
        assert_eq!(out, [1.5, 2.0, 0.0, 3.5, 4.0, 2.0]);

        let mut dx = [0.0; 4];
        backprop_input(&out, 3, &w, 2, &mut dx);
        assert_eq!(dx, [1.5, 2.0, 7.5, 2.0]);

        let mut gw = [0.0; 6];
        accumulate_weight_grad(&x, 2, &out, 3, &mut gw);
        assert_eq!(gw, [12.0, 14.0, 6.0, 17.0, 20.0, 8.0]);
    }

    #[test]
    fn rows_are_independent_of_batch() {
        let x: Vec<f64> = (0..15).map(|i| (i as f64 * 0.37).sin()).collect();
        let w: Vec<f64> = (0..20).map(|i| (i as f64 * 0.91).cos()).collect();
        let b = [0.1, -0.2, 0.3, 0.05];
        let mut batched = vec![0.0; 12];
        affine(&x, 5, &w, &b, &mut batched);
        for r in 0..3 {
            let mut single = [0.0; 4];
            affine(&x[r * 5..r * 5 + 5], 5, &w, &b, &mut single);
            assert_eq!(&batched[r * 4..r * 4 + 4], &single);
        }
    }
}
