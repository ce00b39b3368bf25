/// Running per-dimension observation normalizer.
///
/// Statistics are frozen while a batch is collected and merged afterwards, so
/// every observation in one batch is scaled identically.
#[derive(Debug, Clone, PartialEq)]
pub struct ObsScaler {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub count: f64,
    /// Normalized values are clipped to `[-clip, clip]`.
    pub clip: f64,
}

impl ObsScaler {
    pub fn new(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            var: vec![1.0; dim],
            count: 0.0,
            clip: 10.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, raw: &[f64], out: &mut [f64]) {
        for i in 0..raw.len() {
            let z = (raw[i] - self.mean[i]) / (self.var[i].sqrt() + 1e-8);
            out[i] = z.clamp(-self.clip, self.clip);
        }
    }

    /// Merges a batch of raw observations (`rows x dim`) into the running
    /// moments with the parallel-variance update.
    pub fn update(&mut self, raw: &[f64]) {
        let d = self.dim();
        let n = (raw.len() / d) as f64;
        if n == 0.0 {
            return;
        }
        for i in 0..d {
            let col = raw.iter().skip(i).step_by(d);
            let bm = col.clone().sum::<f64>() / n;
            let bv = col.map(|x| (x - bm) * (x - bm)).sum::<f64>() / n;
            if self.count == 0.0 {
                self.mean[i] = bm;
                self.var[i] = bv;
            } else {
                let total = self.count + n;
                let delta = bm - self.mean[i];
                let m2 = self.var[i] * self.count + bv * n + delta * delta * self.count * n / total;
                self.mean[i] += delta * n / total;
                self.var[i] = m2 / total;
            }
        }
        self.count += n;
    }
}
