//! Accuracy of the plane-stack model against a ray-marched reference.

use rand::Rng;

use super::{measure_beam, TerrainMap};
use crate::sim::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    /// Lander elevation in the map frame, m.
    pub elevation: f64,
    /// Statistics of `|measured - true|` over beams that returned a range, m.
    pub mean_abs_error: f64,
    pub std_abs_error: f64,
    pub max_abs_error: f64,
    /// Mean signed error, m.
    pub mean_error: f64,
    pub miss_percent: f64,
    pub samples: usize,
}

/// First intersection of the ray `origin + t dir` with the piecewise-constant
/// terrain surface, found by marching in steps of `cell / 16` and bisecting
/// the bracketing interval.
pub fn ray_march(map: &TerrainMap, origin: &Vec3, dir: &Vec3, t_max: f64) -> Option<f64> {
    let below = |t: f64| {
        let p = origin + dir * t;
        map.elevation_at(p.x, p.y).map(|e| p.z <= e)
    };
    let step = map.cell_size() / 16.0;
    let mut t_prev = 0.0;
    let mut t = step;
    while t <= t_max + step {
        match below(t) {
            None => return None,
            Some(true) => {
                let (mut lo, mut hi) = (t_prev, t);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if below(mid).unwrap_or(false) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Some(hi);
            }
            Some(false) => {
                t_prev = t;
                t += step;
            }
        }
    }
    None
}

/// For each elevation, casts `samples` rays from a lander at that elevation,
/// placed uniformly within `max_offset` horizontally of a random ground
/// point, toward that ground point.
pub fn characterize_error<R: Rng + ?Sized>(
    map: &TerrainMap,
    rng: &mut R,
    elevations: &[f64],
    samples: usize,
    max_offset: f64,
) -> Vec<ErrorRow> {
    let [x0, x1, y0, y1] = map.bounds();
    elevations
        .iter()
        .map(|&z| {
            let mut errors = Vec::with_capacity(samples);
            let mut misses = 0usize;
            let mut taken = 0usize;
            while taken < samples {
                let gx = rng.random_range(x0..x1);
                let gy = rng.random_range(y0..y1);
                let rad = max_offset * rng.random::<f64>().sqrt();
                let phi = rng.random_range(0.0..std::f64::consts::TAU);
                let lander = Vec3::new(gx + rad * phi.cos(), gy + rad * phi.sin(), z);
                match map.elevation_at(lander.x, lander.y) {
                    Some(e) if e < z => {}
                    _ => continue,
                }
                let ge = map.elevation_at(gx, gy).expect("ground point on map");
                let to_ground = Vec3::new(gx, gy, ge) - lander;
                let dir = to_ground.normalize();
                let Some(truth) = ray_march(map, &lander, &dir, to_ground.norm()) else {
                    continue;
                };
                taken += 1;
                match measure_beam(map, &lander, &dir) {
                    Some(r) => errors.push(r - truth),
                    None => misses += 1,
                }
            }
            let n = errors.len();
            let abs: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
            let mean_abs = if n > 0 { abs.iter().sum::<f64>() / n as f64 } else { 0.0 };
            let std_abs = if n > 1 {
                (abs.iter().map(|a| (a - mean_abs).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            ErrorRow {
                elevation: z,
                mean_abs_error: mean_abs,
                std_abs_error: std_abs,
                max_abs_error: abs.iter().copied().fold(0.0, f64::max),
                mean_error: if n > 0 { errors.iter().sum::<f64>() / n as f64 } else { 0.0 },
                miss_percent: 100.0 * misses as f64 / samples.max(1) as f64,
                samples,
            }
        })
        .collect()
}
