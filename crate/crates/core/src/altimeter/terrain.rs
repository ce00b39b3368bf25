//! Elevation grids and the plane stack used by the fast altimeter model.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Nominal vertical spacing between stacked planes, m.
pub const DEFAULT_PLANE_SPACING: f64 = 10.0;

/// Largest grid accepted from a file.
pub const MAX_CELLS: usize = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TerrainError {
    #[error("grid parse error: {0}")]
    Parse(String),
    #[error("grid has {got} elevations, header promises {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("cannot read grid file: {0}")]
    Io(String),
}

/// Row-major elevation grid. Row index follows `y`, column index follows `x`;
/// cell `(i, j)` covers `[x0 + j c, x0 + (j + 1) c) x [y0 + i c, y0 + (i + 1) c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainMap {
    rows: usize,
    cols: usize,
    cell_size: f64,
    origin: [f64; 2],
    elevations: Vec<f64>,
    plane_spacing: f64,
    planes: Vec<f64>,
    min: f64,
    max: f64,
}

impl TerrainMap {
    pub fn from_grid(rows: usize, cols: usize, cell_size: f64, elevations: Vec<f64>) -> Result<Self, TerrainError> {
        if rows == 0 || cols == 0 {
            return Err(TerrainError::Parse("grid must have at least one row and column".into()));
        }
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| TerrainError::Parse("grid dimensions overflow".into()))?;
        if elevations.len() != expected {
            return Err(TerrainError::Dimension {
                expected,
                got: elevations.len(),
            });
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(TerrainError::Parse(format!("cell size must be positive, got {cell_size}")));
        }
        if let Some(bad) = elevations.iter().find(|e| !e.is_finite()) {
            return Err(TerrainError::Parse(format!("non-finite elevation {bad}")));
        }
        let min = elevations.iter().copied().fold(f64::INFINITY, f64::min);
        let max = elevations.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut map = Self {
            rows,
            cols,
            cell_size,
            origin: [0.0, 0.0],
            elevations,
            plane_spacing: DEFAULT_PLANE_SPACING,
            planes: Vec::new(),
            min,
            max,
        };
        map.build_planes();
        Ok(map)
    }

    fn build_planes(&mut self) {
        let span = self.max - self.min;
        let n = ((span / self.plane_spacing).ceil() as usize).max(1);
        self.planes = if span == 0.0 {
            vec![self.min]
        } else {
            let mut p: Vec<f64> = (0..n).map(|k| self.min + span * k as f64 / n as f64).collect();
            p.push(self.max);
            p
        };
    }

    /// Rebuilds the plane stack with a different nominal spacing.
    pub fn with_plane_spacing(mut self, spacing: f64) -> Self {
        assert!(spacing > 0.0 && spacing.is_finite(), "plane spacing must be positive");
        self.plane_spacing = spacing;
        self.build_planes();
        self
    }

    pub fn with_origin(mut self, origin: [f64; 2]) -> Self {
        self.origin = origin;
        self
    }

    /// Parses the text grid format: a `rows cols cellsize_m` header followed by
    /// `rows * cols` whitespace-separated elevations in row-major order.
    pub fn parse_grid(text: &str) -> Result<Self, TerrainError> {
        let mut tokens = text.split_whitespace();
        let mut header = |what: &str| {
            tokens
                .next()
                .ok_or_else(|| TerrainError::Parse(format!("missing header field `{what}`")))
        };
        let rows: usize = header("rows")?
            .parse()
            .map_err(|e| TerrainError::Parse(format!("rows: {e}")))?;
        let cols: usize = header("cols")?
            .parse()
            .map_err(|e| TerrainError::Parse(format!("cols: {e}")))?;
        let cell: f64 = header("cellsize_m")?
            .parse()
            .map_err(|e| TerrainError::Parse(format!("cellsize_m: {e}")))?;
        let expected = rows
            .checked_mul(cols)
            .filter(|&n| n <= MAX_CELLS)
            .ok_or_else(|| TerrainError::Parse(format!("grid {rows}x{cols} is too large")))?;
        let mut elevations = Vec::with_capacity(expected.min(1 << 16));
        for (k, tok) in tokens.enumerate() {
            if k >= expected {
                return Err(TerrainError::Dimension {
                    expected,
                    got: k + 1,
                });
            }
            let e: f64 = tok
                .parse()
                .map_err(|e| TerrainError::Parse(format!("elevation {k}: {e}")))?;
            elevations.push(e);
        }
        Self::from_grid(rows, cols, cell, elevations)
    }

    pub fn load(path: &Path) -> Result<Self, TerrainError> {
        let text = std::fs::read_to_string(path).map_err(|e| TerrainError::Io(format!("{}: {e}", path.display())))?;
        Self::parse_grid(&text)
    }

    pub fn to_grid_string(&self) -> String {
        let mut s = format!("{} {} {}\n", self.rows, self.cols, self.cell_size);
        for row in self.elevations.chunks(self.cols) {
            let line: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    /// Fractal terrain on a 1024 x 1024 grid at 10 m per cell, rescaled to
    /// `[0, 380]` m, with a 350 m hilltop under `(4000, 4000)`.
    pub fn synthetic(seed: u64) -> Self {
        let n = 1024;
        let cell = 10.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let full = diamond_square(10, 0.55, &mut rng);
        let stride = n + 1;
        let mut elev: Vec<f64> = (0..n).flat_map(|i| full[i * stride..i * stride + n].to_vec()).collect();
        rescale(&mut elev, 0.0, 380.0);
        let (hx, hy, sigma) = (4000.0, 4000.0, 150.0);
        for i in 0..n {
            for j in 0..n {
                let x = (j as f64 + 0.5) * cell;
                let y = (i as f64 + 0.5) * cell;
                let d2 = (x - hx) * (x - hx) + (y - hy) * (y - hy);
                let w = (-d2 / (2.0 * sigma * sigma)).exp();
                let e = &mut elev[i * n + j];
                *e = (*e * (1.0 - w) + 350.0 * w).clamp(0.0, 380.0);
            }
        }
        Self::from_grid(n, n, cell, elev).expect("synthetic grid is well formed")
    }

    /// Appends the rows in reverse order, reflecting the map about its last
    /// row.
    pub fn mirror(&self) -> Self {
        let mut elev = self.elevations.clone();
        for row in self.elevations.chunks(self.cols).rev() {
            elev.extend_from_slice(row);
        }
        Self::from_grid(self.rows * 2, self.cols, self.cell_size, elev)
            .expect("mirrored grid is well formed")
            .with_plane_spacing(self.plane_spacing)
            .with_origin(self.origin)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn elevations(&self) -> &[f64] {
        &self.elevations
    }

    pub fn planes(&self) -> &[f64] {
        &self.planes
    }

    pub fn plane_spacing(&self) -> f64 {
        self.plane_spacing
    }

    pub fn min_elevation(&self) -> f64 {
        self.min
    }

    pub fn max_elevation(&self) -> f64 {
        self.max
    }

    /// Horizontal extent `[x_min, x_max, y_min, y_max]`, m.
    pub fn bounds(&self) -> [f64; 4] {
        [
            self.origin[0],
            self.origin[0] + self.cols as f64 * self.cell_size,
            self.origin[1],
            self.origin[1] + self.rows as f64 * self.cell_size,
        ]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.elevations[row * self.cols + col]
    }

    /// Elevation of the cell containing `(x, y)`, or `None` off the map.
    #[inline]
    pub fn elevation_at(&self, x: f64, y: f64) -> Option<f64> {
        let cx = ((x - self.origin[0]) / self.cell_size).floor();
        let cy = ((y - self.origin[1]) / self.cell_size).floor();
        if cx < 0.0 || cy < 0.0 || cx >= self.cols as f64 || cy >= self.rows as f64 {
            return None;
        }
        Some(self.elevations[cy as usize * self.cols + cx as usize])
    }
}

/// Diamond-square fractal on a `(2^k + 1)^2` grid with roughness `h`.
fn diamond_square<R: Rng + ?Sized>(k: u32, h: f64, rng: &mut R) -> Vec<f64> {
    let size = (1usize << k) + 1;
    let mut g = vec![0.0; size * size];
    let idx = |i: usize, j: usize| i * size + j;
    for &(i, j) in &[(0, 0), (0, size - 1), (size - 1, 0), (size - 1, size - 1)] {
        g[idx(i, j)] = rng.random_range(-1.0..1.0);
    }
    let mut step = size - 1;
    let mut amp = 1.0;
    while step > 1 {
        let half = step / 2;
        for i in (half..size).step_by(step) {
            for j in (half..size).step_by(step) {
                let avg = (g[idx(i - half, j - half)]
                    + g[idx(i - half, j + half)]
                    + g[idx(i + half, j - half)]
                    + g[idx(i + half, j + half)])
                    / 4.0;
                g[idx(i, j)] = avg + amp * rng.random_range(-1.0..1.0);
            }
        }
        for i in (0..size).step_by(half) {
            let start = if (i / half) % 2 == 0 { half } else { 0 };
            for j in (start..size).step_by(step) {
                let mut sum = 0.0;
                let mut cnt = 0.0;
                if i >= half {
                    sum += g[idx(i - half, j)];
                    cnt += 1.0;
                }
                if i + half < size {
                    sum += g[idx(i + half, j)];
                    cnt += 1.0;
                }
                if j >= half {
                    sum += g[idx(i, j - half)];
                    cnt += 1.0;
                }
                if j + half < size {
                    sum += g[idx(i, j + half)];
                    cnt += 1.0;
                }
                g[idx(i, j)] = sum / cnt + amp * rng.random_range(-1.0..1.0);
            }
        }
        step = half;
        amp *= 0.5f64.powf(h);
    }
    g
}

fn rescale(v: &mut [f64], lo: f64, hi: f64) {
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (max - min).max(f64::MIN_POSITIVE);
    for x in v {
        *x = lo + (hi - lo) * (*x - min) / span;
    }
}
