//! Plane-stack radar altimeter.
//!
//! Horizontal planes spanning the terrain's elevation range are intersected
//! with each beam; every intersection indexes the elevation grid, and the
//! intersection whose plane lies closest to the indexed elevation gives the
//! range. The model is fast but ambiguous at low altitude, where a plane can
//! match the far side of a terrain feature.

mod characterize;
mod terrain;

pub use characterize::{characterize_error, ray_march, ErrorRow};
pub use terrain::{TerrainError, TerrainMap, DEFAULT_PLANE_SPACING, MAX_CELLS};

use std::f64::consts::FRAC_PI_8;

use thiserror::Error;

use crate::sim::Vec3;

/// Range reported for a beam that finds no terrain, m.
pub const MISS_RANGE: f64 = 10_000.0;

/// Angle between each beam and the central axis, rad.
pub const BEAM_CONE_ANGLE: f64 = FRAC_PI_8;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum AltimeterError {
    #[error("beam axis {0:?} does not point below the horizon")]
    DegenerateDirection([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamMode {
    /// Axis halfway between the velocity direction and nadir.
    VelocityAveraged,
    /// Axis on the line of sight to the target.
    TargetPointing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSet {
    pub axis: Vec3,
    pub dirs: [Vec3; 4],
}

impl BeamSet {
    /// Four unit beams at [`BEAM_CONE_ANGLE`] from `axis`, at quadrant
    /// azimuths.
    pub fn around(axis: Vec3) -> Result<Self, AltimeterError> {
        let n = axis.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(AltimeterError::DegenerateDirection(axis.into()));
        }
        let c = axis / n;
        if c.z >= 0.0 {
            return Err(AltimeterError::DegenerateDirection(c.into()));
        }
        let reference = if c.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        let e1 = (reference - c * reference.dot(&c)).normalize();
        let e2 = c.cross(&e1);
        let (s, co) = BEAM_CONE_ANGLE.sin_cos();
        let dirs = [e1, e2, -e1, -e2].map(|e| (c * co + e * s).normalize());
        if let Some(d) = dirs.iter().find(|d| d.z >= 0.0) {
            return Err(AltimeterError::DegenerateDirection((*d).into()));
        }
        Ok(Self { axis: c, dirs })
    }
}

/// Beam geometry for the lander at `position` moving with `velocity`.
pub fn beam_directions(position: &Vec3, velocity: &Vec3, mode: BeamMode, target: &Vec3) -> Result<BeamSet, AltimeterError> {
    let nadir = Vec3::new(0.0, 0.0, -1.0);
    let axis = match mode {
        BeamMode::VelocityAveraged => {
            let s = velocity.norm();
            if !(s > 0.0) {
                return Err(AltimeterError::DegenerateDirection((*velocity).into()));
            }
            velocity / s + nadir
        }
        BeamMode::TargetPointing => target - position,
    };
    BeamSet::around(axis)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltimeterReading {
    pub ranges: [f64; 4],
    pub miss: [bool; 4],
}

/// Range along one beam, or `None` for a miss.
///
/// A beam misses when none of its plane intersections lands on the map, or
/// when the best plane is farther from the indexed elevation than one plane
/// spacing.
pub fn measure_beam(map: &TerrainMap, position: &Vec3, dir: &Vec3) -> Option<f64> {
    if !(dir.z < 0.0) {
        return None;
    }
    let mut best: Option<(f64, f64)> = None;
    for &zp in map.planes().iter().rev() {
        if zp >= position.z {
            continue;
        }
        let t = (zp - position.z) / dir.z;
        let Some(e) = map.elevation_at(position.x + t * dir.x, position.y + t * dir.y) else {
            continue;
        };
        let mismatch = (zp - e).abs();
        if best.is_none_or(|(m, _)| mismatch < m) {
            best = Some((mismatch, t));
        }
    }
    match best {
        Some((m, t)) if m <= map.plane_spacing() => Some(t),
        _ => None,
    }
}

pub fn measure(map: &TerrainMap, position: &Vec3, beams: &BeamSet) -> AltimeterReading {
    let mut ranges = [MISS_RANGE; 4];
    let mut miss = [true; 4];
    for (k, d) in beams.dirs.iter().enumerate() {
        if let Some(t) = measure_beam(map, position, d) {
            ranges[k] = t;
            miss[k] = false;
        }
    }
    AltimeterReading { ranges, miss }
}
