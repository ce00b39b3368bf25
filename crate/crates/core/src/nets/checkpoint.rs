//! Versioned little-endian binary checkpoint.
//!
//! ```text
//! magic     b"AGCK"
//! version   u32 = 1
//! scenario  u32 length + UTF-8 bytes
//! unroll    u32
//! update    u64
//! epsilon   f64
//! policy    network block
//! value     network block
//! scaler    u32 dim, dim x f64 mean, dim x f64 var, f64 count, f64 clip
//! ```
//!
//! A network block is seven `u32` shape fields (`obs_dim h1 h2 h3 out
//! recurrent log_std`), a `u64` parameter count, and that many `f64`. Floats
//! are stored by bit pattern, so decoding reproduces them exactly.

use thiserror::Error;

use super::network::{LayerSpec, Network};
use super::scaler::ObsScaler;

const MAGIC: &[u8; 4] = b"AGCK";
pub const VERSION: u32 = 1;
/// Upper bound on any single layer width accepted when decoding.
const MAX_WIDTH: u32 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("checkpoint truncated at byte {0}")]
    Truncated(usize),
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub scenario: String,
    pub unroll: usize,
    pub update: u64,
    pub clip_epsilon: f64,
    pub policy: Network,
    pub value: Network,
    pub scaler: ObsScaler,
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self.pos.checked_add(n).ok_or(CheckpointError::Truncated(self.pos))?;
        if end > self.buf.len() {
            return Err(CheckpointError::Truncated(self.pos));
        }
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, CheckpointError> {
        let bytes = self.take(n.checked_mul(8).ok_or(CheckpointError::Truncated(self.pos))?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_bits(u64::from_le_bytes(c.try_into().unwrap())))
            .collect())
    }

    fn network(&mut self) -> Result<Network, CheckpointError> {
        let mut dims = [0u32; 7];
        for d in &mut dims {
            *d = self.u32()?;
        }
        if dims[..5].iter().any(|&d| d == 0 || d > MAX_WIDTH) {
            return Err(CheckpointError::Malformed(format!("layer widths {:?}", &dims[..5])));
        }
        if dims[5] > 1 || dims[6] > 1 {
            return Err(CheckpointError::Malformed("flag fields must be 0 or 1".into()));
        }
        let spec = LayerSpec {
            obs_dim: dims[0] as usize,
            h1: dims[1] as usize,
            h2: dims[2] as usize,
            h3: dims[3] as usize,
            out: dims[4] as usize,
            recurrent: dims[5] == 1,
            log_std: dims[6] == 1,
        };
        let n = self.u64()?;
        let expected = spec.param_count() as u64;
        if n != expected {
            return Err(CheckpointError::Malformed(format!(
                "parameter count {n} does not match shape ({expected})"
            )));
        }
        let params = self.f64s(n as usize)?;
        Network::from_params(spec, params).map_err(|e| CheckpointError::Malformed(e.to_string()))
    }
}

fn put_network(out: &mut Vec<u8>, net: &Network) {
    let s = &net.spec;
    for d in [s.obs_dim, s.h1, s.h2, s.h3, s.out, s.recurrent as usize, s.log_std as usize] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&(net.params.len() as u64).to_le_bytes());
    for p in &net.params {
        out.extend_from_slice(&p.to_bits().to_le_bytes());
    }
}

impl Checkpoint {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.scenario.len() as u32).to_le_bytes());
        out.extend_from_slice(self.scenario.as_bytes());
        out.extend_from_slice(&(self.unroll as u32).to_le_bytes());
        out.extend_from_slice(&self.update.to_le_bytes());
        out.extend_from_slice(&self.clip_epsilon.to_bits().to_le_bytes());
        put_network(&mut out, &self.policy);
        put_network(&mut out, &self.value);
        out.extend_from_slice(&(self.scaler.dim() as u32).to_le_bytes());
        for x in self.scaler.mean.iter().chain(&self.scaler.var) {
            out.extend_from_slice(&x.to_bits().to_le_bytes());
        }
        out.extend_from_slice(&self.scaler.count.to_bits().to_le_bytes());
        out.extend_from_slice(&self.scaler.clip.to_bits().to_le_bytes());
        out
    }

    pub fn decode(buf: &[u8]) -> Result<Self, CheckpointError> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(4).map_err(|_| CheckpointError::BadMagic)? != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(CheckpointError::Version(version));
        }
        let len = r.u32()? as usize;
        let scenario = std::str::from_utf8(r.take(len)?)
            .map_err(|_| CheckpointError::Malformed("scenario is not UTF-8".into()))?
            .to_string();
        let unroll = r.u32()? as usize;
        if unroll == 0 {
            return Err(CheckpointError::Malformed("unroll must be at least 1".into()));
        }
        let update = r.u64()?;
        let clip_epsilon = r.f64()?;
        let policy = r.network()?;
        let value = r.network()?;
        if policy.spec.obs_dim != value.spec.obs_dim {
            return Err(CheckpointError::Malformed("policy and value observation sizes differ".into()));
        }
        let dim = r.u32()? as usize;
        if dim != policy.spec.obs_dim {
            return Err(CheckpointError::Malformed("scaler size differs from observation size".into()));
        }
        let mean = r.f64s(dim)?;
        let var = r.f64s(dim)?;
        let count = r.f64()?;
        let clip = r.f64()?;
        if r.pos != buf.len() {
            return Err(CheckpointError::Malformed(format!("{} trailing bytes", buf.len() - r.pos)));
        }
        Ok(Self {
            scenario,
            unroll,
            update,
            clip_epsilon,
            policy,
            value,
            scaler: ObsScaler { mean, var, count, clip },
        })
    }
}
