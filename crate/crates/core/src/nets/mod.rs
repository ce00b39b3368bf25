//! From-scratch differentiable networks for the policy and value function.

pub mod adam;
pub mod checkpoint;
pub mod gaussian;
pub mod kernels;
mod network;
pub mod scaler;

pub use adam::Adam;
pub use checkpoint::{Checkpoint, CheckpointError};
pub use gaussian::{kl_divergence, log_prob, log_prob_grad, sample_action};
pub use network::{ForwardCache, LayerSpec, Network, ParamLayout, ShapeError, StepScratch};
pub use scaler::ObsScaler;

#[cfg(test)]
mod tests;
