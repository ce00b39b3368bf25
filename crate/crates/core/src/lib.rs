//! Reinforcement meta-learning for adaptive powered-descent guidance.
//!
//! The crate bundles a 3-DOF lander simulator, randomized landing scenarios,
//! a plane-stack radar altimeter model, recurrent policy and value networks
//! trained with proximal policy optimization, a DR/DV guidance baseline, and
//! a Monte Carlo evaluation harness.

pub mod altimeter;
pub mod drdv;
pub mod envs;
pub mod harness;
pub mod nets;
pub mod ppo;
pub mod seeding;
pub mod sim;
pub mod stats;
