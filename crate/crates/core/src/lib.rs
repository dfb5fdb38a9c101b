//! Conditional adversarial motion priors (CAMP) for multi-gait quadruped locomotion.
//!
//! A single skill-conditioned policy is trained with PPO against three reward
//! sources: velocity tracking, a style reward from a skill-conditioned
//! least-squares discriminator, and a skill reward from a skill discriminator
//! that maps state transitions back into the skill embedding space.
//!
//! The crate is organised bottom-up:
//!
//! - [`motion`]: procedural expert gaits, leg kinematics, AMP features and the
//!   preloaded transition buffer.
//! - [`sim`]: a deterministic surrogate quadruped with PD joints and domain
//!   randomization.
//! - [`nn`]: multilayer perceptrons with exact parameter/input gradients,
//!   input-gradient penalties, Adam and the checkpoint container.
//! - [`adversarial`]: conditional discriminator, skill embedding table, skill
//!   discriminator, losses and rewards.
//! - [`ppo`]: rollout collection, GAE, clipped-surrogate updates and the
//!   training loop.
//! - [`analysis`]: DTW, k-means purity, PCA, contact and tracking metrics and
//!   the ablation report.

pub mod adversarial;
pub mod analysis;
pub mod config;
pub mod error;
pub mod motion;
pub mod nn;
pub mod ppo;
pub mod rng;
pub mod sim;

pub use error::{CampError, Result};
