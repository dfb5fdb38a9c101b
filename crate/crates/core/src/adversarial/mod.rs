//! Skill-conditioned adversarial motion prior.
//!
//! - [`ConditionalDiscriminator`] scores a transition `(s_t, s_{t+1})` given a
//!   skill latent `z` from the [`SkillEmbedding`] table, trained with a
//!   least-squares objective plus an input-gradient penalty.
//! - [`SkillDiscriminator`] regresses transitions onto the embedding of their
//!   skill; its cosine agreement with the commanded embedding is the skill reward.
//! - [`FeatureNormalizer`] standardizes AMP features. Normalized features have
//!   their own type so a sample cannot be normalized twice.

mod discriminator;
mod embedding;
mod normalizer;
mod skill;

use serde::{Deserialize, Serialize};

pub use discriminator::{
    disc_loss, disc_loss_from_inputs, style_reward, ConditionalDiscriminator, DiscLoss,
};
pub use embedding::SkillEmbedding;
pub use normalizer::{FeatureNormalizer, NormalizedFeature, NormalizedPair};
pub use skill::{predict_skill, skill_disc_loss, skill_disc_loss_from_inputs, skill_reward, SkillDiscriminator, SkillLoss};

use crate::error::{CampError, Result};
use crate::motion::AMP_DIM;

/// Width of a transition input `(s_t, s_{t+1})`.
pub const PAIR_DIM: usize = 2 * AMP_DIM;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdversarialConfig {
    /// Skill latent dimension.
    pub latent_dim: usize,
    pub disc_hidden: Vec<usize>,
    pub skill_disc_hidden: Vec<usize>,
    /// Gradient-penalty weight of the conditional discriminator.
    pub omega_gp: f64,
    /// Gradient-penalty weight of the skill discriminator.
    pub lambda_gp: f64,
    pub disc_learning_rate: f64,
    pub skill_disc_learning_rate: f64,
    /// Expert and policy transitions per discriminator minibatch.
    pub disc_batch: usize,
    pub disc_minibatches: usize,
    pub skill_disc_batch: usize,
    pub skill_disc_minibatches: usize,
    /// Fraction of training iterations during which normalizer statistics are updated.
    pub normalizer_warmup_fraction: f64,
    /// Gradient-norm clip for both discriminators and the embedding table.
    pub max_grad_norm: f64,
}

impl Default for AdversarialConfig {
    fn default() -> Self {
        Self {
            latent_dim: 8,
            disc_hidden: vec![1024, 512],
            skill_disc_hidden: vec![512, 256],
            omega_gp: 10.0,
            lambda_gp: 10.0,
            disc_learning_rate: 1e-4,
            skill_disc_learning_rate: 1e-4,
            disc_batch: 256,
            disc_minibatches: 2,
            skill_disc_batch: 256,
            skill_disc_minibatches: 2,
            normalizer_warmup_fraction: 0.25,
            max_grad_norm: 1.0,
        }
    }
}

impl AdversarialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 || self.disc_hidden.is_empty() || self.skill_disc_hidden.is_empty() {
            return Err(CampError::Config("adversarial: latent_dim and hidden layer lists must be nonempty".into()));
        }
        if self.disc_hidden.contains(&0) || self.skill_disc_hidden.contains(&0) {
            return Err(CampError::Config("adversarial: hidden sizes must be positive".into()));
        }
        if !(self.omega_gp >= 0.0 && self.lambda_gp >= 0.0) {
            return Err(CampError::Config("adversarial: penalty weights must be nonnegative".into()));
        }
        if !(self.disc_learning_rate > 0.0 && self.skill_disc_learning_rate > 0.0) {
            return Err(CampError::Config("adversarial: learning rates must be positive".into()));
        }
        if self.disc_batch == 0 || self.skill_disc_batch == 0 || self.disc_minibatches == 0 || self.skill_disc_minibatches == 0 {
            return Err(CampError::Config("adversarial: batch sizes must be positive".into()));
        }
        if !(self.max_grad_norm > 0.0) {
            return Err(CampError::Config("adversarial: max_grad_norm must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.normalizer_warmup_fraction) {
            return Err(CampError::Config("adversarial: normalizer_warmup_fraction must lie in [0, 1]".into()));
        }
        Ok(())
    }
}
