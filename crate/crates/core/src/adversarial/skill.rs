use std::sync::atomic::{AtomicUsize, Ordering};

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use super::embedding::SkillEmbedding;
use super::normalizer::NormalizedPair;
use super::PAIR_DIM;
use crate::error::{CampError, Result};
use crate::nn::{Activation, Checkpoint, Mlp, MlpSpec};

/// `f_θ(s_t, s_{t+1}) → ẑ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkillDiscriminator {
    pub net: Mlp,
}

/// Skill-discriminator loss and gradients. The embedding targets are constants.
#[derive(Debug, Clone)]
pub struct SkillLoss {
    pub loss: f64,
    pub mse: f64,
    pub penalty: f64,
    pub param_grad: Vec<f64>,
    pub input_grad: Array2<f64>,
}

impl SkillDiscriminator {
    pub fn new<R: Rng + ?Sized>(hidden: &[usize], latent_dim: usize, rng: &mut R) -> Result<Self> {
        let spec = MlpSpec::new(PAIR_DIM, hidden, latent_dim, Activation::Elu)?;
        Ok(Self {
            net: Mlp::orthogonal(spec, std::f64::consts::SQRT_2, 1.0, rng),
        })
    }

    pub fn inputs(pairs: &[NormalizedPair]) -> Array2<f64> {
        let mut x = Array2::zeros((pairs.len(), PAIR_DIM));
        for (p, mut row) in pairs.iter().zip(x.outer_iter_mut()) {
            p.write_input(row.as_slice_mut().unwrap());
        }
        x
    }

    /// `ẑ` for each pair, one row per pair.
    pub fn predict(&self, pairs: &[NormalizedPair]) -> Result<Array2<f64>> {
        self.net.forward(Self::inputs(pairs).view())
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        self.net.to_checkpoint("skill_disc")
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        Ok(Self {
            net: Mlp::from_checkpoint(ck, "skill_disc")?,
        })
    }
}

static ZERO_NORM_EVENTS: AtomicUsize = AtomicUsize::new(0);

/// Cosine similarity; 0 when either vector has zero norm.
pub fn skill_reward(z_hat: &[f64], z: &[f64]) -> f64 {
    let dot: f64 = z_hat.iter().zip(z).map(|(a, b)| a * b).sum();
    let na = z_hat.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = z.iter().map(|v| v * v).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        let n = ZERO_NORM_EVENTS.fetch_add(1, Ordering::Relaxed);
        if n.is_power_of_two() || n == 0 {
            log::warn!("skill reward on a zero-norm latent ({} occurrences)", n + 1);
        }
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Label whose embedding has the highest cosine with `z_hat`; ties go to the lowest label.
pub fn predict_skill(z_hat: &[f64], table: &SkillEmbedding) -> usize {
    let mut best = 0;
    let mut best_c = f64::NEG_INFINITY;
    for y in 0..table.num_skills() {
        let c = skill_reward(z_hat, table.row(y));
        if c > best_c {
            best = y;
            best_c = c;
        }
    }
    best
}

/// `mean ‖f(x) − target‖² + λ mean ‖∂f/∂x‖_F²` on prepared inputs and targets.
pub fn skill_disc_loss_from_inputs(net: &Mlp, x: ArrayView2<f64>, targets: ArrayView2<f64>, lambda: f64) -> Result<SkillLoss> {
    if x.nrows() == 0 {
        return Err(CampError::Empty("skill discriminator batch".into()));
    }
    if targets.dim() != (x.nrows(), net.output_dim()) {
        return Err(CampError::DimensionMismatch {
            context: "skill targets",
            expected: x.nrows() * net.output_dim(),
            got: targets.len(),
        });
    }
    let n = x.nrows() as f64;
    let cache = net.forward_cached(x)?;
    let diff = cache.output() - &targets;
    let mse = diff.iter().map(|v| v * v).sum::<f64>() / n;
    let up = diff.mapv(|v| 2.0 * v / n);
    let (mut param_grad, mut input_grad) = net.backward(&cache, up.view());
    let mut penalty = 0.0;
    if lambda != 0.0 {
        let pen = net.jacobian_penalty(&cache, &vec![lambda / n; x.nrows()]);
        penalty = pen.per_sample.iter().sum::<f64>() / n;
        for (g, p) in param_grad.iter_mut().zip(&pen.param_grad) {
            *g += p;
        }
        input_grad += &pen.input_grad;
    }
    let loss = mse + lambda * penalty;
    if !loss.is_finite() {
        return Err(CampError::NonFinite("skill discriminator loss".into()));
    }
    Ok(SkillLoss {
        loss,
        mse,
        penalty,
        param_grad,
        input_grad,
    })
}

/// Skill-discriminator loss on expert pairs against their label embeddings.
pub fn skill_disc_loss(expert: &[NormalizedPair], table: &SkillEmbedding, skill_disc: &SkillDiscriminator, lambda: f64) -> Result<SkillLoss> {
    let x = SkillDiscriminator::inputs(expert);
    let mut t = Array2::zeros((expert.len(), table.dim()));
    for (p, mut row) in expert.iter().zip(t.outer_iter_mut()) {
        table.check_label(p.label)?;
        row.as_slice_mut().unwrap().copy_from_slice(table.row(p.label));
    }
    skill_disc_loss_from_inputs(&skill_disc.net, x.view(), t.view(), lambda)
}
