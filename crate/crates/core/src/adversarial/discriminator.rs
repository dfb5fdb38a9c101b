use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;

use super::embedding::SkillEmbedding;
use super::normalizer::NormalizedPair;
use super::PAIR_DIM;
use crate::error::{CampError, Result};
use crate::nn::{Activation, Checkpoint, Mlp, MlpSpec};

/// `D_θ(s_t, s_{t+1} | z)`: an MLP over the concatenation `[s_t, s_{t+1}, z]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDiscriminator {
    pub net: Mlp,
    pub latent_dim: usize,
    /// When false the latent slot is fed zeros.
    pub conditioned: bool,
}

/// Least-squares discriminator loss and its gradients.
#[derive(Debug, Clone)]
pub struct DiscLoss {
    pub loss: f64,
    pub expert_term: f64,
    pub policy_term: f64,
    /// Mean squared input-gradient norm at expert samples (before weighting).
    pub penalty: f64,
    pub d_expert: Vec<f64>,
    pub d_policy: Vec<f64>,
    pub param_grad: Vec<f64>,
    pub expert_input_grad: Array2<f64>,
    pub policy_input_grad: Array2<f64>,
}

impl DiscLoss {
    /// Fraction of samples on the correct side of zero.
    pub fn accuracy(&self) -> f64 {
        let hits = self.d_expert.iter().filter(|&&d| d > 0.0).count() + self.d_policy.iter().filter(|&&d| d < 0.0).count();
        hits as f64 / (self.d_expert.len() + self.d_policy.len()) as f64
    }
}

impl ConditionalDiscriminator {
    pub fn new<R: Rng + ?Sized>(hidden: &[usize], latent_dim: usize, conditioned: bool, rng: &mut R) -> Result<Self> {
        let spec = MlpSpec::new(PAIR_DIM + latent_dim, hidden, 1, Activation::Elu)?;
        Ok(Self {
            net: Mlp::orthogonal(spec, std::f64::consts::SQRT_2, 1.0, rng),
            latent_dim,
            conditioned,
        })
    }

    pub fn input_dim(&self) -> usize {
        PAIR_DIM + self.latent_dim
    }

    /// Input rows for `pairs`, with `z = E(label)` or zeros when unconditioned.
    pub fn inputs(&self, pairs: &[NormalizedPair], table: &SkillEmbedding) -> Result<Array2<f64>> {
        if table.dim() != self.latent_dim {
            return Err(CampError::DimensionMismatch {
                context: "discriminator latent",
                expected: self.latent_dim,
                got: table.dim(),
            });
        }
        let mut x = Array2::zeros((pairs.len(), self.input_dim()));
        for (p, mut row) in pairs.iter().zip(x.outer_iter_mut()) {
            table.check_label(p.label)?;
            let r = row.as_slice_mut().unwrap();
            p.write_input(r);
            if self.conditioned {
                r[PAIR_DIM..].copy_from_slice(table.row(p.label));
            }
        }
        Ok(x)
    }

    pub fn scores(&self, pairs: &[NormalizedPair], table: &SkillEmbedding) -> Result<Vec<f64>> {
        let x = self.inputs(pairs, table)?;
        Ok(self.net.forward(x.view())?.column(0).to_vec())
    }

    /// Style reward for each pair.
    pub fn style_rewards(&self, pairs: &[NormalizedPair], table: &SkillEmbedding) -> Result<Vec<f64>> {
        Ok(self.scores(pairs, table)?.into_iter().map(style_reward).collect())
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut ck = self.net.to_checkpoint("disc");
        ck.arrays.push((
            "conditioning".into(),
            vec![self.latent_dim as f64, if self.conditioned { 1.0 } else { 0.0 }],
        ));
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let net = Mlp::from_checkpoint(ck, "disc")?;
        let c = ck.array("conditioning")?;
        if c.len() != 2 {
            return Err(CampError::Data("discriminator checkpoint: malformed conditioning array".into()));
        }
        Ok(Self {
            net,
            latent_dim: c[0] as usize,
            conditioned: c[1] != 0.0,
        })
    }
}

/// `max(0, 1 − (D − 1)² / 4)`.
pub fn style_reward(d: f64) -> f64 {
    (1.0 - 0.25 * (d - 1.0) * (d - 1.0)).max(0.0)
}

/// Loss on prepared input rows:
/// `mean_E (D−1)² + mean_P (D+1)² + ω mean_E ‖∇_x D‖²`.
pub fn disc_loss_from_inputs(net: &Mlp, expert: ArrayView2<f64>, policy: ArrayView2<f64>, omega_gp: f64) -> Result<DiscLoss> {
    if expert.nrows() == 0 || policy.nrows() == 0 {
        return Err(CampError::Empty("discriminator batch".into()));
    }
    let ne = expert.nrows() as f64;
    let np = policy.nrows() as f64;
    let ce = net.forward_cached(expert)?;
    let cp = net.forward_cached(policy)?;
    let d_expert = ce.output().column(0).to_vec();
    let d_policy = cp.output().column(0).to_vec();

    let expert_term = d_expert.iter().map(|d| (d - 1.0).powi(2)).sum::<f64>() / ne;
    let policy_term = d_policy.iter().map(|d| (d + 1.0).powi(2)).sum::<f64>() / np;

    let mut param_grad = vec![0.0; net.num_params()];
    let up_e = ce.output().mapv(|d| 2.0 * (d - 1.0) / ne);
    let up_p = cp.output().mapv(|d| 2.0 * (d + 1.0) / np);
    let mut expert_input_grad = net.backward_into(&ce, up_e.view(), &mut param_grad);
    let policy_input_grad = net.backward_into(&cp, up_p.view(), &mut param_grad);

    let mut penalty = 0.0;
    if omega_gp != 0.0 {
        let weights = vec![omega_gp / ne; expert.nrows()];
        let pen = net.jacobian_penalty(&ce, &weights);
        penalty = pen.per_sample.iter().sum::<f64>() / ne;
        for (g, p) in param_grad.iter_mut().zip(&pen.param_grad) {
            *g += p;
        }
        expert_input_grad += &pen.input_grad;
    }

    let loss = expert_term + policy_term + omega_gp * penalty;
    if !loss.is_finite() {
        return Err(CampError::NonFinite("discriminator loss".into()));
    }
    Ok(DiscLoss {
        loss,
        expert_term,
        policy_term,
        penalty,
        d_expert,
        d_policy,
        param_grad,
        expert_input_grad,
        policy_input_grad,
    })
}

/// Conditional discriminator loss on labelled pairs, with the gradient for the
/// embedding table gathered from the latent columns of the input gradients.
pub fn disc_loss(
    expert: &[NormalizedPair],
    policy: &[NormalizedPair],
    table: &SkillEmbedding,
    disc: &ConditionalDiscriminator,
    omega_gp: f64,
) -> Result<(DiscLoss, Vec<f64>)> {
    let xe = disc.inputs(expert, table)?;
    let xp = disc.inputs(policy, table)?;
    let out = disc_loss_from_inputs(&disc.net, xe.view(), xp.view(), omega_gp)?;
    let mut table_grad = vec![0.0; table.params().len()];
    if disc.conditioned {
        let dz = table.dim();
        for (pairs, grad) in [(expert, &out.expert_input_grad), (policy, &out.policy_input_grad)] {
            for (p, row) in pairs.iter().zip(grad.axis_iter(Axis(0))) {
                let dst = &mut table_grad[p.label * dz..(p.label + 1) * dz];
                for (d, g) in dst.iter_mut().zip(row.iter().skip(PAIR_DIM)) {
                    *d += g;
                }
            }
        }
    }
    Ok((out, table_grad))
}
