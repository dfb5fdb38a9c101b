use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{CampError, Result};
use crate::nn::{Activation, Checkpoint, Mlp, MlpSpec};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Diagonal Gaussian policy with state-independent log standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    pub actor: Mlp,
    pub log_std: Vec<f64>,
}

impl GaussianPolicy {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, hidden: &[usize], action_dim: usize, init_std: f64, rng: &mut R) -> Result<Self> {
        let spec = MlpSpec::new(obs_dim, hidden, action_dim, Activation::Elu)?;
        Ok(Self {
            actor: Mlp::orthogonal(spec, std::f64::consts::SQRT_2, 0.01, rng),
            log_std: vec![init_std.ln(); action_dim],
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.log_std.len()
    }

    pub fn std(&self) -> Vec<f64> {
        self.log_std.iter().map(|v| v.exp()).collect()
    }

    pub fn mean(&self, obs: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.actor.forward(obs)
    }

    pub fn log_prob(&self, mean: &[f64], action: &[f64]) -> f64 {
        log_prob(mean, &self.log_std, action)
    }

    /// Entropy of the action distribution (independent of the state).
    pub fn entropy(&self) -> f64 {
        self.log_std.iter().map(|l| l + 0.5 * (1.0 + LN_2PI)).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, mean: &[f64], rng: &mut R) -> Vec<f64> {
        mean.iter()
            .zip(&self.log_std)
            .map(|(m, l)| m + l.exp() * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    pub fn num_params(&self) -> usize {
        self.actor.num_params() + self.log_std.len()
    }

    /// Actor parameters followed by the log standard deviations.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut p = self.actor.params().to_vec();
        p.extend_from_slice(&self.log_std);
        p
    }

    pub fn set_flat_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.num_params() {
            return Err(CampError::DimensionMismatch {
                context: "policy parameters",
                expected: self.num_params(),
                got: p.len(),
            });
        }
        let n = self.actor.num_params();
        self.actor.params_mut().copy_from_slice(&p[..n]);
        self.log_std.copy_from_slice(&p[n..]);
        Ok(())
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut ck = self.actor.to_checkpoint("actor");
        ck.arrays.push(("log_std".into(), self.log_std.clone()));
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let actor = Mlp::from_checkpoint(ck, "actor")?;
        let log_std = ck.array("log_std")?.to_vec();
        if log_std.len() != actor.output_dim() {
            return Err(CampError::Data("actor checkpoint: log_std length differs from action dimension".into()));
        }
        Ok(Self { actor, log_std })
    }
}

pub fn log_prob(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((m, l), a)| {
            let z = (a - m) / l.exp();
            -0.5 * z * z - l - 0.5 * LN_2PI
        })
        .sum()
}

/// `KL(old ‖ new)` between diagonal Gaussians.
pub fn gaussian_kl(old_mean: &[f64], old_log_std: &[f64], new_mean: &[f64], new_log_std: &[f64]) -> f64 {
    (0..old_mean.len())
        .map(|j| {
            let (so, sn) = (old_log_std[j].exp(), new_log_std[j].exp());
            new_log_std[j] - old_log_std[j] + (so * so + (old_mean[j] - new_mean[j]).powi(2)) / (2.0 * sn * sn) - 0.5
        })
        .sum()
}

/// Scalar value function over `[o_t, x_t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Critic {
    pub net: Mlp,
}

impl Critic {
    pub fn new<R: Rng + ?Sized>(input_dim: usize, hidden: &[usize], rng: &mut R) -> Result<Self> {
        let spec = MlpSpec::new(input_dim, hidden, 1, Activation::Elu)?;
        Ok(Self {
            net: Mlp::orthogonal(spec, std::f64::consts::SQRT_2, 1.0, rng),
        })
    }

    pub fn values(&self, inputs: ArrayView2<f64>) -> Result<Vec<f64>> {
        Ok(self.net.forward(inputs)?.column(0).to_vec())
    }
}
