use ndarray::{Array2, ArrayView2};

use super::policy::{log_prob, GaussianPolicy};
use crate::config::RewardWeights;
use crate::error::{CampError, Result};
use crate::nn::Mlp;

/// `w_task·task + w_style·style + w_skill·skill`.
pub fn compose_reward(task: f64, style: f64, skill: f64, w: &RewardWeights) -> f64 {
    w.task * task + w.style * style + w.skill * skill
}

/// One minibatch of policy-gradient data.
#[derive(Debug, Clone, Copy)]
pub struct SurrogateBatch<'a> {
    pub obs: ArrayView2<'a, f64>,
    pub actions: ArrayView2<'a, f64>,
    pub old_log_prob: &'a [f64],
    pub advantages: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct SurrogateLoss {
    /// Surrogate plus entropy bonus.
    pub loss: f64,
    pub surrogate: f64,
    pub entropy: f64,
    /// Fraction of samples whose clipped branch is active.
    pub clip_fraction: f64,
    /// Policy means for the batch (used for the KL estimate).
    pub mean: Array2<f64>,
    /// Gradient w.r.t. [`GaussianPolicy::flat_params`].
    pub param_grad: Vec<f64>,
    pub input_grad: Array2<f64>,
}

/// `−mean min(ρA, clip(ρ, 1±ε)A) − c_ent·H`, with `ρ = exp(log π − log π_old)`.
pub fn surrogate_loss(policy: &GaussianPolicy, batch: SurrogateBatch, clip: f64, entropy_coef: f64) -> Result<SurrogateLoss> {
    let b = batch.obs.nrows();
    if b == 0 {
        return Err(CampError::Empty("surrogate batch".into()));
    }
    let cache = policy.actor.forward_cached(batch.obs)?;
    let mean = cache.output().clone();
    let act_dim = policy.action_dim();
    let inv_var: Vec<f64> = policy.log_std.iter().map(|l| (-2.0 * l).exp()).collect();
    let mut up = Array2::zeros((b, act_dim));
    let mut log_std_grad = vec![0.0; act_dim];
    let mut surrogate = 0.0;
    let mut clipped = 0usize;
    for i in 0..b {
        let mu = mean.row(i);
        let a = batch.actions.row(i);
        let lp = log_prob(mu.as_slice().unwrap(), &policy.log_std, a.as_slice().unwrap());
        let ratio = (lp - batch.old_log_prob[i]).exp();
        let adv = batch.advantages[i];
        let unclipped = ratio * adv;
        let clipped_term = ratio.clamp(1.0 - clip, 1.0 + clip) * adv;
        surrogate -= unclipped.min(clipped_term) / b as f64;
        if unclipped <= clipped_term {
            // d(−ρA/B)/d log π = −ρA/B
            let c = -unclipped / b as f64;
            for j in 0..act_dim {
                let d = a[j] - mu[j];
                up[[i, j]] = c * d * inv_var[j];
                log_std_grad[j] += c * (d * d * inv_var[j] - 1.0);
            }
        } else {
            clipped += 1;
        }
    }
    let entropy = policy.entropy();
    for g in log_std_grad.iter_mut() {
        *g -= entropy_coef;
    }
    let (mut param_grad, input_grad) = policy.actor.backward(&cache, up.view());
    param_grad.extend_from_slice(&log_std_grad);
    let loss = surrogate - entropy_coef * entropy;
    if !loss.is_finite() {
        return Err(CampError::NonFinite("surrogate loss".into()));
    }
    Ok(SurrogateLoss {
        loss,
        surrogate,
        entropy,
        clip_fraction: clipped as f64 / b as f64,
        mean,
        param_grad,
        input_grad,
    })
}

#[derive(Debug, Clone)]
pub struct ValueLoss {
    pub loss: f64,
    pub param_grad: Vec<f64>,
    pub input_grad: Array2<f64>,
}

/// `mean (V(x) − R)²`.
pub fn value_loss(critic: &Mlp, inputs: ArrayView2<f64>, returns: &[f64]) -> Result<ValueLoss> {
    let b = inputs.nrows();
    if b == 0 {
        return Err(CampError::Empty("value batch".into()));
    }
    if returns.len() != b {
        return Err(CampError::DimensionMismatch {
            context: "value targets",
            expected: b,
            got: returns.len(),
        });
    }
    let cache = critic.forward_cached(inputs)?;
    let mut up = Array2::zeros((b, 1));
    let mut loss = 0.0;
    for i in 0..b {
        let d = cache.output()[[i, 0]] - returns[i];
        loss += d * d / b as f64;
        up[[i, 0]] = 2.0 * d / b as f64;
    }
    if !loss.is_finite() {
        return Err(CampError::NonFinite("value loss".into()));
    }
    let (param_grad, input_grad) = critic.backward(&cache, up.view());
    Ok(ValueLoss {
        loss,
        param_grad,
        input_grad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;

    fn policy() -> GaussianPolicy {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut p = GaussianPolicy::new(3, &[6], 2, 0.7, &mut rng).unwrap();
        p.actor.params_mut().iter_mut().enumerate().for_each(|(i, v)| *v += 0.05 * (i as f64).cos());
        p
    }

    #[test]
    fn reward_composition() {
        let w = RewardWeights::default();
        assert!((compose_reward(2.25, 1.0, 1.0, &w) - 3.55).abs() < 1e-12);
        assert_eq!(compose_reward(0.0, 0.0, 0.0, &w), 0.0);
        let only_style = RewardWeights { task: 0.0, style: 1.0, skill: 0.0 };
        assert_eq!(compose_reward(1.3, 0.42, -0.7, &only_style), 0.42);
    }

    #[test]
    fn ratio_one_gives_negative_mean_advantage() {
        let p = policy();
        let obs = array![[0.1, -0.2, 0.3], [0.5, 0.0, -1.0], [0.2, 0.2, 0.2]];
        let mean = p.mean(obs.view()).unwrap();
        let actions = array![[0.3, -0.1], [0.0, 0.4], [-0.5, 0.5]];
        let old: Vec<f64> = (0..3).map(|i| p.log_prob(mean.row(i).as_slice().unwrap(), actions.row(i).as_slice().unwrap())).collect();
        let adv = [1.0, -2.0, 0.5];
        let out = surrogate_loss(&p, SurrogateBatch { obs: obs.view(), actions: actions.view(), old_log_prob: &old, advantages: &adv }, 0.2, 0.0).unwrap();
        assert!((out.surrogate - (-(1.0 - 2.0 + 0.5) / 3.0)).abs() < 1e-12);
        assert_eq!(out.clip_fraction, 0.0);
    }

    #[test]
    fn saturated_positive_advantage_has_no_gradient() {
        let p = policy();
        let obs = array![[0.1, -0.2, 0.3]];
        let mean = p.mean(obs.view()).unwrap();
        let actions = array![[0.3, -0.1]];
        let lp = p.log_prob(mean.row(0).as_slice().unwrap(), actions.row(0).as_slice().unwrap());
        // old log-prob lower by ln 2: ratio = 2 > 1.2
        let old = [lp - 2f64.ln()];
        let out = surrogate_loss(&p, SurrogateBatch { obs: obs.view(), actions: actions.view(), old_log_prob: &old, advantages: &[1.0] }, 0.2, 0.0).unwrap();
        assert_eq!(out.clip_fraction, 1.0);
        assert!(out.param_grad.iter().all(|&g| g == 0.0));
        assert!((out.surrogate + 1.2).abs() < 1e-12);
    }

    #[test]
    fn perfect_values_have_zero_loss() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let critic = super::super::policy::Critic::new(3, &[5], &mut rng).unwrap();
        let x = array![[0.1, 0.2, 0.3], [1.0, -1.0, 0.0]];
        let v = critic.values(x.view()).unwrap();
        let out = value_loss(&critic.net, x.view(), &v).unwrap();
        assert_eq!(out.loss, 0.0);
        assert!(out.param_grad.iter().all(|&g| g == 0.0));
    }
}
