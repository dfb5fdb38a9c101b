use ndarray::{Array2, ArrayView2};

/// Generalized advantage estimation over a `(T, N)` rollout.
///
/// `next_values[t, n]` is the value of the state reached by step `t`
/// (the pre-reset state for episode ends). `terminated` drops the bootstrap;
/// `done` (terminated or truncated) cuts the advantage recursion.
pub fn gae_advantages(
    rewards: ArrayView2<f64>,
    values: ArrayView2<f64>,
    next_values: ArrayView2<f64>,
    terminated: ArrayView2<bool>,
    done: ArrayView2<bool>,
    gamma: f64,
    lambda: f64,
) -> (Array2<f64>, Array2<f64>) {
    let (t_len, n) = rewards.dim();
    let mut adv = Array2::zeros((t_len, n));
    for e in 0..n {
        let mut next_adv = 0.0;
        for t in (0..t_len).rev() {
            let boot = if terminated[[t, e]] { 0.0 } else { next_values[[t, e]] };
            let delta = rewards[[t, e]] + gamma * boot - values[[t, e]];
            let carry = if done[[t, e]] { 0.0 } else { next_adv };
            next_adv = delta + gamma * lambda * carry;
            adv[[t, e]] = next_adv;
        }
    }
    let returns = &adv + &values;
    (adv, returns)
}

/// Shift to zero mean and scale to unit standard deviation.
pub fn normalize_advantages(adv: &mut [f64]) {
    let n = adv.len() as f64;
    if adv.len() < 2 {
        return;
    }
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt() + 1e-8;
    adv.iter_mut().for_each(|a| *a = (*a - mean) / std);
}
