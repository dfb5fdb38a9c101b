use ndarray::Array2;

use crate::motion::AmpFeature;

/// One iteration of experience. Row-indexed arrays use `t * num_envs + n`;
/// `(T, N)` arrays are indexed `[t, n]`.
#[derive(Debug, Clone)]
pub struct RolloutBuffer {
    pub obs: Array2<f64>,
    pub privileged: Array2<f64>,
    pub actions: Array2<f64>,
    /// Policy means at collection time.
    pub means: Array2<f64>,
    /// Log standard deviations at collection time.
    pub log_std: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub values: Array2<f64>,
    /// Value of the state reached by each step, before any reset.
    pub next_values: Array2<f64>,
    pub task_rewards: Array2<f64>,
    pub style_rewards: Array2<f64>,
    pub skill_rewards: Array2<f64>,
    pub rewards: Array2<f64>,
    pub terminated: Array2<bool>,
    pub done: Array2<bool>,
    pub pairs: Vec<(AmpFeature, AmpFeature)>,
    pub labels: Vec<usize>,
}

impl RolloutBuffer {
    pub fn new(horizon: usize, num_envs: usize, obs_dim: usize, privileged_dim: usize, action_dim: usize) -> Self {
        let rows = horizon * num_envs;
        let tn = (horizon, num_envs);
        Self {
            obs: Array2::zeros((rows, obs_dim)),
            privileged: Array2::zeros((rows, privileged_dim)),
            actions: Array2::zeros((rows, action_dim)),
            means: Array2::zeros((rows, action_dim)),
            log_std: vec![0.0; action_dim],
            log_probs: vec![0.0; rows],
            values: Array2::zeros(tn),
            next_values: Array2::zeros(tn),
            task_rewards: Array2::zeros(tn),
            style_rewards: Array2::zeros(tn),
            skill_rewards: Array2::zeros(tn),
            rewards: Array2::zeros(tn),
            terminated: Array2::from_elem(tn, false),
            done: Array2::from_elem(tn, false),
            pairs: Vec::with_capacity(rows),
            labels: Vec::with_capacity(rows),
        }
    }

    pub fn horizon(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_envs(&self) -> usize {
        self.values.ncols()
    }

    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn row(&self, t: usize, n: usize) -> usize {
        t * self.num_envs() + n
    }
}
