//! Asymmetric actor-critic PPO with adversarial style and skill rewards.
//!
//! Each iteration collects `horizon` steps from every environment, scores the
//! recorded AMP transitions with the current discriminators, updates the
//! discriminators on fresh expert/policy batches and finally runs clipped-surrogate
//! PPO on the composed rewards.
//!
//! A run directory looks like:
//!
//! ```text
//! config.toml                 resolved experiment config
//! metrics.csv                 one row per iteration
//! checkpoints/iter_000000/    actor, critic, disc, embedding, skill_disc,
//!                             normalizer and Adam states (*.ckpt),
//!                             config.toml and state.json (envs, counters)
//! ```

mod buffer;
mod gae;
mod losses;
mod policy;
mod rollout;
mod trainer;

pub use buffer::RolloutBuffer;
pub use gae::{gae_advantages, normalize_advantages};
pub use losses::{compose_reward, surrogate_loss, value_loss, SurrogateBatch, SurrogateLoss, ValueLoss};
pub use policy::{gaussian_kl, log_prob, Critic, GaussianPolicy};
pub use rollout::evaluate_schedule;
pub use trainer::{
    checkpoint_name, latest_checkpoint, read_metrics, train, IterationStats, TrainOptions, TrainedModel, Trainer,
    CHECKPOINT_DIR, METRICS_FILE, STATE_FILE,
};
