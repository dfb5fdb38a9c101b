//! Deterministic surrogate quadruped.
//!
//! Joints are integrated semi-implicitly under PD torques passed through a
//! first-order actuator lag. The base is a centroidal approximation: vertical
//! motion falls under gravity and is held up by the lowest foot, horizontal
//! and yaw velocity follow the command with friction-limited acceleration.
//! Roll and pitch are not simulated and stay zero.

mod batch;
mod config;
mod env;
mod randomization;
mod replay;
mod robot;
mod trace;

pub use batch::{batch_step, batch_step_sequential};
pub use config::EnvConfig;
pub use env::{
    build_observation, gravity_projection, privileged_observation, stance_odometry, task_reward, Command, EnvState, Simulator,
    StepOutcome, PRIVILEGED_DIM,
};
pub use randomization::{DomainRandomizationConfig, RandomizedParams, Range};
pub use replay::{replay_clip, Replay};
pub use robot::{apply_action, pd_torque, PdParams, RobotModel};
pub use trace::{read_trace, write_trace, TraceRow};

/// Observation size for `num_skills` skills.
pub fn observation_dim(num_skills: usize) -> usize {
    45 + num_skills
}

pub const GRAVITY: f64 = 9.81;
