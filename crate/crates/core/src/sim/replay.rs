use super::env::{Command, EnvState, Simulator};
use super::randomization::RandomizedParams;
use crate::error::{CampError, Result};
use crate::motion::MotionClip;

/// Open-loop replay of expert joint targets.
#[derive(Debug, Clone)]
pub struct Replay {
    /// Commanded joint targets, one row per control step.
    pub targets: Vec<[f64; 12]>,
    /// Joint positions after each step.
    pub actual: Vec<[f64; 12]>,
    pub contacts: Vec<[bool; 4]>,
    pub states: Vec<EnvState>,
}

/// Start from the clip's first frame and, at step `k`, command the joint
/// positions of frame `k + 1`. Nominal (unrandomized) parameters are used.
pub fn replay_clip(sim: &Simulator, clip: &MotionClip, command: Command) -> Result<Replay> {
    if clip.len() < 2 {
        return Err(CampError::Empty("replay needs at least two frames".into()));
    }
    let first = &clip.frames[0];
    let mut state = sim.reset_with(command, RandomizedParams::nominal(sim.config.randomization.nominal_friction));
    state.joint_positions = first.joint_positions;
    state.joint_velocities = first.joint_velocities;
    state.base_position[2] = first.body_position[2];
    state.base_linear_velocity = state.command.velocity;
    state.base_linear_velocity[2] = 0.0;
    state.base_angular_velocity = [0.0, 0.0, state.command.velocity[2]];
    let nominal = sim.model.nominal_joints;
    let k = sim.pd.action_scale;
    let mut out = Replay {
        targets: Vec::with_capacity(clip.len() - 1),
        actual: Vec::with_capacity(clip.len() - 1),
        contacts: Vec::with_capacity(clip.len() - 1),
        states: Vec::with_capacity(clip.len() - 1),
    };
    for frame in &clip.frames[1..] {
        let action: Vec<f64> = (0..12).map(|j| (frame.joint_positions[j] - nominal[j]) / k).collect();
        let step = sim.step(&mut state, &action)?;
        out.targets.push(frame.joint_positions);
        out.actual.push(state.joint_positions);
        out.contacts.push(step.contacts);
        out.states.push(state.clone());
    }
    Ok(out)
}
