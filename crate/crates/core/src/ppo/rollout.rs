use ndarray::Array2;

use super::policy::GaussianPolicy;
use crate::config::SkillSchedule;
use crate::error::{CampError, Result};
use crate::motion::SkillDef;
use crate::sim::{Command, RandomizedParams, Simulator, TraceRow};

/// Deterministic evaluation rollout: mean actions, nominal dynamics, commands
/// switched according to `schedule`. Stops early if the episode terminates.
pub fn evaluate_schedule(
    sim: &Simulator,
    policy: &GaussianPolicy,
    hide_skill: bool,
    skills: &[SkillDef],
    schedule: &SkillSchedule,
    duration: f64,
) -> Result<Vec<TraceRow>> {
    schedule.validate(skills.len())?;
    if !(duration > 0.0) {
        return Err(CampError::InvalidArgument("rollout duration must be positive".into()));
    }
    let dt = sim.config.dt;
    let steps = (duration / dt).round() as usize;
    let command_for = |i: usize| -> Result<Command> {
        let e = &schedule.entries[i];
        let v = e.velocity.unwrap_or(skills[e.skill].spec.command_velocity);
        Command::one_hot(v, e.skill, skills.len())
    };
    let params = RandomizedParams::nominal(sim.config.randomization.nominal_friction);
    let mut active = 0;
    let mut state = sim.reset_with(command_for(0)?, params);
    let mut rows = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = k as f64 * dt;
        let i = schedule.entries.partition_point(|e| e.time <= t + 1e-9) - 1;
        if i != active {
            active = i;
            state.command = command_for(i)?;
        }
        let obs = sim.observation(&state, hide_skill);
        let obs = Array2::from_shape_vec((1, obs.len()), obs).expect("row shape");
        let action = policy.mean(obs.view())?;
        let out = sim.step(&mut state, action.row(0).as_slice().unwrap())?;
        let v = state.body_linear_velocity();
        rows.push(TraceRow {
            time: state.time,
            skill: schedule.entries[active].skill,
            command: state.command.velocity,
            base_position: state.base_position,
            base_velocity: [v[0], v[1], state.body_angular_velocity()[2]],
            joint_targets: state.joint_targets,
            joint_positions: state.joint_positions,
            contacts: out.contacts,
        });
        if out.terminated {
            log::warn!("evaluation episode terminated at t = {:.2} s", state.time);
            break;
        }
    }
    Ok(rows)
}
