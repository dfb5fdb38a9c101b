use nalgebra::{UnitQuaternion, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::EnvConfig;
use super::randomization::RandomizedParams;
use super::robot::{apply_action, pd_torque, PdParams, RobotModel};
use super::GRAVITY;
use crate::error::{ensure_finite, CampError, Result};
use crate::motion::{AmpFeature, AmpFeatureParts};

/// Velocity command `c_t` (body frame) and skill selector `g_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub velocity: [f64; 3],
    pub skill: Vec<f64>,
}

impl Command {
    pub fn one_hot(velocity: [f64; 3], label: usize, num_skills: usize) -> Result<Self> {
        if label >= num_skills {
            return Err(CampError::InvalidArgument(format!(
                "skill label {label} out of range for {num_skills} skills"
            )));
        }
        let mut skill = vec![0.0; num_skills];
        skill[label] = 1.0;
        Ok(Self { velocity, skill })
    }

    /// A command whose skill selector is all zeros.
    pub fn without_skill(velocity: [f64; 3], num_skills: usize) -> Self {
        Self {
            velocity,
            skill: vec![0.0; num_skills],
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite(&self.velocity, "command velocity")?;
        if self.skill.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(CampError::InvalidArgument("skill selector entries must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Full simulator state of one environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub base_position: [f64; 3],
    /// Unit quaternion (w, x, y, z).
    pub base_orientation: [f64; 4],
    /// World frame.
    pub base_linear_velocity: [f64; 3],
    /// World frame.
    pub base_angular_velocity: [f64; 3],
    pub joint_positions: [f64; 12],
    pub joint_velocities: [f64; 12],
    /// Lagged actuator torques.
    pub joint_torques: [f64; 12],
    pub joint_targets: [f64; 12],
    pub contacts: [bool; 4],
    pub time: f64,
    pub step: usize,
    pub last_action: [f64; 12],
    pub command: Command,
    pub params: RandomizedParams,
}

impl EnvState {
    pub fn orientation(&self) -> UnitQuaternion<f64> {
        let [w, x, y, z] = self.base_orientation;
        UnitQuaternion::new_normalize(nalgebra::Quaternion::new(w, x, y, z))
    }

    /// Base linear velocity in the body frame.
    pub fn body_linear_velocity(&self) -> [f64; 3] {
        let v = self.orientation().inverse_transform_vector(&Vector3::from(self.base_linear_velocity));
        [v.x, v.y, v.z]
    }

    /// Base angular velocity in the body frame.
    pub fn body_angular_velocity(&self) -> [f64; 3] {
        let v = self.orientation().inverse_transform_vector(&Vector3::from(self.base_angular_velocity));
        [v.x, v.y, v.z]
    }

    pub fn roll_pitch(&self) -> (f64, f64) {
        let (r, p, _) = self.orientation().euler_angles();
        (r, p)
    }
}

/// Result of one control step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// AMP feature of the post-step state.
    pub feature: AmpFeature,
    pub contacts: [bool; 4],
    pub terminated: bool,
    /// Episode reached its step cap without terminating.
    pub truncated: bool,
    pub task_reward: f64,
}

/// Body-frame image of world "down".
pub fn gravity_projection(orientation: &UnitQuaternion<f64>) -> [f64; 3] {
    let g = orientation.inverse_transform_vector(&Vector3::new(0.0, 0.0, -1.0));
    [g.x, g.y, g.z]
}

/// `o_t`: angular velocity, gravity projection, command, skill selector,
/// joint positions relative to `θ_init`, scaled joint velocities, previous action.
pub fn build_observation(
    state: &EnvState,
    command: &Command,
    prev_action: &[f64; 12],
    nominal: &[f64; 12],
    joint_velocity_scale: f64,
) -> Vec<f64> {
    let mut o = Vec::with_capacity(45 + command.skill.len());
    o.extend_from_slice(&state.body_angular_velocity());
    o.extend_from_slice(&gravity_projection(&state.orientation()));
    o.extend_from_slice(&command.velocity);
    o.extend_from_slice(&command.skill);
    o.extend((0..12).map(|j| state.joint_positions[j] - nominal[j]));
    o.extend(state.joint_velocities.iter().map(|v| v * joint_velocity_scale));
    o.extend_from_slice(prev_action);
    o
}

pub const PRIVILEGED_DIM: usize = 9;

/// `x_t`: body linear velocity, contact flags, friction, payload mass.
pub fn privileged_observation(state: &EnvState) -> [f64; PRIVILEGED_DIM] {
    let v = state.body_linear_velocity();
    let c = state.contacts.map(|b| if b { 1.0 } else { 0.0 });
    [v[0], v[1], v[2], c[0], c[1], c[2], c[3], state.params.friction, state.params.payload_mass]
}

/// Velocity-tracking reward: `1.5 exp(−‖Δv_xy‖/0.15) + 0.75 exp(−|Δω_z|/0.15)`.
pub fn task_reward(body_linear_velocity: [f64; 3], body_angular_velocity: [f64; 3], command: &Command) -> f64 {
    let ex = command.velocity[0] - body_linear_velocity[0];
    let ey = command.velocity[1] - body_linear_velocity[1];
    let ew = command.velocity[2] - body_angular_velocity[2];
    1.5 * (-ex.hypot(ey) / 0.15).exp() + 0.75 * (-ew.abs() / 0.15).exp()
}

/// Body-frame planar velocity and yaw rate that best explain the motion of
/// planted feet: least squares of `ṙ_i + v + ω ẑ × r_i = 0` over stance feet
/// `(r_i, ṙ_i)`. A single stance foot fixes `v` with `ω = 0`; `None` in flight.
pub fn stance_odometry(stance: &[([f64; 2], [f64; 2])]) -> Option<([f64; 2], f64)> {
    if stance.is_empty() {
        return None;
    }
    let n = stance.len() as f64;
    let mean = |k: usize, pick: fn(&([f64; 2], [f64; 2])) -> [f64; 2]| stance.iter().map(|p| pick(p)[k]).sum::<f64>() / n;
    let r_bar = [mean(0, |p| p.0), mean(1, |p| p.0)];
    let v_bar = [mean(0, |p| p.1), mean(1, |p| p.1)];
    let (mut num, mut den) = (0.0, 0.0);
    for (r, v) in stance {
        let (rx, ry) = (r[0] - r_bar[0], r[1] - r_bar[1]);
        let (vx, vy) = (v[0] - v_bar[0], v[1] - v_bar[1]);
        num += rx * vy - ry * vx;
        den += rx * rx + ry * ry;
    }
    let w = if den > 1e-12 { -num / den } else { 0.0 };
    let v = [-v_bar[0] + w * r_bar[1], -v_bar[1] - w * r_bar[0]];
    Some((v, w))
}

/// Stateless stepping and reset logic shared by all environments.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulator {
    pub model: RobotModel,
    pub config: EnvConfig,
    pub pd: PdParams,
}

impl Simulator {
    pub fn new(model: RobotModel, config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let pd = PdParams::new(config.kp, config.kp_calf, config.kd, config.action_scale);
        Ok(Self { model, config, pd })
    }

    pub fn nominal_height(&self) -> f64 {
        self.model.body_height
    }

    /// Height of the base that puts the lowest foot on the ground.
    fn support_height(&self, joints: &[f64; 12]) -> f64 {
        let feet = self.model.geometry.foot_positions(joints);
        -feet.iter().map(|f| f[2]).fold(f64::INFINITY, f64::min)
    }

    fn contacts(&self, height: f64, joints: &[f64; 12]) -> [bool; 4] {
        let feet = self.model.geometry.foot_positions(joints);
        feet.map(|f| height + f[2] <= self.config.contact_tolerance)
    }

    /// New episode: randomized parameters, perturbed standing pose, feet on the ground.
    pub fn reset<R: Rng + ?Sized>(&self, command: Command, rng: &mut R) -> EnvState {
        let params = self.config.randomization.sample(rng);
        self.reset_with(command, params)
    }

    pub fn reset_with(&self, command: Command, params: RandomizedParams) -> EnvState {
        let nominal = self.model.nominal_joints;
        let joints: [f64; 12] = std::array::from_fn(|j| nominal[j] * params.initial_joint_scale[j]);
        self.reset_to_pose(command, params, joints, [0.0; 12])
    }

    /// New episode from a given joint state, with the lowest foot on the ground
    /// and the base already moving at the commanded velocity when `joint_velocities` is nonzero.
    pub fn reset_to_pose(&self, command: Command, params: RandomizedParams, joints: [f64; 12], joint_velocities: [f64; 12]) -> EnvState {
        let nominal = self.model.nominal_joints;
        let height = self.support_height(&joints);
        let moving = joint_velocities.iter().any(|&v| v != 0.0);
        let [vx, vy, wz] = command.velocity;
        let (lin, ang) = if moving { ([vx, vy, 0.0], [0.0, 0.0, wz]) } else { ([0.0; 3], [0.0; 3]) };
        EnvState {
            base_position: [0.0, 0.0, height],
            base_orientation: [1.0, 0.0, 0.0, 0.0],
            base_linear_velocity: lin,
            base_angular_velocity: ang,
            joint_positions: joints,
            joint_velocities,
            joint_torques: [0.0; 12],
            joint_targets: nominal,
            contacts: self.contacts(height, &joints),
            time: 0.0,
            step: 0,
            last_action: [0.0; 12],
            command,
            params,
        }
    }

    fn torque_limits(&self, params: &RandomizedParams) -> [f64; 12] {
        std::array::from_fn(|j| self.model.torque_limit(j) * params.motor_strength)
    }

    /// Advance `state` by one control period under action `a_t`.
    pub fn step(&self, state: &mut EnvState, action: &[f64]) -> Result<StepOutcome> {
        if action.len() != 12 {
            return Err(CampError::DimensionMismatch {
                context: "action",
                expected: 12,
                got: action.len(),
            });
        }
        ensure_finite(action, "action")?;
        let action: [f64; 12] = action.try_into().unwrap();
        let cfg = &self.config;
        let dt = cfg.dt;
        let p = &state.params;

        let target = apply_action(&self.model.nominal_joints, &action, &self.pd);
        let pd = self.pd.scaled(p.kp_scale, p.kd_scale);
        let limits = self.torque_limits(p);
        let inertia: [f64; 12] = std::array::from_fn(|j| self.model.joint_inertia[j % 3] * p.link_mass_scale);
        let h = dt / cfg.substeps as f64;
        let lag = (h / cfg.actuator_lag).min(1.0);
        let (mut q, mut qd, mut tau) = (state.joint_positions, state.joint_velocities, state.joint_torques);
        for _ in 0..cfg.substeps {
            let cmd = pd_torque(&target, &q, &qd, &pd, &limits);
            for j in 0..12 {
                tau[j] += lag * (cmd[j] - tau[j]);
                qd[j] += h * tau[j] / inertia[j];
                q[j] += h * qd[j];
            }
        }

        // Vertical: ballistic unless the lowest foot would pass through the ground.
        let z_prev = state.base_position[2];
        let mut vz = state.base_linear_velocity[2] - GRAVITY * dt;
        let mut z = z_prev + vz * dt;
        let z_support = self.support_height(&q);
        if z <= z_support {
            z = z_support;
            vz = (z - z_prev) / dt;
        }
        let contacts = self.contacts(z, &q);

        // Horizontal and yaw: the planar rigid motion that best keeps stance feet
        // fixed on the ground, reached within the friction limit.
        let orientation = state.orientation();
        let feet_before = self.model.geometry.foot_positions(&state.joint_positions);
        let feet_after = self.model.geometry.foot_positions(&q);
        let stance: Vec<([f64; 2], [f64; 2])> = (0..4)
            .filter(|&i| contacts[i])
            .map(|i| {
                let r = [feet_after[i][0], feet_after[i][1]];
                let v = [(feet_after[i][0] - feet_before[i][0]) / dt, (feet_after[i][1] - feet_before[i][1]) / dt];
                (r, v)
            })
            .collect();
        let max_dv = state.params.friction * GRAVITY * dt;
        let mut wz = state.base_angular_velocity[2];
        let mut vx = state.base_linear_velocity[0];
        let mut vy = state.base_linear_velocity[1];
        if let Some((body_v, yaw_rate)) = stance_odometry(&stance) {
            let max_dw = max_dv / cfg.yaw_lever;
            wz += (yaw_rate - wz).clamp(-max_dw, max_dw);
            let heading = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), wz * dt) * orientation;
            let desired = heading.transform_vector(&Vector3::new(body_v[0], body_v[1], 0.0));
            let (dvx, dvy) = (desired.x - vx, desired.y - vy);
            let n = dvx.hypot(dvy);
            let s = if n > max_dv { max_dv / n } else { 1.0 };
            vx += s * dvx;
            vy += s * dvy;
        }
        let new_orientation = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), wz * dt) * orientation;

        state.base_position = [
            state.base_position[0] + vx * dt,
            state.base_position[1] + vy * dt,
            z,
        ];
        state.base_orientation = [
            new_orientation.w,
            new_orientation.i,
            new_orientation.j,
            new_orientation.k,
        ];
        state.base_linear_velocity = [vx, vy, vz];
        state.base_angular_velocity = [0.0, 0.0, wz];
        state.joint_positions = q;
        state.joint_velocities = qd;
        state.joint_torques = tau;
        state.joint_targets = target;
        state.contacts = contacts;
        state.time += dt;
        state.step += 1;
        state.last_action = action;

        let (roll, pitch) = state.roll_pitch();
        let terminated = z < cfg.termination_height_fraction * self.model.body_height
            || roll.abs() > cfg.termination_tilt
            || pitch.abs() > cfg.termination_tilt;
        let truncated = !terminated && state.step >= cfg.episode_steps;
        let task_reward = task_reward(state.body_linear_velocity(), state.body_angular_velocity(), &state.command);
        Ok(StepOutcome {
            feature: self.amp_feature(state),
            contacts,
            terminated,
            truncated,
            task_reward,
        })
    }

    /// AMP feature of a state, from its own velocities.
    pub fn amp_feature(&self, state: &EnvState) -> AmpFeature {
        AmpFeature::from_parts(&AmpFeatureParts {
            joint_positions: state.joint_positions,
            joint_velocities: state.joint_velocities,
            base_linear_velocity: state.body_linear_velocity(),
            base_angular_velocity: state.body_angular_velocity(),
            base_height: state.base_position[2],
            foot_positions: self.model.geometry.foot_positions(&state.joint_positions),
        })
    }

    pub fn observation(&self, state: &EnvState, hide_skill: bool) -> Vec<f64> {
        let command = if hide_skill {
            Command::without_skill(state.command.velocity, state.command.skill.len())
        } else {
            state.command.clone()
        };
        build_observation(
            state,
            &command,
            &state.last_action,
            &self.model.nominal_joints,
            self.config.joint_velocity_obs_scale,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::DomainRandomizationConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sim(randomize: bool) -> Simulator {
        let mut cfg = EnvConfig::default();
        if !randomize {
            cfg.randomization = DomainRandomizationConfig::disabled();
        }
        Simulator::new(RobotModel::default(), cfg).unwrap()
    }

    fn cmd(v: [f64; 3]) -> Command {
        Command::one_hot(v, 0, 3).unwrap()
    }

    #[test]
    fn reset_without_randomization_is_nominal() {
        let s = sim(false);
        let st = s.reset(cmd([0.0; 3]), &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(st.joint_positions, s.model.nominal_joints);
        assert!((st.base_position[2] - 0.27).abs() < 1e-12);
        assert_eq!(st.contacts, [true; 4]);
    }

    #[test]
    fn reset_is_deterministic() {
        let s = sim(true);
        let a = s.reset(cmd([0.4, 0.0, 0.0]), &mut ChaCha8Rng::seed_from_u64(5));
        let b = s.reset(cmd([0.4, 0.0, 0.0]), &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
    }

    #[test]
    fn standing_equilibrium_is_fixed_point() {
        let s = sim(false);
        let mut st = s.reset(cmd([0.0; 3]), &mut ChaCha8Rng::seed_from_u64(0));
        let before = st.clone();
        let out = s.step(&mut st, &[0.0; 12]).unwrap();
        assert!(!out.terminated);
        for j in 0..12 {
            assert!((st.joint_positions[j] - before.joint_positions[j]).abs() < 1e-8);
            assert!(st.joint_velocities[j].abs() < 1e-8);
        }
        for a in 0..3 {
            assert!((st.base_position[a] - before.base_position[a]).abs() < 1e-8);
            assert!(st.base_linear_velocity[a].abs() < 1e-8);
        }
    }

    #[test]
    fn free_fall_loses_g_dt() {
        let s = sim(false);
        let mut st = s.reset(cmd([0.0; 3]), &mut ChaCha8Rng::seed_from_u64(0));
        st.base_position[2] = 2.0;
        st.base_linear_velocity[2] = -0.3;
        let out = s.step(&mut st, &[0.0; 12]).unwrap();
        assert_eq!(out.contacts, [false; 4]);
        assert!((st.base_linear_velocity[2] - (-0.3 - GRAVITY * 0.02)).abs() < 1e-12);
    }

    #[test]
    fn non_finite_action_is_an_error() {
        let s = sim(false);
        let mut st = s.reset(cmd([0.0; 3]), &mut ChaCha8Rng::seed_from_u64(0));
        let mut a = [0.0; 12];
        a[3] = f64::NAN;
        assert!(s.step(&mut st, &a).is_err());
        assert!(s.step(&mut st, &[0.0; 11]).is_err());
    }

    #[test]
    fn standing_robot_does_not_follow_the_command() {
        let s = sim(false);
        let mut st = s.reset(cmd([0.4, 0.0, 0.5]), &mut ChaCha8Rng::seed_from_u64(0));
        for _ in 0..50 {
            s.step(&mut st, &[0.0; 12]).unwrap();
        }
        let v = st.body_linear_velocity();
        assert!(v[0].abs() < 1e-8 && v[1].abs() < 1e-8 && st.base_angular_velocity[2].abs() < 1e-8);
    }

    #[test]
    fn odometry_of_planted_feet() {
        // Feet at the corners of a rectangle, base moving at v = (0.3, -0.1) with ω = 0.5:
        // ṙ = −v − ω ẑ × r = (−0.3 + 0.5 r_y, 0.1 − 0.5 r_x).
        let (vx, vy, w) = (0.3, -0.1, 0.5);
        let feet: Vec<([f64; 2], [f64; 2])> = [[0.2, 0.15], [0.2, -0.15], [-0.2, 0.15], [-0.2, -0.15]]
            .iter()
            .map(|&r| (r, [-vx + w * r[1], -vy - w * r[0]]))
            .collect();
        let (v, yaw) = stance_odometry(&feet).unwrap();
        assert!((v[0] - vx).abs() < 1e-12 && (v[1] - vy).abs() < 1e-12 && (yaw - w).abs() < 1e-12);
        let (v1, yaw1) = stance_odometry(&feet[..1]).unwrap();
        assert_eq!(yaw1, 0.0);
        assert!((v1[0] + feet[0].1[0]).abs() < 1e-12 && (v1[1] + feet[0].1[1]).abs() < 1e-12);
        assert!(stance_odometry(&[]).is_none());
    }

    #[test]
    fn height_never_increases_when_standing_still() {
        let s = sim(false);
        let mut st = s.reset(cmd([0.0; 3]), &mut ChaCha8Rng::seed_from_u64(0));
        let mut z = st.base_position[2];
        for _ in 0..200 {
            s.step(&mut st, &[0.0; 12]).unwrap();
            assert!(st.base_position[2] <= z);
            z = st.base_position[2];
        }
    }

    #[test]
    fn gravity_projection_examples() {
        assert_eq!(gravity_projection(&UnitQuaternion::identity()), [0.0, 0.0, -1.0]);
        let roll = UnitQuaternion::from_euler_angles(std::f64::consts::FRAC_PI_2, 0.0, 0.0);
        // v_body = R(roll)^T (0,0,-1) = (0, -sin φ, -cos φ)
        let g = gravity_projection(&roll);
        assert!(g[0].abs() < 1e-12 && (g[1] + 1.0).abs() < 1e-12 && g[2].abs() < 1e-12);
    }

    #[test]
    fn observation_layout() {
        let s = sim(false);
        let st = s.reset(cmd([0.3, -0.1, 0.2]), &mut ChaCha8Rng::seed_from_u64(0));
        let o = s.observation(&st, false);
        assert_eq!(o.len(), 48);
        assert_eq!(&o[6..9], &[0.3, -0.1, 0.2]);
        assert_eq!(&o[9..12], &[1.0, 0.0, 0.0]);
        assert_eq!(&s.observation(&st, true)[9..12], &[0.0, 0.0, 0.0]);
        let st5 = s.reset(Command::one_hot([0.0; 3], 4, 5).unwrap(), &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(s.observation(&st5, false).len(), 50);
    }

    #[test]
    fn task_reward_examples() {
        let c = cmd([0.5, 0.0, 0.0]);
        assert!((task_reward([0.35, 0.0, 0.0], [0.0; 3], &c) - (1.5 * (-1.0f64).exp() + 0.75)).abs() < 1e-12);
        assert!(task_reward([1e6, 0.0, 0.0], [0.0, 0.0, 1e6], &c) < 1e-12);
    }

    #[test]
    fn ten_thousand_resets_stay_in_range() {
        let s = sim(true);
        let cfg = &s.config.randomization;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..10_000 {
            let st = s.reset(cmd([0.0; 3]), &mut rng);
            assert!(cfg.contains(&st.params));
            lo = lo.min(st.params.friction);
            hi = hi.max(st.params.friction);
        }
        assert!(lo < 0.05 + 0.01 && hi > 1.75 - 0.01);
    }
}
