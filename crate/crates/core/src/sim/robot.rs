use serde::{Deserialize, Serialize};

use crate::motion::{LegGeometry, DEFAULT_BODY_HEIGHT};

/// Nominal rigid-body parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotModel {
    pub geometry: LegGeometry,
    /// Trunk mass and per-leg (hip, thigh, calf) link masses, kg.
    pub trunk_mass: f64,
    pub link_masses: [f64; 3],
    /// Reflected inertia of each joint about its axis, kg·m², before link-mass scaling.
    pub joint_inertia: [f64; 3],
    /// Peak torque per (abduction, hip, knee) joint, Nm.
    pub torque_limits: [f64; 3],
    pub body_height: f64,
    /// Standing pose `θ_init`.
    pub nominal_joints: [f64; 12],
}

impl Default for RobotModel {
    fn default() -> Self {
        let geometry = LegGeometry::default();
        let nominal_joints = geometry
            .standing_pose(DEFAULT_BODY_HEIGHT)
            .expect("default standing pose is reachable");
        Self {
            geometry,
            trunk_mass: 6.921,
            link_masses: [0.678, 1.152, 0.154],
            joint_inertia: [0.01, 0.01, 0.01],
            torque_limits: [23.7, 23.7, 45.43],
            body_height: DEFAULT_BODY_HEIGHT,
            nominal_joints,
        }
    }
}

impl RobotModel {
    pub fn torque_limit(&self, joint: usize) -> f64 {
        self.torque_limits[joint % 3]
    }
}

/// Joint-space PD gains and action scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdParams {
    pub kp: [f64; 12],
    pub kd: [f64; 12],
    /// Radians per unit action.
    pub action_scale: f64,
}

impl PdParams {
    /// `kp` on abduction and hip joints, `kp_calf` on knees, uniform `kd`.
    pub fn new(kp: f64, kp_calf: f64, kd: f64, action_scale: f64) -> Self {
        let mut p = [kp; 12];
        for leg in 0..4 {
            p[3 * leg + 2] = kp_calf;
        }
        Self {
            kp: p,
            kd: [kd; 12],
            action_scale,
        }
    }

    pub fn scaled(&self, kp_scale: f64, kd_scale: f64) -> Self {
        Self {
            kp: self.kp.map(|v| v * kp_scale),
            kd: self.kd.map(|v| v * kd_scale),
            action_scale: self.action_scale,
        }
    }
}

impl Default for PdParams {
    fn default() -> Self {
        Self::new(30.0, 40.0, 1.0, 0.25)
    }
}

/// `τ = kp (θ* − θ) − kd θ̇`, clamped to `±limits`.
pub fn pd_torque(target: &[f64; 12], theta: &[f64; 12], theta_dot: &[f64; 12], pd: &PdParams, limits: &[f64; 12]) -> [f64; 12] {
    std::array::from_fn(|j| {
        let tau = pd.kp[j] * (target[j] - theta[j]) - pd.kd[j] * theta_dot[j];
        tau.clamp(-limits[j], limits[j])
    })
}

/// `θ* = θ_init + k a`.
pub fn apply_action(nominal: &[f64; 12], action: &[f64; 12], pd: &PdParams) -> [f64; 12] {
    std::array::from_fn(|j| nominal[j] + pd.action_scale * action[j])
}

#[cfg(test)]
mod tests {
    use super::*;

    const BIG: [f64; 12] = [1e9; 12];

    #[test]
    fn pd_torque_examples() {
        let pd = PdParams::default();
        let zero = [0.0; 12];
        assert_eq!(pd_torque(&zero, &zero, &zero, &pd, &BIG), zero);
        let mut target = [0.0; 12];
        target[1] = 0.1;
        target[2] = 0.1;
        let tau = pd_torque(&target, &zero, &zero, &pd, &BIG);
        assert!((tau[1] - 3.0).abs() < 1e-12);
        assert!((tau[2] - 4.0).abs() < 1e-12);
        let mut vel = [0.0; 12];
        vel[0] = 2.0;
        assert_eq!(pd_torque(&zero, &zero, &vel, &pd, &BIG)[0], -2.0);
    }

    #[test]
    fn pd_torque_is_clamped() {
        let pd = PdParams::default();
        let mut target = [0.0; 12];
        target[2] = 10.0;
        let limits = [5.0; 12];
        assert_eq!(pd_torque(&target, &[0.0; 12], &[0.0; 12], &pd, &limits)[2], 5.0);
    }

    #[test]
    fn action_mapping() {
        let model = RobotModel::default();
        let pd = PdParams::default();
        let nominal = model.nominal_joints;
        assert_eq!(apply_action(&nominal, &[0.0; 12], &pd), nominal);
        let mut e = [0.0; 12];
        e[5] = 1.0;
        let t = apply_action(&nominal, &e, &pd);
        for j in 0..12 {
            let d = t[j] - nominal[j];
            assert!((d - if j == 5 { 0.25 } else { 0.0 }).abs() < 1e-15);
        }
        let a: [f64; 12] = std::array::from_fn(|j| (j as f64 * 0.37).sin());
        let a2 = a.map(|v| 2.0 * v);
        let t1 = apply_action(&nominal, &a, &pd);
        let t2 = apply_action(&nominal, &a2, &pd);
        for j in 0..12 {
            assert!(((t2[j] - nominal[j]) - 2.0 * (t1[j] - nominal[j])).abs() < 1e-12);
        }
    }
}
