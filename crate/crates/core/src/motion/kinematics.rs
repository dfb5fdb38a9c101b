//! Analytic 3-DOF leg kinematics.
//!
//! Joint order per leg is (abduction, hip pitch, knee). All angles zero means
//! the leg hangs straight down from the hip; positive hip pitch swings the foot
//! backwards and the knee bends backwards (negative knee angle).

use serde::{Deserialize, Serialize};

use crate::error::{CampError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Leg {
    FL,
    FR,
    RL,
    RR,
}

impl Leg {
    pub const ALL: [Leg; 4] = [Leg::FL, Leg::FR, Leg::RL, Leg::RR];

    pub fn index(self) -> usize {
        self as usize
    }

    /// +1 for left legs, -1 for right legs.
    pub fn side(self) -> f64 {
        match self {
            Leg::FL | Leg::RL => 1.0,
            Leg::FR | Leg::RR => -1.0,
        }
    }

    /// +1 for front legs, -1 for rear legs.
    pub fn front(self) -> f64 {
        match self {
            Leg::FL | Leg::FR => 1.0,
            Leg::RL | Leg::RR => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Leg::FL => "FL",
            Leg::FR => "FR",
            Leg::RL => "RL",
            Leg::RR => "RR",
        }
    }
}

/// Link lengths of one leg. `hip` is the signed lateral abduction offset
/// (positive for left legs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkLengths {
    pub hip: f64,
    pub thigh: f64,
    pub calf: f64,
}

/// Foot position in the hip frame for joint angles `(abduction, hip, knee)`.
pub fn leg_forward_kinematics(angles: [f64; 3], links: &LinkLengths) -> [f64; 3] {
    let [q0, q1, q2] = angles;
    let x = -links.thigh * q1.sin() - links.calf * (q1 + q2).sin();
    let z = -links.thigh * q1.cos() - links.calf * (q1 + q2).cos();
    let y0 = links.hip;
    let (s0, c0) = q0.sin_cos();
    [x, y0 * c0 - z * s0, y0 * s0 + z * c0]
}

const REACH_SLACK: f64 = 1e-12;

/// Joint angles placing the foot at `foot` (hip frame).
///
/// Targets outside the reach annulus are rejected, never clamped.
pub fn leg_inverse_kinematics(foot: [f64; 3], links: &LinkLengths) -> Result<[f64; 3]> {
    let [px, py, pz] = foot;
    let min_reach = (links.thigh - links.calf).abs();
    let max_reach = links.thigh + links.calf;
    let unreachable = |distance: f64| CampError::Unreachable {
        target: foot,
        distance,
        min_reach,
        max_reach,
    };
    if !(px.is_finite() && py.is_finite() && pz.is_finite()) {
        return Err(CampError::NonFinite("leg_inverse_kinematics target".into()));
    }

    let yz_sq = py * py + pz * pz - links.hip * links.hip;
    if yz_sq < -REACH_SLACK {
        return Err(unreachable(f64::NAN));
    }
    // The foot stays below the abduction axis in the leg plane.
    let z_plane = -yz_sq.max(0.0).sqrt();
    let abduction = wrap_angle(pz.atan2(py) - z_plane.atan2(links.hip));

    let x_plane = px;
    let r = x_plane.hypot(z_plane);
    if r > max_reach + REACH_SLACK || r < min_reach - REACH_SLACK {
        return Err(unreachable(r));
    }
    let cos_knee = ((r * r - links.thigh * links.thigh - links.calf * links.calf)
        / (2.0 * links.thigh * links.calf))
        .clamp(-1.0, 1.0);
    let knee = -cos_knee.acos();
    let alpha = (-x_plane).atan2(-z_plane);
    let beta = (links.calf * knee.sin()).atan2(links.thigh + links.calf * knee.cos());
    Ok([abduction, alpha - beta, knee])
}

fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut w = a % two_pi;
    if w > std::f64::consts::PI {
        w -= two_pi;
    } else if w <= -std::f64::consts::PI {
        w += two_pi;
    }
    w
}

/// Body-frame placement of the four legs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegGeometry {
    /// Longitudinal distance of the hips from the base origin.
    pub hip_x: f64,
    /// Lateral distance of the hips from the base origin.
    pub hip_y: f64,
    pub abduction_offset: f64,
    pub thigh: f64,
    pub calf: f64,
}

impl Default for LegGeometry {
    /// Dimensions of a Go2-class quadruped.
    fn default() -> Self {
        Self {
            hip_x: 0.1934,
            hip_y: 0.0465,
            abduction_offset: 0.0955,
            thigh: 0.213,
            calf: 0.213,
        }
    }
}

impl LegGeometry {
    pub fn hip_position(&self, leg: Leg) -> [f64; 3] {
        [leg.front() * self.hip_x, leg.side() * self.hip_y, 0.0]
    }

    pub fn links(&self, leg: Leg) -> LinkLengths {
        LinkLengths {
            hip: leg.side() * self.abduction_offset,
            thigh: self.thigh,
            calf: self.calf,
        }
    }

    /// Body-frame foot directly below the abduction offset at `height` below the hips.
    pub fn neutral_foot(&self, leg: Leg, height: f64) -> [f64; 3] {
        let hip = self.hip_position(leg);
        [hip[0], hip[1] + leg.side() * self.abduction_offset, -height]
    }

    pub fn foot_position(&self, leg: Leg, angles: [f64; 3]) -> [f64; 3] {
        let hip = self.hip_position(leg);
        let p = leg_forward_kinematics(angles, &self.links(leg));
        [hip[0] + p[0], hip[1] + p[1], hip[2] + p[2]]
    }

    pub fn foot_positions(&self, joints: &[f64; 12]) -> [[f64; 3]; 4] {
        let mut out = [[0.0; 3]; 4];
        for leg in Leg::ALL {
            let i = leg.index();
            out[i] = self.foot_position(leg, [joints[3 * i], joints[3 * i + 1], joints[3 * i + 2]]);
        }
        out
    }

    pub fn joint_angles(&self, leg: Leg, foot_body: [f64; 3]) -> Result<[f64; 3]> {
        let hip = self.hip_position(leg);
        leg_inverse_kinematics(
            [foot_body[0] - hip[0], foot_body[1] - hip[1], foot_body[2] - hip[2]],
            &self.links(leg),
        )
    }

    /// Joint angles with every foot directly below its hip, `height` below the base.
    pub fn standing_pose(&self, height: f64) -> Result<[f64; 12]> {
        let mut joints = [0.0; 12];
        for leg in Leg::ALL {
            let q = self.joint_angles(leg, self.neutral_foot(leg, height))?;
            joints[3 * leg.index()..3 * leg.index() + 3].copy_from_slice(&q);
        }
        Ok(joints)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn planar(thigh: f64, calf: f64) -> LinkLengths {
        LinkLengths { hip: 0.0, thigh, calf }
    }

    fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
    }

    #[test]
    fn straight_leg_is_zero_pose() {
        let links = planar(0.213, 0.213);
        let q = leg_inverse_kinematics([0.0, 0.0, -0.426], &links).unwrap();
        for v in q {
            assert!(v.abs() < 1e-7, "{q:?}");
        }
        assert!(dist(leg_forward_kinematics(q, &links), [0.0, 0.0, -0.426]) < 1e-9);
    }

    #[test]
    fn right_angle_knee() {
        let links = planar(0.2, 0.25);
        let d = (0.2f64.powi(2) + 0.25f64.powi(2)).sqrt();
        let q = leg_inverse_kinematics([0.0, 0.0, -d], &links).unwrap();
        assert!((q[2] + std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        // forward kinematics oracle
        assert!(dist(leg_forward_kinematics(q, &links), [0.0, 0.0, -d]) < 1e-12);
    }

    #[test]
    fn out_of_reach_is_rejected() {
        let links = planar(0.213, 0.213);
        let err = leg_inverse_kinematics([0.0, 0.0, -(0.426 + 0.01)], &links).unwrap_err();
        assert!(matches!(err, CampError::Unreachable { .. }));
        let links = planar(0.3, 0.1);
        assert!(leg_inverse_kinematics([0.0, 0.0, -0.1], &links).is_err());
    }

    #[test]
    fn standing_pose_has_backward_knees() {
        let geo = LegGeometry::default();
        let pose = geo.standing_pose(0.27).unwrap();
        for leg in Leg::ALL {
            let i = leg.index();
            assert!(pose[3 * i].abs() < 1e-12);
            assert!(pose[3 * i + 1] > 0.0);
            assert!(pose[3 * i + 2] < 0.0);
            let foot = geo.foot_position(leg, [pose[3 * i], pose[3 * i + 1], pose[3 * i + 2]]);
            assert!(dist(foot, geo.neutral_foot(leg, 0.27)) < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn ik_round_trip(
            q0 in -0.6f64..0.6,
            q1 in -1.2f64..1.5,
            q2 in -2.6f64..-0.05,
            left in any::<bool>(),
        ) {
            let geo = LegGeometry::default();
            let leg = if left { Leg::FL } else { Leg::RR };
            let links = geo.links(leg);
            let target = leg_forward_kinematics([q0, q1, q2], &links);
            let q = leg_inverse_kinematics(target, &links).unwrap();
            prop_assert!(dist(leg_forward_kinematics(q, &links), target) < 1e-9);
            // Unique solution on the backward-knee branch.
            prop_assert!((q[2] - q2).abs() < 1e-6);
        }
    }
}
