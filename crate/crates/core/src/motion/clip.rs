use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::gait::SkillDef;
use super::kinematics::{Leg, LegGeometry};
use crate::error::{CampError, Result};

/// One expert frame. Foot quantities are expressed in the body frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionFrame {
    pub body_position: [f64; 3],
    /// Unit quaternion (w, x, y, z).
    pub body_orientation: [f64; 4],
    pub joint_positions: [f64; 12],
    pub joint_velocities: [f64; 12],
    pub foot_positions: [[f64; 3]; 4],
    pub foot_velocities: [[f64; 3]; 4],
}

impl MotionFrame {
    pub fn orientation(&self) -> UnitQuaternion<f64> {
        let [w, x, y, z] = self.body_orientation;
        UnitQuaternion::new_normalize(Quaternion::new(w, x, y, z))
    }

    pub fn position(&self) -> Vector3<f64> {
        Vector3::from(self.body_position)
    }

    /// A frame standing still at `height` with the given joint pose.
    pub fn standing(geometry: &LegGeometry, joints: [f64; 12], height: f64) -> Self {
        Self {
            body_position: [0.0, 0.0, height],
            body_orientation: [1.0, 0.0, 0.0, 0.0],
            joint_positions: joints,
            joint_velocities: [0.0; 12],
            foot_positions: geometry.foot_positions(&joints),
            foot_velocities: [[0.0; 3]; 4],
        }
    }
}

/// A labelled expert trajectory sampled at a fixed period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionClip {
    pub label: usize,
    pub name: String,
    pub dt: f64,
    pub frames: Vec<MotionFrame>,
}

impl MotionClip {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.frames.len().saturating_sub(1) as f64
    }
}

/// Kinematic gait synthesiser.
#[derive(Debug, Clone, Default)]
pub struct ClipGenerator {
    pub geometry: LegGeometry,
}

impl ClipGenerator {
    pub fn new(geometry: LegGeometry) -> Self {
        Self { geometry }
    }

    /// Clip of `skill` covering `[start, start + duration]`.
    pub fn generate(&self, skill: &SkillDef, start: f64, duration: f64, dt: f64) -> Result<MotionClip> {
        let spec = &skill.spec;
        spec.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(CampError::InvalidArgument(format!("dt must be > 0, got {dt}")));
        }
        if !(duration + 1e-9 >= spec.period()) {
            return Err(CampError::InvalidArgument(format!(
                "duration {duration} s is shorter than one gait cycle ({} s)",
                spec.period()
            )));
        }
        let n = (duration / dt).round() as usize + 1;

        let mut joints = Vec::with_capacity(n);
        let mut feet = Vec::with_capacity(n);
        let mut poses = Vec::with_capacity(n);
        for k in 0..n {
            let t = start + k as f64 * dt;
            let mut q = [0.0; 12];
            let mut f = [[0.0; 3]; 4];
            for leg in Leg::ALL {
                let target = spec.foot_target(&self.geometry, leg, t);
                let angles = self.geometry.joint_angles(leg, target)?;
                let i = leg.index();
                q[3 * i..3 * i + 3].copy_from_slice(&angles);
                f[i] = self.geometry.foot_position(leg, angles);
            }
            joints.push(q);
            feet.push(f);
            poses.push(spec.body_pose(t));
        }

        let frames = (0..n)
            .map(|k| {
                let (prev, next) = difference_span(k, n);
                let span = (next - prev) as f64 * dt;
                let mut qd = [0.0; 12];
                let mut fd = [[0.0; 3]; 4];
                if span > 0.0 {
                    for j in 0..12 {
                        qd[j] = (joints[next][j] - joints[prev][j]) / span;
                    }
                    for i in 0..4 {
                        for a in 0..3 {
                            fd[i][a] = (feet[next][i][a] - feet[prev][i][a]) / span;
                        }
                    }
                }
                let (position, yaw) = poses[k];
                let q = UnitQuaternion::from_euler_angles(0.0, 0.0, yaw);
                MotionFrame {
                    body_position: position,
                    body_orientation: [q.w, q.i, q.j, q.k],
                    joint_positions: joints[k],
                    joint_velocities: qd,
                    foot_positions: feet[k],
                    foot_velocities: fd,
                }
            })
            .collect();

        Ok(MotionClip {
            label: skill.label,
            name: skill.name.clone(),
            dt,
            frames,
        })
    }
}

/// Central differences on interior frames, one-sided at the ends.
fn difference_span(k: usize, n: usize) -> (usize, usize) {
    if n < 2 {
        (k, k)
    } else if k == 0 {
        (0, 1)
    } else if k == n - 1 {
        (n - 2, n - 1)
    } else {
        (k - 1, k + 1)
    }
}

/// Clip of `skill` starting at t = 0 with the default leg geometry.
pub fn generate_clip(skill: &SkillDef, duration: f64, dt: f64) -> Result<MotionClip> {
    ClipGenerator::default().generate(skill, 0.0, duration, dt)
}

/// Clip of `skill` starting at `start` seconds into the gait cycle.
pub fn generate_clip_at(skill: &SkillDef, start: f64, duration: f64, dt: f64) -> Result<MotionClip> {
    ClipGenerator::default().generate(skill, start, duration, dt)
}
