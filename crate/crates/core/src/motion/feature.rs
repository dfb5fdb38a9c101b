//! The 43-dimensional discriminator observation.
//!
//! Flattening order (fixed):
//!
//! | offset | width | field                              |
//! |--------|-------|------------------------------------|
//! | 0      | 12    | joint positions                    |
//! | 12     | 12    | joint velocities                   |
//! | 24     | 3     | base linear velocity (body frame)  |
//! | 27     | 3     | base angular velocity (body frame) |
//! | 30     | 1     | base height                        |
//! | 31     | 12    | foot positions (body frame, FL..RR)|

use serde::{Deserialize, Serialize};

use super::clip::{MotionClip, MotionFrame};

pub const AMP_DIM: usize = 43;

const JOINT_POS: usize = 0;
const JOINT_VEL: usize = 12;
const LIN_VEL: usize = 24;
const ANG_VEL: usize = 27;
const HEIGHT: usize = 30;
const FEET: usize = 31;

/// Raw (unnormalised) AMP observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmpFeature(#[serde(with = "serde_arrays")] pub [f64; AMP_DIM]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmpFeatureParts {
    pub joint_positions: [f64; 12],
    pub joint_velocities: [f64; 12],
    pub base_linear_velocity: [f64; 3],
    pub base_angular_velocity: [f64; 3],
    pub base_height: f64,
    pub foot_positions: [[f64; 3]; 4],
}

impl AmpFeature {
    pub fn from_parts(p: &AmpFeatureParts) -> Self {
        let mut v = [0.0; AMP_DIM];
        v[JOINT_POS..JOINT_VEL].copy_from_slice(&p.joint_positions);
        v[JOINT_VEL..LIN_VEL].copy_from_slice(&p.joint_velocities);
        v[LIN_VEL..ANG_VEL].copy_from_slice(&p.base_linear_velocity);
        v[ANG_VEL..HEIGHT].copy_from_slice(&p.base_angular_velocity);
        v[HEIGHT] = p.base_height;
        for (i, foot) in p.foot_positions.iter().enumerate() {
            v[FEET + 3 * i..FEET + 3 * i + 3].copy_from_slice(foot);
        }
        AmpFeature(v)
    }

    pub fn parts(&self) -> AmpFeatureParts {
        let v = &self.0;
        let mut p = AmpFeatureParts {
            joint_positions: [0.0; 12],
            joint_velocities: [0.0; 12],
            base_linear_velocity: [0.0; 3],
            base_angular_velocity: [0.0; 3],
            base_height: v[HEIGHT],
            foot_positions: [[0.0; 3]; 4],
        };
        p.joint_positions.copy_from_slice(&v[JOINT_POS..JOINT_VEL]);
        p.joint_velocities.copy_from_slice(&v[JOINT_VEL..LIN_VEL]);
        p.base_linear_velocity.copy_from_slice(&v[LIN_VEL..ANG_VEL]);
        p.base_angular_velocity.copy_from_slice(&v[ANG_VEL..HEIGHT]);
        for (i, foot) in p.foot_positions.iter_mut().enumerate() {
            foot.copy_from_slice(&v[FEET + 3 * i..FEET + 3 * i + 3]);
        }
        p
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// AMP feature of `frame`, with base velocities differenced against `prev_frame`.
///
/// Joint velocities are taken from the frame; base velocities are rotated into
/// the body frame of `frame`.
pub fn extract_amp_feature(frame: &MotionFrame, prev_frame: &MotionFrame, dt: f64) -> AmpFeature {
    feature_with_base_motion(frame, prev_frame, frame, dt)
}

/// Features for every frame of a clip. Frame 0 differences forward against frame 1.
pub fn clip_features(clip: &MotionClip) -> Vec<AmpFeature> {
    let f = &clip.frames;
    (0..f.len())
        .map(|k| match k {
            0 => feature_with_base_motion(&f[0], &f[0], f.get(1).unwrap_or(&f[0]), clip.dt),
            _ => extract_amp_feature(&f[k], &f[k - 1], clip.dt),
        })
        .collect()
}

fn feature_with_base_motion(frame: &MotionFrame, from: &MotionFrame, to: &MotionFrame, dt: f64) -> AmpFeature {
    let q = frame.orientation();
    let lin_world = (to.position() - from.position()) / dt;
    let ang_world = (to.orientation() * from.orientation().inverse()).scaled_axis() / dt;
    let lin = q.inverse_transform_vector(&lin_world);
    let ang = q.inverse_transform_vector(&ang_world);
    AmpFeature::from_parts(&AmpFeatureParts {
        joint_positions: frame.joint_positions,
        joint_velocities: frame.joint_velocities,
        base_linear_velocity: [lin.x, lin.y, lin.z],
        base_angular_velocity: [ang.x, ang.y, ang.z],
        base_height: frame.body_position[2],
        foot_positions: frame.foot_positions,
    })
}

mod serde_arrays {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use super::AMP_DIM;

    pub fn serialize<S: Serializer>(v: &[f64; AMP_DIM], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; AMP_DIM], D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        v.try_into()
            .map_err(|v: Vec<f64>| D::Error::invalid_length(v.len(), &"43 values"))
    }
}
