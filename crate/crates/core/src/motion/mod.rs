//! Procedural expert gait dataset.
//!
//! Expert trajectories are synthesised from gait timing parameters and leg
//! inverse kinematics rather than recorded. Each clip carries a skill label;
//! consecutive frames become labelled AMP transition pairs that are preloaded
//! into a [`TransitionBuffer`] before training.

mod clip;
mod feature;
mod gait;
mod kinematics;
mod store;
mod transitions;

pub use clip::{generate_clip, generate_clip_at, ClipGenerator, MotionClip, MotionFrame};
pub use feature::{clip_features, extract_amp_feature, AmpFeature, AmpFeatureParts, AMP_DIM};
pub use gait::{skill_catalog, skill_name, GaitKind, GaitSpec, SkillDef, DEFAULT_BODY_HEIGHT, DEFAULT_FORWARD_SPEED};
pub use kinematics::{
    leg_forward_kinematics, leg_inverse_kinematics, Leg, LegGeometry, LinkLengths,
};
pub use store::{read_clip, read_store, write_clip, write_store, ClipStoreManifest, CLIP_FIELDS};
pub use transitions::{preload_transitions, sample_expert, sample_expert_labels, TransitionBuffer, TransitionPair};
