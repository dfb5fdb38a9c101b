use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CampError, Result};

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range(pub f64, pub f64);

impl Range {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.0 && v <= self.1
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.1 > self.0 {
            rng.random_range(self.0..=self.1)
        } else {
            self.0
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.0.is_finite() && self.1.is_finite() && self.0 <= self.1) {
            return Err(CampError::Config(format!("randomization range {name} = [{}, {}] is invalid", self.0, self.1)));
        }
        Ok(())
    }
}

/// Per-episode randomization ranges. Kp and Kd ranges are multiplicative scales on the nominal gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainRandomizationConfig {
    pub enabled: bool,
    pub link_mass_scale: Range,
    pub payload_mass: Range,
    pub payload_position: Range,
    pub friction: Range,
    pub motor_strength: Range,
    pub kp_scale: Range,
    pub kd_scale: Range,
    pub initial_joint_scale: Range,
    /// Friction used when randomization is disabled.
    pub nominal_friction: f64,
}

impl Default for DomainRandomizationConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            link_mass_scale: Range(0.8, 1.2),
            payload_mass: Range(0.0, 3.0),
            payload_position: Range(-0.1, 0.1),
            friction: Range(0.05, 1.75),
            motor_strength: Range(0.8, 1.2),
            kp_scale: Range(0.8, 1.2),
            kd_scale: Range(0.8, 1.2),
            initial_joint_scale: Range(0.5, 1.5),
            nominal_friction: 1.0,
        }
    }
}

impl DomainRandomizationConfig {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("link_mass_scale", self.link_mass_scale),
            ("payload_mass", self.payload_mass),
            ("payload_position", self.payload_position),
            ("friction", self.friction),
            ("motor_strength", self.motor_strength),
            ("kp_scale", self.kp_scale),
            ("kd_scale", self.kd_scale),
            ("initial_joint_scale", self.initial_joint_scale),
        ] {
            r.validate(name)?;
        }
        if self.link_mass_scale.0 <= 0.0 || self.motor_strength.0 <= 0.0 || self.kp_scale.0 <= 0.0 || self.kd_scale.0 <= 0.0 {
            return Err(CampError::Config("mass, strength and gain scales must be positive".into()));
        }
        if !(self.nominal_friction > 0.0) {
            return Err(CampError::Config("nominal_friction must be positive".into()));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> RandomizedParams {
        if !self.enabled {
            return RandomizedParams::nominal(self.nominal_friction);
        }
        RandomizedParams {
            link_mass_scale: self.link_mass_scale.sample(rng),
            payload_mass: self.payload_mass.sample(rng),
            payload_position: [self.payload_position.sample(rng), self.payload_position.sample(rng)],
            friction: self.friction.sample(rng),
            motor_strength: self.motor_strength.sample(rng),
            kp_scale: self.kp_scale.sample(rng),
            kd_scale: self.kd_scale.sample(rng),
            initial_joint_scale: std::array::from_fn(|_| self.initial_joint_scale.sample(rng)),
        }
    }

    /// True when every sampled value lies in its declared range.
    pub fn contains(&self, p: &RandomizedParams) -> bool {
        self.link_mass_scale.contains(p.link_mass_scale)
            && self.payload_mass.contains(p.payload_mass)
            && p.payload_position.iter().all(|&v| self.payload_position.contains(v))
            && self.friction.contains(p.friction)
            && self.motor_strength.contains(p.motor_strength)
            && self.kp_scale.contains(p.kp_scale)
            && self.kd_scale.contains(p.kd_scale)
            && p.initial_joint_scale.iter().all(|&v| self.initial_joint_scale.contains(v))
    }
}

/// Values drawn for one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizedParams {
    pub link_mass_scale: f64,
    /// Recorded and exposed to the critic; the surrogate base has no mass model.
    pub payload_mass: f64,
    pub payload_position: [f64; 2],
    pub friction: f64,
    pub motor_strength: f64,
    pub kp_scale: f64,
    pub kd_scale: f64,
    pub initial_joint_scale: [f64; 12],
}

impl RandomizedParams {
    pub fn nominal(friction: f64) -> Self {
        Self {
            link_mass_scale: 1.0,
            payload_mass: 0.0,
            payload_position: [0.0; 2],
            friction,
            motor_strength: 1.0,
            kp_scale: 1.0,
            kd_scale: 1.0,
            initial_joint_scale: [1.0; 12],
        }
    }
}
