use serde::{Deserialize, Serialize};

use super::randomization::DomainRandomizationConfig;
use crate::error::{CampError, Result};

/// Environment parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Control period, s.
    pub dt: f64,
    /// Joint integration substeps per control period.
    pub substeps: usize,
    pub action_scale: f64,
    pub kp: f64,
    pub kp_calf: f64,
    pub kd: f64,
    /// Actuator first-order lag time constant, s.
    pub actuator_lag: f64,
    /// A foot is in contact when its height is at most this, m.
    pub contact_tolerance: f64,
    /// Terminate when base height falls below this fraction of the nominal height.
    pub termination_height_fraction: f64,
    /// Terminate when roll or pitch exceeds this, rad.
    pub termination_tilt: f64,
    pub episode_steps: usize,
    /// Lever arm converting friction-limited force into yaw acceleration, m.
    pub yaw_lever: f64,
    pub joint_velocity_obs_scale: f64,
    pub randomization: DomainRandomizationConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            substeps: 10,
            action_scale: 0.25,
            kp: 30.0,
            kp_calf: 40.0,
            kd: 1.0,
            actuator_lag: 0.01,
            contact_tolerance: 0.01,
            termination_height_fraction: 0.6,
            termination_tilt: 1.0,
            episode_steps: 500,
            yaw_lever: 0.25,
            joint_velocity_obs_scale: 0.05,
            randomization: DomainRandomizationConfig::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("action_scale", self.action_scale),
            ("kp", self.kp),
            ("kp_calf", self.kp_calf),
            ("kd", self.kd),
            ("actuator_lag", self.actuator_lag),
            ("termination_tilt", self.termination_tilt),
            ("yaw_lever", self.yaw_lever),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CampError::Config(format!("env.{name} must be positive, got {v}")));
            }
        }
        if self.substeps == 0 || self.episode_steps == 0 {
            return Err(CampError::Config("env.substeps and env.episode_steps must be positive".into()));
        }
        if !(self.contact_tolerance >= 0.0) {
            return Err(CampError::Config("env.contact_tolerance must be nonnegative".into()));
        }
        if !(0.0..1.0).contains(&self.termination_height_fraction) {
            return Err(CampError::Config("env.termination_height_fraction must lie in [0, 1)".into()));
        }
        self.randomization.validate()
    }
}
