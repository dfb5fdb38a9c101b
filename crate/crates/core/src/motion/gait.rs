use serde::{Deserialize, Serialize};

use super::kinematics::{Leg, LegGeometry};
use crate::error::{CampError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaitKind {
    Trot,
    Pace,
    Bound,
    Pronk,
}

impl GaitKind {
    pub const ALL: [GaitKind; 4] = [GaitKind::Trot, GaitKind::Pace, GaitKind::Bound, GaitKind::Pronk];

    pub fn name(self) -> &'static str {
        match self {
            GaitKind::Trot => "trot",
            GaitKind::Pace => "pace",
            GaitKind::Bound => "bound",
            GaitKind::Pronk => "pronk",
        }
    }

    /// Phase offsets for (FL, FR, RL, RR).
    pub fn phase_offsets(self) -> [f64; 4] {
        match self {
            GaitKind::Trot => [0.0, 0.5, 0.5, 0.0],
            GaitKind::Pace => [0.0, 0.5, 0.0, 0.5],
            GaitKind::Bound => [0.0, 0.0, 0.5, 0.5],
            GaitKind::Pronk => [0.0; 4],
        }
    }

    pub fn default_duty_factor(self) -> f64 {
        match self {
            GaitKind::Trot | GaitKind::Pace => 0.55,
            GaitKind::Bound => 0.45,
            GaitKind::Pronk => 0.4,
        }
    }
}

impl std::str::FromStr for GaitKind {
    type Err = CampError;

    fn from_str(s: &str) -> Result<Self> {
        GaitKind::ALL
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| CampError::InvalidArgument(format!("unknown gait '{s}'")))
    }
}

/// Timing and geometry of one periodic gait.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaitSpec {
    pub gait: GaitKind,
    /// Cycles per second.
    pub frequency: f64,
    /// Fraction of the cycle each foot spends in stance.
    pub duty_factor: f64,
    /// Per-leg phase offsets for (FL, FR, RL, RR), each in [0, 1).
    pub phase_offsets: [f64; 4],
    /// Body-frame foot travel during stance (m).
    pub step_length: f64,
    /// Swing apex above the ground (m).
    pub step_height: f64,
    pub body_height: f64,
    /// (vx, vy, wz) in m/s, m/s, rad/s.
    pub command_velocity: [f64; 3],
}

pub const DEFAULT_BODY_HEIGHT: f64 = 0.27;
pub const DEFAULT_FORWARD_SPEED: f64 = 0.4;

impl GaitSpec {
    /// Standard forward gait at `frequency`; step length is chosen so stance feet do not slip.
    pub fn standard(gait: GaitKind, frequency: f64) -> Self {
        let duty = gait.default_duty_factor();
        let speed = DEFAULT_FORWARD_SPEED;
        Self {
            gait,
            frequency,
            duty_factor: duty,
            phase_offsets: gait.phase_offsets(),
            step_length: speed * duty / frequency,
            step_height: 0.04 + 0.08 / frequency,
            body_height: DEFAULT_BODY_HEIGHT,
            command_velocity: [speed, 0.0, 0.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(CampError::InvalidArgument(format!("gait spec: {msg}")));
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return bad("frequency must be > 0");
        }
        if !(self.duty_factor > 0.0 && self.duty_factor < 1.0) {
            return bad("duty factor must lie in (0, 1)");
        }
        if !(self.step_height > 0.0 && self.step_height.is_finite()) {
            return bad("step height must be > 0");
        }
        if !(self.body_height > 0.0 && self.body_height.is_finite()) {
            return bad("body height must be > 0");
        }
        if !(self.step_length >= 0.0 && self.step_length.is_finite()) {
            return bad("step length must be >= 0");
        }
        if self.phase_offsets.iter().any(|p| !(0.0..1.0).contains(p)) {
            return bad("phase offsets must lie in [0, 1)");
        }
        if self.command_velocity.iter().any(|v| !v.is_finite()) {
            return bad("command velocity must be finite");
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        1.0 / self.frequency
    }

    /// Phase of `leg` at time `t`, in [0, 1).
    pub fn leg_phase(&self, leg: Leg, t: f64) -> f64 {
        let p = self.frequency * t + self.phase_offsets[leg.index()];
        p - p.floor()
    }

    pub fn in_stance(&self, leg: Leg, t: f64) -> bool {
        self.leg_phase(leg, t) < self.duty_factor
    }

    fn stride_direction(&self, geometry: &LegGeometry, leg: Leg) -> [f64; 2] {
        let hip = geometry.hip_position(leg);
        let [vx, vy, wz] = self.command_velocity;
        let dx = vx - wz * hip[1];
        let dy = vy + wz * hip[0];
        let n = dx.hypot(dy);
        if n > 1e-12 {
            [dx / n, dy / n]
        } else {
            [1.0, 0.0]
        }
    }

    /// Body-frame foot target of `leg` at time `t`.
    ///
    /// Stance feet sweep backwards at constant speed on the ground plane. Swing
    /// feet follow a world-frame cycloid horizontally and a raised-cosine lift,
    /// so position and velocity are continuous at lift-off and touch-down.
    pub fn foot_target(&self, geometry: &LegGeometry, leg: Leg, t: f64) -> [f64; 3] {
        let neutral = geometry.neutral_foot(leg, self.body_height);
        let dir = self.stride_direction(geometry, leg);
        let duty = self.duty_factor;
        let len = self.step_length;
        let phase = self.leg_phase(leg, t);
        let (offset, lift) = if phase < duty {
            let s = phase / duty;
            (len * (0.5 - s), 0.0)
        } else {
            let s = (phase - duty) / (1.0 - duty);
            let stance_speed = len * self.frequency / duty;
            let swing_time = (1.0 - duty) / self.frequency;
            let back = stance_speed * swing_time;
            let cycloid = s - (std::f64::consts::TAU * s).sin() / std::f64::consts::TAU;
            let lift = 0.5 * self.step_height * (1.0 - (std::f64::consts::TAU * s).cos());
            (-0.5 * len + (len + back) * cycloid - back * s, lift)
        };
        [
            neutral[0] + dir[0] * offset,
            neutral[1] + dir[1] * offset,
            neutral[2] + lift,
        ]
    }

    /// World pose of the base at time `t`: position and yaw.
    pub fn body_pose(&self, t: f64) -> ([f64; 3], f64) {
        let [vx, vy, wz] = self.command_velocity;
        let yaw = wz * t;
        let (x, y) = if wz.abs() < 1e-12 {
            (vx * t, vy * t)
        } else {
            let (s, c) = yaw.sin_cos();
            ((vx * s + vy * (c - 1.0)) / wz, (vx * (1.0 - c) + vy * s) / wz)
        };
        ([x, y, self.body_height], yaw)
    }
}

/// Skill name used in labels and file names, e.g. `trot_2Hz`.
pub fn skill_name(gait: GaitKind, frequency: f64) -> String {
    if (frequency - frequency.round()).abs() < 1e-9 {
        format!("{}_{}Hz", gait.name(), frequency.round() as i64)
    } else {
        format!("{}_{}Hz", gait.name(), frequency)
    }
}

/// A labelled skill: one (gait, frequency) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillDef {
    pub label: usize,
    pub name: String,
    pub spec: GaitSpec,
}

/// Skills for every (gait, frequency) pair, labelled gait-major in the given order.
pub fn skill_catalog(gaits: &[GaitKind], frequencies: &[f64]) -> Result<Vec<SkillDef>> {
    if gaits.is_empty() {
        return Err(CampError::Empty("gait list".into()));
    }
    if frequencies.is_empty() {
        return Err(CampError::Empty("frequency list".into()));
    }
    let mut out = Vec::with_capacity(gaits.len() * frequencies.len());
    for &gait in gaits {
        for &f in frequencies {
            let spec = GaitSpec::standard(gait, f);
            spec.validate()?;
            out.push(SkillDef {
                label: out.len(),
                name: skill_name(gait, f),
                spec,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_labels_are_gait_major() {
        let skills = skill_catalog(&GaitKind::ALL, &[2.0, 4.0]).unwrap();
        let names: Vec<_> = skills.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(
            names,
            ["trot_2Hz", "trot_4Hz", "pace_2Hz", "pace_4Hz", "bound_2Hz", "bound_4Hz", "pronk_2Hz", "pronk_4Hz"]
        );
        assert!(skills.iter().enumerate().all(|(i, s)| s.label == i));
        assert!(skill_catalog(&[], &[2.0]).is_err());
    }

    #[test]
    fn validation_rejects_bad_specs() {
        let mut spec = GaitSpec::standard(GaitKind::Trot, 2.0);
        spec.duty_factor = 1.0;
        assert!(spec.validate().is_err());
        let mut spec = GaitSpec::standard(GaitKind::Trot, 2.0);
        spec.phase_offsets[1] = 1.0;
        assert!(spec.validate().is_err());
        let mut spec = GaitSpec::standard(GaitKind::Trot, 2.0);
        spec.step_height = 0.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn swing_apex_and_stance_height() {
        let geo = LegGeometry::default();
        for gait in GaitKind::ALL {
            let spec = GaitSpec::standard(gait, 2.0);
            let leg = Leg::FR;
            let off = spec.phase_offsets[leg.index()];
            // mid-swing: phase = duty + (1 - duty) / 2
            let apex_phase = spec.duty_factor + 0.5 * (1.0 - spec.duty_factor);
            let t = (apex_phase - off).rem_euclid(1.0) / spec.frequency;
            let foot = spec.foot_target(&geo, leg, t);
            assert!((foot[2] + spec.body_height - spec.step_height).abs() < 1e-6);
            let t_stance = (0.3 * spec.duty_factor - off).rem_euclid(1.0) / spec.frequency;
            let foot = spec.foot_target(&geo, leg, t_stance);
            assert!((foot[2] + spec.body_height).abs() < 1e-12);
        }
    }

    #[test]
    fn foot_path_is_c1_at_phase_boundaries() {
        let geo = LegGeometry::default();
        let spec = GaitSpec::standard(GaitKind::Trot, 2.0);
        let h = 1e-7;
        for boundary in [spec.duty_factor, 1.0] {
            let t = boundary / spec.frequency;
            let before = spec.foot_target(&geo, Leg::FL, t - h);
            let at_before = spec.foot_target(&geo, Leg::FL, t - 2.0 * h);
            let after = spec.foot_target(&geo, Leg::FL, t + h);
            let at_after = spec.foot_target(&geo, Leg::FL, t + 2.0 * h);
            for k in 0..3 {
                assert!((before[k] - after[k]).abs() < 1e-6);
                let v_before = (before[k] - at_before[k]) / h;
                let v_after = (at_after[k] - after[k]) / h;
                assert!((v_before - v_after).abs() < 1e-3, "axis {k}: {v_before} vs {v_after}");
            }
        }
    }

    #[test]
    fn stance_foot_moves_against_body() {
        let geo = LegGeometry::default();
        let spec = GaitSpec::standard(GaitKind::Pace, 2.0);
        let t0 = 0.05;
        let a = spec.foot_target(&geo, Leg::FL, t0);
        let b = spec.foot_target(&geo, Leg::FL, t0 + 0.01);
        let v = (b[0] - a[0]) / 0.01;
        assert!((v + spec.command_velocity[0]).abs() < 1e-9);
    }
}
