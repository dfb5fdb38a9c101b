use std::f64::consts::TAU;

use crate::error::{CampError, Result};
use crate::motion::{Leg, MotionClip};

/// Gait statistics recovered from a per-leg stance sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactMetrics {
    pub duty_factors: [f64; 4],
    /// Stance-onset phase of each leg relative to FL, in cycles, `[0, 1)`.
    pub phase_offsets: [f64; 4],
    pub frequency: f64,
}

fn onsets(contacts: &[[bool; 4]], leg: usize) -> Vec<usize> {
    (1..contacts.len())
        .filter(|&t| contacts[t][leg] && !contacts[t - 1][leg])
        .collect()
}

/// Duty factors and phase offsets from contacts sampled every `dt` seconds.
///
/// Without a frequency hint the gait frequency is taken from the mean spacing
/// of FL stance onsets. Offsets follow the convention `phase = f·t + offset`
/// with stance beginning at phase 0.
pub fn contact_metrics(contacts: &[[bool; 4]], dt: f64, frequency_hint: Option<f64>) -> Result<ContactMetrics> {
    if contacts.len() < 2 {
        return Err(CampError::Empty("contact sequence".into()));
    }
    let n = contacts.len() as f64;
    let duty_factors = std::array::from_fn(|i| contacts.iter().filter(|c| c[i]).count() as f64 / n);
    let all: Vec<Vec<usize>> = (0..4).map(|i| onsets(contacts, i)).collect();
    for leg in Leg::ALL {
        if all[leg.index()].is_empty() {
            return Err(CampError::Data(format!("leg {} never touches down", leg.name())));
        }
    }
    let frequency = match frequency_hint {
        Some(f) if f > 0.0 => f,
        Some(f) => return Err(CampError::InvalidArgument(format!("frequency hint {f} must be positive"))),
        None => {
            let fl = &all[0];
            if fl.len() < 2 {
                return Err(CampError::Data("need at least two FL stance onsets to estimate the gait frequency".into()));
            }
            let span = (fl[fl.len() - 1] - fl[0]) as f64 * dt;
            (fl.len() - 1) as f64 / span
        }
    };
    let mean_angle = |ts: &[usize]| {
        let (s, c) = ts.iter().fold((0.0, 0.0), |(s, c), &t| {
            let a = TAU * frequency * t as f64 * dt;
            (s + a.sin(), c + a.cos())
        });
        s.atan2(c)
    };
    let reference = mean_angle(&all[0]);
    let phase_offsets = std::array::from_fn(|i| {
        let d = (reference - mean_angle(&all[i])) / TAU;
        let f = d - d.floor();
        if f >= 1.0 - 1e-12 {
            0.0
        } else {
            f
        }
    });
    Ok(ContactMetrics {
        duty_factors,
        phase_offsets,
        frequency,
    })
}

/// Shortest distance between two phases on the unit circle, in cycles.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Largest per-leg circular distance between two phase signatures.
pub fn phase_signature_distance(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    (0..4).map(|i| circular_distance(a[i], b[i])).fold(0.0, f64::max)
}

/// Stance flags of an expert clip: feet within `tolerance` of the ground.
pub fn clip_contacts(clip: &MotionClip, tolerance: f64) -> Vec<[bool; 4]> {
    clip.frames
        .iter()
        .map(|f| {
            let q = f.orientation();
            let p = f.position();
            std::array::from_fn(|i| {
                let foot = q * nalgebra::Vector3::from(f.foot_positions[i]) + p;
                foot.z <= tolerance
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::{generate_clip, skill_catalog, GaitKind, GaitSpec};

    fn synthetic(spec: &GaitSpec, n: usize, dt: f64) -> Vec<[bool; 4]> {
        (0..n)
            .map(|k| std::array::from_fn(|i| spec.in_stance(Leg::ALL[i], k as f64 * dt)))
            .collect()
    }

    #[test]
    fn synthetic_trot_offsets() {
        let spec = GaitSpec::standard(GaitKind::Trot, 2.0);
        let m = contact_metrics(&synthetic(&spec, 500, 0.02), 0.02, None).unwrap();
        let expect = [0.0, 0.5, 0.5, 0.0];
        assert!(phase_signature_distance(&m.phase_offsets, &expect) < 0.05);
        assert!((m.frequency - 2.0).abs() < 1e-9);
    }

    #[test]
    fn pronk_offsets_are_zero() {
        let spec = GaitSpec::standard(GaitKind::Pronk, 2.0);
        let m = contact_metrics(&synthetic(&spec, 500, 0.02), 0.02, Some(2.0)).unwrap();
        assert!(phase_signature_distance(&m.phase_offsets, &[0.0; 4]) < 0.05);
    }

    #[test]
    fn square_wave_duty_factor() {
        let c: Vec<[bool; 4]> = (0..1000).map(|k| [k % 100 < 55; 4]).collect();
        let m = contact_metrics(&c, 0.01, None).unwrap();
        for d in m.duty_factors {
            assert!((d - 0.55).abs() < 0.02);
        }
    }

    #[test]
    fn leg_without_touchdown_is_error() {
        let c: Vec<[bool; 4]> = (0..100).map(|k| [k % 20 < 10, k % 20 < 10, k % 20 < 10, false]).collect();
        assert!(contact_metrics(&c, 0.02, Some(2.5)).is_err());
    }

    #[test]
    fn generated_clips_recover_their_offsets() {
        for skill in skill_catalog(&GaitKind::ALL, &[2.0, 4.0]).unwrap() {
            let clip = generate_clip(&skill, 10.0, 0.02).unwrap();
            let m = contact_metrics(&clip_contacts(&clip, 1e-6), clip.dt, Some(skill.spec.frequency)).unwrap();
            let d = phase_signature_distance(&m.phase_offsets, &skill.spec.phase_offsets);
            assert!(d < 0.05, "{}: {:?}", skill.name, m.phase_offsets);
        }
    }

    #[test]
    fn circular_distance_wraps() {
        assert!((circular_distance(0.95, 0.05) - 0.1).abs() < 1e-12);
        assert_eq!(circular_distance(0.25, 0.25), 0.0);
        assert!((circular_distance(0.0, 0.5) - 0.5).abs() < 1e-12);
    }
}
