use crate::adversarial::{FeatureNormalizer, SkillDiscriminator};
use crate::error::{CampError, Result};
use crate::motion::{clip_features, AmpFeature, MotionClip};

use super::stats::Standardizer;

/// Skill-discriminator outputs over consecutive transitions of one source.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSequence {
    pub label: usize,
    pub name: String,
    /// One `ẑ` per transition; length = frame count − 1.
    pub latents: Vec<Vec<f64>>,
}

/// `ẑ` for every consecutive pair of `features`.
pub fn feature_latents(skill_disc: &SkillDiscriminator, normalizer: &FeatureNormalizer, features: &[AmpFeature], label: usize) -> Result<Vec<Vec<f64>>> {
    if features.len() < 2 {
        return Err(CampError::Data(format!("need at least 2 frames for latents, got {}", features.len())));
    }
    let pairs: Vec<_> = features.windows(2).map(|w| normalizer.normalize_pair(&w[0], &w[1], label)).collect();
    let z = skill_disc.predict(&pairs)?;
    Ok(z.outer_iter().map(|r| r.to_vec()).collect())
}

/// Latent sequence of an expert clip.
pub fn clip_latents(skill_disc: &SkillDiscriminator, normalizer: &FeatureNormalizer, clip: &MotionClip) -> Result<LatentSequence> {
    if clip.len() < 2 {
        return Err(CampError::Data(format!("clip '{}' has {} frames, need at least 2", clip.name, clip.len())));
    }
    Ok(LatentSequence {
        label: clip.label,
        name: clip.name.clone(),
        latents: feature_latents(skill_disc, normalizer, &clip_features(clip), clip.label)?,
    })
}

pub fn latent_sequences(skill_disc: &SkillDiscriminator, normalizer: &FeatureNormalizer, clips: &[MotionClip]) -> Result<Vec<LatentSequence>> {
    clips.iter().map(|c| clip_latents(skill_disc, normalizer, c)).collect()
}

/// Standardize all latents with statistics pooled over every sequence.
pub fn standardize_sequences(seqs: &mut [LatentSequence]) -> Result<Standardizer> {
    let rows: Vec<&[f64]> = seqs.iter().flat_map(|s| s.latents.iter().map(Vec::as_slice)).collect();
    let st = Standardizer::fit(&rows)?;
    for s in seqs.iter_mut() {
        for z in s.latents.iter_mut() {
            *z = st.apply(z);
        }
    }
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::{generate_clip, skill_catalog, GaitKind};
    use rand::SeedableRng;

    fn setup() -> (SkillDiscriminator, FeatureNormalizer, Vec<MotionClip>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let f = SkillDiscriminator::new(&[16], 3, &mut rng).unwrap();
        let skills = skill_catalog(&[GaitKind::Trot, GaitKind::Bound], &[2.0]).unwrap();
        let clips: Vec<_> = skills.iter().map(|s| generate_clip(s, 2.0, 0.02).unwrap()).collect();
        (f, FeatureNormalizer::identity(), clips)
    }

    #[test]
    fn sequence_length_is_frames_minus_one() {
        let (f, n, clips) = setup();
        let seqs = latent_sequences(&f, &n, &clips).unwrap();
        assert_eq!(clips[0].len(), 101);
        assert!(seqs.iter().all(|s| s.latents.len() == 100 && s.latents[0].len() == 3));
    }

    #[test]
    fn constant_input_gives_constant_latents() {
        let (f, n, clips) = setup();
        let feats = vec![clip_features(&clips[0])[5]; 6];
        let z = feature_latents(&f, &n, &feats, 0).unwrap();
        assert!(z.iter().all(|v| v == &z[0]));
    }

    #[test]
    fn pooled_standardization() {
        let (f, n, clips) = setup();
        let mut seqs = latent_sequences(&f, &n, &clips).unwrap();
        standardize_sequences(&mut seqs).unwrap();
        let all: Vec<&Vec<f64>> = seqs.iter().flat_map(|s| &s.latents).collect();
        let m = all.len() as f64;
        for d in 0..3 {
            let mean = all.iter().map(|z| z[d]).sum::<f64>() / m;
            let var = all.iter().map(|z| (z[d] - mean).powi(2)).sum::<f64>() / m;
            assert!(mean.abs() < 1e-6 && (var - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn short_clip_is_an_error() {
        let (f, n, mut clips) = setup();
        clips[0].frames.truncate(1);
        assert!(clip_latents(&f, &n, &clips[0]).is_err());
    }
}
