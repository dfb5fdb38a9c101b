use std::collections::BTreeMap;

use rand::Rng;

use super::clip::MotionClip;
use super::feature::{clip_features, AmpFeature};
use crate::error::{CampError, Result};

/// Consecutive-frame AMP transition with its skill label.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionPair {
    pub s_t: AmpFeature,
    pub s_next: AmpFeature,
    pub label: usize,
}

/// Expert transitions preloaded in memory, indexed by label.
#[derive(Debug, Clone, Default)]
pub struct TransitionBuffer {
    pairs: Vec<TransitionPair>,
    by_label: BTreeMap<usize, Vec<usize>>,
}

impl TransitionBuffer {
    pub fn from_pairs(pairs: Vec<TransitionPair>) -> Self {
        let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, p) in pairs.iter().enumerate() {
            by_label.entry(p.label).or_default().push(i);
        }
        Self { pairs, by_label }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[TransitionPair] {
        &self.pairs
    }

    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        self.by_label.keys().copied()
    }

    pub fn indices_for(&self, label: usize) -> &[usize] {
        self.by_label.get(&label).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Sample `n_per_clip` consecutive-frame pairs uniformly (with replacement) from each clip.
pub fn preload_transitions<R: Rng + ?Sized>(
    clips: &[MotionClip],
    n_per_clip: usize,
    rng: &mut R,
) -> Result<TransitionBuffer> {
    if clips.is_empty() {
        return Err(CampError::Empty("clip list".into()));
    }
    let mut pairs = Vec::with_capacity(clips.len() * n_per_clip);
    for clip in clips {
        if clip.len() < 2 {
            return Err(CampError::Data(format!(
                "clip '{}' has {} frames, need at least 2",
                clip.name,
                clip.len()
            )));
        }
        let features = clip_features(clip);
        for _ in 0..n_per_clip {
            let k = rng.random_range(0..clip.len() - 1);
            pairs.push(TransitionPair {
                s_t: features[k],
                s_next: features[k + 1],
                label: clip.label,
            });
        }
    }
    Ok(TransitionBuffer::from_pairs(pairs))
}

/// I.i.d. uniform draws, optionally restricted to one label.
pub fn sample_expert<'a, R: Rng + ?Sized>(
    buffer: &'a TransitionBuffer,
    batch: usize,
    label_filter: Option<usize>,
    rng: &mut R,
) -> Result<Vec<&'a TransitionPair>> {
    match label_filter {
        Some(label) => sample_expert_labels(buffer, batch, &[label], rng),
        None => {
            if batch == 0 {
                return Err(CampError::InvalidArgument("batch must be >= 1".into()));
            }
            if buffer.is_empty() {
                return Err(CampError::Empty("transition buffer".into()));
            }
            Ok((0..batch)
                .map(|_| &buffer.pairs[rng.random_range(0..buffer.len())])
                .collect())
        }
    }
}

/// I.i.d. uniform draws over the pairs whose label is in `labels`.
pub fn sample_expert_labels<'a, R: Rng + ?Sized>(
    buffer: &'a TransitionBuffer,
    batch: usize,
    labels: &[usize],
    rng: &mut R,
) -> Result<Vec<&'a TransitionPair>> {
    if batch == 0 {
        return Err(CampError::InvalidArgument("batch must be >= 1".into()));
    }
    let total: usize = labels.iter().map(|&l| buffer.indices_for(l).len()).sum();
    if total == 0 {
        return Err(CampError::Empty(format!("no expert pairs with labels {labels:?}")));
    }
    Ok((0..batch)
        .map(|_| {
            let mut r = rng.random_range(0..total);
            for &l in labels {
                let idx = buffer.indices_for(l);
                if r < idx.len() {
                    return &buffer.pairs[idx[r]];
                }
                r -= idx.len();
            }
            unreachable!("draw index within total")
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::{generate_clip, skill_catalog, GaitKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn clips() -> Vec<MotionClip> {
        skill_catalog(&GaitKind::ALL, &[2.0, 4.0])
            .unwrap()
            .iter()
            .map(|s| generate_clip(s, 4.0, 0.02).unwrap())
            .collect()
    }

    #[test]
    fn single_clip_buffer() {
        let all = clips();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let buf = preload_transitions(&all[..1], 100, &mut rng).unwrap();
        assert_eq!(buf.len(), 100);
        assert!(buf.pairs().iter().all(|p| p.label == all[0].label));
    }

    #[test]
    fn per_label_counts_and_partition() {
        let all = clips();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let buf = preload_transitions(&all, 500, &mut rng).unwrap();
        assert_eq!(buf.len(), 4000);
        let mut seen = vec![false; buf.len()];
        for label in buf.labels() {
            assert_eq!(buf.indices_for(label).len(), 500);
            for &i in buf.indices_for(label) {
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn preload_is_deterministic() {
        let all = clips();
        let a = preload_transitions(&all, 50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = preload_transitions(&all, 50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.pairs(), b.pairs());
    }

    #[test]
    fn pairs_are_consecutive_frames() {
        let all = clips();
        let feats = clip_features(&all[3]);
        let buf = preload_transitions(&all[3..4], 20, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        for p in buf.pairs() {
            assert!(feats.windows(2).any(|w| w[0] == p.s_t && w[1] == p.s_next));
        }
    }

    #[test]
    fn empty_inputs_are_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(preload_transitions(&[], 10, &mut rng).is_err());
        let all = clips();
        let buf = preload_transitions(&all[..2], 10, &mut rng).unwrap();
        assert!(sample_expert(&buf, 4, Some(7), &mut rng).is_err());
        assert!(sample_expert(&buf, 0, None, &mut rng).is_err());
    }

    #[test]
    fn filtered_sampling() {
        let all = clips();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let buf = preload_transitions(&all, 50, &mut rng).unwrap();
        let batch = sample_expert(&buf, 16, Some(0), &mut rng).unwrap();
        assert_eq!(batch.len(), 16);
        assert!(batch.iter().all(|p| p.label == 0));
        let single = TransitionBuffer::from_pairs(buf.pairs()[..1].to_vec());
        let one = sample_expert(&single, 1, None, &mut rng).unwrap();
        assert_eq!(one[0], &buf.pairs()[0]);
    }

    #[test]
    fn label_frequencies_are_uniform() {
        let all = clips();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let buf = preload_transitions(&all, 500, &mut rng).unwrap();
        let draws = sample_expert(&buf, 100_000, None, &mut rng).unwrap();
        let mut counts = [0usize; 8];
        for p in draws {
            counts[p.label] += 1;
        }
        // Oracle: chi-square with 7 dof; 24.3 is the 0.999 quantile.
        let expected = 100_000.0 / 8.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 24.3, "chi2 = {chi2}");
        for c in counts {
            assert!((c as f64 / 100_000.0 - 0.125).abs() < 0.02);
        }
    }
}
