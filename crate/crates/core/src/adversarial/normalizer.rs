use serde::{Deserialize, Serialize};

use crate::error::{CampError, Result};
use crate::motion::{AmpFeature, AMP_DIM};
use crate::nn::Checkpoint;

/// An AMP feature after standardization. Only [`FeatureNormalizer::normalize`] creates one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedFeature([f64; AMP_DIM]);

impl NormalizedFeature {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// A normalized transition with its skill label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedPair {
    pub s_t: NormalizedFeature,
    pub s_next: NormalizedFeature,
    pub label: usize,
}

impl NormalizedPair {
    pub fn write_input(&self, out: &mut [f64]) {
        out[..AMP_DIM].copy_from_slice(self.s_t.as_slice());
        out[AMP_DIM..2 * AMP_DIM].copy_from_slice(self.s_next.as_slice());
    }
}

/// Running per-dimension mean and variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureNormalizer {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub count: f64,
    /// Variance floor.
    pub eps: f64,
}

impl Default for FeatureNormalizer {
    fn default() -> Self {
        Self::identity()
    }
}

impl FeatureNormalizer {
    /// Zero mean, unit variance, no samples seen.
    pub fn identity() -> Self {
        Self {
            mean: vec![0.0; AMP_DIM],
            var: vec![1.0; AMP_DIM],
            count: 0.0,
            eps: 1e-4,
        }
    }

    pub fn fit(features: &[AmpFeature]) -> Result<Self> {
        let mut n = Self::identity();
        if features.is_empty() {
            return Err(CampError::Empty("normalizer fit".into()));
        }
        n.update(features);
        Ok(n)
    }

    /// Merge a batch into the running statistics (Chan et al. parallel update).
    pub fn update(&mut self, features: &[AmpFeature]) {
        if features.is_empty() {
            return;
        }
        let m = features.len() as f64;
        for d in 0..AMP_DIM {
            let bm = features.iter().map(|f| f.0[d]).sum::<f64>() / m;
            let bv = features.iter().map(|f| (f.0[d] - bm).powi(2)).sum::<f64>() / m;
            if self.count == 0.0 {
                self.mean[d] = bm;
                self.var[d] = bv;
            } else {
                let n = self.count;
                let total = n + m;
                let delta = bm - self.mean[d];
                self.mean[d] += delta * m / total;
                self.var[d] = (self.var[d] * n + bv * m + delta * delta * n * m / total) / total;
            }
        }
        self.count += m;
    }

    pub fn normalize(&self, f: &AmpFeature) -> NormalizedFeature {
        NormalizedFeature(std::array::from_fn(|d| (f.0[d] - self.mean[d]) / self.var[d].max(self.eps).sqrt()))
    }

    pub fn normalize_pair(&self, s_t: &AmpFeature, s_next: &AmpFeature, label: usize) -> NormalizedPair {
        NormalizedPair {
            s_t: self.normalize(s_t),
            s_next: self.normalize(s_next),
            label,
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            kind: "normalizer".into(),
            activation: String::new(),
            sizes: vec![AMP_DIM],
            arrays: vec![
                ("mean".into(), self.mean.clone()),
                ("var".into(), self.var.clone()),
                ("state".into(), vec![self.count, self.eps]),
            ],
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        ck.expect_kind("normalizer")?;
        let mean = ck.array("mean")?.to_vec();
        let var = ck.array("var")?.to_vec();
        let state = ck.array("state")?;
        if mean.len() != AMP_DIM || var.len() != AMP_DIM || state.len() != 2 {
            return Err(CampError::Data("normalizer checkpoint has wrong shape".into()));
        }
        Ok(Self {
            mean,
            var,
            count: state[0],
            eps: state[1],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feats(n: usize, shift: f64) -> Vec<AmpFeature> {
        (0..n)
            .map(|i| AmpFeature(std::array::from_fn(|d| ((i * 7 + d * 3) % 11) as f64 * 0.3 + shift + d as f64)))
            .collect()
    }

    #[test]
    fn incremental_update_matches_batch_fit() {
        let a = feats(40, 0.0);
        let b = feats(25, 2.0);
        let mut inc = FeatureNormalizer::fit(&a).unwrap();
        inc.update(&b);
        let all: Vec<AmpFeature> = a.into_iter().chain(b).collect();
        let full = FeatureNormalizer::fit(&all).unwrap();
        for d in 0..AMP_DIM {
            assert!((inc.mean[d] - full.mean[d]).abs() < 1e-12);
            assert!((inc.var[d] - full.var[d]).abs() < 1e-12);
        }
    }

    #[test]
    fn normalizing_twice_differs_from_once() {
        let data = feats(30, 5.0);
        let norm = FeatureNormalizer::fit(&data).unwrap();
        let once = norm.normalize(&data[0]);
        let twice = norm.normalize(&AmpFeature(once.as_slice().try_into().unwrap()));
        assert_ne!(once, twice);
    }

    #[test]
    fn identity_is_exact() {
        let f = feats(1, 0.5)[0];
        assert_eq!(FeatureNormalizer::identity().normalize(&f).as_slice(), f.as_slice());
    }

    #[test]
    fn checkpoint_round_trip() {
        let n = FeatureNormalizer::fit(&feats(10, 1.0)).unwrap();
        let back = FeatureNormalizer::from_checkpoint(&Checkpoint::decode(&n.to_checkpoint().encode()).unwrap()).unwrap();
        assert_eq!(back, n);
    }
}
