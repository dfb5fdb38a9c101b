use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{CampError, Result};

/// Dynamic-time-warping cost between `a` and `b` under `cost`.
///
/// Unconstrained band; both endpoints aligned. Steps are (1,0), (0,1) and (1,1).
pub fn dtw_distance_by<T>(a: &[T], b: &[T], cost: impl Fn(&T, &T) -> f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(CampError::Empty("DTW input sequence".into()));
    }
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![0.0; m];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let c = cost(x, y);
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cur[j - 1],
                (_, 0) => prev[0],
                _ => prev[j].min(cur[j - 1]).min(prev[j - 1]),
            };
            cur[j] = c + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// DTW with Euclidean local cost.
pub fn dtw_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    dtw_distance_by(a, b, |x, y| euclidean(x, y))
}

/// Symmetric pairwise DTW matrix with zero diagonal.
pub fn dtw_matrix(seqs: &[Vec<Vec<f64>>]) -> Result<Array2<f64>> {
    let n = seqs.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| dtw_distance(&seqs[i], &seqs[j]))
        .collect::<Result<_>>()?;
    if let Some(s) = seqs.iter().find(|s| s.is_empty()) {
        dtw_distance(s, s)?;
    }
    let mut m = Array2::zeros((n, n));
    for (&(i, j), v) in pairs.iter().zip(values) {
        m[[i, j]] = v;
        m[[j, i]] = v;
    }
    Ok(m)
}

/// Keep every `stride`-th element.
pub fn downsample<T: Clone>(seq: &[T], stride: usize) -> Vec<T> {
    seq.iter().step_by(stride.max(1)).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_evaluated_table() {
        // cost |a-b|:     b=0  b=2
        //           a=0    0    2      D: 0 2
        //           a=1    1    1         1 1
        //           a=2    2    0         3 1
        let d = dtw_distance_by(&[0.0, 1.0, 2.0], &[0.0, 2.0], |x: &f64, y: &f64| (x - y).abs()).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn empty_is_error() {
        assert!(dtw_distance(&[], &[vec![1.0]]).is_err());
    }

    #[test]
    fn matrix_is_symmetric_with_zero_diagonal() {
        let seqs = vec![
            vec![vec![0.0], vec![1.0]],
            vec![vec![0.0], vec![0.5], vec![1.0]],
            vec![vec![3.0]],
        ];
        let m = dtw_matrix(&seqs).unwrap();
        for i in 0..3 {
            assert_eq!(m[[i, i]], 0.0);
            for j in 0..3 {
                assert_eq!(m[[i, j]], m[[j, i]]);
            }
        }
        assert_eq!(m[[0, 1]], 0.5);
    }

    proptest! {
        #[test]
        fn symmetric_nonnegative_and_zero_on_self(
            a in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 1..12),
            b in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 1..12),
        ) {
            let ab = dtw_distance(&a, &b).unwrap();
            let ba = dtw_distance(&b, &a).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() < 1e-9);
            prop_assert_eq!(dtw_distance(&a, &a).unwrap(), 0.0);
        }
    }
}
