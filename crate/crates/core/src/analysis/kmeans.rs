use crate::error::{CampError, Result};

use super::dtw::euclidean;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, cen) in centroids.iter().enumerate() {
        let d = sq_dist(p, cen);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Greedy spread seeding: the point nearest the mean, then repeatedly the
/// point farthest from its nearest chosen seed. Ties go to the lowest index.
fn seed(points: &[Vec<f64>], k: usize) -> Vec<usize> {
    let d = points[0].len();
    let n = points.len() as f64;
    let mean: Vec<f64> = (0..d).map(|i| points.iter().map(|p| p[i]).sum::<f64>() / n).collect();
    let mut chosen = vec![nearest(&mean, points)];
    let mut dist: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let mut best = None;
        let mut best_d = f64::NEG_INFINITY;
        for (i, &di) in dist.iter().enumerate() {
            if !chosen.contains(&i) && di > best_d {
                best = Some(i);
                best_d = di;
            }
        }
        let next = best.unwrap();
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            dist[i] = dist[i].min(sq_dist(p, &points[next]));
        }
    }
    chosen
}

/// Lloyd's algorithm from deterministic seeds. Empty clusters keep their centroid.
pub fn kmeans(points: &[Vec<f64>], k: usize, max_iter: usize) -> Result<KMeans> {
    if k == 0 || k > points.len() {
        return Err(CampError::InvalidArgument(format!(
            "k = {k} must lie in [1, {}]",
            points.len()
        )));
    }
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(CampError::InvalidArgument("k-means points differ in dimension".into()));
    }
    let mut centroids: Vec<Vec<f64>> = seed(points, k).into_iter().map(|i| points[i].clone()).collect();
    let mut assignments: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        if next == assignments {
            break;
        }
        assignments = next;
    }
    Ok(KMeans {
        assignments,
        centroids,
        iterations,
    })
}

/// `Σ_clusters max label count / total`.
pub fn purity(assignments: &[usize], labels: &[usize]) -> Result<f64> {
    if assignments.len() != labels.len() {
        return Err(CampError::DimensionMismatch {
            context: "purity labels",
            expected: assignments.len(),
            got: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(CampError::Empty("purity input".into()));
    }
    let k = assignments.iter().max().unwrap() + 1;
    let l = labels.iter().max().unwrap() + 1;
    let mut counts = vec![vec![0usize; l]; k];
    for (&a, &y) in assignments.iter().zip(labels) {
        counts[a][y] += 1;
    }
    let hit: usize = counts.iter().map(|c| c.iter().copied().max().unwrap_or(0)).sum();
    Ok(hit as f64 / labels.len() as f64)
}

/// k-means followed by purity against `labels`.
pub fn kmeans_purity(points: &[Vec<f64>], labels: &[usize], k: usize) -> Result<(Vec<usize>, f64)> {
    let km = kmeans(points, k, 300)?;
    let p = purity(&km.assignments, labels)?;
    Ok((km.assignments, p))
}

/// Mean distance from each point to its assigned centroid.
pub fn mean_inertia(points: &[Vec<f64>], km: &KMeans) -> f64 {
    points
        .iter()
        .zip(&km.assignments)
        .map(|(p, &a)| euclidean(p, &km.centroids[a]))
        .sum::<f64>()
        / points.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn separated_clouds_are_pure() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let centers = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]];
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for (l, c) in centers.iter().enumerate() {
            for _ in 0..30 {
                pts.push(vec![c[0] + rng.random_range(-1.0..1.0), c[1] + rng.random_range(-1.0..1.0)]);
                labels.push(l);
            }
        }
        let (_, p) = kmeans_purity(&pts, &labels, 4).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn identical_points_give_majority_fraction() {
        let pts = vec![vec![1.0, 1.0]; 10];
        let labels = vec![0, 0, 0, 1, 1, 1, 1, 1, 1, 1];
        let (a, p) = kmeans_purity(&pts, &labels, 2).unwrap();
        assert!(a.iter().all(|&c| c == 0));
        assert!((p - 0.7).abs() < 1e-12);
    }

    #[test]
    fn degenerate_k_is_error() {
        assert!(kmeans(&[vec![0.0]], 0, 10).is_err());
        assert!(kmeans(&[vec![0.0]], 2, 10).is_err());
    }

    #[test]
    fn refinement_never_lowers_purity() {
        let labels = [0, 1, 0, 2, 1, 2, 2, 0];
        let coarse = [0, 0, 0, 1, 0, 1, 1, 0];
        // split cluster 0 into two
        let fine = [0, 2, 0, 1, 2, 1, 1, 0];
        assert!(purity(&fine, &labels).unwrap() >= purity(&coarse, &labels).unwrap());
    }
}
