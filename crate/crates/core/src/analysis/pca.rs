use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{CampError, Result};

/// Principal-component projection.
#[derive(Debug, Clone)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Unit principal axes, one per row, in decreasing variance order.
    pub components: Vec<Vec<f64>>,
    /// All covariance eigenvalues (population normalization), descending.
    pub eigenvalues: Vec<f64>,
}

impl Pca {
    /// Fit `dims` components. Each axis is signed so its largest-magnitude loading is positive.
    pub fn fit(points: &[Vec<f64>], dims: usize) -> Result<Self> {
        if points.len() < dims || points.is_empty() {
            return Err(CampError::InvalidArgument(format!(
                "PCA needs at least {dims} samples, got {}",
                points.len()
            )));
        }
        let d = points[0].len();
        if dims > d {
            return Err(CampError::InvalidArgument(format!("cannot take {dims} components of {d}-dimensional data")));
        }
        let n = points.len() as f64;
        let mean: Vec<f64> = (0..d).map(|i| points.iter().map(|p| p[i]).sum::<f64>() / n).collect();
        let mut cov = DMatrix::<f64>::zeros(d, d);
        for p in points {
            for i in 0..d {
                let a = p[i] - mean[i];
                for j in 0..d {
                    cov[(i, j)] += a * (p[j] - mean[j]);
                }
            }
        }
        cov /= n;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
        let components = order[..dims]
            .iter()
            .map(|&i| {
                let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
                let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
                if lead < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                v
            })
            .collect();
        Ok(Self {
            mean,
            components,
            eigenvalues,
        })
    }

    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(p.iter().zip(&self.mean)).map(|(w, (x, m))| w * (x - m)).sum())
            .collect()
    }

    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, &a) in self.components.iter().zip(coords) {
            for (o, w) in out.iter_mut().zip(c) {
                *o += a * w;
            }
        }
        out
    }
}

/// Project onto the top `dims` principal components.
pub fn pca_project(points: &[Vec<f64>], dims: usize) -> Result<Vec<Vec<f64>>> {
    let pca = Pca::fit(points, dims)?;
    Ok(points.iter().map(|p| pca.project(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn cloud(n: usize) -> Vec<Vec<f64>> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        (0..n)
            .map(|_| {
                let a: f64 = rng.random_range(-3.0..3.0);
                let b: f64 = rng.random_range(-1.0..1.0);
                let c: f64 = rng.random_range(-0.2..0.2);
                vec![a + b, a - b, c, 0.5 * b + c]
            })
            .collect()
    }

    fn variance(xs: &[Vec<f64>], d: usize) -> f64 {
        let n = xs.len() as f64;
        let m = xs.iter().map(|p| p[d]).sum::<f64>() / n;
        xs.iter().map(|p| (p[d] - m).powi(2)).sum::<f64>() / n
    }

    #[test]
    fn line_has_no_second_component() {
        let pts: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 2.0 * i as f64, -(i as f64)]).collect();
        let proj = pca_project(&pts, 2).unwrap();
        assert!(variance(&proj, 1) < 1e-18);
    }

    #[test]
    fn rotation_preserves_projected_variance() {
        let pts = cloud(200);
        let q = nalgebra::Rotation3::from_euler_angles(0.3, -1.1, 2.0);
        let rotated: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| {
                let v = q * nalgebra::Vector3::new(p[0], p[1], p[2]);
                vec![v.x, v.y, v.z, p[3]]
            })
            .collect();
        let a = pca_project(&pts, 2).unwrap();
        let b = pca_project(&rotated, 2).unwrap();
        for d in 0..2 {
            assert!((variance(&a, d) - variance(&b, d)).abs() < 1e-9);
        }
    }

    #[test]
    fn reconstruction_error_is_discarded_spectrum() {
        let pts = cloud(300);
        let pca = Pca::fit(&pts, 2).unwrap();
        let err = pts
            .iter()
            .map(|p| {
                let r = pca.reconstruct(&pca.project(p));
                p.iter().zip(&r).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
            })
            .sum::<f64>()
            / pts.len() as f64;
        let discarded: f64 = pca.eigenvalues[2..].iter().sum();
        assert!((err - discarded).abs() < 1e-9);
    }

    #[test]
    fn sign_convention() {
        let pca = Pca::fit(&cloud(100), 2).unwrap();
        for c in &pca.components {
            let lead = c.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(lead > 0.0);
        }
    }
}
