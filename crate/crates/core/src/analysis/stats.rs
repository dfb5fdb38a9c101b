use crate::error::{CampError, Result};

/// Per-dimension standardization fitted on a pooled sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Population statistics; dimensions with zero spread get unit scale.
    pub fn fit(rows: &[&[f64]]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| CampError::Empty("standardizer input".into()))?;
        let d = first.len();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(CampError::DimensionMismatch {
                context: "standardizer rows",
                expected: d,
                got: r.len(),
            });
        }
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..d).map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / n).collect();
        let std = (0..d)
            .map(|i| {
                let var = rows.iter().map(|r| (r[i] - mean[i]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardized_sample_has_zero_mean_unit_variance() {
        let data: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 * 0.3 + 2.0, (i as f64).sin() * 5.0, 7.0]).collect();
        let rows: Vec<&[f64]> = data.iter().map(|r| r.as_slice()).collect();
        let s = Standardizer::fit(&rows).unwrap();
        let out: Vec<Vec<f64>> = data.iter().map(|r| s.apply(r)).collect();
        for d in 0..2 {
            let m = out.iter().map(|r| r[d]).sum::<f64>() / 50.0;
            let v = out.iter().map(|r| (r[d] - m).powi(2)).sum::<f64>() / 50.0;
            assert!(m.abs() < 1e-9 && (v - 1.0).abs() < 1e-9);
        }
        assert!(out.iter().all(|r| r[2] == 0.0));
    }
}
