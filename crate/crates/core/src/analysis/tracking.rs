use ndarray::ArrayView2;

use crate::error::{CampError, Result};

/// Range-normalized tracking accuracy in percent.
///
/// For each joint (column) `100 · (1 − mean|target − actual| / (max target − min target))`,
/// averaged over joints. Rows are time steps.
pub fn tracking_accuracy(target: ArrayView2<f64>, actual: ArrayView2<f64>) -> Result<f64> {
    if target.dim() != actual.dim() {
        return Err(CampError::DimensionMismatch {
            context: "tracking trajectories",
            expected: target.len(),
            got: actual.len(),
        });
    }
    if target.is_empty() {
        return Err(CampError::Empty("tracking trajectory".into()));
    }
    let t = target.nrows() as f64;
    let mut total = 0.0;
    for j in 0..target.ncols() {
        let col = target.column(j);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let range = hi - lo;
        if !(range > 0.0) {
            return Err(CampError::InvalidArgument(format!("target of joint column {j} is constant")));
        }
        let mae = col.iter().zip(actual.column(j)).map(|(a, b)| (a - b).abs()).sum::<f64>() / t;
        total += 100.0 * (1.0 - mae / range);
    }
    Ok(total / target.ncols() as f64)
}

/// Hip-pitch and knee columns of the 12-joint layout.
pub const SAGITTAL_JOINTS: [usize; 8] = [1, 2, 4, 5, 7, 8, 10, 11];
