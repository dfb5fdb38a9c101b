//! Multilayer perceptrons with exact gradients.
//!
//! Besides ordinary backpropagation, [`Mlp::jacobian_penalty`] differentiates
//! the squared Frobenius norm of the input Jacobian with respect to both
//! parameters and inputs (a "double backward" pass). The adversarial
//! gradient-penalty terms are built on it.

mod adam;
mod checkpoint;
mod mlp;

pub use adam::Adam;
pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use mlp::{Activation, ForwardCache, Mlp, MlpSpec, Penalty};

/// Euclidean norm of a gradient slice.
pub fn grad_norm(g: &[f64]) -> f64 {
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Scale `g` so its norm does not exceed `max_norm`. Returns the pre-clip norm.
pub fn clip_grad_norm(g: &mut [f64], max_norm: f64) -> f64 {
    let n = grad_norm(g);
    if n > max_norm && n > 0.0 {
        let s = max_norm / n;
        g.iter_mut().for_each(|v| *v *= s);
    }
    n
}
