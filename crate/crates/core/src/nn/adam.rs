use crate::error::{ensure_finite, CampError, Result};

use super::Checkpoint;

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(num_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Gradient-descent step. Non-finite gradients are rejected before any state changes.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(CampError::DimensionMismatch {
                context: "adam step",
                expected: self.m.len(),
                got: if params.len() != self.m.len() { params.len() } else { grad.len() },
            });
        }
        ensure_finite(grad, "optimizer gradient")?;
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            kind: "adam".into(),
            activation: String::new(),
            sizes: vec![self.m.len()],
            arrays: vec![
                (
                    "hyper".into(),
                    vec![self.lr, self.beta1, self.beta2, self.eps, self.t as f64],
                ),
                ("m".into(), self.m.clone()),
                ("v".into(), self.v.clone()),
            ],
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        ck.expect_kind("adam")?;
        let hyper = ck.array("hyper")?;
        if hyper.len() != 5 {
            return Err(CampError::Data("adam checkpoint: malformed hyper array".into()));
        }
        let m = ck.array("m")?.to_vec();
        let v = ck.array("v")?.to_vec();
        if m.len() != v.len() {
            return Err(CampError::Data("adam checkpoint: moment lengths differ".into()));
        }
        Ok(Self {
            lr: hyper[0],
            beta1: hyper[1],
            beta2: hyper[2],
            eps: hyper[3],
            t: hyper[4] as u64,
            m,
            v,
        })
    }
}
