use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{CampError, Result};
use crate::nn::Checkpoint;

/// Trainable table `E: y ↦ z`, row-major `(skills, dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkillEmbedding {
    num_skills: usize,
    dim: usize,
    table: Vec<f64>,
}

impl SkillEmbedding {
    /// Unit-norm Gaussian rows.
    pub fn random<R: Rng + ?Sized>(num_skills: usize, dim: usize, rng: &mut R) -> Result<Self> {
        if num_skills == 0 || dim == 0 {
            return Err(CampError::InvalidArgument("embedding table needs skills and dimensions".into()));
        }
        let mut table = Vec::with_capacity(num_skills * dim);
        for _ in 0..num_skills {
            let row: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let n = row.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            table.extend(row.iter().map(|v| v / n));
        }
        Ok(Self { num_skills, dim, table })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).unwrap_or(0);
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(CampError::InvalidArgument("embedding rows must be nonempty and equal length".into()));
        }
        Ok(Self {
            num_skills: rows.len(),
            dim,
            table: rows.concat(),
        })
    }

    pub fn num_skills(&self) -> usize {
        self.num_skills
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, label: usize) -> &[f64] {
        &self.table[label * self.dim..(label + 1) * self.dim]
    }

    pub fn params(&self) -> &[f64] {
        &self.table
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.table
    }

    pub fn check_label(&self, label: usize) -> Result<()> {
        if label >= self.num_skills {
            return Err(CampError::InvalidArgument(format!(
                "skill label {label} out of range for {} skills",
                self.num_skills
            )));
        }
        Ok(())
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            kind: "embedding".into(),
            activation: String::new(),
            sizes: vec![self.num_skills, self.dim],
            arrays: vec![("table".into(), self.table.clone())],
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        ck.expect_kind("embedding")?;
        let [num_skills, dim] = ck.sizes[..] else {
            return Err(CampError::Data("embedding checkpoint needs two sizes".into()));
        };
        let table = ck.array("table")?.to_vec();
        if table.len() != num_skills * dim {
            return Err(CampError::Data("embedding checkpoint table has wrong length".into()));
        }
        Ok(Self { num_skills, dim, table })
    }
}
