use ndarray::ArrayView2;
use rayon::prelude::*;

use super::env::{EnvState, Simulator, StepOutcome};
use crate::error::{CampError, Result};

fn check(states: &[EnvState], actions: &ArrayView2<f64>) -> Result<()> {
    if actions.nrows() != states.len() {
        return Err(CampError::DimensionMismatch {
            context: "batch actions",
            expected: states.len(),
            got: actions.nrows(),
        });
    }
    Ok(())
}

fn step_one(sim: &Simulator, i: usize, state: &mut EnvState, actions: &ArrayView2<f64>) -> Result<StepOutcome> {
    let row = actions.row(i);
    let a: Vec<f64> = row.iter().copied().collect();
    sim.step(state, &a).map_err(|e| CampError::Env {
        index: i,
        source: Box::new(e),
    })
}

/// Step every environment; row `i` of `actions` drives `states[i]`. Runs on the rayon pool.
pub fn batch_step(sim: &Simulator, states: &mut [EnvState], actions: ArrayView2<f64>) -> Result<Vec<StepOutcome>> {
    check(states, &actions)?;
    states
        .par_iter_mut()
        .enumerate()
        .map(|(i, s)| step_one(sim, i, s, &actions))
        .collect()
}

/// Single-threaded reference for [`batch_step`].
pub fn batch_step_sequential(sim: &Simulator, states: &mut [EnvState], actions: ArrayView2<f64>) -> Result<Vec<StepOutcome>> {
    check(states, &actions)?;
    states
        .iter_mut()
        .enumerate()
        .map(|(i, s)| step_one(sim, i, s, &actions))
        .collect()
}
