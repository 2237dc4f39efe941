//! Drivers that assemble solver runs into complete numerical experiments.
//!
//! Independent trajectories fan out over the rayon pool; results are always
//! collected in input order, so reports do not depend on the worker count.

mod decomposition;
mod dependence;
mod pullback;
mod regularity;
mod sweep;

pub use decomposition::{run_decomposition, DecompositionParams, DecompositionReport};
pub use dependence::{run_dependence, DependenceParams, DependenceReport, DependenceRow};
pub use pullback::{default_phi_set, run_pullback, PullbackParams, PullbackReport, PullbackRow};
pub use regularity::{run_regularity, HTilde, RegularityParams, RegularityReport};
pub use sweep::{run_sweep, SweepParam, SweepRow};

use crate::error::{Error, Result};
use crate::solver::{RunStatus, Trajectory};

/// Turns an aborted run into an error.
pub(crate) fn completed(traj: Trajectory) -> Result<Trajectory> {
    match traj.status {
        RunStatus::Completed => Ok(traj),
        RunStatus::AbortedBlowup { step, time } => Err(Error::BlowUp { step, time }),
    }
}

/// Maximum of `values[i]` over snapshots whose time lies in `[from, to]`.
pub(crate) fn max_over(times: &[f64], values: &[f64], from: f64, to: f64) -> f64 {
    times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= from - 1e-9 && **t <= to + 1e-9)
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max)
}
