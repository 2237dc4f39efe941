use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::history::PhiGenerator;
use crate::model::ModelSpec;
use crate::solver::{integrate, RunParams, Trajectory};

use super::completed;

#[derive(Clone, Debug, PartialEq)]
pub struct PullbackParams {
    pub t_star: f64,
    /// Strictly decreasing start times, all below `t* − k`.
    pub taus: Vec<f64>,
    pub dt: f64,
    pub phis: Vec<PhiGenerator>,
}

/// Zero history, a seeded random history of `C_{H_t}` norm² 100, and a
/// constant history on the lowest mode.
pub fn default_phi_set(spec: &ModelSpec, seed: u64) -> Vec<PhiGenerator> {
    vec![
        PhiGenerator::Zero,
        PhiGenerator::random_with_norm_sq(seed, 100.0),
        PhiGenerator::single_mode(&spec.basis, 0, 2.0),
    ]
}

impl PullbackParams {
    pub fn new(spec: &ModelSpec, seed: u64) -> Self {
        Self {
            t_star: 0.0,
            taus: vec![-5.0, -10.0, -20.0, -40.0],
            dt: 1e-3,
            phis: default_phi_set(spec, seed),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PullbackRow {
    pub tau: f64,
    /// `(i, j, ‖U(t*,τ)φᵢ − U(t*,τ)φⱼ‖_{C_{H_t}})` for `i < j`.
    pub distances: Vec<(usize, usize, f64)>,
    pub diameter: f64,
    /// Distance of each `U(t*,τ)φᵢ` to the reference trajectory.
    pub to_reference: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PullbackReport {
    pub t_star: f64,
    /// Start time of the reference trajectory (the earliest `τ`, first `φ`).
    pub reference_tau: f64,
    pub rows: Vec<PullbackRow>,
}

impl PullbackReport {
    pub fn diameters(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.diameter).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].diameter < w[0].diameter)
    }

    /// Nonincreasing up to an absolute slack.
    pub fn monotone_within(&self, slack: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].diameter <= w[0].diameter + slack)
    }

    /// Final diameter over the first.
    pub fn contraction(&self) -> f64 {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) if a.diameter > 0.0 => b.diameter / a.diameter,
            _ => 0.0,
        }
    }
}

/// Integrates every `(τ, φ)` pair to `t*` and measures the spread at `t*`.
pub fn run_pullback(spec: &ModelSpec, params: &PullbackParams) -> Result<PullbackReport> {
    let k = spec.delay.k;
    if params.taus.is_empty() || params.phis.is_empty() {
        return Err(Error::InvalidParameter(
            "need at least one start time and one history".into(),
        ));
    }
    if params.taus.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "start times must be strictly decreasing".into(),
        ));
    }
    if let Some(bad) = params.taus.iter().find(|&&tau| tau >= params.t_star - k) {
        return Err(Error::InvalidParameter(format!(
            "start time {bad} is not below t* - k = {}",
            params.t_star - k
        )));
    }
    spec.ensure_valid()?;

    let jobs: Vec<(f64, &PhiGenerator)> = params
        .taus
        .iter()
        .flat_map(|&tau| params.phis.iter().map(move |phi| (tau, phi)))
        .collect();
    let runs: Vec<Trajectory> = jobs
        .par_iter()
        .map(|(tau, phi)| completed(integrate(spec, phi, &RunParams::new(*tau, params.t_star, params.dt))?))
        .collect::<Result<_>>()?;

    let np = params.phis.len();
    let reference = &runs[(params.taus.len() - 1) * np];
    let distance = |a: &Trajectory, b: &Trajectory| -> Result<f64> {
        Ok(a.final_history()
            .window_distance(b.final_history(), params.t_star, &spec.epsilon)?
            .ht_sq
            .sqrt())
    };
    let mut rows = Vec::with_capacity(params.taus.len());
    for (r, &tau) in params.taus.iter().enumerate() {
        let group = &runs[r * np..(r + 1) * np];
        let mut distances = Vec::new();
        for i in 0..np {
            for j in i + 1..np {
                distances.push((i, j, distance(&group[i], &group[j])?));
            }
        }
        let diameter = distances.iter().map(|d| d.2).fold(0.0, f64::max);
        let to_reference = group.iter().map(|t| distance(t, reference)).collect::<Result<_>>()?;
        rows.push(PullbackRow {
            tau,
            distances,
            diameter,
            to_reference,
        });
    }
    Ok(PullbackReport {
        t_star: params.t_star,
        reference_tau: *params.taus.last().expect("non-empty"),
        rows,
    })
}
