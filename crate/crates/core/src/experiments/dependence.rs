use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::history::PhiGenerator;
use crate::model::ModelSpec;
use crate::solver::{integrate, RunParams, Trajectory};

use super::completed;

#[derive(Clone, Debug, PartialEq)]
pub struct DependenceParams {
    pub tau: f64,
    pub t_star: f64,
    pub dt: f64,
    /// Strictly decreasing perturbation sizes `d₀`.
    pub sizes: Vec<f64>,
    /// Seed of the perturbation direction.
    pub seed: u64,
}

impl DependenceParams {
    pub fn new(seed: u64) -> Self {
        Self {
            tau: 0.0,
            t_star: 5.0,
            dt: 1e-3,
            sizes: vec![1e-2, 5e-3, 2.5e-3],
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DependenceRow {
    pub d0: f64,
    /// `‖u_{t*} − ũ_{t*}‖_{C_{H_t}}`
    pub d_final: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DependenceReport {
    pub tau: f64,
    pub t_star: f64,
    pub rows: Vec<DependenceRow>,
    /// Smallest `C ≥ 0` with `d²_{t*} ≤ e^{C(t*−τ)} d₀²` on every row.
    pub c_fit: f64,
}

impl DependenceReport {
    /// Output ratio over input ratio for consecutive rows.
    pub fn scaling_ratios(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| (w[1].d_final / w[0].d_final) / (w[1].d0 / w[0].d0))
            .collect()
    }

    /// Every consecutive size ratio reproduced within `tol` (relative).
    pub fn linear_within(&self, tol: f64) -> bool {
        self.scaling_ratios().iter().all(|r| (r - 1.0).abs() <= tol)
    }

    /// Gain `d_{t*}/d₀` per row.
    pub fn gains(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.d_final / r.d0).collect()
    }
}

/// Perturbs `φ` along a seeded affine direction of unit `C_{H_τ}` norm and
/// measures the spread at `t*`.
pub fn run_dependence(spec: &ModelSpec, phi: &PhiGenerator, params: &DependenceParams) -> Result<DependenceReport> {
    if params.sizes.is_empty() || params.sizes.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidParameter("perturbation sizes must be positive".into()));
    }
    if params.sizes.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "perturbation sizes must be strictly decreasing".into(),
        ));
    }
    if params.t_star <= params.tau {
        return Err(Error::InvalidParameter("t* must exceed the start time".into()));
    }
    spec.ensure_valid()?;
    let (basis, k, tau) = (&spec.basis, spec.delay.k, params.tau);
    let base = phi.resolve(basis, k, tau, &spec.epsilon)?;
    let dir = PhiGenerator::random_with_norm_sq(params.seed, 1.0).resolve(basis, k, tau, &spec.epsilon)?;
    let shifted = |size: f64| {
        let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + size * y).collect();
        PhiGenerator::Affine {
            at_zero: add(&base.at_zero, &dir.at_zero),
            slope: add(&base.slope, &dir.slope),
        }
    };
    let mut gens = vec![PhiGenerator::Affine {
        at_zero: base.at_zero.clone(),
        slope: base.slope.clone(),
    }];
    gens.extend(params.sizes.iter().map(|&s| shifted(s)));
    let run = RunParams::new(tau, params.t_star, params.dt);
    let runs: Vec<Trajectory> = gens
        .par_iter()
        .map(|g| completed(integrate(spec, g, &run)?))
        .collect::<Result<_>>()?;

    let reference = runs[0].final_history();
    let mut rows = Vec::with_capacity(params.sizes.len());
    let mut c_fit: f64 = 0.0;
    for (traj, &size) in runs[1..].iter().zip(&params.sizes) {
        let d0 = (base_shift_norm_sq(&dir, size, spec, tau)).sqrt();
        let d_final = traj
            .final_history()
            .window_distance(reference, params.t_star, &spec.epsilon)?
            .ht_sq
            .sqrt();
        if d_final > 0.0 {
            c_fit = c_fit.max((d_final * d_final / (d0 * d0)).ln() / (params.t_star - tau));
        }
        rows.push(DependenceRow { d0, d_final });
    }
    Ok(DependenceReport {
        tau,
        t_star: params.t_star,
        rows,
        c_fit,
    })
}

fn base_shift_norm_sq(dir: &crate::history::AffinePhi, size: f64, spec: &ModelSpec, tau: f64) -> f64 {
    let mut d = dir.clone();
    d.scale(size);
    d.c_ht_norm_sq(&spec.basis, spec.delay.k, tau, &spec.epsilon)
}
