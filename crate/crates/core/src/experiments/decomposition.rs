use crate::bounds::{v1_decay_envelope, DecayFit};
use crate::error::{Error, Result};
use crate::history::PhiGenerator;
use crate::model::ModelSpec;
use crate::solver::{integrate_coupled, Coupling, RunParams, SystemKind, Trajectory};

use super::{completed, max_over};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecompositionParams {
    pub tau: f64,
    pub horizon: f64,
    pub dt: f64,
    pub sigma: f64,
    /// Start of the post-transient window, measured from `τ`.
    pub window_start: f64,
    /// Slope `ξ` of the affine envelope of the dissipation integral.
    pub xi: f64,
}

impl DecompositionParams {
    /// Horizon 20, `dt = 1e-3`, `σ = 1/6`, window start `5k`, `ξ = 0.01`.
    pub fn new(spec: &ModelSpec) -> Self {
        Self {
            tau: 0.0,
            horizon: 20.0,
            dt: 1e-3,
            sigma: 1.0 / 6.0,
            window_start: 5.0 * spec.delay.k,
            xi: 0.01,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub trajectory: Trajectory,
    /// `max_t ‖u − v₁ − v₂‖`
    pub max_defect: f64,
    pub decay: DecayFit,
    /// `‖A^{σ/2}v₂‖²_C + |ε_t|‖A^{(1+σ)/2}v₂‖²_C` per snapshot.
    pub v2_fractional: Vec<f64>,
    pub v2_sup: f64,
    /// Maximum over `[τ + H/4, τ + 3H/4]`.
    pub v2_mid_max: f64,
    /// Maximum over the last quarter.
    pub v2_last_max: f64,
    /// `∫_τ^t ‖∇v₁‖² dr` per snapshot.
    pub dissipation_integral: Vec<f64>,
    pub xi: f64,
    /// Smallest `C_ξ` with `∫_s^t ‖∇v₁‖² ≤ ξ(t−s) + C_ξ` for all `s ≤ t`.
    pub c_xi: f64,
    /// `sup_t ‖A^{(1+σ)/2}v₂(t)‖²`
    pub j_xi: f64,
}

impl DecompositionReport {
    pub fn additivity_ok(&self) -> bool {
        self.max_defect <= 1e-10
    }

    /// Positive fitted rate with `R² ≥ 0.99` (or `v₁ ≡ 0`).
    pub fn decay_ok(&self) -> bool {
        self.decay.trivial || (self.decay.rate > 0.0 && self.decay.r_squared >= 0.99)
    }

    pub fn plateau_ratio(&self) -> f64 {
        if self.v2_mid_max > 0.0 {
            self.v2_last_max / self.v2_mid_max
        } else if self.v2_last_max > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }

    /// Last-quarter maximum within 5% of the mid-run maximum.
    pub fn plateau_ok(&self) -> bool {
        self.plateau_ratio() <= 1.05
    }

    pub fn passed(&self) -> bool {
        self.additivity_ok() && self.decay_ok() && self.plateau_ok()
    }
}

/// Integrates `(u, v₁, v₂)` jointly and measures the split.
pub fn run_decomposition(
    spec: &ModelSpec,
    phi: &PhiGenerator,
    params: &DecompositionParams,
) -> Result<DecompositionReport> {
    if params.horizon < 10.0 * spec.delay.k {
        return Err(Error::InvalidParameter(format!(
            "horizon {} is shorter than ten delay lengths",
            params.horizon
        )));
    }
    if let Ok(range) = crate::bounds::sigma_range(spec.basis.dim(), spec.nonlinearity.gamma) {
        if !range.contains(params.sigma) {
            return Err(Error::InvalidParameter(format!(
                "sigma = {} outside (0, {})",
                params.sigma, range.max
            )));
        }
    }
    let run = RunParams::new(params.tau, params.tau + params.horizon, params.dt).with_sigma(params.sigma);
    let traj = completed(integrate_coupled(spec, phi, &Coupling::Decomposition, &run)?)?;
    let decay = v1_decay_envelope(&traj, params.window_start)?;

    let v1 = traj.component(SystemKind::V1Split).expect("decomposition layout");
    let v2 = traj.component(SystemKind::V2Split).expect("decomposition layout");
    let series = traj.window_series(v2);
    let v2_fractional: Vec<f64> = (0..series.len()).map(|i| series.fractional(i)).collect();
    let times = traj.snapshot_times().to_vec();
    let (tau, h) = (params.tau, params.horizon);
    let v2_mid_max = max_over(&times, &v2_fractional, tau + 0.25 * h, tau + 0.75 * h);
    let v2_last_max = max_over(&times, &v2_fractional, tau + 0.75 * h, tau + h);
    let v2_sup = v2_fractional.iter().copied().fold(0.0, f64::max);

    let dt = params.dt;
    let mut dissipation_integral = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    for i in 0..times.len() {
        if i > 0 {
            acc += 0.5 * dt * (traj.norms_at(v1, i - 1).grad_sq + traj.norms_at(v1, i).grad_sq);
        }
        dissipation_integral.push(acc);
    }
    let mut running_min = f64::INFINITY;
    let mut c_xi: f64 = 0.0;
    for (t, integral) in times.iter().zip(&dissipation_integral) {
        let j = integral - params.xi * (t - tau);
        running_min = running_min.min(j);
        c_xi = c_xi.max(j - running_min);
    }
    let j_xi = (0..times.len())
        .map(|i| traj.norms_at(v2, i).frac1_sq)
        .fold(0.0, f64::max);

    Ok(DecompositionReport {
        max_defect: traj.max_defect(),
        trajectory: traj,
        decay,
        v2_fractional,
        v2_sup,
        v2_mid_max,
        v2_last_max,
        dissipation_integral,
        xi: params.xi,
        c_xi,
        j_xi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_history_leaves_v1_at_rest() {
        let spec = ModelSpec::default_model(3, 1).unwrap();
        let mut params = DecompositionParams::new(&spec);
        params.horizon = 5.0;
        params.dt = 1e-2;
        let report = run_decomposition(&spec, &PhiGenerator::Zero, &params).unwrap();
        assert!(report.decay.trivial);
        assert!(report.max_defect <= 1e-12);
        assert_eq!(report.c_xi, 0.0);
        assert!(report.decay_ok());
    }

    #[test]
    fn preconditions_are_enforced() {
        let spec = ModelSpec::default_model(3, 1).unwrap();
        let mut params = DecompositionParams::new(&spec);
        params.sigma = 0.5;
        assert!(matches!(
            run_decomposition(&spec, &PhiGenerator::Zero, &params),
            Err(Error::InvalidParameter(_))
        ));
        let mut params = DecompositionParams::new(&spec);
        params.horizon = 2.0;
        assert!(run_decomposition(&spec, &PhiGenerator::Zero, &params).is_err());
    }
}
