//! Slow reference integrator sharing no transform or history code with the
//! main solver.
//!
//! Nodal values come from a dense matrix of closed-form eigenfunction values,
//! `l(u)` and the projections are plain quadrature sums, the delayed argument
//! is read from a full list of past states (or from the closed-form initial
//! history before `τ`), and time stepping is RK4 at a fixed tiny step.

use crate::error::{Error, Result};
use crate::history::{AffinePhi, PhiGenerator};
use crate::model::{DelayKind, ModelSpec};

/// Fixed step of the reference integrator.
pub const ORACLE_DT: f64 = 1e-5;

/// Dense evaluation tables for a model.
pub struct DenseQuadrature {
    /// `values[q * modes + j] = e_j(x_q)`
    values: Vec<f64>,
    weight: f64,
    nodes: usize,
    modes: usize,
    functional_weight: Vec<f64>,
}

impl DenseQuadrature {
    pub fn new(spec: &ModelSpec) -> Self {
        let basis = &spec.basis;
        let (n, g, modes) = (basis.dim(), basis.grid_size(), basis.len());
        let nodes = basis.grid_len();
        let mut values = vec![0.0; nodes * modes];
        let mut x = vec![0.0; n];
        for q in 0..nodes {
            let mut rest = q;
            for axis in (0..n).rev() {
                x[axis] = basis.node(rest % g + 1);
                rest /= g;
            }
            for j in 0..modes {
                values[q * modes + j] = basis.eigenfunction(j, &x);
            }
        }
        let mut dq = Self {
            values,
            weight: basis.quadrature_weight(),
            nodes,
            modes,
            functional_weight: Vec::new(),
        };
        dq.functional_weight = dq.nodal(spec.nonlocal.weight.coeffs());
        dq
    }

    fn nodal(&self, coeffs: &[f64]) -> Vec<f64> {
        (0..self.nodes)
            .map(|q| {
                let row = &self.values[q * self.modes..(q + 1) * self.modes];
                row.iter().zip(coeffs).map(|(e, c)| e * c).sum()
            })
            .collect()
    }

    /// `∫ i·u dx` by quadrature.
    pub fn functional(&self, coeffs: &[f64]) -> f64 {
        self.nodal(coeffs)
            .iter()
            .zip(&self.functional_weight)
            .map(|(u, w)| u * w)
            .sum::<f64>()
            * self.weight
    }

    /// Projection of `f(u)` onto every mode by quadrature.
    pub fn project_pointwise(&self, coeffs: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let fx: Vec<f64> = self.nodal(coeffs).into_iter().map(f).collect();
        let mut out = vec![0.0; self.modes];
        for (q, v) in fx.iter().enumerate() {
            let row = &self.values[q * self.modes..(q + 1) * self.modes];
            for (o, e) in out.iter_mut().zip(row) {
                *o += e * v;
            }
        }
        out.iter_mut().for_each(|o| *o *= self.weight);
        out
    }
}

/// Derivative of the full system at `t` given the state and the delayed state.
pub fn oracle_rhs(spec: &ModelSpec, dq: &DenseQuadrature, t: f64, u: &[f64], delayed: &[f64]) -> Vec<f64> {
    let lam = spec.basis.eigenvalues();
    let l = dq.functional(u);
    let a = spec.nonlocal.a_lo + (spec.nonlocal.a_hi - spec.nonlocal.a_lo) * l * l / (1.0 + l * l);
    let f = &spec.nonlinearity;
    let fu = dq.project_pointwise(u, |x| -f.cubic * x * x * x + f.kappa * x / (1.0 + x * x));
    let h = spec.forcing.eval(&spec.basis, t);
    let eps = spec.epsilon.value(t);
    (0..u.len())
        .map(|j| {
            let src = fu[j] + spec.delay.b * delayed[j] + h[j];
            (src - a * lam[j] * u[j]) / (1.0 + eps * lam[j])
        })
        .collect()
}

/// Reference run of the full system with discrete delay.
#[derive(Clone, Debug)]
pub struct OracleRun {
    /// Recorded times, every `record_every` steps plus the final time.
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl OracleRun {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("at least the initial state")
    }
}

/// Integrates from `τ` to `t_end` with [`ORACLE_DT`].
pub fn oracle_integrate(
    spec: &ModelSpec,
    phi: &PhiGenerator,
    tau: f64,
    t_end: f64,
    record_every: usize,
) -> Result<OracleRun> {
    if spec.delay.kind != DelayKind::Discrete {
        return Err(Error::InvalidParameter(
            "the reference integrator only handles the discrete delay".into(),
        ));
    }
    let dt = ORACLE_DT;
    let k = spec.delay.k;
    let steps = ((t_end - tau) / dt).round() as usize;
    let lag = (k / dt).round() as usize;
    let dq = DenseQuadrature::new(spec);
    let init: AffinePhi = phi.resolve(&spec.basis, k, tau, &spec.epsilon)?;
    let m = spec.basis.len();

    let mut past: Vec<Vec<f64>> = Vec::with_capacity(steps + 1);
    past.push(init.at(0.0));
    // u(τ + i·dt + frac·dt − k), i the current step
    let delayed = |past: &Vec<Vec<f64>>, i: usize, frac: f64| -> Vec<f64> {
        let pos = i as f64 + frac - lag as f64;
        if pos <= 0.0 {
            return init.at(pos * dt);
        }
        let lo = pos.floor() as usize;
        let w = pos - lo as f64;
        if w == 0.0 {
            return past[lo].clone();
        }
        past[lo]
            .iter()
            .zip(&past[lo + 1])
            .map(|(a, b)| a + w * (b - a))
            .collect()
    };

    let mut run = OracleRun {
        times: vec![tau],
        states: vec![past[0].clone()],
    };
    let axpy = |y: &[f64], k: &[f64], h: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    for i in 0..steps {
        let t = tau + i as f64 * dt;
        let y = past[i].clone();
        let k1 = oracle_rhs(spec, &dq, t, &y, &delayed(&past, i, 0.0));
        let mid = delayed(&past, i, 0.5);
        let k2 = oracle_rhs(spec, &dq, t + 0.5 * dt, &axpy(&y, &k1, 0.5 * dt), &mid);
        let k3 = oracle_rhs(spec, &dq, t + 0.5 * dt, &axpy(&y, &k2, 0.5 * dt), &mid);
        let k4 = oracle_rhs(spec, &dq, t + dt, &axpy(&y, &k3, dt), &delayed(&past, i, 1.0));
        let next: Vec<f64> = (0..m)
            .map(|j| y[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                step: i + 1,
                time: t + dt,
            });
        }
        past.push(next);
        if (i + 1) % record_every.max(1) == 0 || i + 1 == steps {
            run.times.push(tau + (i + 1) as f64 * dt);
            run.states.push(past[i + 1].clone());
        }
    }
    Ok(run)
}
