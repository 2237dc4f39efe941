//! Galerkin time integration.
//!
//! Mode `j` of every component obeys
//! `(1 + ε(t)λ_j)·ċ_j + a(l(u))·λ_j·c_j = F_j`, where the source `F`
//! depends on the component kind. All components share `a(l(u))` of the full
//! solution `u`, which is always component 0.

pub mod oracle;
mod trajectory;

pub use trajectory::{sliding_max, RunStatus, Trajectory, WindowSeries};

use crate::error::{Error, Result};
use crate::history::{DelayHistory, PhiGenerator};
use crate::model::{Forcing, ModelSpec, Part};
use crate::spectral::{dot, GridTransform, NormBundle, SpectralField};

/// Blow-up guard on the `H_t` norm² of the full solution.
pub const ENERGY_GUARD: f64 = 1e12;

/// Which equation a component integrates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemKind {
    /// The full equation, source `f(u) + g(t, u_t) + h(t)`.
    Full,
    /// Dissipative part, source `f₀(v₁)`, data `φ`.
    V1Split,
    /// Remainder, source `f(u) − f₀(v₁) + g(t, u_t) + h(t)`, zero data.
    V2Split,
    /// Forcing remainder, source `h − h̃`, data `φ`.
    U1Reg,
    /// Everything else, source `f(u) + g(t, u_t) + h̃`, zero data.
    U2Reg,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Full => "u",
            SystemKind::V1Split => "v1",
            SystemKind::V2Split => "v2",
            SystemKind::U1Reg => "u1",
            SystemKind::U2Reg => "u2",
        }
    }

    fn starts_from_phi(self) -> bool {
        matches!(self, SystemKind::Full | SystemKind::V1Split | SystemKind::U1Reg)
    }
}

/// Component layout of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum Coupling {
    /// `u` alone.
    Single,
    /// `(u, v₁, v₂)`.
    Decomposition,
    /// `(u, u¹, u²)` with the retained forcing `h̃`.
    Regularity { htilde: Forcing },
}

impl Coupling {
    pub fn kinds(&self) -> Vec<SystemKind> {
        match self {
            Coupling::Single => vec![SystemKind::Full],
            Coupling::Decomposition => {
                vec![SystemKind::Full, SystemKind::V1Split, SystemKind::V2Split]
            }
            Coupling::Regularity { .. } => {
                vec![SystemKind::Full, SystemKind::U1Reg, SystemKind::U2Reg]
            }
        }
    }

    fn htilde(&self) -> Option<&Forcing> {
        match self {
            Coupling::Regularity { htilde } => Some(htilde),
            _ => None,
        }
    }
}

/// Time window, step and fractional exponent of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunParams {
    pub tau: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Exponent `σ` of the recorded fractional norms.
    pub sigma: f64,
}

impl RunParams {
    pub fn new(tau: f64, t_end: f64, dt: f64) -> Self {
        Self {
            tau,
            t_end,
            dt,
            sigma: 1.0 / 6.0,
        }
    }

    pub fn with_sigma(self, sigma: f64) -> Self {
        Self { sigma, ..self }
    }

    /// Number of steps from `τ` to `t_end`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("step {} is not positive", self.dt)));
        }
        if !(self.t_end > self.tau) {
            return Err(Error::InvalidParameter(format!(
                "end time {} is not after the start time {}",
                self.t_end, self.tau
            )));
        }
        let ratio = (self.t_end - self.tau) / self.dt;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-6 * ratio.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "horizon {} is not a whole number of steps {}",
                self.t_end - self.tau,
                self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// Output of one right-hand-side evaluation besides the derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageInfo {
    pub a_of_lu: f64,
    /// `(f(u) + g(t, u_t) + h(t), u)` for the full component.
    pub power: f64,
}

/// Scratch space for right-hand-side evaluations.
struct Evaluator<'a> {
    spec: &'a ModelSpec,
    kinds: Vec<SystemKind>,
    htilde: Option<&'a Forcing>,
    transform: GridTransform,
    grid: Vec<f64>,
    f_u: Vec<f64>,
    f0_v1: Vec<f64>,
    g: Vec<f64>,
    h: Vec<f64>,
    ht: Vec<f64>,
    src: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(spec: &'a ModelSpec, kinds: Vec<SystemKind>, htilde: Option<&'a Forcing>) -> Self {
        let m = spec.basis.len();
        Self {
            spec,
            kinds,
            htilde,
            transform: GridTransform::new(&spec.basis),
            grid: vec![0.0; spec.basis.grid_len()],
            f_u: vec![0.0; m],
            f0_v1: vec![0.0; m],
            g: vec![0.0; m],
            h: vec![0.0; m],
            ht: vec![0.0; m],
            src: vec![0.0; m],
        }
    }

    fn reaction(&mut self, part: Part, coeffs: &[f64], out_is_f0: bool) -> Result<()> {
        let out = if out_is_f0 { &mut self.f0_v1 } else { &mut self.f_u };
        if self.spec.nonlinearity.is_zero() {
            out.fill(0.0);
            return Ok(());
        }
        self.transform.to_grid(coeffs, &mut self.grid);
        self.spec
            .nonlinearity
            .apply_on_grid(part, &mut self.transform, &mut self.grid, out)
    }

    fn eval(&mut self, s: f64, y: &[f64], history: &DelayHistory, dy: &mut [f64]) -> Result<StageInfo> {
        let spec = self.spec;
        let m = spec.basis.len();
        let lam = spec.basis.eigenvalues();
        let u = &y[..m];
        let a = spec.nonlocal.a_of_coeffs(u);
        let eps = spec.epsilon.value(s);

        self.reaction(Part::Full, u, false)?;
        spec.delay.apply(history, s, u, &mut self.g)?;
        spec.forcing.eval_into(s, &mut self.h);
        if let Some(ht) = self.htilde {
            ht.eval_into(s, &mut self.ht);
        }
        if let Some(v1) = self.kinds.iter().position(|&k| k == SystemKind::V1Split) {
            let v1 = &y[v1 * m..(v1 + 1) * m];
            self.reaction(Part::Dissipative, v1, true)?;
        }

        let mut power = 0.0;
        for (c, &kind) in self.kinds.iter().enumerate() {
            for j in 0..m {
                let (fu, g, h, ht, f0) = (self.f_u[j], self.g[j], self.h[j], self.ht[j], self.f0_v1[j]);
                self.src[j] = match kind {
                    SystemKind::Full => fu + g + h,
                    SystemKind::V1Split => f0,
                    SystemKind::V2Split => fu - f0 + g + h,
                    SystemKind::U1Reg => h - ht,
                    SystemKind::U2Reg => fu + g + ht,
                };
            }
            if kind == SystemKind::Full {
                power = dot(&self.src, u);
            }
            let yc = &y[c * m..(c + 1) * m];
            let dc = &mut dy[c * m..(c + 1) * m];
            for j in 0..m {
                dc[j] = (self.src[j] - a * lam[j] * yc[j]) / (1.0 + eps * lam[j]);
            }
        }
        if dy.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("right-hand side"));
        }
        Ok(StageInfo { a_of_lu: a, power })
    }
}

/// Evaluates the coefficient derivatives of every component at time `t`.
///
/// `state` lists one field per component of `coupling`, full solution first;
/// `history` must hold the full solution over `[t−k, t]`.
pub fn rhs(
    spec: &ModelSpec,
    coupling: &Coupling,
    t: f64,
    state: &[SpectralField],
    history: &DelayHistory,
) -> Result<(Vec<Vec<f64>>, StageInfo)> {
    let kinds = coupling.kinds();
    if state.len() != kinds.len() {
        return Err(Error::DimensionMismatch {
            expected: kinds.len(),
            got: state.len(),
        });
    }
    let m = spec.basis.len();
    let mut y = Vec::with_capacity(m * kinds.len());
    for f in state {
        if f.coeffs().len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: f.coeffs().len(),
            });
        }
        y.extend_from_slice(f.coeffs());
    }
    let mut dy = vec![0.0; y.len()];
    let nk = kinds.len();
    let info = Evaluator::new(spec, kinds, coupling.htilde()).eval(t, &y, history, &mut dy)?;
    Ok((dy.chunks(m).take(nk).map(<[f64]>::to_vec).collect(), info))
}

/// Integrates the full equation alone.
pub fn integrate(spec: &ModelSpec, phi: &PhiGenerator, params: &RunParams) -> Result<Trajectory> {
    integrate_coupled(spec, phi, &Coupling::Single, params)
}

/// Classical RK4 on the joint state of all components of `coupling`.
///
/// The history of `u` receives one entry per accepted step; stage values of
/// the delayed argument come from [`DelayHistory::sample_into`]. A
/// non-finite stage or an `H_t` norm² above [`ENERGY_GUARD`] stops the run
/// with [`RunStatus::AbortedBlowup`].
pub fn integrate_coupled(
    spec: &ModelSpec,
    phi: &PhiGenerator,
    coupling: &Coupling,
    params: &RunParams,
) -> Result<Trajectory> {
    spec.ensure_valid()?;
    let n_steps = params.steps()?;
    let (tau, dt) = (params.tau, params.dt);
    let basis = &spec.basis;
    let m = basis.len();
    let lam = basis.eigenvalues();
    let kinds = coupling.kinds();
    let nc = kinds.len();

    let mut history = DelayHistory::init_from_phi(phi, basis, tau, dt, spec.delay.k, &spec.epsilon)?;
    let pre = history.steps();
    let total_nodes = pre + n_steps + 1;

    let mut traj = Trajectory::new(*params, kinds.clone(), pre, total_nodes);
    let zeros = vec![0.0; m];
    for (i, (t, c)) in history.iter().enumerate() {
        let (e, d) = spec.epsilon.eval(t);
        let bundles = kinds
            .iter()
            .map(|k| {
                let coeffs = if k.starts_from_phi() { c } else { &zeros[..] };
                NormBundle::of(lam, coeffs, e.abs(), params.sigma)
            })
            .collect();
        traj.push_node(t, e, d, bundles);
        debug_assert_eq!(traj.node_count(), i + 1);
    }

    let mut y = Vec::with_capacity(m * nc);
    for k in &kinds {
        if k.starts_from_phi() {
            y.extend_from_slice(history.newest());
        } else {
            y.extend_from_slice(&zeros);
        }
    }

    let mut ev = Evaluator::new(spec, kinds.clone(), coupling.htilde());
    let len = y.len();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    let mut stage = vec![0.0; len];
    traj.push_defect(defect(&kinds, &y, m));

    for step in 0..n_steps {
        let t = tau + step as f64 * dt;
        let mut attempt = || -> Result<StageInfo> {
            let info = ev.eval(t, &y, &history, &mut k1)?;
            combine(&mut stage, &y, &k1, 0.5 * dt);
            ev.eval(t + 0.5 * dt, &stage, &history, &mut k2)?;
            combine(&mut stage, &y, &k2, 0.5 * dt);
            ev.eval(t + 0.5 * dt, &stage, &history, &mut k3)?;
            combine(&mut stage, &y, &k3, dt);
            ev.eval(t + dt, &stage, &history, &mut k4)?;
            Ok(info)
        };
        let info = match attempt() {
            Ok(info) => info,
            Err(Error::NonFinite(_)) => {
                traj.abort(step, t);
                break;
            }
            Err(e) => return Err(e),
        };
        traj.push_stage_info(info);
        let h6 = dt / 6.0;
        for i in 0..len {
            y[i] += h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = tau + (step + 1) as f64 * dt;
        let (e, d) = spec.epsilon.eval(t_next);
        let bundles: Vec<NormBundle> = (0..nc)
            .map(|c| NormBundle::of(lam, &y[c * m..(c + 1) * m], e.abs(), params.sigma))
            .collect();
        let energy = bundles[0].ht_sq;
        if !(energy.is_finite() && energy <= ENERGY_GUARD) || y.iter().any(|v| !v.is_finite()) {
            traj.abort(step + 1, t_next);
            break;
        }
        history.push(&y[..m]);
        traj.push_node(t_next, e, d, bundles);
        traj.push_defect(defect(&kinds, &y, m));
    }

    if traj.status == RunStatus::Completed {
        let t = tau + n_steps as f64 * dt;
        match ev.eval(t, &y, &history, &mut k1) {
            Ok(info) => traj.push_stage_info(info),
            Err(Error::NonFinite(_)) => traj.abort(n_steps, t),
            Err(e) => return Err(e),
        }
    }
    let finals = (0..nc)
        .map(|c| SpectralField::from_coeffs(basis, y[c * m..(c + 1) * m].to_vec()))
        .collect::<Result<Vec<_>>>()
        .unwrap_or_default();
    traj.finish(finals, history);
    Ok(traj)
}

fn combine(out: &mut [f64], y: &[f64], k: &[f64], h: f64) {
    for ((o, a), b) in out.iter_mut().zip(y).zip(k) {
        *o = a + h * b;
    }
}

// ‖u − c₁ − c₂‖ for three-component runs; zero otherwise.
fn defect(kinds: &[SystemKind], y: &[f64], m: usize) -> f64 {
    if kinds.len() < 3 {
        return 0.0;
    }
    (0..m)
        .map(|j| {
            let d = y[j] - y[m + j] - y[2 * m + j];
            d * d
        })
        .sum::<f64>()
        .sqrt()
}
