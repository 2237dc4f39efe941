//! Analytic decay rates, absorbing radii and regularity envelopes, plus the
//! energy-identity residual of computed trajectories.

use crate::error::{Error, Result};
use crate::model::{EpsilonKind, Forcing, ModelSpec};
use crate::solver::{SystemKind, Trajectory};

/// Resolution of the decay-rate scan.
pub const BETA_SCAN_STEP: f64 = 1e-3;

/// Grid on which `min_t(−ε'(t))` is sampled.
fn derivative_samples() -> impl Iterator<Item = f64> {
    (0..=20_000).map(|i| -100.0 + i as f64 * 0.01)
}

/// A feasible decay-rate pair and the constants it came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaChoice {
    pub delta: f64,
    pub delta_bar: f64,
    pub beta_max: f64,
    pub beta: f64,
    pub beta1: f64,
}

/// `2m + min_t(−ε'(t)) − 2 − 1/(2λ₁) − δ/λ₁`.
pub fn delta_bar(spec: &ModelSpec, delta: f64) -> f64 {
    let lambda1 = spec.lambda1();
    let min_neg_deriv = derivative_samples()
        .map(|t| -spec.epsilon.derivative(t))
        .fold(f64::INFINITY, f64::min);
    2.0 * spec.nonlocal.m + min_neg_deriv - 2.0 - 0.5 / lambda1 - delta / lambda1
}

/// Upper end of the admissible `β` interval.
pub fn beta_max(spec: &ModelSpec, delta_bar: f64) -> f64 {
    let lambda1 = spec.lambda1();
    match spec.epsilon.kind {
        EpsilonKind::Increasing => delta_bar / (1.0 / lambda1 + spec.epsilon.alpha),
        _ => lambda1 * delta_bar / (1.0 + lambda1 * spec.epsilon.bound_l),
    }
}

/// `β₁ = β − (2C_g/(1+λ₁L))·e^{βk}`.
pub fn beta1_of(spec: &ModelSpec, beta: f64) -> f64 {
    beta - delay_penalty(spec, beta)
}

fn delay_penalty(spec: &ModelSpec, beta: f64) -> f64 {
    2.0 * spec.delay.c_g / (1.0 + spec.lambda1() * spec.epsilon.bound_l) * (beta * spec.delay.k).exp()
}

/// Scans `(0, β_max]` for the `β` maximizing `β₁`.
pub fn beta_feasible(spec: &ModelSpec, delta: f64) -> Result<BetaChoice> {
    let lambda1 = spec.lambda1();
    if !(delta > 0.0 && delta < lambda1) {
        return Err(Error::InvalidParameter(format!(
            "delta = {delta} outside (0, {lambda1})"
        )));
    }
    let db = delta_bar(spec, delta);
    let bmax = beta_max(spec, db);
    if !(bmax > 0.0) {
        return Err(Error::Infeasible(format!("beta_max = {bmax} is not positive")));
    }
    let count = (bmax / BETA_SCAN_STEP).floor() as usize;
    let candidates = (1..=count)
        .map(|i| i as f64 * BETA_SCAN_STEP)
        .chain(std::iter::once(bmax));
    let mut best: Option<(f64, f64)> = None;
    for beta in candidates {
        let b1 = beta1_of(spec, beta);
        if best.map_or(true, |(_, v)| b1 > v) {
            best = Some((beta, b1));
        }
    }
    match best {
        Some((beta, beta1)) if beta1 > 0.0 => Ok(BetaChoice {
            delta,
            delta_bar: db,
            beta_max: bmax,
            beta,
            beta1,
        }),
        Some((beta, beta1)) => Err(Error::Infeasible(format!("best beta1 = {beta1:e} at beta = {beta}"))),
        None => Err(Error::Infeasible("empty beta range".into())),
    }
}

/// `P = 1 + 2C_g e^{βk}/((1+λ₁L)(β−β₁))`; the ratio is 1 when `β = β₁`.
pub fn prefactor_p(spec: &ModelSpec, choice: &BetaChoice) -> f64 {
    let gap = choice.beta - choice.beta1;
    if gap == 0.0 {
        return 2.0;
    }
    1.0 + delay_penalty(spec, choice.beta) / gap
}

/// Composite-trapezoid values of `∫_{t₀}^{t_n} e^{−r(t_n−s)} v(s) ds` on a
/// uniform grid.
pub fn discounted_integral(values: &[f64], dt: f64, rate: f64) -> Vec<f64> {
    let decay = (-rate * dt).exp();
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (i, &v) in values.iter().enumerate() {
        if i > 0 {
            acc = decay * acc + 0.5 * dt * (decay * values[i - 1] + v);
        }
        out.push(acc);
    }
    out
}

fn forcing_series(forcing: &Forcing, tau: f64, dt: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| forcing.norm_sq(tau + i as f64 * dt)).collect()
}

/// `R₀²(t)` on the grid `τ + i·dt`, `i < n`, for initial history norm
/// `‖φ‖²_{C_{L²}} + |ε_τ|‖∇φ‖²_{C_{L²}}`.
pub fn absorbing_radius(
    spec: &ModelSpec,
    phi_norm_sq: f64,
    tau: f64,
    dt: f64,
    n: usize,
    choice: &BetaChoice,
) -> Result<Vec<f64>> {
    check_choice(choice)?;
    let p = prefactor_p(spec, choice);
    let tail = forced_part(spec, tau, dt, n, choice);
    Ok((0..n)
        .map(|i| p * phi_norm_sq * (-choice.beta1 * i as f64 * dt).exp() + tail[i])
        .collect())
}

/// `R²(t) = 1 + (P/δ)e^{βk}∫_τ^t e^{−β₁(t−s)}‖h(s)‖² ds` on the same grid.
pub fn absorbing_ball_radius(spec: &ModelSpec, tau: f64, dt: f64, n: usize, choice: &BetaChoice) -> Result<Vec<f64>> {
    check_choice(choice)?;
    Ok(forced_part(spec, tau, dt, n, choice)
        .into_iter()
        .map(|v| 1.0 + v)
        .collect())
}

fn check_choice(choice: &BetaChoice) -> Result<()> {
    if choice.beta1 > 0.0 {
        Ok(())
    } else {
        Err(Error::Infeasible(format!("beta1 = {} is not positive", choice.beta1)))
    }
}

fn forced_part(spec: &ModelSpec, tau: f64, dt: f64, n: usize, choice: &BetaChoice) -> Vec<f64> {
    let scale = prefactor_p(spec, choice) / choice.delta * (choice.beta * spec.delay.k).exp();
    discounted_integral(&forcing_series(&spec.forcing, tau, dt, n), dt, choice.beta1)
        .into_iter()
        .map(|v| scale * v)
        .collect()
}

/// Admissible exponent interval `(0, σ_max)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaRange {
    pub max: f64,
}

impl SigmaRange {
    pub fn midpoint(&self) -> f64 {
        0.5 * self.max
    }

    pub fn contains(&self, sigma: f64) -> bool {
        sigma > 0.0 && sigma < self.max
    }
}

/// `σ_max = min{1/3, (n+2−(n−2)γ)/2}`.
pub fn sigma_range(n: usize, gamma: f64) -> Result<SigmaRange> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("dimension {n} is below 3")));
    }
    let nf = n as f64;
    let top = (nf + 2.0) / (nf - 2.0);
    if !(gamma > 0.0 && gamma < top) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} outside (0, {top})")));
    }
    Ok(SigmaRange {
        max: (1.0 / 3.0f64).min((nf + 2.0 - (nf - 2.0) * gamma) / 2.0),
    })
}

// Composite Simpson on a uniform grid; Simpson's 3/8 closes an odd count.
fn simpson(values: &[f64], dt: f64) -> f64 {
    let n = values.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * dt * (values[0] + values[1]),
        _ => {
            let even = if n % 2 == 0 { n } else { n - 3 };
            let mut sum = 0.0;
            for i in (0..even).step_by(2) {
                sum += dt / 3.0 * (values[i] + 4.0 * values[i + 1] + values[i + 2]);
            }
            if even < n {
                let v = &values[even..];
                sum += 3.0 * dt / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
            }
            sum
        }
    }
}

/// Relative residual of the energy identity of the full component between
/// snapshot times `s ≤ t`:
/// `E(t) − E(s) + ∫(2a − ε')‖∇u‖² − 2∫(F, u)` with `E = ‖u‖² + ε‖∇u‖²`,
/// divided by the sum of the absolute sizes of its terms.
pub fn energy_identity_residual(traj: &Trajectory, s: f64, t: f64) -> Result<f64> {
    let (is, it) = match (traj.index_at(s), traj.index_at(t)) {
        (Some(a), Some(b)) if a <= b && b < traj.power.len() => (a, b),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "[{s}, {t}] is not a pair of recorded snapshot times"
            )))
        }
    };
    if is == it {
        return Ok(0.0);
    }
    let c = traj
        .component(SystemKind::Full)
        .ok_or_else(|| Error::InvalidParameter("trajectory has no full component".into()))?;
    let energy = |i: usize| {
        let nb = traj.norms_at(c, i);
        nb.l2_sq + traj.eps[traj.node(i)] * nb.grad_sq
    };
    let dissipation: Vec<f64> = (is..=it)
        .map(|i| {
            let node = traj.node(i);
            (2.0 * traj.a_of_lu[i] - traj.deps[node]) * traj.norms_at(c, i).grad_sq
        })
        .collect();
    let source: Vec<f64> = (is..=it).map(|i| 2.0 * traj.power[i]).collect();
    let dt = traj.params.dt;
    let (e_t, e_s) = (energy(it), energy(is));
    let d = simpson(&dissipation, dt);
    let p = simpson(&source, dt);
    let abs_d = simpson(&dissipation.iter().map(|v| v.abs()).collect::<Vec<_>>(), dt);
    let abs_p = simpson(&source.iter().map(|v| v.abs()).collect::<Vec<_>>(), dt);
    let scale = e_t.abs() + e_s.abs() + abs_d + abs_p;
    let raw = (e_t - e_s + d - p).abs();
    Ok(if scale > 0.0 { raw / scale } else { raw })
}

/// Log-linear fit `ln‖v₁‖²_{C_{H_t}} ≈ ln Z − c·(t − k − τ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    /// Set when the component vanishes identically; the envelope then holds
    /// trivially and `rate` is infinite.
    pub trivial: bool,
}

/// Fits the decay of `v₁` on snapshots with `t ≥ τ + window_start`.
pub fn v1_decay_envelope(traj: &Trajectory, window_start: f64) -> Result<DecayFit> {
    let c = traj
        .component(SystemKind::V1Split)
        .ok_or_else(|| Error::InvalidParameter("trajectory has no v1 component".into()))?;
    let k = traj.params.dt * traj.delay_steps as f64;
    let tau = traj.params.tau;
    if traj.time(traj.snapshots() - 1) - tau < 10.0 * k - 1e-9 {
        return Err(Error::InvalidParameter("horizon is shorter than ten delays".into()));
    }
    let series = traj.window_series(c);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut all_zero = true;
    for i in 0..series.len() {
        let t = traj.time(i);
        if t < tau + window_start - 1e-9 {
            continue;
        }
        let v = series.ht(i);
        all_zero &= v == 0.0;
        xs.push(t - k - tau);
        ys.push(v.max(1e-300).ln());
    }
    if all_zero {
        return Ok(DecayFit {
            rate: f64::INFINITY,
            prefactor: 0.0,
            r_squared: 1.0,
            trivial: true,
        });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter(
            "fit window holds fewer than two snapshots".into(),
        ));
    }
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok(DecayFit {
        rate: -slope,
        prefactor: intercept.exp(),
        r_squared: r2,
        trivial: false,
    })
}

/// Least squares `y ≈ slope·x + intercept` and its coefficient of determination.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

/// Largest admissible regularity rate `(2 + L + (2λ₁)⁻¹)/(λ₁⁻¹ + L)`.
pub fn regularity_rate_max(spec: &ModelSpec) -> f64 {
    let lambda1 = spec.lambda1();
    let l = spec.epsilon.bound_l;
    (2.0 + l + 0.5 / lambda1) / (1.0 / lambda1 + l)
}

/// `K₁`, `K₂` and `K̄ = K₁ + K₂` per snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityEnvelopes {
    pub rate1: f64,
    pub rate2: f64,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub kbar: Vec<f64>,
}

/// Evaluates the regularity envelopes along a run.
///
/// `r1_sq` is `sup‖h − h̃‖²`; the source of the `u²` estimate is
/// `(2λ₁² + 4C_g)·R²(s) + 4‖h̃(s)‖²`.
pub fn regularity_envelopes(
    spec: &ModelSpec,
    traj: &Trajectory,
    r1_sq: f64,
    htilde: &Forcing,
    rates: (f64, f64),
    choice: &BetaChoice,
) -> Result<RegularityEnvelopes> {
    let top = regularity_rate_max(spec);
    for r in [rates.0, rates.1] {
        if !(r > 0.0 && r <= top) {
            return Err(Error::InvalidParameter(format!("rate {r} outside (0, {top}]")));
        }
    }
    let (r1, r2) = rates;
    let c = traj
        .component(SystemKind::Full)
        .ok_or_else(|| Error::InvalidParameter("trajectory has no full component".into()))?;
    let phi_h1t = traj.window_series(c).h1t(0);
    let (tau, dt) = (traj.params.tau, traj.params.dt);
    let k = spec.delay.k;
    let n = traj.snapshots();
    let lambda1 = spec.lambda1();
    let ball = absorbing_ball_radius(spec, tau, dt, n, choice)?;
    let source: Vec<f64> = (0..n)
        .map(|i| (2.0 * lambda1 * lambda1 + 4.0 * spec.delay.c_g) * ball[i] + 4.0 * htilde.norm_sq(tau + i as f64 * dt))
        .collect();
    let tail = discounted_integral(&source, dt, r2);
    let lift = (r2 * k).exp();
    let mut env = RegularityEnvelopes {
        rate1: r1,
        rate2: r2,
        k1: Vec::with_capacity(n),
        k2: Vec::with_capacity(n),
        kbar: Vec::with_capacity(n),
    };
    for (i, t) in tail.iter().enumerate().take(n) {
        let elapsed = i as f64 * dt + k;
        let k1 = (-r1 * elapsed).exp() * phi_h1t + r1_sq / r1;
        let k2 = (-r2 * elapsed).exp() * phi_h1t + lift * t;
        env.k1.push(k1);
        env.k2.push(k2);
        env.kbar.push(k1 + k2);
    }
    Ok(env)
}

/// Constants shared by every bound evaluation of a model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsReport {
    pub lambda1: f64,
    pub threshold: f64,
    pub choice: BetaChoice,
    pub prefactor: f64,
    pub sigma: Option<SigmaRange>,
    pub regularity_rate_max: f64,
}

pub fn bounds_report(spec: &ModelSpec) -> Result<BoundsReport> {
    let choice = beta_feasible(spec, 0.5 * spec.lambda1())?;
    Ok(BoundsReport {
        lambda1: spec.lambda1(),
        threshold: spec.absorbing_threshold(),
        choice,
        prefactor: prefactor_p(spec, &choice),
        sigma: sigma_range(spec.basis.dim(), spec.nonlinearity.gamma).ok(),
        regularity_rate_max: regularity_rate_max(spec),
    })
}

/// Measured delay-window energy against `R₀²(t)` at every snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct AbsorbingCheck {
    pub measured: Vec<f64>,
    pub bound: Vec<f64>,
    /// `max_t measured/R₀²`.
    pub worst_ratio: f64,
    pub holds: bool,
}

/// Compares `‖u_t‖²_{C_{H_t}}` with `R₀²(t)·(1 + slack)`.
pub fn absorbing_bound_check(
    spec: &ModelSpec,
    traj: &Trajectory,
    choice: &BetaChoice,
    slack: f64,
) -> Result<AbsorbingCheck> {
    let c = traj
        .component(SystemKind::Full)
        .ok_or_else(|| Error::InvalidParameter("trajectory has no full component".into()))?;
    let series = traj.window_series(c);
    let measured: Vec<f64> = (0..series.len()).map(|i| series.ht(i)).collect();
    let bound = absorbing_radius(
        spec,
        measured.first().copied().unwrap_or(0.0),
        traj.params.tau,
        traj.params.dt,
        measured.len(),
        choice,
    )?;
    let mut worst: f64 = 0.0;
    let mut holds = true;
    for (m, b) in measured.iter().zip(&bound) {
        if *b > 0.0 {
            worst = worst.max(m / b);
        } else if *m > 0.0 {
            worst = f64::INFINITY;
        }
        holds &= *m <= b * (1.0 + slack);
    }
    Ok(AbsorbingCheck {
        measured,
        bound,
        worst_ratio: worst,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DelayOperator;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn defaults() -> ModelSpec {
        ModelSpec::default_model(3, 2).unwrap()
    }

    #[test]
    fn default_beta_scan_matches_fine_grid() {
        let spec = defaults();
        let choice = beta_feasible(&spec, 1.5).unwrap();
        // independent recomputation of the scan on a 1e-6 grid
        let db = 2.0 * 2.5 - 2.0 - 1.0 / 6.0 - 0.5;
        assert_abs_diff_eq!(choice.delta_bar, db, epsilon = 1e-12);
        let bmax = 3.0 * db / (1.0 + 3.0 * 1.625);
        assert_abs_diff_eq!(choice.beta_max, bmax, epsilon = 1e-12);
        let b1 = |b: f64| b - 0.02 / 5.875 * (0.5 * b).exp();
        let fine = (1..=(bmax * 1e6) as usize)
            .map(|i| b1(i as f64 * 1e-6))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(choice.beta1 > 0.0);
        assert!((fine - choice.beta1).abs() < 1e-3);
        assert!(choice.beta1 < choice.beta);
    }

    #[test]
    fn delay_free_beta() {
        let mut spec = defaults();
        spec.delay = DelayOperator::discrete(0.0, 0.5);
        let choice = beta_feasible(&spec, 1.5).unwrap();
        assert_eq!(choice.beta, choice.beta_max);
        assert_eq!(choice.beta1, choice.beta);
        assert_eq!(prefactor_p(&spec, &choice), 2.0);
    }

    #[test]
    fn huge_delay_gain_is_infeasible() {
        let mut spec = defaults();
        spec.delay.c_g = 1e3;
        let bmax = beta_max(&spec, delta_bar(&spec, 1.5));
        assert!(beta1_of(&spec, BETA_SCAN_STEP) < 0.0);
        assert!(beta1_of(&spec, bmax) < 0.0);
        assert!(matches!(beta_feasible(&spec, 1.5), Err(Error::Infeasible(_))));
    }

    #[test]
    fn delta_out_of_range() {
        let spec = defaults();
        assert!(beta_feasible(&spec, 0.0).is_err());
        assert!(beta_feasible(&spec, 3.0).is_err());
    }

    #[test]
    fn prefactor_is_two() {
        let spec = defaults();
        let choice = beta_feasible(&spec, 1.5).unwrap();
        assert_abs_diff_eq!(prefactor_p(&spec, &choice), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_data_zero_forcing_radius() {
        let mut spec = defaults();
        spec.forcing = Forcing::zero();
        let choice = beta_feasible(&spec, 1.5).unwrap();
        let r0 = absorbing_radius(&spec, 0.0, 0.0, 0.01, 100, &choice).unwrap();
        assert!(r0.iter().all(|&v| v == 0.0));
        let ball = absorbing_ball_radius(&spec, 0.0, 0.01, 100, &choice).unwrap();
        assert!(ball.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn ball_radius_is_one_plus_zero_data_radius() {
        let spec = defaults();
        let choice = beta_feasible(&spec, 1.5).unwrap();
        let r0 = absorbing_radius(&spec, 0.0, -3.0, 0.01, 500, &choice).unwrap();
        let ball = absorbing_ball_radius(&spec, -3.0, 0.01, 500, &choice).unwrap();
        for (a, b) in r0.iter().zip(&ball) {
            assert_eq!(1.0 + a, *b);
        }
    }

    #[test]
    fn constant_forcing_limit() {
        let mut spec = defaults();
        spec.forcing = Forcing {
            modes: vec![crate::model::ForcedMode {
                index: 0,
                offset: 1.0,
                amplitude: 0.0,
                omega: 0.0,
            }],
        };
        let choice = beta_feasible(&spec, 1.5).unwrap();
        let p = prefactor_p(&spec, &choice);
        let limit = p / choice.delta * (choice.beta * 0.5).exp() / choice.beta1;
        let dt = 1e-3;
        let r0 = absorbing_radius(&spec, 0.0, 0.0, dt, 40_001, &choice).unwrap();
        // trapezoid of a constant against an exponential kernel: relative error O(dt²)
        assert!((r0.last().unwrap() - limit).abs() < 1e-6 * limit);
        let ball = absorbing_ball_radius(&spec, 0.0, dt, 40_001, &choice).unwrap();
        assert!((ball.last().unwrap() - 1.0 - limit).abs() < 1e-6 * limit);
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_range(3, 1.0).unwrap().max, 1.0 / 3.0);
        assert_eq!(sigma_range(3, 4.5).unwrap().max, 0.25);
        assert!(sigma_range(4, 3.0).is_err());
        assert!(sigma_range(2, 1.0).is_err());
        assert_eq!(sigma_range(3, 1.0).unwrap().midpoint(), 1.0 / 6.0);
    }

    #[test]
    fn regularity_rate_arithmetic() {
        let spec = defaults();
        let expected = (2.0 + 1.625 + 1.0 / 6.0) / (1.0 / 3.0 + 1.625);
        assert_abs_diff_eq!(regularity_rate_max(&spec), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(regularity_rate_max(&spec), 1.9362, epsilon = 1e-4);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let f = |x: f64| 1.0 + x - 2.0 * x * x + 0.5 * x * x * x;
        let exact = |x: f64| x + x * x / 2.0 - 2.0 * x * x * x / 3.0 + x.powi(4) / 8.0;
        for n in [2usize, 3, 4, 5, 7, 10] {
            let dt = 2.0 / n as f64;
            let v: Vec<f64> = (0..=n).map(|i| f(i as f64 * dt)).collect();
            assert_abs_diff_eq!(simpson(&v, dt), exact(2.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn linear_fit_recovers_a_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (s, c, r2) = linear_fit(&xs, &ys);
        assert_abs_diff_eq!(s, -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c, 2.0, epsilon = 1e-13);
        assert_abs_diff_eq!(r2, 1.0, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn sigma_is_antitone_and_capped(g1 in 0.01f64..4.99, g2 in 0.01f64..4.99) {
            let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
            let a = sigma_range(3, lo).unwrap().max;
            let b = sigma_range(3, hi).unwrap().max;
            prop_assert!(a >= b);
            prop_assert!(a <= 1.0 / 3.0);
        }

        #[test]
        fn beta1_stays_below_beta(b in 0.05f64..0.3, k in 0.1f64..1.0) {
            let mut spec = ModelSpec::default_model(3, 1).unwrap();
            spec.delay = DelayOperator::discrete(b, k);
            if let Ok(choice) = beta_feasible(&spec, 1.5) {
                prop_assert!(choice.beta1 > 0.0);
                prop_assert!(choice.beta1 <= choice.beta);
                prop_assert!((prefactor_p(&spec, &choice) - 2.0).abs() < 1e-12);
            }
        }
    }
}
