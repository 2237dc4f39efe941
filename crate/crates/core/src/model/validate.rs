//! Sample-based checks of every structural hypothesis.
//!
//! Sampling grids are fixed so that a failure always reports the same
//! witness: `ε` on `t ∈ [−100, 100]` in steps of 0.01, the reaction term on
//! a symmetric list of magnitudes, the delay operator on 100 history pairs
//! drawn from a fixed seed, and the forcing on windows starting in
//! `[−50, 50]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{EpsilonKind, ModelSpec};
use crate::bounds::beta_feasible;
use crate::history::{DelayHistory, PhiGenerator};

const LIPSCHITZ_SEED: u64 = 0x5eed_1ab5;
const LIPSCHITZ_PAIRS: usize = 100;
const U_SAMPLES: [f64; 12] = [1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0, 1e3, 1e4];

/// Outcome of one hypothesis.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Sample that violated the hypothesis.
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| match &c.witness {
                Some(w) => format!("{} ({w})", c.name),
                None => c.name.to_string(),
            })
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &'static str, witness: Option<String>) {
        self.checks.push(Check {
            name,
            passed: witness.is_none(),
            witness,
        });
    }
}

fn first_failure<I, F>(samples: I, bad: F) -> Option<String>
where
    I: IntoIterator<Item = f64>,
    F: FnMut(f64) -> Option<String>,
{
    samples.into_iter().find_map(bad)
}

fn signed_samples() -> impl Iterator<Item = f64> {
    U_SAMPLES.iter().flat_map(|&u| [u, -u])
}

/// Runs every hypothesis check on a model.
pub fn validate_model(spec: &ModelSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    let eps = &spec.epsilon;
    let lambda1 = spec.lambda1();
    let n = spec.basis.dim();
    let times: Vec<f64> = (0..=20_000).map(|i| -100.0 + i as f64 * 0.01).collect();

    // ε: asymptotic lower bound, L-bound, monotonicity
    let limit = if eps.alpha <= 0.5 {
        Some(format!("alpha = {} is not above 1/2", eps.alpha))
    } else {
        first_failure([10.0, 50.0, 100.0], |t| {
            let v = eps.value(t);
            (v <= eps.alpha).then(|| format!("eps({t}) = {v} <= alpha = {}", eps.alpha))
        })
    };
    report.push("epsilon_limit", limit);
    report.push(
        "epsilon_bound",
        first_failure(times.iter().copied(), |t| {
            let (e, d) = eps.eval(t);
            let s = e.abs() + d.abs();
            (s > eps.bound_l).then(|| format!("|eps| + |eps'| = {s} > L at t = {t}"))
        }),
    );
    let monotone = times.windows(2).find_map(|w| {
        let d = eps.value(w[1]) - eps.value(w[0]);
        let bad = match eps.kind {
            EpsilonKind::Decreasing => d > 0.0,
            EpsilonKind::Increasing => d < 0.0,
            EpsilonKind::Constant => d != 0.0,
        };
        bad.then(|| format!("eps changes by {d:e} on [{}, {}]", w[0], w[1]))
    });
    report.push("epsilon_monotone", monotone);

    // diffusion coefficient bounds
    let a = &spec.nonlocal;
    let lower = if eps.is_nonincreasing() { a.m } else { a.m + eps.bound_l };
    let coef = if !(a.m > 0.0) {
        Some(format!("m = {} is not positive", a.m))
    } else if a.a_lo > a.a_hi {
        Some(format!("a_lo = {} exceeds a_hi = {}", a.a_lo, a.a_hi))
    } else if a.a_lo < lower {
        Some(format!("inf a = {} is below {lower}", a.a_lo))
    } else if a.a_hi > a.big_m {
        Some(format!("sup a = {} exceeds M = {}", a.a_hi, a.big_m))
    } else {
        None
    };
    report.push("coefficient_bounds", coef);

    // reaction term
    let f = &spec.nonlinearity;
    let c = f.growth;
    report.push("f_zero", (f.f(0.0) != 0.0).then(|| format!("f(0) = {}", f.f(0.0))));
    report.push(
        "f_split",
        first_failure(signed_samples(), |u| {
            let d = f.f(u) - (f.f0(u) + f.f1(u));
            (d != 0.0).then(|| format!("f - f0 - f1 = {d:e} at u = {u}"))
        }),
    );
    report.push(
        "f0_growth",
        first_failure(signed_samples(), |u| {
            let lhs = f.f0(u).abs();
            let rhs = c * (u.abs() + u.abs().powf(f.p + 1.0));
            (lhs > rhs).then(|| format!("|f0({u})| = {lhs:e} > {rhs:e}"))
        }),
    );
    report.push(
        "f0_dissipative",
        first_failure(signed_samples(), |u| {
            let v = f.f0(u) * u;
            (v > 0.0).then(|| format!("f0(u)·u = {v:e} at u = {u}"))
        }),
    );
    report.push(
        "f1_growth",
        first_failure(signed_samples(), |u| {
            let lhs = f.f1(u).abs();
            let rhs = c * (1.0 + u.abs().powf(f.gamma));
            (lhs > rhs).then(|| format!("|f1({u})| = {lhs:e} > {rhs:e}"))
        }),
    );
    report.push(
        "f_limsup",
        first_failure([1e2, 1e3, 1e4, -1e2, -1e3, -1e4], |u| {
            let r = f.f(u) / u;
            (r >= lambda1).then(|| format!("f(u)/u = {r:e} at u = {u}"))
        }),
    );
    report.push(
        "f_derivative_growth",
        first_failure(signed_samples().chain([0.0]), |u| {
            let h = 1e-6 * u.abs().max(1.0);
            let d = ((f.f(u + h) - f.f(u - h)) / (2.0 * h)).abs();
            let rhs = c * (1.0 + u.abs().powf(f.p));
            (d > rhs * (1.0 + 1e-6)).then(|| format!("|f'({u})| = {d:e} > {rhs:e}"))
        }),
    );
    let gamma = if n >= 3 {
        let top = (n as f64 + 2.0) / (n as f64 - 2.0);
        (!(f.gamma > 0.0 && f.gamma < top)).then(|| format!("gamma = {} outside (0, {top})", f.gamma))
    } else {
        (!(f.gamma > 0.0)).then(|| format!("gamma = {} is not positive", f.gamma))
    };
    report.push("gamma_range", gamma);

    // delay operator
    let (zero, lipschitz) = check_delay(spec);
    report.push("delay_zero", zero);
    report.push("delay_lipschitz", lipschitz);

    // forcing
    let tb = spec.forcing.translation_bound(-50.0, 50.0, 100);
    report.push(
        "forcing_translation_bounded",
        (!tb.is_finite()).then(|| format!("window energy estimate {tb}")),
    );

    // dissipativity threshold and decay-rate feasibility
    let threshold = spec.absorbing_threshold();
    report.push(
        "absorbing_threshold",
        (a.m <= threshold).then(|| format!("m = {} <= {threshold}", a.m)),
    );
    report.push(
        "beta_feasible",
        beta_feasible(spec, 0.5 * lambda1).err().map(|e| e.to_string()),
    );

    report
}

fn check_delay(spec: &ModelSpec) -> (Option<String>, Option<String>) {
    let g = &spec.delay;
    if !(g.k > 0.0) {
        let msg = Some(format!("delay length {} is not positive", g.k));
        return (msg.clone(), msg);
    }
    let basis = &spec.basis;
    let len = basis.len();
    let dt = g.k / 10.0;
    let eps = &spec.epsilon;
    let fresh = |phi: &PhiGenerator| DelayHistory::init_from_phi(phi, basis, 0.0, dt, g.k, eps);

    let mut out = vec![0.0; len];
    let zero = match fresh(&PhiGenerator::Zero) {
        Ok(h) => match g.apply(&h, 0.0, h.newest(), &mut out) {
            Ok(()) => out.iter().any(|&v| v != 0.0).then(|| "g(t, 0) is not zero".to_string()),
            Err(e) => Some(e.to_string()),
        },
        Err(e) => Some(e.to_string()),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(LIPSCHITZ_SEED);
    let random_history = |rng: &mut ChaCha8Rng| {
        let mut h = fresh(&PhiGenerator::Zero)?;
        let mut state = vec![0.0; len];
        for _ in 0..h.capacity() {
            for s in state.iter_mut() {
                *s = StandardNormal.sample(rng);
            }
            h.push(&state);
        }
        Ok::<_, crate::error::Error>(h)
    };
    let mut other = vec![0.0; len];
    let mut worst: Option<String> = None;
    for pair in 0..LIPSCHITZ_PAIRS {
        let result = (|| {
            let h1 = random_history(&mut rng)?;
            let h2 = random_history(&mut rng)?;
            let t = h1.newest_time();
            g.apply(&h1, t, h1.newest(), &mut out)?;
            g.apply(&h2, t, h2.newest(), &mut other)?;
            let num: f64 = out.iter().zip(&other).map(|(a, b)| (a - b) * (a - b)).sum();
            let den = h1.window_distance(&h2, t, eps)?.l2_sq;
            Ok::<_, crate::error::Error>(num / den)
        })();
        match result {
            Ok(ratio) if ratio > g.c_g + 1e-12 => {
                worst = Some(format!("pair {pair}: ratio {ratio:e} > C_g = {:e}", g.c_g));
                break;
            }
            Ok(_) => {}
            Err(e) => {
                worst = Some(e.to_string());
                break;
            }
        }
    }
    (zero, worst)
}
