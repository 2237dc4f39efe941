use crate::bounds::{
    beta_feasible, linear_fit, regularity_envelopes, regularity_rate_max, DecayFit, RegularityEnvelopes,
};
use crate::error::Result;
use crate::history::PhiGenerator;
use crate::model::{Forcing, ModelSpec};
use crate::solver::{integrate_coupled, Coupling, RunParams, SystemKind, Trajectory};

use super::{completed, max_over};

/// Choice of the retained forcing `h̃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HTilde {
    /// `h̃ = h`, so `r₁ = 0`.
    Identity,
    /// Modes of `h` with `λ ≤ cutoff`.
    Lowpass(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityParams {
    pub tau: f64,
    pub horizon: f64,
    pub dt: f64,
    pub htilde: HTilde,
    /// `(r̃₁, r̃₂)`; both default to the largest admissible rate.
    pub rates: Option<(f64, f64)>,
    pub window_start: f64,
}

impl RegularityParams {
    pub fn new(spec: &ModelSpec) -> Self {
        Self {
            tau: 0.0,
            horizon: 20.0,
            dt: 1e-3,
            htilde: HTilde::Identity,
            rates: None,
            window_start: 5.0 * spec.delay.k,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RegularityReport {
    pub trajectory: Trajectory,
    /// `sup_t ‖h − h̃‖²` over the run.
    pub r1_sq: f64,
    pub envelopes: RegularityEnvelopes,
    /// `‖u_t‖²_{C_{H¹_t}}` per snapshot.
    pub measured: Vec<f64>,
    /// Sup of `measured` on the post-transient window.
    pub post_sup: f64,
    /// `max measured/K̄` on the post-transient window.
    pub worst_ratio: f64,
    /// Maximum of `measured` over the last quarter.
    pub last_quarter_max: f64,
    /// Maximum of `measured` over the third quarter.
    pub previous_quarter_max: f64,
    pub max_defect: f64,
    /// Log-linear fit of `‖u¹_t‖²_{C_{H¹_t}}` on the post-transient window.
    pub u1_decay: DecayFit,
}

impl RegularityReport {
    pub fn bound_holds(&self) -> bool {
        self.worst_ratio <= 1.0
    }

    pub fn growth_ratio(&self) -> f64 {
        if self.previous_quarter_max > 0.0 {
            self.last_quarter_max / self.previous_quarter_max
        } else {
            0.0
        }
    }

    pub fn no_growth(&self) -> bool {
        self.growth_ratio() <= 1.02
    }

    pub fn additivity_ok(&self) -> bool {
        self.max_defect <= 1e-10
    }

    pub fn passed(&self) -> bool {
        self.bound_holds() && self.no_growth() && self.additivity_ok()
    }
}

/// Integrates `(u, u¹, u²)` jointly and compares `u` with `K̄`.
pub fn run_regularity(spec: &ModelSpec, phi: &PhiGenerator, params: &RegularityParams) -> Result<RegularityReport> {
    let (retained, dropped) = match params.htilde {
        HTilde::Identity => (spec.forcing.clone(), Forcing::zero()),
        HTilde::Lowpass(cutoff) => spec.forcing.split_lowpass(&spec.basis, cutoff),
    };
    let run = RunParams::new(params.tau, params.tau + params.horizon, params.dt);
    let coupling = Coupling::Regularity {
        htilde: retained.clone(),
    };
    let traj = completed(integrate_coupled(spec, phi, &coupling, &run)?)?;

    let times = traj.snapshot_times().to_vec();
    let r1_sq = times.iter().map(|&t| dropped.norm_sq(t)).fold(0.0, f64::max);
    let top = regularity_rate_max(spec);
    let rates = params.rates.unwrap_or((top, top));
    let choice = beta_feasible(spec, 0.5 * spec.lambda1())?;
    let envelopes = regularity_envelopes(spec, &traj, r1_sq, &retained, rates, &choice)?;

    let full = traj.component(SystemKind::Full).expect("regularity layout");
    let series = traj.window_series(full);
    let measured: Vec<f64> = (0..series.len()).map(|i| series.h1t(i)).collect();
    let (tau, h) = (params.tau, params.horizon);
    let post = tau + params.window_start;
    let mut post_sup: f64 = 0.0;
    let mut worst: f64 = 0.0;
    for (i, &t) in times.iter().enumerate() {
        if t >= post - 1e-9 {
            post_sup = post_sup.max(measured[i]);
            worst = worst.max(measured[i] / envelopes.kbar[i]);
        }
    }
    let last_quarter_max = max_over(&times, &measured, tau + 0.75 * h, tau + h);
    let previous_quarter_max = max_over(&times, &measured, tau + 0.5 * h, tau + 0.75 * h);

    let u1 = traj.component(SystemKind::U1Reg).expect("regularity layout");
    let u1_series = traj.window_series(u1);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, &t) in times.iter().enumerate() {
        if t >= post - 1e-9 {
            xs.push(t - tau);
            ys.push(u1_series.h1t(i).max(1e-300).ln());
        }
    }
    let trivial = (0..u1_series.len()).all(|i| u1_series.h1t(i) == 0.0);
    let u1_decay = if trivial {
        DecayFit {
            rate: f64::INFINITY,
            prefactor: 0.0,
            r_squared: 1.0,
            trivial: true,
        }
    } else {
        let (slope, intercept, r2) = linear_fit(&xs, &ys);
        DecayFit {
            rate: -slope,
            prefactor: intercept.exp(),
            r_squared: r2,
            trivial: false,
        }
    };

    Ok(RegularityReport {
        max_defect: traj.max_defect(),
        trajectory: traj,
        r1_sq,
        envelopes,
        measured,
        post_sup,
        worst_ratio: worst,
        last_quarter_max,
        previous_quarter_max,
        u1_decay,
    })
}
