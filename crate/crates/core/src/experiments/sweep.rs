use std::str::FromStr;

use rayon::prelude::*;

use crate::bounds::{beta_feasible, BetaChoice};
use crate::error::{Error, Result};
use crate::history::PhiGenerator;
use crate::model::{EpsilonKind, ModelSpec};
use crate::solver::{integrate, RunParams, SystemKind};

/// Sweepable model parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    /// Delay strength `b`, with `C_g = b²`.
    DelayB,
    /// Delay length `k`.
    DelayK,
    /// Lower bound `m`; also moves the floor of `a` so the bound stays sharp.
    AM,
    /// Upper bound `M`; also moves the ceiling of `a`.
    ABigM,
    /// Dissipative slope `κ` of `f`.
    FKappa,
    /// Oscillating forcing amplitude.
    ForcingAmplitude,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::DelayB => "delay.b",
            SweepParam::DelayK => "delay.k",
            SweepParam::AM => "a.m",
            SweepParam::ABigM => "a.M",
            SweepParam::FKappa => "f.kappa",
            SweepParam::ForcingAmplitude => "forcing.amplitude",
        }
    }

    /// Copy of `spec` with the parameter set to `value`.
    pub fn apply(self, spec: &ModelSpec, value: f64) -> ModelSpec {
        let mut s = spec.clone();
        match self {
            SweepParam::DelayB => {
                s.delay.b = value;
                s.delay.c_g = value * value;
            }
            SweepParam::DelayK => s.delay.k = value,
            SweepParam::AM => {
                s.nonlocal.m = value;
                s.nonlocal.a_lo = if s.epsilon.kind == EpsilonKind::Increasing {
                    value + s.epsilon.bound_l
                } else {
                    value
                };
            }
            SweepParam::ABigM => {
                s.nonlocal.big_m = value;
                s.nonlocal.a_hi = value;
            }
            SweepParam::FKappa => s.nonlinearity.kappa = value,
            SweepParam::ForcingAmplitude => {
                if let Some(mode) = s.forcing.modes.first_mut() {
                    mode.amplitude = value;
                }
            }
        }
        s
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "delay.b" | "b" => Ok(SweepParam::DelayB),
            "delay.k" | "k" => Ok(SweepParam::DelayK),
            "a.m" | "m" => Ok(SweepParam::AM),
            "a.M" | "M" => Ok(SweepParam::ABigM),
            "f.kappa" | "kappa" => Ok(SweepParam::FKappa),
            "forcing.amplitude" | "amplitude" => Ok(SweepParam::ForcingAmplitude),
            other => Err(Error::InvalidParameter(format!("unknown sweep parameter `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// Names of the violated hypotheses; no run happens when non-empty.
    pub validation_failures: Vec<String>,
    pub choice: Option<BetaChoice>,
    /// `‖u_t‖²_{C_{H_t}}` at the final time.
    pub terminal_energy: Option<f64>,
    pub max_energy: Option<f64>,
    /// Solver or bound failure, recorded instead of aborting the sweep.
    pub error: Option<String>,
}

impl SweepRow {
    pub fn validation_failed(&self) -> bool {
        !self.validation_failures.is_empty()
    }

    pub fn ok(&self) -> bool {
        !self.validation_failed() && self.error.is_none()
    }
}

/// Runs one standard trajectory per value over `[τ, τ+horizon]`.
pub fn run_sweep(
    spec: &ModelSpec,
    param: SweepParam,
    values: &[f64],
    phi: &PhiGenerator,
    run: &RunParams,
) -> Vec<SweepRow> {
    values
        .par_iter()
        .map(|&value| sweep_one(&param.apply(spec, value), value, phi, run))
        .collect()
}

fn sweep_one(spec: &ModelSpec, value: f64, phi: &PhiGenerator, run: &RunParams) -> SweepRow {
    let mut row = SweepRow {
        value,
        validation_failures: Vec::new(),
        choice: None,
        terminal_energy: None,
        max_energy: None,
        error: None,
    };
    if !spec.skip_validation {
        row.validation_failures = spec.validate().failures();
        if row.validation_failed() {
            return row;
        }
    }
    match beta_feasible(spec, 0.5 * spec.lambda1()) {
        Ok(c) => row.choice = Some(c),
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    }
    match integrate(spec, phi, run).and_then(super::completed) {
        Ok(traj) => {
            let c = traj.component(SystemKind::Full).expect("single layout");
            let series = traj.window_series(c);
            let energies: Vec<f64> = (0..series.len()).map(|i| series.ht(i)).collect();
            row.terminal_energy = energies.last().copied();
            row.max_energy = Some(energies.iter().copied().fold(0.0, f64::max));
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}
