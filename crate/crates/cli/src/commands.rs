//! One function per subcommand. Each returns its report, the files to write,
//! and the data for the optional plot; nothing here touches the filesystem.

use std::fmt::Write as _;

use attractorlab::bounds::{
    absorbing_bound_check, absorbing_radius, beta_feasible, bounds_report, energy_identity_residual, BetaChoice,
};
use attractorlab::experiments::{
    default_phi_set, run_decomposition, run_dependence, run_pullback, run_regularity, run_sweep, DecompositionParams,
    DependenceParams, HTilde, PullbackParams, RegularityParams, SweepParam,
};
use attractorlab::solver::{integrate, RunParams, RunStatus, SystemKind, Trajectory};

use crate::config::RunConfig;
use crate::output::{csv_series, line_plot, trajectory_csv, Report, Series};
use crate::{CliError, Command};

/// What a plot of this outcome shows.
#[derive(Clone, Debug)]
pub enum PlotData {
    /// Columns of `trajectory.csv`, with the columns used when none are requested.
    Trajectory { defaults: Vec<&'static str> },
    Fixed {
        title: String,
        x_label: String,
        series: Vec<Series>,
    },
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    /// `(file name, contents)` besides `report.txt`.
    pub files: Vec<(String, String)>,
    pub plot: PlotData,
}

impl Outcome {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    /// Renders `plot.svg`. Column selection only applies to trajectory plots.
    pub fn plot(&self, columns: &[&str], log_y: bool) -> Result<String, String> {
        match &self.plot {
            PlotData::Trajectory { defaults } => {
                let csv = self.file("trajectory.csv").ok_or("no trajectory was written")?;
                let cols = if columns.is_empty() {
                    defaults.as_slice()
                } else {
                    columns
                };
                Ok(line_plot("trajectory", "t", &csv_series(csv, cols)?, log_y))
            }
            PlotData::Fixed { title, x_label, series } => {
                if !columns.is_empty() {
                    return Err("--columns only applies to trajectory plots".into());
                }
                Ok(line_plot(title, x_label, series, log_y))
            }
        }
    }
}

pub fn run_command(cfg: &RunConfig, command: &Command) -> Result<Outcome, CliError> {
    let mut report = Report::new();
    report
        .value("command", command.name())
        .value("n", cfg.spec.basis.dim())
        .value("kmax", cfg.spec.basis.kmax())
        .value("modes", cfg.spec.basis.len())
        .value("grid", cfg.spec.basis.grid_size())
        .value("dt", cfg.dt)
        .value("tau", cfg.tau)
        .value("t_end", cfg.t_end)
        .value("seed", cfg.seed);
    match command {
        Command::Simulate => simulate(cfg, report),
        Command::VerifyBounds => verify_bounds(cfg, report),
        Command::Decompose { window_start } => decompose(cfg, report, *window_start),
        Command::Regularity { lowpass, window_start } => regularity(cfg, report, *lowpass, *window_start),
        Command::Pullback { taus, t_star } => pullback(cfg, report, taus, *t_star),
        Command::Depend { sizes, t_star } => depend(cfg, report, sizes, *t_star),
        Command::Sweep { param, values } => sweep(cfg, report, param, values),
    }
}

fn run_params(cfg: &RunConfig) -> RunParams {
    RunParams::new(cfg.tau, cfg.t_end, cfg.dt).with_sigma(cfg.sigma)
}

fn feasible_choice(cfg: &RunConfig) -> Option<BetaChoice> {
    beta_feasible(&cfg.spec, 0.5 * cfg.spec.lambda1()).ok()
}

/// `R₀²` per snapshot when a positive decay rate exists.
fn radius(cfg: &RunConfig, traj: &Trajectory, choice: Option<&BetaChoice>) -> Option<Vec<f64>> {
    let choice = choice?;
    let full = traj.component(SystemKind::Full)?;
    let initial = traj.window_series(full).ht(0);
    absorbing_radius(
        &cfg.spec,
        initial,
        traj.params.tau,
        traj.params.dt,
        traj.snapshots(),
        choice,
    )
    .ok()
}

fn status_line(report: &mut Report, traj: &Trajectory) {
    match traj.status {
        RunStatus::Completed => report.value("status", "completed"),
        RunStatus::AbortedBlowup { step, time } => {
            report.value("status", format!("aborted at step {step} (t = {time})"))
        }
    };
    report.verdict("run_completed", traj.status == RunStatus::Completed);
}

const TRAJECTORY_PLOT: &[&str] = &["ht_norm_sq", "delay_sup_sq", "bound_R0_sq"];

fn trajectory_outcome(report: Report, traj: &Trajectory, component: usize, bound: Option<&[f64]>) -> Outcome {
    Outcome {
        report,
        files: vec![("trajectory.csv".into(), trajectory_csv(traj, component, bound))],
        plot: PlotData::Trajectory {
            defaults: TRAJECTORY_PLOT.to_vec(),
        },
    }
}

fn simulate(cfg: &RunConfig, mut report: Report) -> Result<Outcome, CliError> {
    let traj = integrate(&cfg.spec, &cfg.phi(), &run_params(cfg))?;
    let choice = feasible_choice(cfg);
    let bound = radius(cfg, &traj, choice.as_ref());
    status_line(&mut report, &traj);
    report.value("snapshots", traj.snapshots());
    let series = traj.window_series(0);
    let last = traj.snapshots() - 1;
    report
        .value("initial_delay_sup_sq", series.ht(0))
        .value("final_ht_norm_sq", traj.norms_at(0, last).ht_sq)
        .value("final_delay_sup_sq", series.ht(last));
    if let Some(b) = &bound {
        report.value("final_bound_R0_sq", b[last]);
    }
    Ok(trajectory_outcome(report, &traj, 0, bound.as_deref()))
}

fn verify_bounds(cfg: &RunConfig, mut report: Report) -> Result<Outcome, CliError> {
    let spec = &cfg.spec;
    let validation = spec.validate();
    for check in &validation.checks {
        report.value(
            format!("check.{}", check.name),
            if check.passed { "pass" } else { "fail" },
        );
    }
    if !spec.skip_validation {
        report.verdict("model_valid", validation.passed());
    }
    let bounds = bounds_report(spec);
    let choice = bounds.as_ref().ok().map(|b| b.choice);
    match &bounds {
        Ok(b) => {
            report
                .value("lambda1", b.lambda1)
                .value("absorbing_threshold", b.threshold)
                .value("delta", b.choice.delta)
                .value("delta_bar", b.choice.delta_bar)
                .value("beta_max", b.choice.beta_max)
                .value("beta", b.choice.beta)
                .value("beta1", b.choice.beta1)
                .value("prefactor_P", b.prefactor)
                .value("sigma_max", b.sigma.map_or(f64::NAN, |s| s.max))
                .value("regularity_rate_max", b.regularity_rate_max);
            report.verdict("beta1_positive", b.choice.beta1 > 0.0);
            report.verdict("prefactor_is_two", (b.prefactor - 2.0).abs() <= 1e-12);
        }
        Err(e) => {
            report.value("bounds_error", e);
            report.verdict("beta1_positive", false);
        }
    }
    let traj = integrate(spec, &cfg.phi(), &run_params(cfg))?;
    status_line(&mut report, &traj);
    if traj.status == RunStatus::Completed {
        let residual = energy_identity_residual(&traj, cfg.tau, cfg.t_end)?;
        report.value("energy_identity_residual", residual);
        report.verdict("energy_identity_closes", residual <= 1e-5);
    }
    if let Some(c) = &choice {
        let check = absorbing_bound_check(spec, &traj, c, 1e-6)?;
        report.value("absorbing_worst_ratio", check.worst_ratio);
        report.verdict("absorbing_bound_holds", check.holds);
    }
    let bound = radius(cfg, &traj, choice.as_ref());
    Ok(trajectory_outcome(report, &traj, 0, bound.as_deref()))
}

fn decompose(cfg: &RunConfig, mut report: Report, window_start: Option<f64>) -> Result<Outcome, CliError> {
    let mut params = DecompositionParams::new(&cfg.spec);
    params.tau = cfg.tau;
    params.horizon = cfg.horizon();
    params.dt = cfg.dt;
    params.sigma = cfg.sigma;
    if let Some(w) = window_start {
        params.window_start = w;
    }
    let r = run_decomposition(&cfg.spec, &cfg.phi(), &params)?;
    report
        .value("sigma", params.sigma)
        .value("window_start", params.window_start)
        .value("max_additivity_defect", r.max_defect)
        .value("v1_decay_rate", r.decay.rate)
        .value("v1_decay_prefactor", r.decay.prefactor)
        .value("v1_decay_r_squared", r.decay.r_squared)
        .value("v1_trivial", r.decay.trivial)
        .value("v2_fractional_sup", r.v2_sup)
        .value("v2_fractional_mid_max", r.v2_mid_max)
        .value("v2_fractional_last_max", r.v2_last_max)
        .value("v2_plateau_ratio", r.plateau_ratio())
        .value("xi", r.xi)
        .value("c_xi", r.c_xi)
        .value("j_xi", r.j_xi);
    report
        .verdict("additivity", r.additivity_ok())
        .verdict("v1_decay", r.decay_ok())
        .verdict("v2_plateau", r.plateau_ok());
    let traj = &r.trajectory;
    let choice = feasible_choice(cfg);
    let bound = radius(cfg, traj, choice.as_ref());
    let mut out = trajectory_outcome(report, traj, 0, bound.as_deref());
    let v1 = traj.component(SystemKind::V1Split).expect("decomposition layout");
    let v1_series = traj.window_series(v1);
    let times = traj.snapshot_times();
    let mut csv = String::from("t, v1_delay_sup_sq, v2_fractional, dissipation_integral\n");
    for (i, t) in times.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{t:.15e}, {:.15e}, {:.15e}, {:.15e}",
            v1_series.ht(i),
            r.v2_fractional[i],
            r.dissipation_integral[i]
        );
    }
    out.files.push(("decomposition.csv".into(), csv));
    out.plot = PlotData::Fixed {
        title: "decomposition".into(),
        x_label: "t".into(),
        series: vec![
            Series {
                name: "v1 delay-window H_t norm²".into(),
                points: times.iter().enumerate().map(|(i, &t)| (t, v1_series.ht(i))).collect(),
            },
            Series {
                name: "v2 fractional norm²".into(),
                points: times.iter().copied().zip(r.v2_fractional.iter().copied()).collect(),
            },
        ],
    };
    Ok(out)
}

fn regularity(
    cfg: &RunConfig,
    mut report: Report,
    lowpass: Option<f64>,
    window_start: Option<f64>,
) -> Result<Outcome, CliError> {
    let mut params = RegularityParams::new(&cfg.spec);
    params.tau = cfg.tau;
    params.horizon = cfg.horizon();
    params.dt = cfg.dt;
    params.htilde = lowpass.map_or(HTilde::Identity, HTilde::Lowpass);
    if let Some(w) = window_start {
        params.window_start = w;
    }
    let r = run_regularity(&cfg.spec, &cfg.phi(), &params)?;
    let last = r.measured.len() - 1;
    report
        .value(
            "htilde",
            lowpass.map_or("identity".to_string(), |c| format!("lowpass {c}")),
        )
        .value("r1_sq", r.r1_sq)
        .value("rate1", r.envelopes.rate1)
        .value("rate2", r.envelopes.rate2)
        .value("window_start", params.window_start)
        .value("post_transient_sup", r.post_sup)
        .value("final_k1", r.envelopes.k1[last])
        .value("final_k2", r.envelopes.k2[last])
        .value("final_kbar", r.envelopes.kbar[last])
        .value("worst_ratio", r.worst_ratio)
        .value("growth_ratio", r.growth_ratio())
        .value("max_additivity_defect", r.max_defect)
        .value("u1_decay_rate", r.u1_decay.rate)
        .value("u1_decay_r_squared", r.u1_decay.r_squared);
    report
        .verdict("kbar_bound_holds", r.bound_holds())
        .verdict("no_growth", r.no_growth())
        .verdict("additivity", r.additivity_ok());
    let traj = &r.trajectory;
    let times = traj.snapshot_times();
    let mut out = trajectory_outcome(report, traj, 0, None);
    out.plot = PlotData::Fixed {
        title: "regularity".into(),
        x_label: "t".into(),
        series: vec![
            Series {
                name: "delay-window H¹_t norm²".into(),
                points: times.iter().copied().zip(r.measured.iter().copied()).collect(),
            },
            Series {
                name: "envelope".into(),
                points: times.iter().copied().zip(r.envelopes.kbar.iter().copied()).collect(),
            },
        ],
    };
    Ok(out)
}

fn pullback(cfg: &RunConfig, mut report: Report, taus: &[f64], t_star: f64) -> Result<Outcome, CliError> {
    let params = PullbackParams {
        t_star,
        taus: taus.to_vec(),
        dt: cfg.dt,
        phis: default_phi_set(&cfg.spec, cfg.seed),
    };
    let r = run_pullback(&cfg.spec, &params)?;
    report
        .value("t_star", r.t_star)
        .value("reference_tau", r.reference_tau)
        .list("taus", taus)
        .list("diameters", &r.diameters())
        .value("contraction", r.contraction());
    report
        .verdict("diameters_strictly_decreasing", r.strictly_decreasing())
        .verdict("contraction_below_1e-3", r.contraction() <= 1e-3);
    let np = params.phis.len();
    let mut csv = String::from("tau, diameter");
    for i in 0..np {
        let _ = write!(csv, ", to_reference_{i}");
    }
    csv.push('\n');
    for row in &r.rows {
        let _ = write!(csv, "{:.15e}, {:.15e}", row.tau, row.diameter);
        for d in &row.to_reference {
            let _ = write!(csv, ", {d:.15e}");
        }
        csv.push('\n');
    }
    Ok(Outcome {
        report,
        files: vec![("pullback.csv".into(), csv)],
        plot: PlotData::Fixed {
            title: "pullback diameters".into(),
            x_label: "start time".into(),
            series: vec![Series {
                name: "diameter".into(),
                points: r.rows.iter().map(|row| (row.tau, row.diameter)).collect(),
            }],
        },
    })
}

fn depend(cfg: &RunConfig, mut report: Report, sizes: &[f64], t_star: Option<f64>) -> Result<Outcome, CliError> {
    let params = DependenceParams {
        tau: cfg.tau,
        t_star: t_star.unwrap_or(cfg.tau + 5.0),
        dt: cfg.dt,
        sizes: sizes.to_vec(),
        seed: cfg.seed.wrapping_add(1),
    };
    let r = run_dependence(&cfg.spec, &cfg.phi(), &params)?;
    report
        .value("t_star", r.t_star)
        .list("d0", &r.rows.iter().map(|x| x.d0).collect::<Vec<_>>())
        .list("d_final", &r.rows.iter().map(|x| x.d_final).collect::<Vec<_>>())
        .list("scaling_ratios", &r.scaling_ratios())
        .value("c_fit", r.c_fit);
    report
        .verdict("linear_within_10pct", r.linear_within(0.1))
        .verdict("c_fit_finite", r.c_fit.is_finite() && r.c_fit >= 0.0);
    let mut csv = String::from("d0, d_final, gain\n");
    for row in &r.rows {
        let _ = writeln!(
            csv,
            "{:.15e}, {:.15e}, {:.15e}",
            row.d0,
            row.d_final,
            row.d_final / row.d0
        );
    }
    Ok(Outcome {
        report,
        files: vec![("dependence.csv".into(), csv)],
        plot: PlotData::Fixed {
            title: "continuous dependence".into(),
            x_label: "initial distance".into(),
            series: vec![Series {
                name: "distance at t*".into(),
                points: r.rows.iter().map(|row| (row.d0, row.d_final)).collect(),
            }],
        },
    })
}

fn sweep(cfg: &RunConfig, mut report: Report, param: &str, values: &[f64]) -> Result<Outcome, CliError> {
    let p: SweepParam = param.parse()?;
    let rows = run_sweep(&cfg.spec, p, values, &cfg.phi(), &run_params(cfg));
    report.value("param", p.name()).list("values", values);
    let mut csv = String::from("value, status, beta, beta1, terminal_energy, max_energy\n");
    let nan = f64::NAN;
    for (i, row) in rows.iter().enumerate() {
        let status = if row.validation_failed() {
            format!("validation-failed ({})", row.validation_failures.join(" "))
        } else if let Some(e) = &row.error {
            format!("error ({e})")
        } else {
            "ok".into()
        };
        report
            .value(format!("row.{i}.value"), row.value)
            .value(format!("row.{i}.status"), &status);
        if let Some(c) = row.choice {
            report
                .value(format!("row.{i}.beta"), c.beta)
                .value(format!("row.{i}.beta1"), c.beta1);
        }
        if let Some(e) = row.terminal_energy {
            report.value(format!("row.{i}.terminal_energy"), e);
        }
        let _ = writeln!(
            csv,
            "{:.15e}, {}, {:.15e}, {:.15e}, {:.15e}, {:.15e}",
            row.value,
            status.split(' ').next().unwrap_or(""),
            row.choice.map_or(nan, |c| c.beta),
            row.choice.map_or(nan, |c| c.beta1),
            row.terminal_energy.unwrap_or(nan),
            row.max_energy.unwrap_or(nan)
        );
    }
    Ok(Outcome {
        report,
        files: vec![("sweep.csv".into(), csv)],
        plot: PlotData::Fixed {
            title: format!("sweep over {}", p.name()),
            x_label: p.name().into(),
            series: vec![Series {
                name: "terminal energy".into(),
                points: rows
                    .iter()
                    .filter_map(|r| Some((r.value, r.terminal_energy?)))
                    .collect(),
            }],
        },
    })
}
