//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every key is optional; the
//! defaults of the model-coefficient keys follow `epsilon.kind`.

use std::collections::BTreeMap;
use std::path::Path;

use attractorlab::bounds::sigma_range;
use attractorlab::history::PhiGenerator;
use attractorlab::model::{DelayKind, DelayOperator, EpsilonKind, EpsilonProfile, Forcing, ModelSpec};
use attractorlab::spectral::build_basis;
use thiserror::Error;

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "n",
    "kmax",
    "grid",
    "dt",
    "tau",
    "t_end",
    "seed",
    "epsilon.kind",
    "epsilon.alpha",
    "epsilon.L",
    "a.lo",
    "a.hi",
    "a.m",
    "a.M",
    "f.kappa",
    "f.gamma",
    "delay.kind",
    "delay.b",
    "delay.k",
    "forcing.amplitude",
    "forcing.omega",
    "sigma",
    "skip_validation",
    "phi.kind",
    "phi.norm_sq",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Model(#[from] attractorlab::Error),
}

fn line_err(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Line {
        line,
        message: message.into(),
    }
}

/// Initial-history family selected by `phi.kind`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhiKind {
    Random,
    Zero,
    /// Constant history on the lowest mode.
    Mode,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub spec: ModelSpec,
    pub dt: f64,
    pub tau: f64,
    pub t_end: f64,
    pub seed: u64,
    pub sigma: f64,
    pub phi_kind: PhiKind,
    pub phi_norm_sq: Option<f64>,
    /// Non-fatal adjustments made while resolving, such as a changed `dt`.
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn phi(&self) -> PhiGenerator {
        match (self.phi_kind, self.phi_norm_sq) {
            (PhiKind::Zero, _) => PhiGenerator::Zero,
            (PhiKind::Random, None) => PhiGenerator::random(self.seed),
            (PhiKind::Random, Some(v)) => PhiGenerator::random_with_norm_sq(self.seed, v),
            (PhiKind::Mode, v) => PhiGenerator::single_mode(&self.spec.basis, 0, v.unwrap_or(4.0).sqrt()),
        }
    }

    pub fn horizon(&self) -> f64 {
        self.t_end - self.tau
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config_str("").expect("defaults resolve")
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

struct Entries(BTreeMap<&'static str, (usize, String)>);

impl Entries {
    fn opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.0.get(key) {
            None => Ok(None),
            Some((line, raw)) => raw
                .parse()
                .map(Some)
                .map_err(|_| line_err(*line, format!("cannot parse `{raw}` as a value for `{key}`"))),
        }
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.opt(key)?.unwrap_or(default))
    }

    fn line(&self, key: &str) -> usize {
        self.0.get(key).map_or(0, |e| e.0)
    }
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| line_err(line, format!("expected `key = value`, found `{content}`")))?;
        let key = key.trim();
        let known = KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| line_err(line, format!("unknown key `{key}`")))?;
        if map.insert(*known, (line, value.trim().to_string())).is_some() {
            return Err(line_err(line, format!("duplicate key `{key}`")));
        }
    }
    resolve(&Entries(map))
}

fn resolve(e: &Entries) -> Result<RunConfig, ConfigError> {
    let n: usize = e.get("n", 3)?;
    let kmax: usize = e.get("kmax", 2)?;
    let grid: usize = e.get("grid", 4 * kmax)?;
    let basis =
        build_basis(n, kmax, grid).map_err(|err| line_err(e.line("grid").max(e.line("kmax")), err.to_string()))?;

    let kind: EpsilonKind = match e.0.get("epsilon.kind") {
        None => EpsilonKind::Decreasing,
        Some((line, raw)) => raw.parse().map_err(|msg: String| line_err(*line, msg))?,
    };
    let mut spec = ModelSpec::scenario(kind, &basis);
    spec.epsilon = EpsilonProfile {
        alpha: e.get("epsilon.alpha", spec.epsilon.alpha)?,
        bound_l: e.get("epsilon.L", spec.epsilon.bound_l)?,
        ..spec.epsilon
    };

    let nl = &mut spec.nonlocal;
    nl.a_lo = e.get("a.lo", nl.a_lo)?;
    nl.a_hi = e.get("a.hi", nl.a_hi)?;
    nl.m = e.get("a.m", nl.m)?;
    nl.big_m = e.get("a.M", nl.big_m)?;
    if nl.a_lo > nl.a_hi {
        let line = e.line("a.lo").max(e.line("a.hi"));
        return Err(line_err(line, format!("a.lo = {} exceeds a.hi = {}", nl.a_lo, nl.a_hi)));
    }
    if !(nl.m > 0.0) {
        return Err(line_err(e.line("a.m"), format!("a.m = {} must be positive", nl.m)));
    }
    if nl.m > nl.big_m {
        let line = e.line("a.m").max(e.line("a.M"));
        return Err(line_err(line, format!("a.m = {} exceeds a.M = {}", nl.m, nl.big_m)));
    }

    spec.nonlinearity.kappa = e.get("f.kappa", spec.nonlinearity.kappa)?;
    spec.nonlinearity.gamma = e.get("f.gamma", spec.nonlinearity.gamma)?;

    let delay_kind: DelayKind = match e.0.get("delay.kind") {
        None => DelayKind::Discrete,
        Some((line, raw)) => raw.parse().map_err(|msg: String| line_err(*line, msg))?,
    };
    let b: f64 = e.get("delay.b", spec.delay.b)?;
    let k: f64 = e.get("delay.k", spec.delay.k)?;
    if !(k > 0.0 && k.is_finite()) {
        return Err(line_err(e.line("delay.k"), format!("delay.k = {k} must be positive")));
    }
    spec.delay = match delay_kind {
        DelayKind::Discrete => DelayOperator::discrete(b, k),
        DelayKind::Distributed => DelayOperator::distributed(b, k),
    };
    spec.forcing = Forcing::standard(&basis, e.get("forcing.amplitude", 1.0)?, e.get("forcing.omega", 2.0)?);
    spec.skip_validation = e.get("skip_validation", false)?;

    let mut warnings = Vec::new();
    let dt_in: f64 = e.get("dt", 1e-3)?;
    if !(dt_in > 0.0 && dt_in.is_finite()) {
        return Err(line_err(e.line("dt"), format!("dt = {dt_in} must be positive")));
    }
    let dt = adjust_dt(dt_in, k);
    if dt != dt_in {
        warnings.push(format!(
            "warning: dt = {dt_in} does not divide delay.k = {k}; using dt = {dt} ({} steps per delay)",
            (k / dt).round()
        ));
    }
    let tau: f64 = e.get("tau", 0.0)?;
    let t_end: f64 = e.get("t_end", 20.0)?;
    if !(t_end > tau) {
        return Err(line_err(e.line("t_end").max(e.line("tau")), "t_end must exceed tau"));
    }
    let default_sigma = sigma_range(n, spec.nonlinearity.gamma).map_or(1.0 / 6.0, |r| r.midpoint());
    let phi_kind = match e.0.get("phi.kind").map(|(l, s)| (*l, s.as_str())) {
        None | Some((_, "random")) => PhiKind::Random,
        Some((_, "zero")) => PhiKind::Zero,
        Some((_, "mode")) => PhiKind::Mode,
        Some((line, other)) => return Err(line_err(line, format!("unknown phi.kind `{other}`"))),
    };
    Ok(RunConfig {
        spec,
        dt,
        tau,
        t_end,
        seed: e.get("seed", 0)?,
        sigma: e.get("sigma", default_sigma)?,
        phi_kind,
        phi_norm_sq: e.opt("phi.norm_sq")?,
        warnings,
    })
}

/// Largest step `≤ dt` with at most two significant digits that divides
/// `k` into a whole number of steps. `dt` is kept when it already divides `k`.
pub fn adjust_dt(dt: f64, k: f64) -> f64 {
    let divides = |d: f64| {
        let r = k / d;
        (r - r.round()).abs() <= 1e-9 * r.max(1.0)
    };
    if divides(dt) {
        return dt;
    }
    let first = (k / dt).ceil() as u64;
    for steps in first..first.saturating_mul(100).max(first + 1) {
        let d = k / steps as f64;
        let scale = 10f64.powi(1 - d.log10().floor() as i32);
        let mantissa = d * scale;
        if (mantissa - mantissa.round()).abs() <= 1e-9 * mantissa {
            return mantissa.round() / scale;
        }
    }
    k / first as f64
}
