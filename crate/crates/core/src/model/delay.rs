//! Hereditary term `g(t, u_t)`.

use crate::error::Result;
use crate::history::DelayHistory;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DelayKind {
    /// `g = b·u(t−k)`
    Discrete,
    /// `g = (b/k)∫_{−k}^{0} u(t+θ) dθ`
    Distributed,
}

impl DelayKind {
    pub fn name(self) -> &'static str {
        match self {
            DelayKind::Discrete => "discrete",
            DelayKind::Distributed => "distributed",
        }
    }
}

impl std::str::FromStr for DelayKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "discrete" => Ok(DelayKind::Discrete),
            "distributed" => Ok(DelayKind::Distributed),
            other => Err(format!("unknown delay kind `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DelayOperator {
    pub kind: DelayKind,
    pub b: f64,
    pub k: f64,
    /// Declared Lipschitz constant.
    pub c_g: f64,
}

impl DelayOperator {
    pub fn discrete(b: f64, k: f64) -> Self {
        Self {
            kind: DelayKind::Discrete,
            b,
            k,
            c_g: b * b,
        }
    }

    pub fn distributed(b: f64, k: f64) -> Self {
        Self {
            kind: DelayKind::Distributed,
            b,
            k,
            c_g: b * b,
        }
    }

    /// Writes `g(s, u_s)` into `out`.
    ///
    /// `current` is the state at `s`; it is only read when `s` lies past the
    /// newest stored entry (inside a Runge-Kutta step) and the operator needs
    /// the tail of the window.
    pub fn apply(&self, history: &DelayHistory, s: f64, current: &[f64], out: &mut [f64]) -> Result<()> {
        if self.b == 0.0 {
            out.fill(0.0);
            return Ok(());
        }
        match self.kind {
            DelayKind::Discrete => {
                history.sample_into(s - self.k, out)?;
                for o in out.iter_mut() {
                    *o *= self.b;
                }
            }
            DelayKind::Distributed => {
                let newest = history.newest_time();
                let tol = 1e-9 * history.dt();
                out.fill(0.0);
                if s <= newest + tol {
                    integrate_stored(history, s - self.k, s.min(newest), out)?;
                } else {
                    integrate_stored(history, s - self.k, newest, out)?;
                    let half = 0.5 * (s - newest);
                    for ((o, a), c) in out.iter_mut().zip(history.newest()).zip(current) {
                        *o += half * (a + c);
                    }
                }
                let scale = self.b / self.k;
                for o in out.iter_mut() {
                    *o *= scale;
                }
            }
        }
        Ok(())
    }
}

// Trapezoid rule over [a, b] through the stored nodes, interpolated ends.
fn integrate_stored(history: &DelayHistory, a: f64, b: f64, out: &mut [f64]) -> Result<()> {
    if b <= a {
        return Ok(());
    }
    let dt = history.dt();
    let tol = 1e-9 * dt;
    let len = out.len();
    let mut prev = vec![0.0; len];
    history.sample_into(a, &mut prev)?;
    let mut prev_t = a;
    let mut next = vec![0.0; len];
    for (t, c) in history.iter() {
        if t <= a + tol || t >= b - tol {
            continue;
        }
        let w = 0.5 * (t - prev_t);
        for ((o, p), x) in out.iter_mut().zip(&prev).zip(c) {
            *o += w * (p + x);
        }
        prev.copy_from_slice(c);
        prev_t = t;
    }
    history.sample_into(b, &mut next)?;
    let w = 0.5 * (b - prev_t);
    for ((o, p), x) in out.iter_mut().zip(&prev).zip(&next) {
        *o += w * (p + x);
    }
    Ok(())
}
