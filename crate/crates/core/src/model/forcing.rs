//! Closed-form external forcing `h(t)`.

use std::sync::Arc;

use crate::spectral::EigenBasis;

/// One forced mode: `h_i(t) = offset + amplitude·cos(ω t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForcedMode {
    pub index: usize,
    pub offset: f64,
    pub amplitude: f64,
    pub omega: f64,
}

impl ForcedMode {
    pub fn value(&self, t: f64) -> f64 {
        if self.amplitude == 0.0 {
            self.offset
        } else {
            self.offset + self.amplitude * (self.omega * t).cos()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Forcing {
    pub modes: Vec<ForcedMode>,
}

impl Forcing {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `A·cos(ωt)` plus offset 0.5 on the lowest mode, and offset 0.25 on the
    /// mode with wavenumber 2 along the last two axes (when it is retained).
    pub fn standard(basis: &EigenBasis, amplitude: f64, omega: f64) -> Self {
        let n = basis.dim();
        let mut modes = vec![ForcedMode {
            index: 0,
            offset: 0.5,
            amplitude,
            omega,
        }];
        let mut multi = vec![1; n];
        for k in multi.iter_mut().skip(n.saturating_sub(2)) {
            *k = 2;
        }
        if let Some(index) = basis.mode_index(&multi) {
            modes.push(ForcedMode {
                index,
                offset: 0.25,
                amplitude: 0.0,
                omega,
            });
        }
        Self { modes }
    }

    pub fn is_zero(&self) -> bool {
        self.modes.iter().all(|m| m.offset == 0.0 && m.amplitude == 0.0)
    }

    /// Writes `h(t)` into a coefficient buffer (other entries zeroed).
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        out.fill(0.0);
        for m in &self.modes {
            out[m.index] += m.value(t);
        }
    }

    pub fn eval(&self, basis: &EigenBasis, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; basis.len()];
        self.eval_into(t, &mut out);
        out
    }

    /// `‖h(t)‖²`.
    pub fn norm_sq(&self, t: f64) -> f64 {
        // modes may repeat an index, so accumulate per index first
        let mut acc: Vec<(usize, f64)> = Vec::with_capacity(self.modes.len());
        for m in &self.modes {
            match acc.iter_mut().find(|(i, _)| *i == m.index) {
                Some((_, v)) => *v += m.value(t),
                None => acc.push((m.index, m.value(t))),
            }
        }
        acc.iter().fold(0.0, |s, (_, v)| s + v * v)
    }

    /// Splits into the modes with `λ ≤ cutoff` and the remainder.
    pub fn split_lowpass(&self, basis: &Arc<EigenBasis>, cutoff: f64) -> (Forcing, Forcing) {
        let (low, high) = self
            .modes
            .iter()
            .cloned()
            .partition(|m| basis.eigenvalues()[m.index] <= cutoff);
        (Forcing { modes: low }, Forcing { modes: high })
    }

    /// Estimate of `sup_t ∫_t^{t+1} ‖h(s)‖² ds` over `t ∈ [from, to]` by
    /// trapezoid sums on a grid of `1/samples_per_unit`.
    pub fn translation_bound(&self, from: f64, to: f64, samples_per_unit: usize) -> f64 {
        let per = samples_per_unit.max(1);
        let h = 1.0 / per as f64;
        let total = ((to - from + 1.0) * per as f64).round() as usize;
        let values: Vec<f64> = (0..=total).map(|i| self.norm_sq(from + i as f64 * h)).collect();
        let windows = total - per;
        let mut window: f64 = h * (values[..=per].iter().sum::<f64>() - 0.5 * (values[0] + values[per]));
        let mut best = window;
        for start in 1..=windows {
            let end = start + per;
            window += 0.5 * h * (values[end] + values[end - 1] - values[start] - values[start - 1]);
            best = best.max(window);
        }
        best
    }
}
