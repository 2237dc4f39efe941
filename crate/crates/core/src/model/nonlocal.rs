//! Saturating diffusion coefficient driven by a linear functional of the state.

use std::sync::Arc;

use crate::error::Result;
use crate::spectral::{dot, EigenBasis, SpectralField};

/// `a(s) = a_lo + (a_hi − a_lo)·s²/(1+s²)` with `s = l(u) = (weight, u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlocalCoefficient {
    pub a_lo: f64,
    pub a_hi: f64,
    /// Declared lower bound `m`.
    pub m: f64,
    /// Declared upper bound `M`.
    pub big_m: f64,
    pub weight: SpectralField,
}

impl NonlocalCoefficient {
    /// Weight on the first mode, so `l(u)` is the leading coefficient.
    pub fn with_first_mode(basis: &Arc<EigenBasis>, a_lo: f64, a_hi: f64) -> Self {
        Self {
            a_lo,
            a_hi,
            m: a_lo,
            big_m: a_hi,
            weight: SpectralField::single_mode(basis, 0, 1.0),
        }
    }

    /// `a ≡ value` regardless of the state.
    pub fn constant(basis: &Arc<EigenBasis>, value: f64) -> Self {
        Self::with_first_mode(basis, value, value)
    }

    pub fn a_of(&self, s: f64) -> f64 {
        let s2 = s * s;
        if !s2.is_finite() {
            return self.a_hi;
        }
        self.a_lo + (self.a_hi - self.a_lo) * (s2 / (1.0 + s2))
    }

    /// `l(u)` for a raw coefficient vector in the weight's basis.
    pub fn functional(&self, coeffs: &[f64]) -> f64 {
        dot(self.weight.coeffs(), coeffs)
    }

    pub fn a_of_coeffs(&self, coeffs: &[f64]) -> f64 {
        self.a_of(self.functional(coeffs))
    }
}

/// Evaluates `a(l(u))`.
pub fn a_eval(coef: &NonlocalCoefficient, u: &SpectralField) -> Result<f64> {
    Ok(coef.a_of(coef.weight.inner_product(u)?))
}
