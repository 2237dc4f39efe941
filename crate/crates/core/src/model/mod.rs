//! Model coefficients and their structural hypotheses.

mod delay;
mod epsilon;
mod forcing;
mod nonlinearity;
mod nonlocal;
mod validate;

use std::sync::Arc;

pub use delay::{DelayKind, DelayOperator};
pub use epsilon::{max_abs_over, EpsilonKind, EpsilonProfile};
pub use forcing::{ForcedMode, Forcing};
pub use nonlinearity::{critical_exponent, f0_eval, f1_eval, f_eval, NonlinearitySplit, Part};
pub use nonlocal::{a_eval, NonlocalCoefficient};
pub use validate::{validate_model, Check, ValidationReport};

use crate::error::{Error, Result};
use crate::spectral::{build_basis, EigenBasis};

/// Full parameter bundle of the equation.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub basis: Arc<EigenBasis>,
    pub epsilon: EpsilonProfile,
    pub nonlocal: NonlocalCoefficient,
    pub nonlinearity: NonlinearitySplit,
    pub delay: DelayOperator,
    pub forcing: Forcing,
    /// Lets intentionally non-conforming models through [`ModelSpec::ensure_valid`].
    pub skip_validation: bool,
}

impl ModelSpec {
    /// Default model for the given monotonicity class on an existing basis.
    pub fn scenario(kind: EpsilonKind, basis: &Arc<EigenBasis>) -> Self {
        let epsilon = EpsilonProfile::for_kind(kind);
        let nonlocal = match kind {
            EpsilonKind::Increasing => {
                let mut a = NonlocalCoefficient::with_first_mode(basis, 3.6625, 4.0);
                a.m = 2.6;
                a
            }
            _ => NonlocalCoefficient::with_first_mode(basis, 2.5, 3.0),
        };
        Self {
            basis: Arc::clone(basis),
            epsilon,
            nonlocal,
            nonlinearity: NonlinearitySplit::standard(basis.dim()),
            delay: DelayOperator::discrete(0.1, 0.5),
            forcing: Forcing::standard(basis, 1.0, 2.0),
            skip_validation: false,
        }
    }

    /// Decreasing-profile defaults with the de-aliased grid `G = 4·kmax`.
    pub fn default_model(n: usize, kmax: usize) -> Result<Self> {
        let basis = build_basis(n, kmax, 4 * kmax)?;
        Ok(Self::scenario(EpsilonKind::Decreasing, &basis))
    }

    /// `f = g = h = 0`, constant `ε` and `a`; validation skipped.
    pub fn linear(basis: &Arc<EigenBasis>, eps: f64, a: f64) -> Self {
        Self {
            basis: Arc::clone(basis),
            epsilon: EpsilonProfile::constant(eps),
            nonlocal: NonlocalCoefficient::constant(basis, a),
            nonlinearity: NonlinearitySplit::zero(basis.dim()),
            delay: DelayOperator::discrete(0.0, 0.5),
            forcing: Forcing::zero(),
            skip_validation: true,
        }
    }

    pub fn lambda1(&self) -> f64 {
        self.basis.lambda1()
    }

    /// Smallest admissible `m`: `3/2 + L/2 + 1/(4λ₁)`.
    pub fn absorbing_threshold(&self) -> f64 {
        1.5 + 0.5 * self.epsilon.bound_l + 0.25 / self.lambda1()
    }

    pub fn validate(&self) -> ValidationReport {
        validate_model(self)
    }

    /// Fails with every violated hypothesis unless validation is skipped.
    pub fn ensure_valid(&self) -> Result<()> {
        if self.skip_validation {
            return Ok(());
        }
        let report = self.validate();
        if report.passed() {
            Ok(())
        } else {
            Err(Error::InvalidModel(report.failures()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenarios_pass_validation() {
        let basis = build_basis(3, 2, 8).unwrap();
        for kind in [EpsilonKind::Decreasing, EpsilonKind::Increasing, EpsilonKind::Constant] {
            let spec = ModelSpec::scenario(kind, &basis);
            let report = spec.validate();
            assert!(report.passed(), "{kind:?}: {:?}", report.failures());
        }
    }

    #[test]
    fn threshold_arithmetic() {
        let spec = ModelSpec::default_model(3, 2).unwrap();
        let expected = 1.5 + 1.625 / 2.0 + 1.0 / 12.0;
        assert!((spec.absorbing_threshold() - expected).abs() < 1e-15);
        assert!((spec.absorbing_threshold() - 2.396).abs() < 1e-3);
    }

    #[test]
    fn linear_model_skips_validation() {
        let basis = build_basis(3, 1, 4).unwrap();
        let spec = ModelSpec::linear(&basis, 1.0, 2.0);
        assert!(spec.ensure_valid().is_ok());
        let strict = ModelSpec {
            skip_validation: false,
            ..spec
        };
        assert!(matches!(strict.ensure_valid(), Err(Error::InvalidModel(_))));
    }
}
