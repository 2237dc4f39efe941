//! Time-dependent coefficient of the pseudo-parabolic term.

/// Monotonicity class of the profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EpsilonKind {
    Decreasing,
    Increasing,
    Constant,
}

impl EpsilonKind {
    pub fn name(self) -> &'static str {
        match self {
            EpsilonKind::Decreasing => "decreasing",
            EpsilonKind::Increasing => "increasing",
            EpsilonKind::Constant => "constant",
        }
    }
}

impl std::str::FromStr for EpsilonKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "decreasing" => Ok(EpsilonKind::Decreasing),
            "increasing" => Ok(EpsilonKind::Increasing),
            "constant" => Ok(EpsilonKind::Constant),
            other => Err(format!("unknown epsilon kind `{other}`")),
        }
    }
}

/// Logistic profile `ε(t) = base ± amp/(1+eᵗ)`.
///
/// The sign is `+` for [`EpsilonKind::Decreasing`] and `−` for
/// [`EpsilonKind::Increasing`]; the constant kind ignores `amp`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonProfile {
    pub kind: EpsilonKind,
    pub base: f64,
    pub amp: f64,
    /// Asymptotic lower bound, must exceed 1/2.
    pub alpha: f64,
    /// Declared bound on `sup(|ε| + |ε'|)`.
    pub bound_l: f64,
}

impl EpsilonProfile {
    /// `ε(t) = 1 + 1/(2(1+eᵗ))`, α = 0.75, L = 1.625.
    pub fn decreasing() -> Self {
        Self {
            kind: EpsilonKind::Decreasing,
            base: 1.0,
            amp: 0.5,
            alpha: 0.75,
            bound_l: 1.625,
        }
    }

    /// `ε(t) = 1 − 1/(4(1+eᵗ))`, α = 0.75, L = 1.0625.
    pub fn increasing() -> Self {
        Self {
            kind: EpsilonKind::Increasing,
            base: 1.0,
            amp: 0.25,
            alpha: 0.75,
            bound_l: 1.0625,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            kind: EpsilonKind::Constant,
            base: value,
            amp: 0.0,
            alpha: 0.75,
            bound_l: value.abs(),
        }
    }

    pub fn for_kind(kind: EpsilonKind) -> Self {
        match kind {
            EpsilonKind::Decreasing => Self::decreasing(),
            EpsilonKind::Increasing => Self::increasing(),
            EpsilonKind::Constant => Self::constant(1.0),
        }
    }

    fn signed_amp(&self) -> f64 {
        match self.kind {
            EpsilonKind::Decreasing => self.amp,
            EpsilonKind::Increasing => -self.amp,
            EpsilonKind::Constant => 0.0,
        }
    }

    /// Value and derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let x = logistic_neg(t);
        let s = self.signed_amp();
        (self.base + s * x, -s * x * (1.0 - x))
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.eval(t).1
    }

    /// Whether the profile is non-increasing, the regime with the weaker
    /// lower bound on the diffusion coefficient.
    pub fn is_nonincreasing(&self) -> bool {
        self.signed_amp() >= 0.0
    }
}

/// `1/(1+eᵗ)` without overflow for large |t|.
fn logistic_neg(t: f64) -> f64 {
    if t > 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

/// `max |ε(s)|` over the given sample times.
pub fn max_abs_over(profile: &EpsilonProfile, times: impl IntoIterator<Item = f64>) -> f64 {
    times.into_iter().map(|s| profile.value(s).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn default_values_at_origin() {
        let (e, d) = EpsilonProfile::decreasing().eval(0.0);
        assert_eq!(e, 1.25);
        assert_eq!(d, -0.125);

        let (e, d) = EpsilonProfile::increasing().eval(0.0);
        assert_eq!(e, 0.875);
        assert_eq!(d, 0.0625);

        assert_eq!(EpsilonProfile::constant(1.0).eval(3.0), (1.0, 0.0));
    }

    #[test]
    fn limits() {
        let p = EpsilonProfile::decreasing();
        assert_abs_diff_eq!(p.value(800.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.value(-800.0), 1.5, epsilon = 1e-15);
        assert!(p.derivative(800.0).is_finite());
        assert!(p.derivative(-800.0).is_finite());
    }

    #[test]
    fn parses_kind_names() {
        for kind in [EpsilonKind::Decreasing, EpsilonKind::Increasing, EpsilonKind::Constant] {
            assert_eq!(kind.name().parse::<EpsilonKind>().unwrap(), kind);
        }
        assert!("sideways".parse::<EpsilonKind>().is_err());
    }

    proptest! {
        #[test]
        fn derivative_matches_finite_difference(t in -30.0f64..30.0) {
            for p in [EpsilonProfile::decreasing(), EpsilonProfile::increasing()] {
                let h = 1e-5;
                let fd = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
                prop_assert!((fd - p.derivative(t)).abs() < 1e-9);
            }
        }
    }
}
