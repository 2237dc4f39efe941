//! Reaction term `f = f₀ + f₁`: a cubic dissipative part plus a bounded one.

use crate::error::{Error, Result};
use crate::spectral::{GridTransform, SpectralField};

/// Which part of the reaction term to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    /// `f₀ + f₁`
    Full,
    /// `f₀(u) = −c·u³`
    Dissipative,
    /// `f₁(u) = κ·u/(1+u²)`
    Bounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearitySplit {
    /// Coefficient `c` of `f₀(u) = −c·u³`.
    pub cubic: f64,
    /// Coefficient `κ` of `f₁(u) = κ·u/(1+u²)`.
    pub kappa: f64,
    /// Critical exponent, `4/(n−2)` for `n ≥ 3`.
    pub p: f64,
    /// Growth exponent of `f₁`.
    pub gamma: f64,
    /// Constant used in all sampled growth inequalities.
    pub growth: f64,
}

impl NonlinearitySplit {
    /// Defaults for dimension `n`; below three dimensions `p` falls back to 2.
    pub fn standard(n: usize) -> Self {
        Self {
            cubic: 1.0,
            kappa: 0.5,
            p: critical_exponent(n).unwrap_or(2.0),
            gamma: 1.0,
            growth: 4.0,
        }
    }

    /// `f ≡ 0`.
    pub fn zero(n: usize) -> Self {
        Self {
            cubic: 0.0,
            kappa: 0.0,
            ..Self::standard(n)
        }
    }

    pub fn f0(&self, u: f64) -> f64 {
        -self.cubic * u * u * u
    }

    pub fn f1(&self, u: f64) -> f64 {
        self.kappa * u / (1.0 + u * u)
    }

    pub fn f(&self, u: f64) -> f64 {
        self.f0(u) + self.f1(u)
    }

    pub fn pointwise(&self, part: Part, u: f64) -> f64 {
        match part {
            Part::Full => self.f(u),
            Part::Dissipative => self.f0(u),
            Part::Bounded => self.f1(u),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cubic == 0.0 && self.kappa == 0.0
    }

    /// Pseudo-spectral evaluation: nodal values in `grid` are overwritten with
    /// `f(u)` and projected into `out`.
    pub fn apply_on_grid(
        &self,
        part: Part,
        transform: &mut GridTransform,
        grid: &mut [f64],
        out: &mut [f64],
    ) -> Result<()> {
        for v in grid.iter_mut() {
            *v = self.pointwise(part, *v);
            if !v.is_finite() {
                return Err(Error::NonFinite("nonlinearity"));
            }
        }
        transform.from_grid(grid, out);
        Ok(())
    }

    pub fn eval(&self, part: Part, u: &SpectralField) -> Result<SpectralField> {
        let basis = u.basis();
        let mut transform = GridTransform::new(basis);
        let mut grid = vec![0.0; basis.grid_len()];
        transform.to_grid(u.coeffs(), &mut grid);
        let mut out = vec![0.0; basis.len()];
        self.apply_on_grid(part, &mut transform, &mut grid, &mut out)?;
        SpectralField::from_coeffs(basis, out)
    }
}

/// `4/(n−2)`, defined for `n ≥ 3`.
pub fn critical_exponent(n: usize) -> Option<f64> {
    (n >= 3).then(|| 4.0 / (n as f64 - 2.0))
}

pub fn f_eval(split: &NonlinearitySplit, u: &SpectralField) -> Result<SpectralField> {
    split.eval(Part::Full, u)
}

pub fn f0_eval(split: &NonlinearitySplit, u: &SpectralField) -> Result<SpectralField> {
    split.eval(Part::Dissipative, u)
}

pub fn f1_eval(split: &NonlinearitySplit, u: &SpectralField) -> Result<SpectralField> {
    split.eval(Part::Bounded, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::build_basis;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_maps_to_zero() {
        let b = build_basis(3, 2, 8).unwrap();
        let s = NonlinearitySplit::standard(3);
        let f = f_eval(&s, &SpectralField::zeros(&b)).unwrap();
        assert!(f.coeffs().iter().all(|&c| c == 0.0));
        assert_eq!(s.f(0.0), 0.0);
    }

    #[test]
    fn cubic_projection_matches_fine_quadrature() {
        // independent midpoint rule on a fine grid
        let c = 0.3;
        let fine = 200_000;
        let h = PI / fine as f64;
        let norm = (2.0 / PI).sqrt();
        let direct: f64 = (0..fine)
            .map(|i| {
                let x = (i as f64 + 0.5) * h;
                let e1 = norm * x.sin();
                -(c * e1).powi(3) * e1 * h
            })
            .sum();
        assert_abs_diff_eq!(direct, -c * c * c * 3.0 / (2.0 * PI), epsilon = 1e-12);

        let b = build_basis(1, 1, 4).unwrap();
        let s = NonlinearitySplit {
            kappa: 0.0,
            ..NonlinearitySplit::standard(1)
        };
        let f0 = f0_eval(&s, &SpectralField::single_mode(&b, 0, c)).unwrap();
        assert_abs_diff_eq!(f0.coeffs()[0], direct, epsilon = 1e-12);
    }

    #[test]
    fn non_finite_grid_values_abort() {
        let b = build_basis(1, 1, 4).unwrap();
        let s = NonlinearitySplit::standard(1);
        let u = SpectralField::single_mode(&b, 0, 1e120);
        assert_eq!(f_eval(&s, &u), Err(Error::NonFinite("nonlinearity")));
    }

    #[test]
    fn critical_exponents() {
        assert_eq!(critical_exponent(3), Some(4.0));
        assert_eq!(critical_exponent(4), Some(2.0));
        assert_eq!(critical_exponent(2), None);
    }

    proptest! {
        #[test]
        fn split_is_additive(coeffs in proptest::collection::vec(-0.5f64..0.5, 27)) {
            let b = build_basis(3, 3, 12).unwrap();
            let s = NonlinearitySplit::standard(3);
            let u = SpectralField::from_coeffs(&b, coeffs).unwrap();
            let full = f_eval(&s, &u).unwrap();
            let sum = &f0_eval(&s, &u).unwrap() + &f1_eval(&s, &u).unwrap();
            let scale = 1.0 + full.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
            for (a, c) in full.coeffs().iter().zip(sum.coeffs()) {
                prop_assert!((a - c).abs() <= 1e-14 * scale);
            }
        }
    }
}
