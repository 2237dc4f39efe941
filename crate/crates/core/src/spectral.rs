//! Dirichlet-Laplacian eigenbasis on the box `(0, π)ⁿ`.
//!
//! Eigenpairs are closed-form: `e_k(x) = (2/π)^{n/2} ∏ sin(kᵢ xᵢ)` with
//! `λ_k = Σ kᵢ²`. Fields are stored as dense coefficient vectors indexed by
//! multi-index in lexicographic order (last axis fastest), and nonlinear
//! terms are evaluated pseudo-spectrally on the interior collocation nodes
//! `x_m = mπ/(G+1)`, `m = 1..G`, per axis.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Truncated eigenbasis of `A = −Δ` together with its collocation grid.
#[derive(Clone)]
pub struct EigenBasis {
    dim: usize,
    kmax: usize,
    grid: usize,
    modes: Vec<usize>,
    eigenvalues: Vec<f64>,
    // G × kmax table of √(2/π)·sin(k x_m).
    sine: Vec<f64>,
}

impl fmt::Debug for EigenBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EigenBasis")
            .field("dim", &self.dim)
            .field("kmax", &self.kmax)
            .field("grid", &self.grid)
            .field("modes", &self.len())
            .finish()
    }
}

impl PartialEq for EigenBasis {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.kmax == other.kmax && self.grid == other.grid
    }
}

/// Builds the basis for dimension `n`, per-axis mode cap `kmax` and `grid`
/// collocation points per axis.
///
/// `grid ≥ 4·kmax` keeps the projection of cubic terms alias-free; anything
/// below `kmax` is rejected because even linear terms would alias.
pub fn build_basis(n: usize, kmax: usize, grid: usize) -> Result<Arc<EigenBasis>> {
    if n == 0 {
        return Err(Error::InvalidBasis("dimension must be at least 1".into()));
    }
    if kmax == 0 {
        return Err(Error::InvalidBasis("mode cap must be at least 1".into()));
    }
    if grid < kmax {
        return Err(Error::InvalidBasis(format!(
            "grid size {grid} is below the mode cap {kmax}"
        )));
    }
    let count = kmax
        .checked_pow(n as u32)
        .ok_or_else(|| Error::InvalidBasis("mode count overflows".into()))?;

    let mut modes = Vec::with_capacity(count * n);
    let mut eigenvalues = Vec::with_capacity(count);
    let mut index = vec![1usize; n];
    for _ in 0..count {
        modes.extend_from_slice(&index);
        eigenvalues.push(index.iter().map(|&k| (k * k) as f64).sum());
        // odometer increment, last axis fastest
        for axis in (0..n).rev() {
            if index[axis] < kmax {
                index[axis] += 1;
                break;
            }
            index[axis] = 1;
        }
    }

    let norm = (2.0 / PI).sqrt();
    let h = PI / (grid as f64 + 1.0);
    let mut sine = vec![0.0; grid * kmax];
    for m in 0..grid {
        for k in 0..kmax {
            sine[m * kmax + k] = norm * (((k + 1) * (m + 1)) as f64 * h).sin();
        }
    }

    Ok(Arc::new(EigenBasis {
        dim: n,
        kmax,
        grid,
        modes,
        eigenvalues,
        sine,
    }))
}

impl EigenBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    /// Collocation points per axis.
    pub fn grid_size(&self) -> usize {
        self.grid
    }

    /// Total number of collocation nodes, `Gⁿ`.
    pub fn grid_len(&self) -> usize {
        self.grid.pow(self.dim as u32)
    }

    /// Number of modes.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Smallest eigenvalue; equals `n` on the unit-mode box.
    pub fn lambda1(&self) -> f64 {
        self.dim as f64
    }

    /// Multi-index of mode `i` (entries in `1..=kmax`).
    pub fn mode(&self, i: usize) -> &[usize] {
        &self.modes[i * self.dim..(i + 1) * self.dim]
    }

    /// Position of a multi-index in the coefficient array, if it is retained.
    pub fn mode_index(&self, multi: &[usize]) -> Option<usize> {
        if multi.len() != self.dim || multi.iter().any(|&k| k == 0 || k > self.kmax) {
            return None;
        }
        Some(multi.iter().fold(0, |acc, &k| acc * self.kmax + (k - 1)))
    }

    /// Collocation node `x_m = mπ/(G+1)` for `m = 1..=G`.
    pub fn node(&self, m: usize) -> f64 {
        m as f64 * PI / (self.grid as f64 + 1.0)
    }

    /// Quadrature weight `(π/(G+1))ⁿ` of the interior-node rule.
    pub fn quadrature_weight(&self) -> f64 {
        (PI / (self.grid as f64 + 1.0)).powi(self.dim as i32)
    }

    /// Closed-form eigenfunction `e_i` evaluated at a point of `(0, π)ⁿ`.
    pub fn eigenfunction(&self, i: usize, x: &[f64]) -> f64 {
        let norm = (2.0 / PI).powf(self.dim as f64 / 2.0);
        self.mode(i)
            .iter()
            .zip(x)
            .fold(norm, |acc, (&k, &xi)| acc * (k as f64 * xi).sin())
    }

    fn same(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }
}

/// A solution snapshot expanded in the eigenbasis.
#[derive(Clone, Debug)]
pub struct SpectralField {
    basis: Arc<EigenBasis>,
    coeffs: Vec<f64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        self.basis.same(&other.basis) && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn zeros(basis: &Arc<EigenBasis>) -> Self {
        Self {
            basis: Arc::clone(basis),
            coeffs: vec![0.0; basis.len()],
        }
    }

    /// Wraps a coefficient vector; rejects wrong lengths and non-finite entries.
    pub fn from_coeffs(basis: &Arc<EigenBasis>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                got: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("field coefficients"));
        }
        Ok(Self {
            basis: Arc::clone(basis),
            coeffs,
        })
    }

    /// `value · e_i`.
    pub fn single_mode(basis: &Arc<EigenBasis>, i: usize, value: f64) -> Self {
        let mut field = Self::zeros(basis);
        field.coeffs[i] = value;
        field
    }

    pub fn basis(&self) -> &Arc<EigenBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// L² inner product, `Σ c_k(u)·c_k(v)`.
    pub fn inner_product(&self, other: &SpectralField) -> Result<f64> {
        if !self.basis.same(&other.basis) {
            return Err(Error::BasisMismatch);
        }
        Ok(dot(&self.coeffs, &other.coeffs))
    }

    /// Applies `Aˢ`, i.e. scales each coefficient by `λ_kˢ`.
    pub fn apply_fractional(&self, s: f64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.basis.eigenvalues())
            .map(|(c, lam)| c * lam.powf(s))
            .collect();
        Self {
            basis: Arc::clone(&self.basis),
            coeffs,
        }
    }

    /// Every spatial norm used by the energy estimates.
    pub fn norms(&self, eps_abs: f64, sigma: f64) -> NormBundle {
        NormBundle::of(self.basis.eigenvalues(), &self.coeffs, eps_abs, sigma)
    }

    /// Values at the collocation nodes (row-major, axis 0 slowest).
    pub fn to_grid(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.basis.grid_len()];
        GridTransform::new(&self.basis).to_grid(&self.coeffs, &mut out);
        out
    }

    /// Projects nodal values back onto the basis via discrete sine orthogonality.
    pub fn from_grid(basis: &Arc<EigenBasis>, values: &[f64]) -> Result<Self> {
        if values.len() != basis.grid_len() {
            return Err(Error::DimensionMismatch {
                expected: basis.grid_len(),
                got: values.len(),
            });
        }
        let mut coeffs = vec![0.0; basis.len()];
        GridTransform::new(basis).from_grid(values, &mut coeffs);
        Self::from_coeffs(basis, coeffs)
    }

    pub fn scale(&self, factor: f64) -> SpectralField {
        Self {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;

    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert!(self.basis.same(&rhs.basis), "basis mismatch");
        SpectralField {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;

    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert!(self.basis.same(&rhs.basis), "basis mismatch");
        SpectralField {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;

    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}

/// Squared norms of a snapshot.
///
/// `ht_sq` and `h1t_sq` are the time-dependent norms `‖u‖² + |ε|‖∇u‖²` and
/// `‖∇u‖² + |ε|‖Δu‖²`; `frac_sq` and `frac1_sq` are `‖A^{σ/2}u‖²` and
/// `‖A^{(1+σ)/2}u‖²`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NormBundle {
    pub l2_sq: f64,
    pub grad_sq: f64,
    pub laplace_sq: f64,
    pub frac_sq: f64,
    pub frac1_sq: f64,
    pub ht_sq: f64,
    pub h1t_sq: f64,
}

impl NormBundle {
    pub fn of(eigenvalues: &[f64], coeffs: &[f64], eps_abs: f64, sigma: f64) -> Self {
        let mut b = NormBundle::default();
        for (&lam, &c) in eigenvalues.iter().zip(coeffs) {
            let c2 = c * c;
            let lam_sigma = lam.powf(sigma);
            b.l2_sq += c2;
            b.grad_sq += lam * c2;
            b.laplace_sq += lam * lam * c2;
            b.frac_sq += lam_sigma * c2;
            b.frac1_sq += lam * lam_sigma * c2;
        }
        b.ht_sq = b.l2_sq + eps_abs * b.grad_sq;
        b.h1t_sq = b.grad_sq + eps_abs * b.laplace_sq;
        b
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Reusable scratch space for the separable sine transforms.
#[derive(Clone, Debug)]
pub struct GridTransform {
    basis: Arc<EigenBasis>,
    // kmax × G projection table, weight π/(G+1) folded in.
    project: Vec<f64>,
    buf_a: Vec<f64>,
    buf_b: Vec<f64>,
}

impl GridTransform {
    pub fn new(basis: &Arc<EigenBasis>) -> Self {
        let (g, kmax) = (basis.grid, basis.kmax);
        let w = PI / (g as f64 + 1.0);
        let mut project = vec![0.0; kmax * g];
        for k in 0..kmax {
            for m in 0..g {
                project[k * g + m] = w * basis.sine[m * kmax + k];
            }
        }
        let len = basis.grid_len();
        Self {
            basis: Arc::clone(basis),
            project,
            buf_a: vec![0.0; len],
            buf_b: vec![0.0; len],
        }
    }

    pub fn basis(&self) -> &Arc<EigenBasis> {
        &self.basis
    }

    /// Evaluates `Σ c_k e_k` at every collocation node.
    pub fn to_grid(&mut self, coeffs: &[f64], out: &mut [f64]) {
        let (n, g, kmax) = (self.basis.dim, self.basis.grid, self.basis.kmax);
        let mut shape = vec![kmax; n];
        self.buf_a[..coeffs.len()].copy_from_slice(coeffs);
        for axis in 0..n {
            apply_along_axis(&self.buf_a, &shape, axis, &self.basis.sine, g, &mut self.buf_b);
            shape[axis] = g;
            std::mem::swap(&mut self.buf_a, &mut self.buf_b);
        }
        out.copy_from_slice(&self.buf_a[..out.len()]);
    }

    /// Discrete projection of nodal values onto the retained modes.
    pub fn from_grid(&mut self, values: &[f64], out: &mut [f64]) {
        let (n, g, kmax) = (self.basis.dim, self.basis.grid, self.basis.kmax);
        let mut shape = vec![g; n];
        self.buf_a[..values.len()].copy_from_slice(values);
        for axis in 0..n {
            apply_along_axis(&self.buf_a, &shape, axis, &self.project, kmax, &mut self.buf_b);
            shape[axis] = kmax;
            std::mem::swap(&mut self.buf_a, &mut self.buf_b);
        }
        out.copy_from_slice(&self.buf_a[..out.len()]);
    }
}

// Contracts axis `axis` of a row-major tensor with a `rows × shape[axis]` matrix.
fn apply_along_axis(input: &[f64], shape: &[usize], axis: usize, matrix: &[f64], rows: usize, out: &mut [f64]) {
    let cols = shape[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    for o in 0..outer {
        for p in 0..rows {
            let dst = &mut out[(o * rows + p) * inner..(o * rows + p + 1) * inner];
            dst.fill(0.0);
            for q in 0..cols {
                let w = matrix[p * cols + q];
                let src = &input[(o * cols + q) * inner..(o * cols + q + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += w * s;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn field(basis: &Arc<EigenBasis>, coeffs: &[f64]) -> SpectralField {
        SpectralField::from_coeffs(basis, coeffs.to_vec()).unwrap()
    }

    #[test]
    fn eigenvalues_of_small_bases() {
        let b = build_basis(3, 2, 8).unwrap();
        assert_eq!(b.len(), 8);
        let mut lams = b.eigenvalues().to_vec();
        lams.sort_by(f64::total_cmp);
        assert_eq!(lams, vec![3.0, 6.0, 6.0, 6.0, 9.0, 9.0, 9.0, 12.0]);
        assert_eq!(b.mode(0), &[1, 1, 1]);
        assert_eq!(b.mode(1), &[1, 1, 2]);
        assert_eq!(b.mode(7), &[2, 2, 2]);

        let b = build_basis(3, 1, 4).unwrap();
        assert_eq!(b.eigenvalues(), &[3.0]);
        assert_eq!(b.lambda1(), 3.0);

        let b = build_basis(1, 3, 12).unwrap();
        assert_eq!(b.eigenvalues(), &[1.0, 4.0, 9.0]);
    }

    #[test]
    fn rejects_degenerate_bases() {
        assert!(matches!(build_basis(3, 4, 3), Err(Error::InvalidBasis(_))));
        assert!(build_basis(0, 2, 8).is_err());
        assert!(build_basis(2, 0, 8).is_err());
        // below the de-aliasing default but still accepted
        assert!(build_basis(2, 4, 5).is_ok());
    }

    #[test]
    fn mode_index_round_trips() {
        let b = build_basis(3, 3, 12).unwrap();
        for i in 0..b.len() {
            assert_eq!(b.mode_index(b.mode(i)), Some(i));
        }
        assert_eq!(b.mode_index(&[1, 1, 4]), None);
        assert_eq!(b.mode_index(&[1, 1]), None);
    }

    #[test]
    fn discrete_orthonormality() {
        let b = build_basis(2, 3, 12).unwrap();
        let w = b.quadrature_weight();
        let g = b.grid_size();
        for i in 0..b.len() {
            for j in 0..b.len() {
                let mut sum = 0.0;
                for m1 in 1..=g {
                    for m2 in 1..=g {
                        let x = [b.node(m1), b.node(m2)];
                        sum += b.eigenfunction(i, &x) * b.eigenfunction(j, &x);
                    }
                }
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(w * sum, expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fractional_powers() {
        let b = build_basis(1, 2, 8).unwrap();
        // λ = 4 is the second mode
        let u = SpectralField::single_mode(&b, 1, 1.0);
        assert_abs_diff_eq!(
            u.apply_fractional(0.25).coeffs()[1],
            std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
        let v = field(&b, &[0.3, -1.7]);
        assert_eq!(v.apply_fractional(0.0), v);

        let b3 = build_basis(3, 1, 4).unwrap();
        let w = SpectralField::single_mode(&b3, 0, 2.0);
        assert_abs_diff_eq!(w.apply_fractional(1.0).coeffs()[0], 6.0, epsilon = 1e-15);
    }

    #[test]
    fn norm_bundle_examples() {
        let b = build_basis(3, 1, 4).unwrap();
        let u = SpectralField::single_mode(&b, 0, 2.0);
        let nb = u.norms(1.5, 0.5);
        assert_eq!(nb.l2_sq, 4.0);
        assert_eq!(nb.grad_sq, 12.0);
        assert_eq!(nb.laplace_sq, 36.0);
        assert_eq!(nb.ht_sq, 22.0);
        assert_eq!(nb.h1t_sq, 12.0 + 1.5 * 36.0);

        let z = SpectralField::zeros(&b).norms(1.5, 0.5);
        assert_eq!(z, NormBundle::default());

        let b1 = build_basis(1, 2, 8).unwrap();
        let v = SpectralField::single_mode(&b1, 1, 1.0).norms(0.0, 0.5);
        assert_abs_diff_eq!(v.frac_sq, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.frac1_sq, 8.0, epsilon = 1e-14);
    }

    #[test]
    fn inner_products() {
        let b = build_basis(1, 2, 8).unwrap();
        let e1 = SpectralField::single_mode(&b, 0, 1.0);
        let e2 = SpectralField::single_mode(&b, 1, 1.0);
        assert_eq!(e1.inner_product(&e1).unwrap(), 1.0);
        assert_eq!(e1.inner_product(&e2).unwrap(), 0.0);
        let u = &(&e1 * 2.0) + &e2;
        let v = &e1 - &e2;
        assert_eq!(u.inner_product(&v).unwrap(), 1.0);

        let other = build_basis(1, 3, 12).unwrap();
        let w = SpectralField::zeros(&other);
        assert_eq!(e1.inner_product(&w), Err(Error::BasisMismatch));
    }

    #[test]
    fn grid_values_of_first_mode() {
        let b = build_basis(1, 1, 4).unwrap();
        let e1 = SpectralField::single_mode(&b, 0, 1.0);
        let grid = e1.to_grid();
        let direct = (2.0 / PI).sqrt() * (PI / 5.0).sin();
        assert_abs_diff_eq!(grid[0], direct, epsilon = 1e-15);
        assert_abs_diff_eq!(grid[0], 0.46898, epsilon = 1e-5);

        let zero = SpectralField::zeros(&b).to_grid();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn from_grid_checks_length() {
        let b = build_basis(2, 2, 8).unwrap();
        assert!(matches!(
            SpectralField::from_grid(&b, &[0.0; 10]),
            Err(Error::DimensionMismatch { expected: 64, got: 10 })
        ));
    }

    #[test]
    fn grid_matches_closed_form_eigenfunctions() {
        let b = build_basis(3, 2, 8).unwrap();
        let coeffs: Vec<f64> = (0..b.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let u = field(&b, &coeffs);
        let grid = u.to_grid();
        let g = b.grid_size();
        for (flat, &value) in grid.iter().enumerate() {
            let x = [
                b.node(flat / (g * g) + 1),
                b.node((flat / g) % g + 1),
                b.node(flat % g + 1),
            ];
            let direct: f64 = (0..b.len()).map(|i| coeffs[i] * b.eigenfunction(i, &x)).sum();
            assert_abs_diff_eq!(value, direct, epsilon = 1e-13);
        }
    }

    fn coeff_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, len)
    }

    proptest! {
        #[test]
        fn grid_round_trip(coeffs in coeff_strategy(27)) {
            let b = build_basis(3, 3, 12).unwrap();
            let u = field(&b, &coeffs);
            let back = SpectralField::from_grid(&b, &u.to_grid()).unwrap();
            for (a, c) in back.coeffs().iter().zip(&coeffs) {
                prop_assert!((a - c).abs() <= 1e-12 * (1.0 + c.abs()));
            }
        }

        #[test]
        fn parseval(coeffs in coeff_strategy(16)) {
            let b = build_basis(2, 4, 16).unwrap();
            let u = field(&b, &coeffs);
            let quad: f64 = u.to_grid().iter().map(|v| v * v).sum::<f64>() * b.quadrature_weight();
            let l2 = u.norms(0.0, 0.5).l2_sq;
            prop_assert!((quad - l2).abs() <= 1e-10 * (1.0 + l2));
        }

        #[test]
        fn poincare(coeffs in coeff_strategy(27)) {
            let b = build_basis(3, 3, 12).unwrap();
            let nb = field(&b, &coeffs).norms(1.0, 0.25);
            prop_assert!(nb.l2_sq <= nb.grad_sq / b.lambda1() * (1.0 + 1e-15));
        }

        #[test]
        fn fractional_composes(coeffs in coeff_strategy(8), s1 in -1.5f64..1.5, s2 in -1.5f64..1.5) {
            let b = build_basis(3, 2, 8).unwrap();
            let u = field(&b, &coeffs);
            let lhs = u.apply_fractional(s1).apply_fractional(s2);
            let rhs = u.apply_fractional(s1 + s2);
            for (a, c) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                prop_assert!((a - c).abs() <= 1e-12 * (1.0 + c.abs()));
            }
        }

        #[test]
        fn inner_product_is_symmetric(a in coeff_strategy(8), c in coeff_strategy(8)) {
            let b = build_basis(3, 2, 8).unwrap();
            let (u, v) = (field(&b, &a), field(&b, &c));
            prop_assert_eq!(u.inner_product(&v).unwrap(), v.inner_product(&u).unwrap());
        }
    }
}
