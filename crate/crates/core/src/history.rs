//! Solution history over the delay window.
//!
//! Entries sit on a uniform grid `τ + i·dt`; the delay `k` is required to be
//! an integer multiple of `dt` so that `u(t−k)` is always a stored entry at
//! whole steps.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::EpsilonProfile;
use crate::spectral::{EigenBasis, NormBundle, SpectralField};

/// Number of steps `k/dt`, rejecting non-integer ratios.
pub fn delay_steps(k: f64, dt: f64) -> Result<usize> {
    if !(k > 0.0 && dt > 0.0 && k.is_finite() && dt.is_finite()) {
        return Err(Error::DelayGrid { k, dt });
    }
    let ratio = k / dt;
    let steps = ratio.round();
    if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::DelayGrid { k, dt });
    }
    Ok(steps as usize)
}

/// Initial history generators. Every variant is affine in `θ`.
#[derive(Clone, Debug, PartialEq)]
pub enum PhiGenerator {
    Zero,
    /// The same coefficient vector for every `θ`.
    Constant(Vec<f64>),
    /// `φ(θ) = at_zero + θ·slope`.
    Affine {
        at_zero: Vec<f64>,
        slope: Vec<f64>,
    },
    /// Gaussian coefficients damped by `λ^{−decay}`, optionally rescaled so
    /// that the history has the requested `C_{H_t}` norm².
    SeededRandom {
        seed: u64,
        decay: f64,
        norm_sq: Option<f64>,
    },
}

impl PhiGenerator {
    pub fn random(seed: u64) -> Self {
        PhiGenerator::SeededRandom {
            seed,
            decay: 2.0,
            norm_sq: None,
        }
    }

    pub fn random_with_norm_sq(seed: u64, norm_sq: f64) -> Self {
        PhiGenerator::SeededRandom {
            seed,
            decay: 2.0,
            norm_sq: Some(norm_sq),
        }
    }

    pub fn single_mode(basis: &EigenBasis, index: usize, value: f64) -> Self {
        let mut c = vec![0.0; basis.len()];
        c[index] = value;
        PhiGenerator::Constant(c)
    }

    /// Closed affine form of the generator for a given basis and start time.
    pub fn resolve(&self, basis: &Arc<EigenBasis>, k: f64, tau: f64, eps: &EpsilonProfile) -> Result<AffinePhi> {
        let len = basis.len();
        let check = |v: &Vec<f64>| {
            if v.len() != len {
                Err(Error::DimensionMismatch {
                    expected: len,
                    got: v.len(),
                })
            } else if v.iter().any(|c| !c.is_finite()) {
                Err(Error::NonFinite("initial history"))
            } else {
                Ok(())
            }
        };
        match self {
            PhiGenerator::Zero => Ok(AffinePhi {
                at_zero: vec![0.0; len],
                slope: vec![0.0; len],
            }),
            PhiGenerator::Constant(c) => {
                check(c)?;
                Ok(AffinePhi {
                    at_zero: c.clone(),
                    slope: vec![0.0; len],
                })
            }
            PhiGenerator::Affine { at_zero, slope } => {
                check(at_zero)?;
                check(slope)?;
                Ok(AffinePhi {
                    at_zero: at_zero.clone(),
                    slope: slope.clone(),
                })
            }
            PhiGenerator::SeededRandom { seed, decay, norm_sq } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut draw = |scale: f64| -> Vec<f64> {
                    basis
                        .eigenvalues()
                        .iter()
                        .map(|lam| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            scale * z * lam.powf(-decay)
                        })
                        .collect()
                };
                let at_zero = draw(1.0);
                let slope = draw(0.5 / k);
                let mut phi = AffinePhi { at_zero, slope };
                if let Some(target) = norm_sq {
                    if *target < 0.0 {
                        return Err(Error::InvalidParameter(format!(
                            "target history norm {target} is negative"
                        )));
                    }
                    let current = phi.c_ht_norm_sq(basis, k, tau, eps);
                    if current > 0.0 {
                        phi.scale((target / current).sqrt());
                    }
                }
                Ok(phi)
            }
        }
    }
}

/// `φ(θ) = at_zero + θ·slope` on `θ ∈ [−k, 0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinePhi {
    pub at_zero: Vec<f64>,
    pub slope: Vec<f64>,
}

impl AffinePhi {
    pub fn at(&self, theta: f64) -> Vec<f64> {
        self.at_zero
            .iter()
            .zip(&self.slope)
            .map(|(a, b)| a + theta * b)
            .collect()
    }

    pub fn scale(&mut self, factor: f64) {
        for c in self.at_zero.iter_mut().chain(self.slope.iter_mut()) {
            *c *= factor;
        }
    }

    /// Exact `C_{H_t}` norm² over `[τ−k, τ]`. Norms of an affine path are
    /// convex in `θ` and the profile is monotone, so all maxima sit at the
    /// window ends.
    pub fn c_ht_norm_sq(&self, basis: &EigenBasis, k: f64, tau: f64, eps: &EpsilonProfile) -> f64 {
        let ends = [self.at(0.0), self.at(-k)];
        let lam = basis.eigenvalues();
        let nb: Vec<NormBundle> = ends.iter().map(|c| NormBundle::of(lam, c, 0.0, 0.5)).collect();
        let l2 = nb[0].l2_sq.max(nb[1].l2_sq);
        let grad = nb[0].grad_sq.max(nb[1].grad_sq);
        let e = eps.value(tau).abs().max(eps.value(tau - k).abs());
        l2 + e * grad
    }
}

/// Window sup-norms of a history segment.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WindowNorms {
    /// `‖u_t‖²_{C_{L²}}`
    pub l2_sq: f64,
    /// `‖∇u_t‖²_{C_{L²}}`
    pub grad_sq: f64,
    /// `‖Δu_t‖²_{C_{L²}}`
    pub laplace_sq: f64,
    /// `|ε_t| = max_θ |ε(t+θ)|`
    pub eps_abs: f64,
    /// `‖u_t‖²_{C_{H_t}}`
    pub ht_sq: f64,
    /// `‖u_t‖²_{C_{H¹_t}}`
    pub h1t_sq: f64,
}

impl WindowNorms {
    pub fn from_sups(l2_sq: f64, grad_sq: f64, laplace_sq: f64, eps_abs: f64) -> Self {
        Self {
            l2_sq,
            grad_sq,
            laplace_sq,
            eps_abs,
            ht_sq: l2_sq + eps_abs * grad_sq,
            h1t_sq: grad_sq + eps_abs * laplace_sq,
        }
    }
}

/// Ring of coefficient vectors on the grid `τ + i·dt`.
#[derive(Clone, Debug)]
pub struct DelayHistory {
    basis: Arc<EigenBasis>,
    tau: f64,
    dt: f64,
    k: f64,
    steps: usize,
    first: i64,
    entries: VecDeque<Vec<f64>>,
}

impl DelayHistory {
    /// Fills the history at `τ−k, τ−k+dt, …, τ` from a generator.
    pub fn init_from_phi(
        phi: &PhiGenerator,
        basis: &Arc<EigenBasis>,
        tau: f64,
        dt: f64,
        k: f64,
        eps: &EpsilonProfile,
    ) -> Result<Self> {
        let steps = delay_steps(k, dt)?;
        let affine = phi.resolve(basis, k, tau, eps)?;
        let mut entries = VecDeque::with_capacity(steps + 2);
        for i in 0..=steps {
            let theta = (i as f64 - steps as f64) * dt;
            entries.push_back(affine.at(theta));
        }
        Ok(Self {
            basis: Arc::clone(basis),
            tau,
            dt,
            k,
            steps,
            first: -(steps as i64),
            entries,
        })
    }

    pub fn basis(&self) -> &Arc<EigenBasis> {
        &self.basis
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `k/dt`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Maximum ring length, one step more than the delay window.
    pub fn capacity(&self) -> usize {
        self.steps + 2
    }

    pub fn time(&self, i: usize) -> f64 {
        self.tau + (self.first + i as i64) as f64 * self.dt
    }

    pub fn oldest_time(&self) -> f64 {
        self.time(0)
    }

    pub fn newest_time(&self) -> f64 {
        self.time(self.entries.len() - 1)
    }

    pub fn entry(&self, i: usize) -> &[f64] {
        &self.entries[i]
    }

    pub fn newest(&self) -> &[f64] {
        self.entries.back().expect("history is never empty")
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, c)| (self.time(i), c.as_slice()))
    }

    /// Appends the state one step after the newest entry, evicting the oldest
    /// once the ring is full.
    pub fn push(&mut self, coeffs: &[f64]) {
        let mut slot = if self.entries.len() == self.capacity() {
            self.first += 1;
            self.entries.pop_front().expect("non-empty")
        } else {
            Vec::with_capacity(coeffs.len())
        };
        slot.clear();
        slot.extend_from_slice(coeffs);
        self.entries.push_back(slot);
    }

    fn position(&self, s: f64) -> Result<(usize, f64)> {
        let tol = 1e-9 * self.dt;
        let (oldest, newest) = (self.oldest_time(), self.newest_time());
        if !(s >= oldest - tol && s <= newest + tol) {
            return Err(Error::OutOfRange {
                time: s,
                oldest,
                newest,
            });
        }
        let p = ((s - oldest) / self.dt).max(0.0);
        let nearest = p.round();
        if (p - nearest).abs() <= 1e-9 {
            return Ok(((nearest as usize).min(self.len() - 1), 0.0));
        }
        let i = (p.floor() as usize).min(self.len() - 2);
        Ok((i, p - i as f64))
    }

    /// `u(s)` by linear interpolation; exact at stored times.
    pub fn sample_into(&self, s: f64, out: &mut [f64]) -> Result<()> {
        let (i, w) = self.position(s)?;
        if w == 0.0 {
            out.copy_from_slice(&self.entries[i]);
        } else {
            let (a, b) = (&self.entries[i], &self.entries[i + 1]);
            for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                *o = x + w * (y - x);
            }
        }
        Ok(())
    }

    pub fn sample(&self, s: f64) -> Result<SpectralField> {
        let mut out = vec![0.0; self.basis.len()];
        self.sample_into(s, &mut out)?;
        SpectralField::from_coeffs(&self.basis, out)
    }

    fn window_indices(&self, t: f64) -> Result<std::ops::RangeInclusive<usize>> {
        let tol = 1e-9 * self.dt;
        let (oldest, newest) = (self.oldest_time(), self.newest_time());
        if t - self.k < oldest - tol || t > newest + tol {
            return Err(Error::OutOfRange {
                time: t - self.k,
                oldest,
                newest,
            });
        }
        let lo = ((t - self.k - oldest) / self.dt - 1e-9).ceil().max(0.0) as usize;
        let hi = ((t - oldest) / self.dt + 1e-9).floor() as usize;
        Ok(lo..=hi.min(self.len() - 1))
    }

    /// Sup-norms over the stored `θ`-grid of `[t−k, t]`.
    pub fn window_sup_norms(&self, t: f64, eps: &EpsilonProfile) -> Result<WindowNorms> {
        let lam = self.basis.eigenvalues();
        self.fold_window(t, eps, |i| NormBundle::of(lam, &self.entries[i], 0.0, 0.5))
    }

    /// Sup-norms of the pointwise difference with another history on the
    /// same time grid.
    pub fn window_distance(&self, other: &DelayHistory, t: f64, eps: &EpsilonProfile) -> Result<WindowNorms> {
        if *self.basis != *other.basis {
            return Err(Error::BasisMismatch);
        }
        let (mine, theirs) = (self.window_indices(t)?, other.window_indices(t)?);
        let aligned = (self.time(*mine.start()) - other.time(*theirs.start())).abs() <= 1e-9 * self.dt;
        if mine.clone().count() != theirs.clone().count() || !aligned {
            return Err(Error::InvalidParameter(
                "histories are stored on different time grids".into(),
            ));
        }
        let shift = *theirs.start() as i64 - *mine.start() as i64;
        let lam = self.basis.eigenvalues();
        let mut diff = vec![0.0; self.basis.len()];
        self.fold_window(t, eps, |i| {
            let j = (i as i64 + shift) as usize;
            for ((d, a), b) in diff.iter_mut().zip(&self.entries[i]).zip(&other.entries[j]) {
                *d = a - b;
            }
            NormBundle::of(lam, &diff, 0.0, 0.5)
        })
    }

    fn fold_window<F>(&self, t: f64, eps: &EpsilonProfile, mut norms: F) -> Result<WindowNorms>
    where
        F: FnMut(usize) -> NormBundle,
    {
        let (mut l2, mut grad, mut lap, mut e) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for i in self.window_indices(t)? {
            let nb = norms(i);
            l2 = l2.max(nb.l2_sq);
            grad = grad.max(nb.grad_sq);
            lap = lap.max(nb.laplace_sq);
            e = e.max(eps.value(self.time(i)).abs());
        }
        Ok(WindowNorms::from_sups(l2, grad, lap, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::build_basis;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn eps() -> EpsilonProfile {
        EpsilonProfile::decreasing()
    }

    #[test]
    fn constant_generator() {
        let b = build_basis(3, 2, 8).unwrap();
        let phi = PhiGenerator::single_mode(&b, 0, 2.0);
        let h = DelayHistory::init_from_phi(&phi, &b, 0.0, 0.1, 0.5, &eps()).unwrap();
        assert_eq!(h.len(), 6);
        assert!(h.iter().all(|(_, c)| c == h.newest()));
        assert_abs_diff_eq!(h.oldest_time(), -0.5, epsilon = 1e-15);
        assert_eq!(h.newest_time(), 0.0);
    }

    #[test]
    fn affine_generator() {
        let b = build_basis(1, 2, 8).unwrap();
        let phi = PhiGenerator::Affine {
            at_zero: vec![1.0, 0.0],
            slope: vec![1.0, 0.0],
        };
        let h = DelayHistory::init_from_phi(&phi, &b, 0.0, 0.1, 0.5, &eps()).unwrap();
        assert_abs_diff_eq!(h.entry(0)[0], 0.5, epsilon = 1e-15);
        assert_eq!(h.newest()[0], 1.0);
    }

    #[test]
    fn random_generator_is_deterministic() {
        let b = build_basis(3, 3, 12).unwrap();
        let phi = PhiGenerator::random(42);
        let a = DelayHistory::init_from_phi(&phi, &b, 0.0, 0.01, 0.5, &eps()).unwrap();
        let c = DelayHistory::init_from_phi(&phi, &b, 0.0, 0.01, 0.5, &eps()).unwrap();
        assert!(a.iter().zip(c.iter()).all(|(x, y)| x == y));
        let other = DelayHistory::init_from_phi(&PhiGenerator::random(43), &b, 0.0, 0.01, 0.5, &eps()).unwrap();
        assert_ne!(a.newest(), other.newest());
    }

    #[test]
    fn random_generator_hits_target_norm() {
        let b = build_basis(3, 3, 12).unwrap();
        let phi = PhiGenerator::random_with_norm_sq(7, 100.0);
        let h = DelayHistory::init_from_phi(&phi, &b, 0.0, 0.01, 0.5, &eps()).unwrap();
        let w = h.window_sup_norms(0.0, &eps()).unwrap();
        assert_abs_diff_eq!(w.ht_sq, 100.0, epsilon = 1e-10);
    }

    #[test]
    fn rejects_incommensurate_delay() {
        let b = build_basis(1, 1, 4).unwrap();
        let err = DelayHistory::init_from_phi(&PhiGenerator::Zero, &b, 0.0, 0.003, 0.5, &eps());
        assert!(matches!(err, Err(Error::DelayGrid { .. })));
        assert_eq!(delay_steps(0.5, 0.0025).unwrap(), 200);
        assert_eq!(delay_steps(0.5, 1e-3).unwrap(), 500);
    }

    #[test]
    fn sampling() {
        let b = build_basis(1, 1, 4).unwrap();
        let phi = PhiGenerator::Affine {
            at_zero: vec![2.0],
            slope: vec![10.0],
        };
        // stored values 1 at θ = −0.1 and 2 at θ = 0
        let h = DelayHistory::init_from_phi(&phi, &b, 0.0, 0.1, 0.1, &eps()).unwrap();
        assert_abs_diff_eq!(h.sample(-0.05).unwrap().coeffs()[0], 1.5, epsilon = 1e-14);
        assert_eq!(h.sample(0.0).unwrap().coeffs(), h.newest());
        assert_eq!(h.sample(-0.1).unwrap().coeffs(), h.entry(0));
        assert!(matches!(h.sample(-1.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(h.sample(0.2), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn ring_length_is_bounded() {
        let b = build_basis(1, 1, 4).unwrap();
        let mut h = DelayHistory::init_from_phi(&PhiGenerator::Zero, &b, 0.0, 0.1, 0.5, &eps()).unwrap();
        for i in 0..100 {
            h.push(&[i as f64]);
            assert!(h.len() <= h.capacity());
            if i > 0 {
                assert_eq!(h.len(), 7);
                assert!(h.newest_time() - h.oldest_time() >= 0.5 + 0.1 - 1e-12);
            }
        }
        assert_abs_diff_eq!(h.newest_time(), 10.0, epsilon = 1e-12);
        assert_eq!(h.newest(), &[99.0]);
        for i in 1..h.len() {
            assert_abs_diff_eq!(h.time(i) - h.time(i - 1), 0.1, epsilon = 1e-12);
        }
    }

    #[test]
    fn window_sup_examples() {
        // ‖u(θ)‖² = 1 + θ² via two modes: c = (1, θ)
        let b = build_basis(1, 2, 8).unwrap();
        let phi = PhiGenerator::Affine {
            at_zero: vec![1.0, 0.0],
            slope: vec![0.0, 1.0],
        };
        let h = DelayHistory::init_from_phi(&phi, &b, 0.0, 0.1, 0.5, &eps()).unwrap();
        let w = h.window_sup_norms(0.0, &eps()).unwrap();
        assert_abs_diff_eq!(w.l2_sq, 1.25, epsilon = 1e-14);

        let b3 = build_basis(3, 1, 4).unwrap();
        let h = DelayHistory::init_from_phi(
            &PhiGenerator::single_mode(&b3, 0, 2.0),
            &b3,
            0.0,
            0.1,
            0.5,
            &EpsilonProfile::constant(1.25),
        )
        .unwrap();
        let w = h.window_sup_norms(0.0, &EpsilonProfile::constant(1.25)).unwrap();
        assert_eq!((w.l2_sq, w.grad_sq), (4.0, 12.0));
        assert_eq!(w.ht_sq, 19.0);

        let z = DelayHistory::init_from_phi(&PhiGenerator::Zero, &b3, 0.0, 0.1, 0.5, &eps()).unwrap();
        let w = z.window_sup_norms(0.0, &eps()).unwrap();
        assert_eq!((w.l2_sq, w.grad_sq, w.ht_sq, w.h1t_sq), (0.0, 0.0, 0.0, 0.0));
        assert!(z.window_sup_norms(-0.1, &eps()).is_err());
    }

    #[test]
    fn eps_factor_is_window_maximum() {
        let b = build_basis(3, 1, 4).unwrap();
        let h = DelayHistory::init_from_phi(&PhiGenerator::Zero, &b, 0.0, 0.1, 0.5, &eps()).unwrap();
        let w = h.window_sup_norms(0.0, &eps()).unwrap();
        assert_eq!(w.eps_abs, eps().value(-0.5));
    }

    #[test]
    fn window_distance_of_self_is_zero() {
        let b = build_basis(3, 2, 8).unwrap();
        let h = DelayHistory::init_from_phi(&PhiGenerator::random(1), &b, 0.0, 0.05, 0.5, &eps()).unwrap();
        let z = DelayHistory::init_from_phi(&PhiGenerator::Zero, &b, 0.0, 0.05, 0.5, &eps()).unwrap();
        assert_eq!(h.window_distance(&h, 0.0, &eps()).unwrap().ht_sq, 0.0);
        assert_eq!(
            h.window_distance(&z, 0.0, &eps()).unwrap(),
            h.window_sup_norms(0.0, &eps()).unwrap()
        );
    }

    proptest! {
        #[test]
        fn sup_norm_respects_domination(
            a in proptest::collection::vec(-3.0f64..3.0, 2),
            s in proptest::collection::vec(-3.0f64..3.0, 2),
            factor in 1.0f64..4.0,
        ) {
            let b = build_basis(1, 2, 8).unwrap();
            let small = PhiGenerator::Affine { at_zero: a.clone(), slope: s.clone() };
            let big = PhiGenerator::Affine {
                at_zero: a.iter().map(|x| x * factor).collect(),
                slope: s.iter().map(|x| x * factor).collect(),
            };
            let h1 = DelayHistory::init_from_phi(&small, &b, 0.0, 0.05, 0.5, &eps()).unwrap();
            let h2 = DelayHistory::init_from_phi(&big, &b, 0.0, 0.05, 0.5, &eps()).unwrap();
            let w1 = h1.window_sup_norms(0.0, &eps()).unwrap();
            let w2 = h2.window_sup_norms(0.0, &eps()).unwrap();
            prop_assert!(w1.l2_sq <= w2.l2_sq);
        }

        #[test]
        fn interpolation_is_between_neighbours(s in -0.5f64..0.0) {
            let b = build_basis(1, 1, 4).unwrap();
            let phi = PhiGenerator::Affine { at_zero: vec![1.0], slope: vec![3.0] };
            let h = DelayHistory::init_from_phi(&phi, &b, 0.0, 0.1, 0.5, &eps()).unwrap();
            // linear data is reproduced exactly
            let v = h.sample(s).unwrap().coeffs()[0];
            prop_assert!((v - (1.0 + 3.0 * s)).abs() < 1e-12);
        }
    }
}
