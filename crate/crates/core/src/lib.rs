//! Spectral-Galerkin simulation of a pseudo-parabolic diffusion equation
//! with time-dependent coefficients, a hereditary delay term and a nonlocal
//! diffusion coefficient, together with evaluators for its energy bounds.
//!
//! The equation on the box `(0, π)ⁿ` with Dirichlet conditions reads
//!
//! ```text
//! ∂ₜu − ε(t)∂ₜΔu − a(l(u))Δu = f(u) + g(t, uₜ) + h(t)
//! ```
//!
//! with initial history `u(τ+θ) = φ(θ)` for `θ ∈ [−k, 0]`.
//!
//! ```
//! use attractorlab::model::ModelSpec;
//! use attractorlab::history::PhiGenerator;
//! use attractorlab::solver::{integrate, RunParams};
//!
//! let spec = ModelSpec::default_model(3, 2)?;
//! let traj = integrate(&spec, &PhiGenerator::random(7), &RunParams::new(0.0, 1.0, 1e-3))?;
//! assert!(traj.is_complete());
//! assert_eq!(traj.snapshots(), 1001);
//! # Ok::<(), attractorlab::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod history;
pub mod model;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
