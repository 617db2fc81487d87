//! Numerical metastability for one-dimensional Kramers–Smoluchowski dynamics.
//!
//! The crate follows the low-temperature analysis of the drift–diffusion
//! equation `∂ₜρ = ∂ₓ(∂ₓρ + ε⁻²ρ∂ₓφ)` through the Witten Laplacian
//! `Δ_φ = −h²∂ₓ² + φ′² − hφ″` (`h = 2ε²`):
//!
//! * [`expr`] parses the potential `φ` and evaluates `φ, φ′, φ″` exactly,
//! * [`landscape`] finds critical points, checks the multi-well hypotheses
//!   and splits the sublevel set `{φ < σ₁}` into wells,
//! * [`reduction`] builds the reduced matrices `L₀`, `A₀` (and weighted graph
//!   Laplacians) and evolves `α(τ) = e^{−τA}β`,
//! * [`witten`] discretizes `Δ_φ = d_φ* d_φ` in factorized form, computes its
//!   exponentially small eigenvalues, quasi-modes and the effective matrix,
//! * [`dynamics`] propagates the heat flow over times `∼ e^{2S/h}` and compares
//!   it with the reduced model.

pub mod dynamics;
pub mod error;
pub mod expr;
pub mod landscape;
pub mod linalg;
pub mod reduction;
pub mod witten;

pub use error::{Error, ErrorClass, Result};
pub use expr::{Dual2, Expr, Potential};
pub use landscape::{AssumptionReport, CriticalKind, CriticalPoint, Interval, Tolerances, WellDecomposition};
pub use linalg::{SymEigen, SymMatrix};
pub use reduction::{GraphSpec, ReducedModel};
pub use witten::{DiscreteWitten, Grid, QuasiMode, Spectrum};
