//! Factorized discretization of the Witten Laplacian and its low-lying spectrum.
//!
//! The discrete `d_φ` is the `(n−1)×n` bidiagonal matrix
//! `(d u)_j = (h/Δx)·(e^{(φ_{j+1}−φ_{j+½})/h} u_{j+1} − e^{(φ_j−φ_{j+½})/h} u_j)`,
//! i.e. `e^{−φ/h} ∘ h∂ₓ ∘ e^{φ/h}` with the conjugation evaluated at the
//! midpoint. `M = dᵀd` is then positive semi-definite, annihilates
//! `e^{−(φ−φ₀)/h}` up to rounding and shares its nonzero spectrum with
//! `M₁ = d·dᵀ`. Vectors on nodes are plain function samples; the `L²` inner
//! product is `Δx·Σ`.

mod effective;
mod operator;
mod quasimode;
mod spectrum;

pub use effective::{effective_matrix, hat_l, EffectiveMatrix};
pub use operator::{assemble, DiscreteWitten};
pub use quasimode::{default_delta0, quasimode0, quasimode1, smooth_step, QuasiMode, QuasiModeKind};
pub use spectrum::{full_spectrum, low_spectrum, PseudoInverse, Spectrum, MAX_DENSE_NODES};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Potential;
use crate::landscape::{bisect_level, level_crossing, Interval, WellDecomposition};

pub const MIN_GRID_NODES: usize = 501;

/// Uniform grid `x_j = a + jΔx`, `j = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < MIN_GRID_NODES {
            return Err(Error::GridTooSmall { n, min: MIN_GRID_NODES });
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidArgument(format!("grid interval [{a}, {b}] is not a finite interval")));
        }
        Ok(Self { a, b, n })
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / (self.n - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if j + 1 == self.n {
            self.b
        } else {
            self.a + j as f64 * self.dx()
        }
    }

    pub fn midpoint(&self, j: usize) -> f64 {
        self.a + (j as f64 + 0.5) * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.n - 1).map(|j| self.midpoint(j)).collect()
    }

    /// Trapezoidal quadrature weights.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let dx = self.dx();
        let mut w = vec![dx; self.n];
        w[0] = 0.5 * dx;
        w[self.n - 1] = 0.5 * dx;
        w
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.a, self.b)
    }
}

/// Smallest interval around all wells on which `φ ≥ σ₁ + margin` at both ends.
///
/// `margin` defaults to `2S`. For a single well the level is `φ₀ + 2` and the
/// interval is made symmetric about the minimum.
pub fn build_grid(pot: &Potential, decomp: &WellDecomposition, n: usize, margin: Option<f64>) -> Result<Grid> {
    if n < MIN_GRID_NODES {
        return Err(Error::GridTooSmall { n, min: MIN_GRID_NODES });
    }
    let first = decomp.minima[0];
    let last = decomp.minima[decomp.minima.len() - 1];
    if decomp.well_count() == 1 {
        let level = decomp.phi0 + 2.0;
        let left = level_crossing(pot, first, -1.0, level)?;
        let right = level_crossing(pot, first, 1.0, level)?;
        let r = (first - left).max(right - first);
        return Grid::new(first - r, first + r, n);
    }
    let margin = margin.unwrap_or(2.0 * decomp.s);
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Error::InvalidArgument(format!("grid margin {margin} must be non-negative")));
    }
    let level = decomp.sigma1 + margin;
    let left = level_crossing(pot, first, -1.0, level)?;
    let right = level_crossing(pot, last, 1.0, level)?;
    Grid::new(left, right, n)
}

/// Points on either side of the minimum of well `n` where `φ` reaches `level`.
pub(crate) fn level_points(pot: &Potential, decomp: &WellDecomposition, well: usize, level: f64) -> Result<(f64, f64)> {
    let m = decomp.minima[well];
    let e = decomp.wells[well];
    let lo = if e.lo.is_finite() { bisect_level(pot, m, e.lo, level)? } else { level_crossing(pot, m, -1.0, level)? };
    let hi = if e.hi.is_finite() { bisect_level(pot, m, e.hi, level)? } else { level_crossing(pot, m, 1.0, level)? };
    Ok((lo, hi))
}
