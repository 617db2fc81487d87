use crate::error::{Error, Result};
use crate::expr::Potential;
use crate::linalg::SymTridiagonal;

use super::Grid;

/// Largest `|φ_j − φ_{j+½}|/h` accepted by [`assemble`].
pub const EXPONENT_LIMIT: f64 = 500.0;

/// Discrete `d_φ`, `Δ_φ = dᵀd` and `M₁ = d·dᵀ` on a grid, for one value of `h`.
#[derive(Debug, Clone)]
pub struct DiscreteWitten {
    pub grid: Grid,
    pub h: f64,
    /// `φ` at the nodes.
    pub phi: Vec<f64>,
    /// `φ` at the midpoints `x_{j+½}`.
    pub phi_mid: Vec<f64>,
    /// Reference level subtracted in the exponential weights (smallest node value).
    pub phi_ref: f64,
    /// `d_{j,j}`, negative.
    pub d_diag: Vec<f64>,
    /// `d_{j,j+1}`, positive.
    pub d_sup: Vec<f64>,
}

/// Builds the factorized discretization. Only differences of `φ` over half a
/// cell enter the exponentials, so the entries stay bounded for any potential
/// once the grid resolves `φ′Δx/h`.
pub fn assemble(pot: &Potential, h: f64, grid: Grid) -> Result<DiscreteWitten> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidArgument(format!("h = {h} must lie in (0, 1]")));
    }
    let grid = Grid::new(grid.a, grid.b, grid.n)?;
    let n = grid.n;
    let phi = (0..n).map(|j| pot.value(grid.node(j))).collect::<Result<Vec<_>>>()?;
    let phi_mid = (0..n - 1).map(|j| pot.value(grid.midpoint(j))).collect::<Result<Vec<_>>>()?;
    let scale = h / grid.dx();
    let mut d_diag = Vec::with_capacity(n - 1);
    let mut d_sup = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        let left = (phi[j] - phi_mid[j]) / h;
        let right = (phi[j + 1] - phi_mid[j]) / h;
        for e in [left, right] {
            if e.abs() > EXPONENT_LIMIT {
                return Err(Error::ExponentTooLarge { h, exponent: e.abs(), limit: EXPONENT_LIMIT });
            }
        }
        d_diag.push(-scale * left.exp());
        d_sup.push(scale * right.exp());
    }
    let phi_ref = phi.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DiscreteWitten { grid, h, phi, phi_mid, phi_ref, d_diag, d_sup })
}

impl DiscreteWitten {
    pub fn n(&self) -> usize {
        self.grid.n
    }

    pub fn dx(&self) -> f64 {
        self.grid.dx()
    }

    /// `d·u`, a vector on midpoints.
    pub fn apply_d(&self, u: &[f64]) -> Vec<f64> {
        (0..self.n() - 1).map(|j| self.d_diag[j] * u[j] + self.d_sup[j] * u[j + 1]).collect()
    }

    /// `dᵀ·z`, a vector on nodes.
    pub fn apply_dt(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for j in 0..n - 1 {
            out[j] += self.d_diag[j] * z[j];
            out[j + 1] += self.d_sup[j] * z[j];
        }
        out
    }

    pub fn apply_m(&self, u: &[f64]) -> Vec<f64> {
        self.apply_dt(&self.apply_d(u))
    }

    /// `M = dᵀd` as a tridiagonal matrix.
    pub fn m(&self) -> SymTridiagonal {
        let n = self.n();
        let mut diag = vec![0.0; n];
        for j in 0..n - 1 {
            diag[j] += self.d_diag[j] * self.d_diag[j];
            diag[j + 1] += self.d_sup[j] * self.d_sup[j];
        }
        let off = (0..n - 1).map(|j| self.d_diag[j] * self.d_sup[j]).collect();
        SymTridiagonal { diag, off }
    }

    /// `M₁ = d·dᵀ` acting on midpoint vectors.
    pub fn m1(&self) -> SymTridiagonal {
        let n = self.n();
        let diag = (0..n - 1).map(|j| self.d_diag[j].powi(2) + self.d_sup[j].powi(2)).collect();
        let off = (0..n - 2).map(|j| self.d_sup[j] * self.d_diag[j + 1]).collect();
        SymTridiagonal { diag, off }
    }

    /// Couplings of `d` along its row/column path, for bidiagonal bisection.
    pub fn path_couplings(&self) -> Vec<f64> {
        self.d_diag.iter().zip(&self.d_sup).flat_map(|(a, b)| [*a, *b]).collect()
    }

    /// Exact kernel `g_j = e^{−(φ_j − φ_ref)/h}` of `d`.
    pub fn kernel(&self) -> Vec<f64> {
        self.phi.iter().map(|p| (-(p - self.phi_ref) / self.h).exp()).collect()
    }

    /// `‖d‖` bounded by the largest row sum of `|d|`.
    pub fn d_norm_bound(&self) -> f64 {
        self.d_diag.iter().zip(&self.d_sup).map(|(a, b)| a.abs() + b.abs()).fold(0.0, f64::max)
    }

    /// `L²` inner product of node vectors, `Δx·Σ`.
    pub fn l2_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.dx() * crate::linalg::dot(a, b)
    }

    pub fn l2_norm(&self, a: &[f64]) -> f64 {
        self.l2_dot(a, a).sqrt()
    }
}
