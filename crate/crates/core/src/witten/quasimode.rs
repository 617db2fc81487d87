use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Potential;
use crate::landscape::WellDecomposition;

use super::{level_points, DiscreteWitten};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuasiModeKind {
    /// Lives on nodes; built from `χ_n e^{−(φ−φ₀)/h}`.
    ZeroForm,
    /// Lives on midpoints; built from `θ_k e^{(φ−σ₁)/h}`.
    OneForm,
}

/// An `L²`-normalized quasi-mode sampled on the grid.
#[derive(Debug, Clone, Serialize)]
pub struct QuasiMode {
    pub kind: QuasiModeKind,
    pub index: usize,
    pub h: f64,
    pub values: Vec<f64>,
    /// `c_n(h)` for zero-forms, `d_k(h)` for one-forms.
    pub normalization: f64,
    /// `ε` of the cutoff `χ_n`, or `δ₀` of `θ_k`.
    pub cutoff: f64,
}

/// `C^∞` step: `0` for `t ≤ 0`, `1` for `t ≥ 1`, glued from `e^{−1/t}`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Cutoff `χ_n`: one where `φ ≤ σ₁ − 2ε`, zero where `φ ≥ σ₁ − ε`, inside `E_n`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WellCutoff {
    outer_lo: f64,
    inner_lo: f64,
    inner_hi: f64,
    outer_hi: f64,
}

impl WellCutoff {
    pub(crate) fn new(pot: &Potential, decomp: &WellDecomposition, well: usize, eps_cut: f64) -> Result<Self> {
        if !decomp.sigma1.is_finite() {
            return Ok(Self {
                outer_lo: f64::NEG_INFINITY,
                inner_lo: f64::NEG_INFINITY,
                inner_hi: f64::INFINITY,
                outer_hi: f64::INFINITY,
            });
        }
        if !(eps_cut > 0.0 && 2.0 * eps_cut < decomp.s) {
            return Err(Error::EmptyCutoff { well, eps_cut });
        }
        let (inner_lo, inner_hi) = level_points(pot, decomp, well, decomp.sigma1 - 2.0 * eps_cut)?;
        let (outer_lo, outer_hi) = level_points(pot, decomp, well, decomp.sigma1 - eps_cut)?;
        Ok(Self { outer_lo, inner_lo, inner_hi, outer_hi })
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        if x >= self.inner_lo && x <= self.inner_hi {
            1.0
        } else if x < self.inner_lo {
            smooth_step((x - self.outer_lo) / (self.inner_lo - self.outer_lo))
        } else {
            smooth_step((self.outer_hi - x) / (self.outer_hi - self.inner_hi))
        }
    }

    pub(crate) fn plateau(&self) -> (f64, f64) {
        (self.inner_lo, self.inner_hi)
    }
}

fn check_well(decomp: &WellDecomposition, well: usize) -> Result<()> {
    if well >= decomp.well_count() {
        return Err(Error::InvalidArgument(format!("well {well} of {}", decomp.well_count())));
    }
    Ok(())
}

/// `f_n⁽⁰⁾ = h^{−1/4} c_n(h) χ_n e^{−(φ−φ₀)/h}` on the nodes, unit `L²` norm.
pub fn quasimode0(
    pot: &Potential,
    w: &DiscreteWitten,
    decomp: &WellDecomposition,
    well: usize,
    eps_cut: f64,
) -> Result<QuasiMode> {
    check_well(decomp, well)?;
    let cut = WellCutoff::new(pot, decomp, well, eps_cut)?;
    let h = w.h;
    let raw: Vec<f64> = w
        .grid
        .nodes()
        .iter()
        .zip(&w.phi)
        .map(|(&x, &p)| {
            let c = cut.eval(x);
            if c == 0.0 {
                0.0
            } else {
                c * (-(p - decomp.phi0) / h).exp()
            }
        })
        .collect();
    let norm = w.l2_norm(&raw);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Overflow(format!("zero-form quasi-mode {well} has norm {norm}")));
    }
    Ok(QuasiMode {
        kind: QuasiModeKind::ZeroForm,
        index: well,
        h,
        values: raw.iter().map(|v| v / norm).collect(),
        normalization: h.powf(0.25) / norm,
        cutoff: eps_cut,
    })
}

/// Default `δ₀` for saddle `k`: halfway between the smallest radius on which
/// `θ_k ≡ 1` covers the transition layers of both neighbouring cutoffs (with
/// a 10% safety factor) and the largest radius that keeps `θ_k` away from the
/// neighbouring minima and the other bumps.
pub fn default_delta0(pot: &Potential, decomp: &WellDecomposition, saddle: usize, eps_cut: f64) -> Result<f64> {
    let (lo, hi) = delta0_bounds(pot, decomp, saddle, eps_cut)?;
    if lo >= hi {
        return Err(Error::OverlappingSupports(format!("no admissible δ₀ for saddle {saddle}: need {lo} < δ₀ < {hi}")));
    }
    Ok(0.5 * (lo + hi))
}

fn delta0_bounds(pot: &Potential, decomp: &WellDecomposition, k: usize, eps_cut: f64) -> Result<(f64, f64)> {
    if k >= decomp.saddles.len() {
        return Err(Error::InvalidArgument(format!("saddle {k} of {}", decomp.saddles.len())));
    }
    let s = decomp.saddles[k];
    let left = WellCutoff::new(pot, decomp, k, eps_cut)?.plateau().1;
    let right = WellCutoff::new(pot, decomp, k + 1, eps_cut)?.plateau().0;
    let reach = (s - left).max(right - s);
    Ok((2.2 * reach, upper_delta0(decomp, k)))
}

fn upper_delta0(decomp: &WellDecomposition, k: usize) -> f64 {
    let s = decomp.saddles[k];
    let mut upper = (s - decomp.minima[k]).min(decomp.minima[k + 1] - s);
    if k > 0 {
        upper = upper.min(0.5 * (s - decomp.saddles[k - 1]));
    }
    if k + 1 < decomp.saddles.len() {
        upper = upper.min(0.5 * (decomp.saddles[k + 1] - s));
    }
    upper
}

/// `f_k⁽¹⁾ = h^{−1/4} d_k(h) θ_k e^{(φ−σ₁)/h}` on the midpoints, unit `L²` norm.
pub fn quasimode1(w: &DiscreteWitten, decomp: &WellDecomposition, saddle: usize, delta0: f64) -> Result<QuasiMode> {
    if saddle >= decomp.saddles.len() {
        return Err(Error::InvalidArgument(format!("saddle {saddle} of {}", decomp.saddles.len())));
    }
    if !(delta0 > 0.0) || delta0 >= upper_delta0(decomp, saddle) {
        return Err(Error::OverlappingSupports(format!(
            "δ₀ = {delta0} for saddle {saddle} must lie in (0, {})",
            upper_delta0(decomp, saddle)
        )));
    }
    let s = decomp.saddles[saddle];
    let h = w.h;
    let raw: Vec<f64> = w
        .grid
        .midpoints()
        .iter()
        .zip(&w.phi_mid)
        .map(|(&x, &p)| {
            let t = smooth_step((delta0 - (x - s).abs()) / (0.5 * delta0));
            if t == 0.0 {
                0.0
            } else {
                t * ((p - decomp.sigma1) / h).exp()
            }
        })
        .collect();
    let norm = w.l2_norm(&raw);
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Overflow(format!("one-form quasi-mode {saddle} has norm {norm}")));
    }
    Ok(QuasiMode {
        kind: QuasiModeKind::OneForm,
        index: saddle,
        h,
        values: raw.iter().map(|v| v / norm).collect(),
        normalization: h.powf(0.25) / norm,
        cutoff: delta0,
    })
}
