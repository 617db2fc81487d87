//! Exact spectral propagation of the Witten heat flow and of the
//! Kramers–Smoluchowski density, and comparison with the reduced model.
//!
//! Rescaled time `τ` relates to the heat-flow time by `t = τ/ν_h` with
//! `ν_h = h e^{−2S/h}`, and to physical time by `t_phys = h² t`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Potential;
use crate::landscape::{Interval, WellDecomposition};
use crate::linalg::dot;
use crate::reduction::{build_a0, Propagator};
use crate::witten::{assemble, build_grid, full_spectrum, low_spectrum, DiscreteWitten, Grid, Spectrum};

/// `ν_h = h e^{−2S/h}`.
pub fn time_scale(h: f64, s: f64) -> f64 {
    h * (-2.0 * s / h).exp()
}

/// `0` followed by `count` log-spaced points in `[tmax·10⁻³, tmax]`.
pub fn default_tau_grid(tmax: f64, count: usize) -> Vec<f64> {
    let mut taus = vec![0.0];
    let lo = (tmax * 1e-3).ln();
    let hi = tmax.ln();
    for i in 0..count {
        let t = if count == 1 { hi } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 };
        taus.push(if i + 1 == count { tmax } else { t.exp() });
    }
    taus
}

/// Trajectory sampled at a list of times.
#[derive(Debug, Clone, Serialize)]
pub struct EvolutionResult {
    /// Rescaled times `τ` for the heat flow, physical times for [`ks_solve`].
    pub times: Vec<f64>,
    /// `u(τ)` for the heat flow, `ρ(t)` for [`ks_solve`], sampled on the nodes.
    #[serde(skip)]
    pub states: Vec<Vec<f64>>,
    /// `m_n = ∫_{E_n} ρ` with `ρ = e^{−(φ−φ₀)/h} u`.
    pub masses: Vec<Vec<f64>>,
    /// `b_n = ⟨u, ψ_n⟩`.
    pub coefficients: Vec<Vec<f64>>,
    /// `∫ρ = Δx·Σ u_j e^{−(φ_j−φ₀)/h}`.
    pub total_mass: Vec<f64>,
    /// `‖u‖_{L²}`.
    pub norms: Vec<f64>,
}

/// Orthonormal well profiles `ψ_n = c_n h^{−1/4} 1l_{E_n} e^{−(φ−φ₀)/h}`.
#[derive(Debug, Clone)]
pub struct PsiBasis {
    pub psi: Vec<Vec<f64>>,
    /// `c_n(h)`.
    pub c: Vec<f64>,
    /// `e^{−(φ_j−φ₀)/h}` on the nodes.
    pub gibbs: Vec<f64>,
}

impl PsiBasis {
    pub fn new(w: &DiscreteWitten, decomp: &WellDecomposition) -> Result<Self> {
        let h = w.h;
        let xs = w.grid.nodes();
        let gibbs: Vec<f64> = w.phi.iter().map(|p| (-(p - decomp.phi0) / h).exp()).collect();
        let mut psi = Vec::with_capacity(decomp.well_count());
        let mut c = Vec::with_capacity(decomp.well_count());
        for (n, e) in decomp.wells.iter().enumerate() {
            let raw: Vec<f64> = xs.iter().zip(&gibbs).map(|(x, g)| if e.contains(*x) { *g } else { 0.0 }).collect();
            let norm = w.l2_norm(&raw);
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::Overflow(format!("well profile {n} has norm {norm}")));
            }
            psi.push(raw.iter().map(|v| v / norm).collect());
            c.push(h.powf(0.25) / norm);
        }
        Ok(Self { psi, c, gibbs })
    }

    /// `Ψ(β) = Σ β_n ψ_n`.
    pub fn combine(&self, beta: &[f64]) -> Result<Vec<f64>> {
        if beta.len() != self.psi.len() {
            return Err(Error::SizeMismatch(format!("beta has {} entries for {} wells", beta.len(), self.psi.len())));
        }
        let mut u = vec![0.0; self.gibbs.len()];
        for (b, p) in beta.iter().zip(&self.psi) {
            crate::linalg::axpy(*b, p, &mut u);
        }
        Ok(u)
    }
}

/// Initial datum `Ψ(β)` built from sharp well indicators.
pub fn prepare_initial(w: &DiscreteWitten, decomp: &WellDecomposition, beta: &[f64]) -> Result<Vec<f64>> {
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidArgument("beta must be finite".into()));
    }
    PsiBasis::new(w, decomp)?.combine(beta)
}

/// Share of a node in a well: 1 inside, 1/2 on a separating saddle, 0 outside.
fn node_share(e: &Interval, x: f64, tol: f64) -> f64 {
    if (x - e.lo).abs() <= tol || (x - e.hi).abs() <= tol {
        0.5
    } else if e.contains(x) {
        1.0
    } else {
        0.0
    }
}

/// `m_n = ∫_{E_n} ρ` by the trapezoidal rule. A node sitting on a saddle is
/// split evenly between the two wells it separates.
pub fn well_masses(rho: &[f64], decomp: &WellDecomposition, grid: &Grid) -> Vec<f64> {
    let xs = grid.nodes();
    let wq = grid.trapezoid_weights();
    let tol = 1e-9 * grid.dx();
    decomp.wells.iter().map(|e| (0..grid.n).map(|j| node_share(e, xs[j], tol) * wq[j] * rho[j]).sum()).collect()
}

/// `Σ_k e^{−λ_k t} ⟨u₀, v_k⟩ v_k` for heat-flow times `t`. The first pair is
/// the exact kernel and is kept stationary.
fn propagate(full: &Spectrum, u0: &[f64], times: &[f64]) -> Vec<Vec<f64>> {
    let n = u0.len();
    let coeffs: Vec<f64> =
        (0..full.len()).map(|k| full.vectors.row(k).iter().zip(u0).map(|(a, b)| a * b).sum()).collect();
    times
        .iter()
        .map(|&t| {
            let mut u = vec![0.0; n];
            for (k, c) in coeffs.iter().enumerate() {
                let lambda = if k == 0 { 0.0 } else { full.values[k].max(0.0) };
                let f = if t == 0.0 { 1.0 } else { (-lambda * t).exp() };
                if f == 0.0 || *c == 0.0 {
                    continue;
                }
                let row = full.vectors.row(k);
                for (ui, vi) in u.iter_mut().zip(row.iter()) {
                    *ui += f * c * vi;
                }
            }
            u
        })
        .collect()
}

fn check_complete(w: &DiscreteWitten, full: &Spectrum) -> Result<()> {
    if full.len() != w.n() {
        return Err(Error::InvalidArgument(format!(
            "spectrum has {} pairs, a complete decomposition needs {}",
            full.len(),
            w.n()
        )));
    }
    Ok(())
}

fn summarize(
    w: &DiscreteWitten,
    decomp: &WellDecomposition,
    basis: &PsiBasis,
    times: Vec<f64>,
    us: Vec<Vec<f64>>,
    states: Vec<Vec<f64>>,
) -> EvolutionResult {
    let dx = w.dx();
    let mut masses = Vec::with_capacity(us.len());
    let mut coefficients = Vec::with_capacity(us.len());
    let mut total_mass = Vec::with_capacity(us.len());
    let mut norms = Vec::with_capacity(us.len());
    for u in &us {
        let rho: Vec<f64> = u.iter().zip(&basis.gibbs).map(|(a, g)| a * g).collect();
        masses.push(well_masses(&rho, decomp, &w.grid));
        coefficients.push(basis.psi.iter().map(|p| w.l2_dot(u, p)).collect());
        total_mass.push(dx * dot(u, &basis.gibbs));
        norms.push(w.l2_norm(u));
    }
    EvolutionResult { times, states, masses, coefficients, total_mass, norms }
}

/// Heat flow `u(τ) = e^{−(τ/ν_h)M} u₀` from a complete eigen-decomposition.
pub fn heat_evolve(
    w: &DiscreteWitten,
    full: &Spectrum,
    decomp: &WellDecomposition,
    u0: &[f64],
    taus: &[f64],
    nu_h: f64,
) -> Result<EvolutionResult> {
    check_complete(w, full)?;
    if u0.len() != w.n() {
        return Err(Error::SizeMismatch(format!("u0 has {} entries for {} nodes", u0.len(), w.n())));
    }
    if !(nu_h > 0.0 && nu_h.is_finite()) {
        return Err(Error::InvalidArgument(format!("time scale ν_h = {nu_h} must be positive and finite")));
    }
    if taus.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("times must be finite and non-negative".into()));
    }
    let ts: Vec<f64> = taus.iter().map(|t| t / nu_h).collect();
    let us = propagate(full, u0, &ts);
    let basis = PsiBasis::new(w, decomp)?;
    Ok(summarize(w, decomp, &basis, taus.to_vec(), us.clone(), us))
}

/// Kramers–Smoluchowski density at physical times, through
/// `ρ(t) = e^{−(φ−φ₀)/h} u(t/h²)` with `u₀ = e^{(φ−φ₀)/h} ρ₀`.
pub fn ks_solve(
    w: &DiscreteWitten,
    full: &Spectrum,
    decomp: &WellDecomposition,
    rho0: &[f64],
    phys_times: &[f64],
) -> Result<EvolutionResult> {
    check_complete(w, full)?;
    if rho0.len() != w.n() {
        return Err(Error::SizeMismatch(format!("rho0 has {} entries for {} nodes", rho0.len(), w.n())));
    }
    if phys_times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument("times must be finite and non-negative".into()));
    }
    let h = w.h;
    let u0: Vec<f64> =
        rho0.iter().zip(&w.phi).map(|(r, p)| if *r == 0.0 { 0.0 } else { r * ((p - decomp.phi0) / h).exp() }).collect();
    if let Some(j) = u0.iter().position(|v| !v.is_finite()) {
        return Err(Error::Overflow(format!(
            "e^{{(φ−φ₀)/h}} overflows at x = {}; shrink the grid domain",
            w.grid.node(j)
        )));
    }
    let ts: Vec<f64> = phys_times.iter().map(|t| t / (h * h)).collect();
    let us = propagate(full, &u0, &ts);
    let basis = PsiBasis::new(w, decomp)?;
    let rhos: Vec<Vec<f64>> = us.iter().map(|u| u.iter().zip(&basis.gibbs).map(|(a, g)| a * g).collect()).collect();
    Ok(summarize(w, decomp, &basis, phys_times.to_vec(), us, rhos))
}

/// Discretization settings shared by every `h` of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DynamicsSetup {
    pub grid_n: usize,
    /// Explicit grid interval; otherwise chosen by [`build_grid`].
    pub grid_domain: Option<Interval>,
    pub margin: Option<f64>,
    pub eps0: f64,
}

impl Default for DynamicsSetup {
    fn default() -> Self {
        Self { grid_n: 1001, grid_domain: None, margin: None, eps0: 0.05 }
    }
}

/// Full versus reduced dynamics at one `h`, sampled on a `τ` grid.
#[derive(Debug, Clone, Serialize)]
pub struct HRun {
    pub h: f64,
    pub grid: Grid,
    pub nu_h: f64,
    /// `λ_1..λ_{N+1}`.
    pub lambda: Vec<f64>,
    pub count_below: usize,
    pub taus: Vec<f64>,
    /// `m̂_n(τ) = m_n(τ) c_n(h) h^{−1/4}`, equal to `β` at `τ = 0`.
    pub masses: Vec<Vec<f64>>,
    /// `α(τ) = e^{−τA₀}β`.
    pub alpha: Vec<Vec<f64>>,
    /// `‖u(τ) − Ψ(α(τ))‖_{L²}`.
    pub l2_error: Vec<f64>,
    /// `‖ρ(τ) − ρ_red(τ)‖_{L¹} / ‖ρ₀‖_{L¹}`.
    pub l1_error: Vec<f64>,
    pub mass_error: Vec<f64>,
    pub norms: Vec<f64>,
    pub total_mass: Vec<f64>,
}

impl HRun {
    pub fn sup_l2_error(&self) -> f64 {
        self.l2_error.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_mass_error(&self) -> f64 {
        self.mass_error.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_l1_error(&self) -> f64 {
        self.l1_error.iter().copied().fold(0.0, f64::max)
    }

    /// Largest relative change of `∫ρ` along the run.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.total_mass[0];
        self.total_mass.iter().map(|m| (m - m0).abs() / m0.abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
    }

    /// Whether `‖u(τ)‖` never increases beyond `rel` relative slack.
    pub fn norms_non_increasing(&self, rel: f64) -> bool {
        self.norms.windows(2).all(|p| p[1] <= p[0] * (1.0 + rel))
    }
}

/// Runs the full-versus-reduced comparison at a single `h`.
pub fn compare_at(
    pot: &Potential,
    decomp: &WellDecomposition,
    beta: &[f64],
    h: f64,
    taus: &[f64],
    setup: &DynamicsSetup,
) -> Result<HRun> {
    let n_wells = decomp.well_count();
    if n_wells < 2 {
        return Err(Error::InvalidArgument("dynamics comparison needs at least two wells".into()));
    }
    if beta.len() != n_wells {
        return Err(Error::SizeMismatch(format!("beta has {} entries for {n_wells} wells", beta.len())));
    }
    let grid = match setup.grid_domain {
        Some(d) => Grid::new(d.lo, d.hi, setup.grid_n)?,
        None => build_grid(pot, decomp, setup.grid_n, setup.margin)?,
    };
    let w = assemble(pot, h, grid)?;
    let low = low_spectrum(&w, (n_wells + 1).min(20), setup.eps0)?;
    let full = full_spectrum(&w, &low)?;
    let nu_h = time_scale(h, decomp.s);
    let basis = PsiBasis::new(&w, decomp)?;
    let u0 = basis.combine(beta)?;
    let ev = heat_evolve(&w, &full, decomp, &u0, taus, nu_h)?;
    let reduced = Propagator::new(&build_a0(&decomp.mu, &decomp.nu)?)?;

    let dx = w.dx();
    let rho_l1 = |u: &[f64]| dx * u.iter().zip(&basis.gibbs).map(|(a, g)| (a * g).abs()).sum::<f64>();
    let l1_0 = rho_l1(&u0).max(f64::MIN_POSITIVE);
    let scale: Vec<f64> = basis.c.iter().map(|c| c / h.powf(0.25)).collect();

    let mut masses = Vec::with_capacity(taus.len());
    let mut alpha = Vec::with_capacity(taus.len());
    let mut l2_error = Vec::with_capacity(taus.len());
    let mut l1_error = Vec::with_capacity(taus.len());
    let mut mass_error = Vec::with_capacity(taus.len());
    for (i, &tau) in taus.iter().enumerate() {
        let a = reduced.apply(beta, tau)?.to_vec();
        let target = basis.combine(&a)?;
        let diff: Vec<f64> = ev.states[i].iter().zip(&target).map(|(x, y)| x - y).collect();
        l2_error.push(w.l2_norm(&diff));
        l1_error.push(rho_l1(&diff) / l1_0);
        let m: Vec<f64> = ev.masses[i].iter().zip(&scale).map(|(m, s)| m * s).collect();
        mass_error.push(m.iter().zip(&a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
        masses.push(m);
        alpha.push(a);
    }
    Ok(HRun {
        h,
        grid,
        nu_h,
        lambda: low.values.clone(),
        count_below: low.count_below,
        taus: taus.to_vec(),
        masses,
        alpha,
        l2_error,
        l1_error,
        mass_error,
        norms: ev.norms,
        total_mass: ev.total_mass,
    })
}

/// Least-squares slope of `ln e` against `ln h`; NaN when undefined.
pub fn fit_order(hs: &[f64], errs: &[f64]) -> f64 {
    if hs.len() < 2 || hs.len() != errs.len() || errs.iter().any(|e| !(*e > 0.0)) {
        return f64::NAN;
    }
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub h: f64,
    pub grid_n: usize,
    pub lambda_2_ratio: f64,
    pub sup_l2_error: f64,
    pub sup_mass_error: f64,
    pub sup_l1_error: f64,
    pub mass_drift: f64,
    pub norms_non_increasing: bool,
}

/// Per-`h` errors of the full dynamics against the reduced model and their fitted orders.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub beta: Vec<f64>,
    pub taus: Vec<f64>,
    pub rows: Vec<ComparisonRow>,
    pub l2_order: f64,
    pub mass_order: f64,
    pub l1_order: f64,
}

impl ComparisonReport {
    pub fn from_runs(beta: &[f64], taus: &[f64], runs: &[HRun]) -> Self {
        let rows: Vec<ComparisonRow> = runs
            .iter()
            .map(|r| ComparisonRow {
                h: r.h,
                grid_n: r.grid.n,
                lambda_2_ratio: r.lambda.get(1).map_or(f64::NAN, |l| l / r.nu_h),
                sup_l2_error: r.sup_l2_error(),
                sup_mass_error: r.sup_mass_error(),
                sup_l1_error: r.sup_l1_error(),
                mass_drift: r.mass_drift(),
                norms_non_increasing: r.norms_non_increasing(1e-12),
            })
            .collect();
        let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let order = |f: fn(&ComparisonRow) -> f64| fit_order(&hs, &rows.iter().map(f).collect::<Vec<_>>());
        Self {
            beta: beta.to_vec(),
            taus: taus.to_vec(),
            l2_order: order(|r| r.sup_l2_error),
            mass_order: order(|r| r.sup_mass_error),
            l1_order: order(|r| r.sup_l1_error),
            rows,
        }
    }
}

/// Convergence study of the full dynamics toward `Ψ(e^{−τA₀}β)` over `h_list`.
pub fn verify_theorem(
    pot: &Potential,
    decomp: &WellDecomposition,
    beta: &[f64],
    h_list: &[f64],
    taus: &[f64],
    setup: &DynamicsSetup,
) -> Result<(ComparisonReport, Vec<HRun>)> {
    let runs = h_list.iter().map(|&h| compare_at(pot, decomp, beta, h, taus, setup)).collect::<Result<Vec<_>>>()?;
    Ok((ComparisonReport::from_runs(beta, taus, &runs), runs))
}
