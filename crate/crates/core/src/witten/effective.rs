use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, gram_schmidt, SymMatrix};

use super::{DiscreteWitten, QuasiMode, QuasiModeKind, Spectrum};

fn check_modes(w: &DiscreteWitten, modes: &[QuasiMode], kind: QuasiModeKind) -> Result<()> {
    for (i, q) in modes.iter().enumerate() {
        if q.kind != kind {
            return Err(Error::InvalidArgument(format!("quasi-mode {i} has kind {:?}, expected {kind:?}", q.kind)));
        }
        if q.h != w.h {
            return Err(Error::InvalidArgument(format!(
                "quasi-mode {i} was built for h = {}, operator has h = {}",
                q.h, w.h
            )));
        }
        let len = match kind {
            QuasiModeKind::ZeroForm => w.n(),
            QuasiModeKind::OneForm => w.n() - 1,
        };
        if q.values.len() != len {
            return Err(Error::SizeMismatch(format!("quasi-mode {i} has {} samples, expected {len}", q.values.len())));
        }
    }
    Ok(())
}

/// Interaction matrix `ℓ̂_{ij} = ⟨f_i⁽¹⁾, d f_j⁽⁰⁾⟩`, of size `(N−1)×N`.
pub fn hat_l(w: &DiscreteWitten, zero_forms: &[QuasiMode], one_forms: &[QuasiMode]) -> Result<Array2<f64>> {
    check_modes(w, zero_forms, QuasiModeKind::ZeroForm)?;
    check_modes(w, one_forms, QuasiModeKind::OneForm)?;
    let df: Vec<Vec<f64>> = zero_forms.iter().map(|q| w.apply_d(&q.values)).collect();
    let mut l = Array2::zeros((one_forms.len(), zero_forms.len()));
    for (i, f1) in one_forms.iter().enumerate() {
        for (j, d0) in df.iter().enumerate() {
            l[[i, j]] = w.dx() * dot(&f1.values, d0);
        }
    }
    Ok(l)
}

/// Matrix of `Δ_φ` on the low eigenspace in the basis aligned with the quasi-modes.
#[derive(Debug, Clone, Serialize)]
pub struct EffectiveMatrix {
    pub m_eff: SymMatrix,
    /// `M_eff / (h e^{−2S/h})`.
    pub a_num: SymMatrix,
    /// `‖Π f_n⁽⁰⁾‖` before Gram–Schmidt.
    pub projection_norms: Vec<f64>,
    /// `‖Π f_n⁽⁰⁾ − f_n⁽⁰⁾‖`.
    pub alignment_errors: Vec<f64>,
}

/// Projects the zero-form quasi-modes onto the span of the `N` lowest
/// eigenvectors, orthonormalizes them in index order and returns the matrix
/// of `M` in that basis together with its rescaling by `h e^{−2S/h}`.
pub fn effective_matrix(
    w: &DiscreteWitten,
    spectrum: &Spectrum,
    zero_forms: &[QuasiMode],
    s: f64,
) -> Result<EffectiveMatrix> {
    check_modes(w, zero_forms, QuasiModeKind::ZeroForm)?;
    let n_wells = zero_forms.len();
    if spectrum.len() < n_wells {
        return Err(Error::SizeMismatch(format!(
            "spectrum has {} eigenpairs, {n_wells} quasi-modes need as many",
            spectrum.len()
        )));
    }
    let basis: Vec<Vec<f64>> = (0..n_wells).map(|k| spectrum.vector(k)).collect();
    let mut projected = Vec::with_capacity(n_wells);
    let mut projection_norms = Vec::with_capacity(n_wells);
    let mut alignment_errors = Vec::with_capacity(n_wells);
    for (idx, q) in zero_forms.iter().enumerate() {
        let mut g = vec![0.0; w.n()];
        for v in &basis {
            crate::linalg::axpy(dot(v, &q.values), v, &mut g);
        }
        let norm = w.l2_norm(&g);
        if !(norm >= 0.5) {
            return Err(Error::RankDeficientProjection { index: idx, norm });
        }
        let diff: Vec<f64> = g.iter().zip(&q.values).map(|(a, b)| a - b).collect();
        alignment_errors.push(w.l2_norm(&diff));
        projection_norms.push(norm);
        projected.push(g);
    }
    gram_schmidt(&mut projected, &[]);
    let de: Vec<Vec<f64>> = projected.iter().map(|e| w.apply_d(e)).collect();
    let mut m = Array2::zeros((n_wells, n_wells));
    for i in 0..n_wells {
        for j in 0..n_wells {
            m[[i, j]] = dot(&de[i], &de[j]);
        }
    }
    let m_eff = SymMatrix::symmetrized(m);
    let a_num = m_eff.scaled(1.0 / (w.h * (-2.0 * s / w.h).exp()));
    Ok(EffectiveMatrix { m_eff, a_num, projection_norms, alignment_errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Potential;
    use crate::landscape::{decompose_wells, find_critical_points, Interval, Tolerances, WellDecomposition};
    use crate::linalg::sym_eigen;
    use crate::reduction::build_a0;
    use crate::witten::{assemble, build_grid, default_delta0, low_spectrum, quasimode0, quasimode1};

    struct Case {
        p: Potential,
        d: WellDecomposition,
        w: DiscreteWitten,
    }

    fn case(src: &str, a: f64, b: f64, h: f64, n: usize) -> Case {
        let p = Potential::parse(src).unwrap();
        let t = Tolerances::default();
        let c = find_critical_points(&p, Interval::new(a, b), &t).unwrap();
        let d = decompose_wells(&p, &c, &t).unwrap();
        let w = assemble(&p, h, build_grid(&p, &d, n, None).unwrap()).unwrap();
        Case { p, d, w }
    }

    fn modes(c: &Case) -> (Vec<QuasiMode>, Vec<QuasiMode>) {
        let eps = c.d.s / 8.0;
        let q0 = (0..c.d.well_count()).map(|n| quasimode0(&c.p, &c.w, &c.d, n, eps).unwrap()).collect();
        let q1 = (0..c.d.saddles.len())
            .map(|k| quasimode1(&c.w, &c.d, k, default_delta0(&c.p, &c.d, k, eps).unwrap()).unwrap())
            .collect();
        (q0, q1)
    }

    #[test]
    fn hat_l_pattern_triple_well() {
        let c = case("x^2*(x^2-1)^2", -1.6, 1.6, 0.05, 1601);
        let (q0, q1) = modes(&c);
        let l = hat_l(&c.w, &q0, &q1).unwrap();
        assert_eq!(l.dim(), (2, 3));
        for i in 0..2 {
            assert!(l[[i, i]] < 0.0 && l[[i, i + 1]] > 0.0);
        }
        assert!(l[[0, 2]].abs() <= 1e-12 && l[[1, 0]].abs() <= 1e-12);
    }

    #[test]
    fn effective_matrix_matches_eigenvalues() {
        for (src, a, b, h) in [("(x^2-1)^2", -2.5, 2.5, 0.15), ("x^2*(x^2-1)^2", -1.6, 1.6, 0.04)] {
            let c = case(src, a, b, h, 1201);
            let (q0, _) = modes(&c);
            let n = c.d.well_count();
            let spec = low_spectrum(&c.w, n + 1, 0.05).unwrap();
            assert_eq!(spec.count_below, n);
            let e = effective_matrix(&c.w, &spec, &q0, c.d.s).unwrap();
            let eig = sym_eigen(&e.m_eff).unwrap();
            for k in 1..n {
                let rel = (eig.values[k] - spec.values[k]).abs() / spec.values[k];
                assert!(rel < 1e-8, "{src}: {k}: {rel}");
            }
            assert!(eig.values[0].abs() < 1e-8 * spec.values[1]);
            assert!(e.alignment_errors.iter().all(|x| *x < 0.1), "{:?}", e.alignment_errors);
            // A_num tends to A₀
            let a0 = build_a0(&c.d.mu, &c.d.nu).unwrap();
            let err = (e.a_num.as_array() - a0.as_array()).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(err < 0.5 * a0.norm(), "{src}: {err}");
        }
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let c = case("(x^2-1)^2", -2.5, 2.5, 0.15, 801);
        let (q0, q1) = modes(&c);
        assert!(hat_l(&c.w, &q1, &q0).is_err());
        let other = assemble(&c.p, 0.2, c.w.grid).unwrap();
        assert!(hat_l(&other, &q0, &q1).is_err());
        let spec = low_spectrum(&c.w, 1, 0.05).unwrap();
        assert!(effective_matrix(&c.w, &spec, &q0, c.d.s).is_err());
    }
}
