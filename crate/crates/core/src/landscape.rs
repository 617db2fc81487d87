//! Critical points, hypothesis checks and well decomposition of a 1D potential.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Potential;

/// Open interval `(lo, hi)`; infinite endpoints serialize as `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: f64,
    pub value: f64,
    pub second_derivative: f64,
    pub kind: CriticalKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub newton_tol: f64,
    pub degeneracy_tol: f64,
    pub equal_height_tol: f64,
    /// Two refined critical points closer than this are treated as merged.
    pub merge_tol: f64,
    /// Minimal |φ′| required on the outer growth regions.
    pub growth_tol: f64,
    pub n_scan: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            newton_tol: 1e-12,
            degeneracy_tol: 1e-8,
            equal_height_tol: 1e-9,
            merge_tol: 1e-9,
            growth_tol: 1e-6,
            n_scan: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub morse_ok: bool,
    pub equal_minima_ok: bool,
    pub equal_saddles_ok: bool,
    pub growth_ok: bool,
    pub diagnostics: Vec<String>,
}

impl AssumptionReport {
    pub fn all_ok(&self) -> bool {
        self.morse_ok && self.equal_minima_ok && self.equal_saddles_ok && self.growth_ok
    }
}

/// Wells `E_n` of `{φ < σ₁}` with their minima, separating saddles and Hessian data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellDecomposition {
    pub minima: Vec<f64>,
    pub saddles: Vec<f64>,
    pub wells: Vec<Interval>,
    pub phi0: f64,
    /// Common saddle value; `+∞` when there is a single well.
    pub sigma1: f64,
    /// Arrhenius number `σ₁ − φ₀`; `+∞` when there is a single well.
    #[serde(rename = "S")]
    pub s: f64,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
}

impl WellDecomposition {
    pub fn well_count(&self) -> usize {
        self.minima.len()
    }

    pub fn well_of(&self, x: f64) -> Option<usize> {
        self.wells.iter().position(|w| w.contains(x))
    }
}

const NEWTON_MAX_ITER: usize = 60;

/// Sign changes of φ′ on a uniform scan, refined by bracketed Newton iteration.
pub fn find_critical_points(pot: &Potential, domain: Interval, tols: &Tolerances) -> Result<Vec<CriticalPoint>> {
    if !(domain.lo.is_finite() && domain.hi.is_finite() && domain.lo < domain.hi) {
        return Err(Error::InvalidArgument(format!(
            "scan domain [{}, {}] is not a finite interval",
            domain.lo, domain.hi
        )));
    }
    if tols.n_scan < 100 {
        return Err(Error::InvalidArgument(format!("n_scan = {} is below 100", tols.n_scan)));
    }
    let n = tols.n_scan;
    let step = domain.width() / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| if i + 1 == n { domain.hi } else { domain.lo + i as f64 * step }).collect();
    let slopes = xs.iter().map(|&x| pot.derivative(x)).collect::<Result<Vec<_>>>()?;

    let mut found: Vec<(f64, CriticalKind)> = Vec::new();
    let mut i = 0;
    while i + 1 < n {
        let (s0, s1) = (slopes[i], slopes[i + 1]);
        if s0 == 0.0 {
            let before = if i > 0 { slopes[i - 1] } else { f64::NAN };
            let kind = classify(before, s1).ok_or_else(|| {
                Error::DegenerateLandscape(format!("critical point at x = {} without a sign change of φ′", xs[i]))
            });
            if i > 0 {
                found.push((xs[i], kind?));
            }
        } else if s0 * s1 < 0.0 {
            let x = refine(pot, xs[i], xs[i + 1], s0, tols.newton_tol)?;
            found.push((x, if s0 < 0.0 { CriticalKind::Minimum } else { CriticalKind::Maximum }));
        }
        i += 1;
    }

    for w in found.windows(2) {
        if w[1].0 - w[0].0 < tols.merge_tol {
            return Err(Error::DegenerateLandscape(format!("critical points at {} and {} merge", w[0].0, w[1].0)));
        }
        if w[0].1 == w[1].1 {
            return Err(Error::DegenerateLandscape(format!(
                "consecutive critical points at {} and {} have the same kind; refine the scan",
                w[0].0, w[1].0
            )));
        }
    }

    found
        .into_iter()
        .map(|(x, kind)| {
            let d = pot.eval_d2(x)?;
            Ok(CriticalPoint { location: x, value: d.value, second_derivative: d.d2, kind })
        })
        .collect()
}

fn classify(before: f64, after: f64) -> Option<CriticalKind> {
    if before < 0.0 && after > 0.0 {
        Some(CriticalKind::Minimum)
    } else if before > 0.0 && after < 0.0 {
        Some(CriticalKind::Maximum)
    } else {
        None
    }
}

fn refine(pot: &Potential, mut lo: f64, mut hi: f64, slope_lo: f64, tol: f64) -> Result<f64> {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..NEWTON_MAX_ITER {
        let d = pot.eval_d2(x)?;
        if d.d1.abs() <= tol {
            return Ok(x);
        }
        if (d.d1 < 0.0) == (slope_lo < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            // bracket has collapsed to adjacent floats
            return Ok(x);
        }
        let newton = x - d.d1 / d.d2;
        x = if d.d2 != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    Err(Error::NewtonNonConvergence { x })
}

/// Checks the Morse, equal-height and confinement hypotheses on sampled data.
pub fn validate_assumptions(
    pot: &Potential,
    cps: &[CriticalPoint],
    domain: Interval,
    tols: &Tolerances,
) -> Result<AssumptionReport> {
    let mut diagnostics = Vec::new();

    let mut morse_ok = true;
    for cp in cps {
        if cp.second_derivative.abs() <= tols.degeneracy_tol {
            morse_ok = false;
            diagnostics.push(format!(
                "degenerate critical point at x = {:.12} (φ″ = {:e})",
                cp.location, cp.second_derivative
            ));
        }
    }

    let minima: Vec<&CriticalPoint> = cps.iter().filter(|c| c.kind == CriticalKind::Minimum).collect();
    let maxima: Vec<&CriticalPoint> = cps.iter().filter(|c| c.kind == CriticalKind::Maximum).collect();

    let mut equal_minima_ok = !minima.is_empty();
    if minima.is_empty() {
        diagnostics.push("no local minimum in the scan domain".into());
    }
    let phi0 = minima.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    for m in &minima {
        if (m.value - phi0).abs() > tols.equal_height_tol {
            equal_minima_ok = false;
            diagnostics.push(format!(
                "minimum at x = {:.12} has value {} above the global minimum {} by {:e}",
                m.location,
                m.value,
                phi0,
                m.value - phi0
            ));
        }
    }

    let mut equal_saddles_ok = true;
    let sigma1 = maxima.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max);
    for s in &maxima {
        if (sigma1 - s.value).abs() > tols.equal_height_tol {
            equal_saddles_ok = false;
            diagnostics.push(format!(
                "saddle at x = {:.12} has value {} below σ₁ = {} by {:e}",
                s.location,
                s.value,
                sigma1,
                sigma1 - s.value
            ));
        }
    }

    let growth_ok = check_growth(pot, cps, domain, sigma1, tols, &mut diagnostics)?;

    Ok(AssumptionReport { morse_ok, equal_minima_ok, equal_saddles_ok, growth_ok, diagnostics })
}

fn check_growth(
    pot: &Potential,
    cps: &[CriticalPoint],
    domain: Interval,
    sigma1: f64,
    tols: &Tolerances,
    diagnostics: &mut Vec<String>,
) -> Result<bool> {
    let (Some(first), Some(last)) = (cps.first(), cps.last()) else {
        diagnostics.push("no critical point in the scan domain".into());
        return Ok(false);
    };
    let mut ok = true;
    if first.kind != CriticalKind::Minimum || last.kind != CriticalKind::Minimum {
        diagnostics.push("outermost critical points must be minima for φ to grow toward the domain ends".into());
        ok = false;
    }
    let margin = 0.1 * domain.width();
    const SAMPLES: usize = 200;
    let regions = [
        (domain.lo - margin, 0.5 * (domain.lo + first.location), -1.0, "left"),
        (0.5 * (last.location + domain.hi), domain.hi + margin, 1.0, "right"),
    ];
    for (a, b, sign, side) in regions {
        let mut worst = f64::INFINITY;
        let mut worst_x = a;
        for k in 0..=SAMPLES {
            let x = a + (b - a) * k as f64 / SAMPLES as f64;
            let slope = sign * pot.derivative(x)?;
            if slope < worst {
                worst = slope;
                worst_x = x;
            }
        }
        if worst < tols.growth_tol {
            ok = false;
            diagnostics
                .push(format!("φ is not increasing toward the {side} end: signed slope {worst:e} at x = {worst_x}"));
        }
    }
    if sigma1.is_finite() {
        for (x, side) in [(domain.lo, "left"), (domain.hi, "right")] {
            let v = pot.value(x)?;
            if v <= sigma1 {
                ok = false;
                diagnostics.push(format!("φ({x}) = {v} at the {side} end does not exceed σ₁ = {sigma1}"));
            }
        }
    }
    Ok(ok)
}

/// Splits `{φ < σ₁}` into its connected components, one per minimum.
pub fn decompose_wells(pot: &Potential, cps: &[CriticalPoint], tols: &Tolerances) -> Result<WellDecomposition> {
    let minima: Vec<CriticalPoint> = cps.iter().copied().filter(|c| c.kind == CriticalKind::Minimum).collect();
    if minima.is_empty() {
        return Err(Error::DegenerateLandscape("no minimum".into()));
    }
    let phi0 = minima.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let maxima: Vec<CriticalPoint> = cps.iter().copied().filter(|c| c.kind == CriticalKind::Maximum).collect();

    if maxima.is_empty() {
        if minima.len() != 1 {
            return Err(Error::WellMinimumCount { well: 0, count: minima.len() });
        }
        let m = minima[0];
        return Ok(WellDecomposition {
            minima: vec![m.location],
            saddles: vec![],
            wells: vec![Interval::new(f64::NEG_INFINITY, f64::INFINITY)],
            phi0,
            sigma1: f64::INFINITY,
            s: f64::INFINITY,
            mu: vec![m.second_derivative],
            nu: vec![],
        });
    }

    let sigma1 = maxima.iter().map(|c| c.value).fold(f64::NEG_INFINITY, f64::max);
    // maxima at the top level separate wells; lower ones would sit inside a well
    let separators: Vec<CriticalPoint> =
        maxima.iter().copied().filter(|c| sigma1 - c.value <= tols.equal_height_tol).collect();

    let first_min = minima[0].location;
    let last_min = minima[minima.len() - 1].location;
    let left_end = level_crossing(pot, first_min, -1.0, sigma1)?;
    let right_end = level_crossing(pot, last_min, 1.0, sigma1)?;

    let mut bounds = vec![left_end];
    bounds.extend(separators.iter().map(|c| c.location));
    bounds.push(right_end);
    let wells: Vec<Interval> = bounds.windows(2).map(|w| Interval::new(w[0], w[1])).collect();

    let mut well_minima = Vec::with_capacity(wells.len());
    for (i, w) in wells.iter().enumerate() {
        let inside: Vec<&CriticalPoint> = minima.iter().filter(|m| w.contains(m.location)).collect();
        if inside.len() != 1 {
            return Err(Error::WellMinimumCount { well: i, count: inside.len() });
        }
        well_minima.push(*inside[0]);
    }
    if well_minima.len() != minima.len() {
        return Err(Error::DegenerateLandscape("a minimum lies outside every well".into()));
    }

    Ok(WellDecomposition {
        minima: well_minima.iter().map(|c| c.location).collect(),
        saddles: separators.iter().map(|c| c.location).collect(),
        wells,
        phi0,
        sigma1,
        s: sigma1 - phi0,
        mu: well_minima.iter().map(|c| c.second_derivative).collect(),
        nu: separators.iter().map(|c| -c.second_derivative).collect(),
    })
}

/// First point beyond `from` (in direction `dir`) where φ reaches `level`,
/// assuming φ increases monotonically in that direction.
pub(crate) fn level_crossing(pot: &Potential, from: f64, dir: f64, level: f64) -> Result<f64> {
    let mut step = 0.5;
    let mut inner = from;
    for _ in 0..64 {
        let outer = from + dir * step;
        if pot.value(outer)? >= level {
            return bisect_level(pot, inner, outer, level);
        }
        inner = outer;
        step *= 2.0;
    }
    Err(Error::NotConfining(format!("φ stays below {level} beyond x = {inner}")))
}

/// Root of `φ(x) = level` between `below` (φ < level) and `above` (φ ≥ level).
pub(crate) fn bisect_level(pot: &Potential, mut below: f64, mut above: f64, level: f64) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (below + above);
        if mid == below || mid == above {
            break;
        }
        if pot.value(mid)? < level {
            below = mid;
        } else {
            above = mid;
        }
    }
    Ok(0.5 * (below + above))
}

/// Everything the `analyze` command reports about a potential.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandscapeReport {
    pub critical_points: Vec<CriticalPoint>,
    pub assumptions: AssumptionReport,
    pub decomposition: Option<WellDecomposition>,
}

pub fn analyze(pot: &Potential, domain: Interval, tols: &Tolerances) -> Result<LandscapeReport> {
    let cps = find_critical_points(pot, domain, tols)?;
    let assumptions = validate_assumptions(pot, &cps, domain, tols)?;
    let decomposition = if assumptions.all_ok() { Some(decompose_wells(pot, &cps, tols)?) } else { None };
    Ok(LandscapeReport { critical_points: cps, assumptions, decomposition })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pot(src: &str) -> Potential {
        Potential::parse(src).unwrap()
    }

    fn cps(src: &str, a: f64, b: f64) -> Vec<CriticalPoint> {
        find_critical_points(&pot(src), Interval::new(a, b), &Tolerances::default()).unwrap()
    }

    #[test]
    fn double_well_critical_points() {
        let c = cps("(x^2-1)^2", -2.5, 2.5);
        let expected =
            [(-1.0, CriticalKind::Minimum, 8.0), (0.0, CriticalKind::Maximum, -4.0), (1.0, CriticalKind::Minimum, 8.0)];
        assert_eq!(c.len(), 3);
        for (cp, (x, k, d2)) in c.iter().zip(expected) {
            assert!((cp.location - x).abs() < 1e-12);
            assert_eq!(cp.kind, k);
            assert!((cp.second_derivative - d2).abs() < 1e-10);
        }
    }

    #[test]
    fn parabola_single_minimum() {
        let c = cps("x^2", -1.0, 1.0);
        assert_eq!(c.len(), 1);
        assert!(c[0].location.abs() < 1e-12);
        assert_eq!(c[0].kind, CriticalKind::Minimum);
        assert!((c[0].second_derivative - 2.0).abs() < 1e-12);
    }

    #[test]
    fn triple_well_critical_points() {
        let c = cps("x^2*(x^2-1)^2", -1.6, 1.6);
        assert_eq!(c.len(), 5);
        let r = 1.0 / 3f64.sqrt();
        let xs = [-1.0, -r, 0.0, r, 1.0];
        let d2 = [8.0, -8.0 / 3.0, 2.0, -8.0 / 3.0, 8.0];
        for i in 0..5 {
            assert!((c[i].location - xs[i]).abs() < 1e-11, "{i}: {}", c[i].location);
            assert!((c[i].second_derivative - d2[i]).abs() < 1e-9, "{i}: {}", c[i].second_derivative);
            let k = if i % 2 == 0 { CriticalKind::Minimum } else { CriticalKind::Maximum };
            assert_eq!(c[i].kind, k);
        }
    }

    #[test]
    fn kinds_alternate_and_sorted() {
        for (src, a, b) in [("(x^2-1)^2", -2.0, 2.0), ("x^2*(x^2-1)^2", -1.5, 1.5), ("(x^2-1)^2*(x^2-4)^2", -2.5, 2.5)]
        {
            let c = cps(src, a, b);
            for w in c.windows(2) {
                assert!(w[0].location < w[1].location);
                assert_ne!(w[0].kind, w[1].kind);
            }
        }
    }

    #[test]
    fn n_scan_floor() {
        let t = Tolerances { n_scan: 50, ..Default::default() };
        assert!(find_critical_points(&pot("x^2"), Interval::new(-1.0, 1.0), &t).is_err());
    }

    #[test]
    fn double_well_assumptions_hold() {
        let p = pot("(x^2-1)^2");
        let d = Interval::new(-2.5, 2.5);
        let c = find_critical_points(&p, d, &Tolerances::default()).unwrap();
        let r = validate_assumptions(&p, &c, d, &Tolerances::default()).unwrap();
        assert!(r.all_ok(), "{:?}", r.diagnostics);
        assert!(r.diagnostics.is_empty());
    }

    #[test]
    fn tilted_wells_fail_equal_minima() {
        let p = pot("(x^2-1)^2+0.1*x");
        let d = Interval::new(-2.5, 2.5);
        let c = find_critical_points(&p, d, &Tolerances::default()).unwrap();
        let r = validate_assumptions(&p, &c, d, &Tolerances::default()).unwrap();
        assert!(!r.equal_minima_ok);
        assert!(r.morse_ok && r.equal_saddles_ok && r.growth_ok);
    }

    #[test]
    fn quartic_is_not_morse() {
        let p = pot("x^4");
        let d = Interval::new(-1.0, 1.0);
        let c = find_critical_points(&p, d, &Tolerances::default()).unwrap();
        let r = validate_assumptions(&p, &c, d, &Tolerances::default()).unwrap();
        assert!(!r.morse_ok);
    }

    #[test]
    fn unequal_saddles_and_bad_growth() {
        // saddles at different heights
        let p = pot("(x^2-1)^2*(x^2-4)^2 + 0.5*x^2");
        let d = Interval::new(-2.6, 2.6);
        let c = find_critical_points(&p, d, &Tolerances::default()).unwrap();
        let r = validate_assumptions(&p, &c, d, &Tolerances::default()).unwrap();
        assert!(!r.equal_minima_ok || !r.equal_saddles_ok);
        // decays past its outer maxima at ±3
        let p = pot("(x^2-1)^2*exp(-x^2/4)");
        let d = Interval::new(-5.0, 5.0);
        let c = find_critical_points(&p, d, &Tolerances::default()).unwrap();
        let r = validate_assumptions(&p, &c, d, &Tolerances::default()).unwrap();
        assert!(!r.growth_ok);
    }

    #[test]
    fn double_well_decomposition() {
        let p = pot("(x^2-1)^2");
        let c = cps("(x^2-1)^2", -2.5, 2.5);
        let w = decompose_wells(&p, &c, &Tolerances::default()).unwrap();
        let r2 = 2f64.sqrt();
        assert_eq!(w.well_count(), 2);
        assert!((w.wells[0].lo + r2).abs() < 1e-12 && w.wells[0].hi.abs() < 1e-12);
        assert!(w.wells[1].lo.abs() < 1e-12 && (w.wells[1].hi - r2).abs() < 1e-12);
        assert!((w.s - 1.0).abs() < 1e-12);
        assert!(w.mu.iter().all(|m| (m - 8.0).abs() < 1e-10));
        assert_eq!(w.nu.len(), 1);
        assert!((w.nu[0] - 4.0).abs() < 1e-10);
    }

    #[test]
    fn single_well_decomposition() {
        let p = pot("x^2");
        let c = cps("x^2", -1.0, 1.0);
        let w = decompose_wells(&p, &c, &Tolerances::default()).unwrap();
        assert_eq!(w.well_count(), 1);
        assert!(w.s.is_infinite() && w.s > 0.0);
        assert!(w.well_of(123.0) == Some(0));
    }

    #[test]
    fn triple_well_decomposition() {
        let p = pot("x^2*(x^2-1)^2");
        let c = cps("x^2*(x^2-1)^2", -1.6, 1.6);
        let w = decompose_wells(&p, &c, &Tolerances::default()).unwrap();
        assert_eq!(w.well_count(), 3);
        assert!((w.sigma1 - 4.0 / 27.0).abs() < 1e-12);
        assert!((w.s - 4.0 / 27.0).abs() < 1e-12);
        for (m, e) in w.mu.iter().zip([8.0, 2.0, 8.0]) {
            assert!((m - e).abs() < 1e-9);
        }
        for n in &w.nu {
            assert!((n - 8.0 / 3.0).abs() < 1e-9);
        }
        // invariants: m_k < s_k < m_{k+1}, wells disjoint and sharing saddles
        for k in 0..2 {
            assert!(w.minima[k] < w.saddles[k] && w.saddles[k] < w.minima[k + 1]);
            assert_eq!(w.wells[k].hi, w.wells[k + 1].lo);
            assert_eq!(w.wells[k].hi, w.saddles[k]);
        }
        for (m, e) in w.minima.iter().zip(&w.wells) {
            assert!(e.contains(*m));
        }
    }

    #[test]
    fn low_saddle_puts_two_minima_in_one_well() {
        // inner barrier lower than the outer ones
        let p = pot("(x^2-1)^2*(x^2-4)^2/16 - 0.3*exp(-x^2)");
        let d = Interval::new(-3.0, 3.0);
        let c = find_critical_points(&p, d, &Tolerances::default()).unwrap();
        assert!(matches!(decompose_wells(&p, &c, &Tolerances::default()), Err(Error::WellMinimumCount { .. })));
    }

    #[test]
    fn analyze_bundles_everything() {
        let r = analyze(&pot("(x^2-1)^2"), Interval::new(-2.5, 2.5), &Tolerances::default()).unwrap();
        assert!(r.decomposition.is_some());
        let r = analyze(&pot("x^4"), Interval::new(-1.0, 1.0), &Tolerances::default()).unwrap();
        assert!(r.decomposition.is_none());
    }
}
