//! Fixtures shared by the benchmarks.

use kramers_core::landscape::{decompose_wells, find_critical_points};
use kramers_core::witten::{assemble, build_grid};
use kramers_core::{DiscreteWitten, Interval, Potential, SymMatrix, Tolerances, WellDecomposition};
use ndarray::Array2;

pub const DOUBLE_WELL: &str = "(x^2-1)^2";
pub const TRIPLE_WELL: &str = "x^2*(x^2-1)^2";

pub fn landscape(src: &str, a: f64, b: f64) -> (Potential, WellDecomposition) {
    let p = Potential::parse(src).expect("valid potential");
    let t = Tolerances::default();
    let cps = find_critical_points(&p, Interval::new(a, b), &t).expect("critical points");
    let d = decompose_wells(&p, &cps, &t).expect("wells");
    (p, d)
}

pub fn double_well_operator(h: f64, n: usize) -> DiscreteWitten {
    let (p, d) = landscape(DOUBLE_WELL, -2.5, 2.5);
    assemble(&p, h, build_grid(&p, &d, n, None).expect("grid")).expect("operator")
}

/// Deterministic dense symmetric test matrix.
pub fn test_matrix(n: usize) -> SymMatrix {
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let v = (((i * 31 + j * 17) % 23) as f64 - 11.0) / 7.0;
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
    SymMatrix::new(a).expect("symmetric")
}
