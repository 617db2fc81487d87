//! Dense and structured eigen/singular-value solvers.

mod bidiag;
mod dense;
mod tridiag;

pub use bidiag::GolubKahan;
pub use dense::{sym_eigen, SymEigen, SymMatrix};
pub use tridiag::{SymTridiagonal, TridiagEigen, TridiagLu};

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y ← y + alpha·x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Orthonormalizes `vecs` in place by modified Gram–Schmidt (two passes),
/// after first removing components along the already-orthonormal `against`.
/// Returns the norm of each vector just before its final normalization.
pub fn gram_schmidt(vecs: &mut [Vec<f64>], against: &[&[f64]]) -> Vec<f64> {
    let mut norms = Vec::with_capacity(vecs.len());
    for i in 0..vecs.len() {
        let (done, rest) = vecs.split_at_mut(i);
        let v = &mut rest[0];
        for _ in 0..2 {
            for q in against {
                let c = dot(q, v);
                axpy(-c, q, v);
            }
            for q in done.iter() {
                let c = dot(q, v);
                axpy(-c, q, v);
            }
        }
        let nv = norm2(v);
        if nv > 0.0 {
            v.iter_mut().for_each(|x| *x /= nv);
        }
        norms.push(nv);
    }
    norms
}
