//! Singular values of bidiagonal matrices to high relative accuracy.
//!
//! A bidiagonal matrix (square, or with one extra row or column) has a path
//! as its row/column incidence graph. Ordering rows and columns along that
//! path turns `[[0, B], [Bᵀ, 0]]` into a zero-diagonal symmetric tridiagonal
//! matrix whose eigenvalues are `±σᵢ` plus one zero per missing dimension.
//! Sturm counts of that matrix are computed from squared couplings only and
//! bisection on them resolves tiny singular values to a small multiple of
//! machine precision relative to their own size, not to the norm of `B`.

use crate::error::{Error, Result};

const BISECTION_MAX_ITER: usize = 4000;

#[derive(Debug, Clone)]
pub struct GolubKahan {
    couplings_sq: Vec<f64>,
    rows: usize,
    cols: usize,
    pivmin: f64,
    bound: f64,
}

impl GolubKahan {
    /// `couplings` are the nonzero entries in path order, e.g. for an upper
    /// bidiagonal `p×p` matrix `[α₁, β₁, α₂, …, β_{p−1}, α_p]`.
    pub fn from_path(couplings: &[f64], rows: usize, cols: usize) -> Result<Self> {
        if couplings.len() + 1 != rows + cols || rows.abs_diff(cols) > 1 {
            return Err(Error::SizeMismatch(format!(
                "{} couplings do not describe a {rows}x{cols} bidiagonal path",
                couplings.len()
            )));
        }
        let couplings_sq: Vec<f64> = couplings.iter().map(|c| c * c).collect();
        let max_sq = couplings_sq.iter().copied().fold(0.0, f64::max);
        let mut bound = 0.0f64;
        for i in 0..=couplings.len() {
            let left = if i > 0 { couplings[i - 1].abs() } else { 0.0 };
            let right = couplings.get(i).map_or(0.0, |c| c.abs());
            bound = bound.max(left + right);
        }
        Ok(Self { couplings_sq, rows, cols, pivmin: f64::MIN_POSITIVE * max_sq.max(1.0), bound })
    }

    /// Upper bidiagonal `p×p` matrix with diagonal `diag` and superdiagonal `sup`.
    pub fn upper(diag: &[f64], sup: &[f64]) -> Result<Self> {
        if sup.len() + 1 != diag.len() {
            return Err(Error::SizeMismatch("superdiagonal must be one shorter than the diagonal".into()));
        }
        let mut c = Vec::with_capacity(2 * diag.len());
        for (i, d) in diag.iter().enumerate() {
            c.push(*d);
            if let Some(s) = sup.get(i) {
                c.push(*s);
            }
        }
        Self::from_path(&c, diag.len(), diag.len())
    }

    pub fn singular_value_count(&self) -> usize {
        self.rows.min(self.cols)
    }

    /// Number of singular values strictly below `x > 0`.
    pub fn count_below(&self, x: f64) -> usize {
        let guard = |q: f64| if q.abs() < self.pivmin { -self.pivmin } else { q };
        let mut q = guard(-x);
        let mut neg = usize::from(q < 0.0);
        for &c2 in &self.couplings_sq {
            q = guard(-x - c2 / q);
            neg += usize::from(q < 0.0);
        }
        neg - self.rows.max(self.cols)
    }

    /// The `k`-th smallest singular value, `k` starting at 0.
    pub fn kth_smallest(&self, k: usize) -> Result<f64> {
        if k >= self.singular_value_count() {
            return Err(Error::InvalidArgument(format!(
                "requested singular value {k} of {}",
                self.singular_value_count()
            )));
        }
        let target = k + 1;
        let mut lo = 0.0f64;
        let mut hi = self.bound * (1.0 + 1e-12) + f64::MIN_POSITIVE;
        for _ in 0..BISECTION_MAX_ITER {
            if hi - lo <= 2.0 * f64::EPSILON * hi {
                return Ok(0.5 * (lo + hi));
            }
            let mid = if lo == 0.0 {
                if hi < 1e-300 {
                    return Ok(0.0);
                }
                hi / 16.0
            } else if hi > 4.0 * lo {
                (lo * hi).sqrt()
            } else {
                0.5 * (lo + hi)
            };
            if mid <= lo || mid >= hi {
                return Ok(0.5 * (lo + hi));
            }
            if self.count_below(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Err(Error::NonConvergence { algorithm: "singular-value bisection", iterations: BISECTION_MAX_ITER })
    }

    /// The `k` smallest singular values in ascending order.
    pub fn smallest(&self, k: usize) -> Result<Vec<f64>> {
        (0..k).map(|i| self.kth_smallest(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sym_eigen, SymMatrix};
    use ndarray::Array2;

    #[test]
    fn forward_difference_exact() {
        // (n-1)×n forward difference: singular values 2 sin(kπ/2n), k = 1..n-1
        let n = 300;
        let mut c = Vec::new();
        for _ in 0..n - 1 {
            c.push(-1.0);
            c.push(1.0);
        }
        let gk = GolubKahan::from_path(&c, n - 1, n).unwrap();
        let sv = gk.smallest(n - 1).unwrap();
        for (k, s) in sv.iter().enumerate() {
            let exact = 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (2.0 * n as f64)).sin();
            assert!((s - exact).abs() <= 1e-13 * exact, "{k}: {s} vs {exact}");
        }
    }

    #[test]
    fn graded_matrix_relative_accuracy() {
        // diag(1, 1e-8, 1e-16) with small couplings: the product of singular
        // values equals |det| exactly, which pins the tiny one.
        let diag = [1.0, 1e-8, 1e-16];
        let sup = [1e-9, 1e-17];
        let gk = GolubKahan::upper(&diag, &sup).unwrap();
        let sv = gk.smallest(3).unwrap();
        let det: f64 = diag.iter().product();
        let prod: f64 = sv.iter().product();
        assert!((prod - det).abs() <= 1e-13 * det, "{prod} vs {det}");
        assert!((sv[0] - 1e-16).abs() < 1e-26);
    }

    #[test]
    fn matches_dense_eigenvalues() {
        let diag = [3.0, -1.0, 0.5, 2.0];
        let sup = [0.7, 1.1, -0.4];
        let gk = GolubKahan::upper(&diag, &sup).unwrap();
        let mut b = Array2::zeros((4, 4));
        for i in 0..4 {
            b[[i, i]] = diag[i];
            if i < 3 {
                b[[i, i + 1]] = sup[i];
            }
        }
        let btb = SymMatrix::new(b.t().dot(&b)).unwrap();
        let e = sym_eigen(&btb).unwrap();
        let sv = gk.smallest(4).unwrap();
        for k in 0..4 {
            assert!((sv[k] * sv[k] - e.values[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_shape() {
        assert!(GolubKahan::from_path(&[1.0, 2.0], 3, 3).is_err());
        assert!(GolubKahan::upper(&[1.0], &[1.0]).is_err());
        let gk = GolubKahan::upper(&[1.0, 2.0], &[0.5]).unwrap();
        assert!(gk.kth_smallest(2).is_err());
    }
}
