use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

/// Full eigen-decomposition of a tridiagonal matrix. Eigenvalues ascend and
/// `vectors.row(k)` is the unit eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

const QL_MAX_ITER: usize = 60;

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if !diag.is_empty() && off.len() + 1 != diag.len() {
            return Err(Error::SizeMismatch(format!(
                "tridiagonal with {} diagonal entries needs {} off-diagonal entries, got {}",
                diag.len(),
                diag.len() - 1,
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.order();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
        y
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.order();
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            a[[i, i]] = self.diag[i];
            if i + 1 < n {
                a[[i, i + 1]] = self.off[i];
                a[[i + 1, i]] = self.off[i];
            }
        }
        a
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        let n = self.order();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// All eigenpairs by the implicit QL algorithm with Wilkinson-type shifts.
    pub fn eigen_full(&self) -> Result<TridiagEigen> {
        let n = self.order();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        // zt.row(i) holds column i of the accumulated rotation
        let mut zt = Array2::<f64>::eye(n);

        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > QL_MAX_ITER {
                    return Err(Error::NonConvergence { algorithm: "tridiagonal QL", iterations: QL_MAX_ITER });
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut underflow = false;
                let mut i = m;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    rotate_rows(&mut zt, i, c, s);
                }
                if underflow {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
        let values = Array1::from_iter(order.iter().map(|&i| d[i]));
        let mut vectors = Array2::zeros((n, n));
        for (dst, &src) in order.iter().enumerate() {
            vectors.row_mut(dst).assign(&zt.row(src));
        }
        Ok(TridiagEigen { values, vectors })
    }

    /// LU factorization of `self - shift·I` with partial pivoting.
    pub fn factor_shifted(&self, shift: f64) -> TridiagLu {
        TridiagLu::new(self, shift)
    }
}

fn rotate_rows(zt: &mut Array2<f64>, i: usize, c: f64, s: f64) {
    let n = zt.ncols();
    let slice = zt.as_slice_mut().expect("standard layout");
    let (head, tail) = slice.split_at_mut((i + 1) * n);
    let zi = &mut head[i * n..];
    let zi1 = &mut tail[..n];
    for k in 0..n {
        let f = zi1[k];
        zi1[k] = s * zi[k] + c * f;
        zi[k] = c * zi[k] - s * f;
    }
}

/// Partial-pivoting LU of a tridiagonal matrix (the `gttrf` layout: the upper
/// factor gains a second superdiagonal when rows are swapped).
#[derive(Debug, Clone)]
pub struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn new(t: &SymTridiagonal, shift: f64) -> Self {
        let n = t.order();
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - shift).collect();
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let tiny = f64::EPSILON * t.norm_inf().max(f64::MIN_POSITIVE);
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        Self { dl, d, du, du2, swapped }
    }

    /// Solves in place.
    pub fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            if i + 1 < n {
                s -= self.du[i] * b[i + 1];
            }
            if i + 2 < n {
                s -= self.du2[i] * b[i + 2];
            }
            b[i] = s / self.d[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sym_eigen, SymMatrix};

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        }
    }

    #[test]
    fn ql_matches_jacobi() {
        let mut rnd = lcg(7);
        for n in [1usize, 2, 3, 10, 33] {
            let t =
                SymTridiagonal::new((0..n).map(|_| rnd()).collect(), (0..n.saturating_sub(1)).map(|_| rnd()).collect())
                    .unwrap();
            let ql = t.eigen_full().unwrap();
            let jac = sym_eigen(&SymMatrix::new(t.to_dense()).unwrap()).unwrap();
            for k in 0..n {
                assert!((ql.values[k] - jac.values[k]).abs() < 1e-13);
                let v = ql.vectors.row(k).to_vec();
                let tv = t.matvec(&v);
                let res: f64 = tv.iter().zip(&v).map(|(a, b)| (a - ql.values[k] * b).powi(2)).sum();
                assert!(res.sqrt() < 1e-13);
            }
            let g = ql.vectors.dot(&ql.vectors.t());
            for i in 0..n {
                for j in 0..n {
                    let d = if i == j { 1.0 } else { 0.0 };
                    assert!((g[[i, j]] - d).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn free_laplacian_spectrum() {
        // Neumann 3-point Laplacian: eigenvalues 4 sin²(kπ/2n)
        let n = 200;
        let mut diag = vec![2.0; n];
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        let t = SymTridiagonal::new(diag, vec![-1.0; n - 1]).unwrap();
        let e = t.eigen_full().unwrap();
        for k in 0..n {
            let exact = 4.0 * (k as f64 * std::f64::consts::PI / (2.0 * n as f64)).sin().powi(2);
            assert!((e.values[k] - exact).abs() < 1e-12, "{k}");
        }
    }

    #[test]
    fn pivoted_solve() {
        let mut rnd = lcg(11);
        let n = 50;
        let t = SymTridiagonal::new((0..n).map(|_| rnd()).collect(), (0..n - 1).map(|_| rnd()).collect()).unwrap();
        let x: Vec<f64> = (0..n).map(|_| rnd()).collect();
        for shift in [0.0, 0.3, -0.2] {
            let mut b = t.matvec(&x);
            for (bi, xi) in b.iter_mut().zip(&x) {
                *bi -= shift * xi;
            }
            t.factor_shifted(shift).solve(&mut b);
            for (a, e) in b.iter().zip(&x) {
                assert!((a - e).abs() < 1e-9, "{a} vs {e}");
            }
        }
    }

    #[test]
    fn size_mismatch() {
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![]).is_err());
    }
}
