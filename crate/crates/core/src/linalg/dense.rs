use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real symmetric matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    data: Array2<f64>,
}

impl SymMatrix {
    /// Accepts `data` if it is square and symmetric to a relative `1e-12`;
    /// the stored matrix is the exact symmetrization `(A + Aᵀ)/2`.
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (r, c) = data.dim();
        if r != c {
            return Err(Error::SizeMismatch(format!("matrix is {r}x{c}, expected square")));
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..r {
            for j in 0..i {
                if (data[[i, j]] - data[[j, i]]).abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::InvalidArgument(format!("matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self::symmetrized(data))
    }

    pub(crate) fn symmetrized(mut data: Array2<f64>) -> Self {
        let n = data.nrows();
        for i in 0..n {
            for j in 0..i {
                let m = 0.5 * (data[[i, j]] + data[[j, i]]);
                data[[i, j]] = m;
                data[[j, i]] = m;
            }
        }
        Self { data }
    }

    pub fn zeros(n: usize) -> Self {
        Self { data: Array2::zeros((n, n)) }
    }

    pub fn identity(n: usize) -> Self {
        Self { data: Array2::eye(n) }
    }

    pub fn order(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_array(self) -> Array2<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[[i, j]]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, v: ArrayView1<'_, f64>) -> Array1<f64> {
        self.data.dot(&v)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { data: &self.data * s }
    }

    pub fn eigen(&self) -> Result<SymEigen> {
        sym_eigen(self)
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Array2::zeros((n, n));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::SizeMismatch(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            for (j, v) in row.iter().enumerate() {
                data[[i, j]] = *v;
            }
        }
        SymMatrix::new(data)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.data.rows().into_iter().map(|r| r.to_vec()).collect()
    }
}

/// Eigen-decomposition with ascending eigenvalues; `vectors.column(k)` pairs
/// with `values[k]`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver for dense symmetric matrices.
pub fn sym_eigen(m: &SymMatrix) -> Result<SymEigen> {
    let n = m.order();
    let mut a = m.data.clone();
    let mut v = Array2::<f64>::eye(n);
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>();
    let floor = (f64::EPSILON * f64::EPSILON) * total;

    let mut converged = n <= 1;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| a[[i, j]] * a[[i, j]]).sum();
        if off <= floor || off == 0.0 {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let app = a[[p, p]];
                let aqq = a[[q, q]];
                if apq.abs() < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                    a[[p, q]] = 0.0;
                    a[[q, p]] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence { algorithm: "cyclic Jacobi", iterations: JACOBI_MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].total_cmp(&a[[j, j]]));
    let values = Array1::from_iter(order.iter().map(|&i| a[[i, i]]));
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    Ok(SymEigen { values, vectors })
}
