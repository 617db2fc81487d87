use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, gram_schmidt, norm2, sym_eigen, GolubKahan, SymMatrix};

use super::DiscreteWitten;

/// Dense diagonalization of `M` is refused above this many nodes.
pub const MAX_DENSE_NODES: usize = 4001;
const SUBSPACE_MAX_ITER: usize = 500;
const INVERSE_ITERATIONS: usize = 4;

/// Lowest eigenpairs of `M`. Eigenvectors are Euclidean-unit rows of `vectors`.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    #[serde(skip)]
    pub vectors: Array2<f64>,
    /// Number of eigenvalues of `M` below `threshold` (counted on the whole spectrum).
    pub count_below: usize,
    pub threshold: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.row(k).to_vec()
    }

    /// Residuals `‖Mv_k − λ_k v_k‖`.
    pub fn residuals(&self, w: &DiscreteWitten) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let v = self.vector(k);
                let mv = w.apply_m(&v);
                mv.iter().zip(&v).map(|(a, b)| (a - self.values[k] * b).powi(2)).sum::<f64>().sqrt()
            })
            .collect()
    }
}

/// `M⁺` restricted to the orthogonal complement of the kernel, applied by two
/// first-order recursions instead of a factorization. All exponentials are
/// combined in log space, so tiny weights at the grid ends are harmless.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    w: Vec<f64>,
    ln_p2: Vec<f64>,
    unit_kernel: Vec<f64>,
    scale: f64,
}

impl PseudoInverse {
    pub fn new(dw: &DiscreteWitten) -> Self {
        let h = dw.h;
        let w = dw.kernel();
        let ln_p2 = dw.phi_mid.iter().map(|p| -2.0 * (p - dw.phi_ref) / h).collect();
        let nw = norm2(&w);
        let unit_kernel = w.iter().map(|x| x / nw).collect();
        Self { w, ln_p2, unit_kernel, scale: (dw.dx() / h).powi(2) }
    }

    pub fn unit_kernel(&self) -> &[f64] {
        &self.unit_kernel
    }

    /// Returns `x ⊥ g` with `M x = y − (y·ĝ)ĝ`.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        let n = self.w.len();
        let c = dot(&self.unit_kernel, y);
        let z: Vec<f64> = (0..n).map(|i| self.w[i] * (y[i] - c * self.unit_kernel[i])).collect();
        let mut suffix = vec![0.0; n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] + z[i];
        }
        let mut prefix = vec![0.0; n];
        let mut acc = 0.0;
        for (i, zi) in z.iter().enumerate() {
            acc += zi;
            prefix[i] = acc;
        }
        // u is anchored at the deepest node so it stays moderate where w is not tiny
        let anchor = (0..n).fold(0, |best, i| if self.w[i] > self.w[best] { i } else { best });
        let du = |j: usize| {
            let left = -prefix[j];
            let right = suffix[j + 1];
            // both equal the flux through cell j; the smaller one is the accurate one
            let flux = if left.abs() <= right.abs() { left } else { right };
            if flux == 0.0 {
                0.0
            } else {
                flux.signum() * (flux.abs().ln() - self.ln_p2[j]).exp() * self.scale
            }
        };
        let mut u = vec![0.0; n];
        for j in anchor..n - 1 {
            u[j + 1] = u[j] + du(j);
        }
        for j in (0..anchor).rev() {
            u[j] = u[j + 1] - du(j);
        }
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let w2 = self.w[i] * self.w[i];
            num += w2 * u[i];
            den += w2;
        }
        let shift = -num / den;
        (0..n).map(|i| self.w[i] * u[i] + shift * self.w[i]).collect()
    }
}

/// Sets the sign so that the largest entry is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    for x in v.iter() {
        if x.abs() > best.abs() {
            best = *x;
        }
    }
    if best < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// `k` smallest eigenpairs of `M = dᵀd`.
///
/// Eigenvalues are squared singular values of `d` from bisection, which keeps
/// their relative accuracy even when they are `e^{−2S/h}` below `‖M‖`. The
/// eigenvalue `0` is reported as the Rayleigh quotient of the exact kernel.
/// Eigenvectors of the cluster below `eps0·h` come from subspace iteration
/// with `M⁺`; the remaining ones from shifted inverse iteration.
pub fn low_spectrum(w: &DiscreteWitten, k: usize, eps0: f64) -> Result<Spectrum> {
    let n = w.n();
    if k == 0 || k > 20 || k > n {
        return Err(Error::InvalidArgument(format!("low_spectrum supports 1 ≤ k ≤ 20, got {k}")));
    }
    let gk = GolubKahan::from_path(&w.path_couplings(), n - 1, n)?;
    let sv = gk.smallest(k - 1)?;
    let g = w.kernel();
    let dg = w.apply_d(&g);
    let mut values = vec![dot(&dg, &dg) / dot(&g, &g)];
    values.extend(sv.iter().map(|s| s * s));

    let threshold = eps0 * w.h;
    let count_below = 1 + gk.count_below(threshold.sqrt());

    let pinv = PseudoInverse::new(w);
    let mut vecs: Vec<Vec<f64>> = vec![pinv.unit_kernel().to_vec()];
    let cluster = count_below.min(k);
    if cluster > 1 {
        vecs.extend(cluster_vectors(w, &pinv, cluster - 1)?);
    }
    for idx in cluster..k {
        let v = inverse_iteration(w, values[idx], &vecs)?;
        vecs.push(v);
    }
    for v in vecs.iter_mut() {
        fix_sign(v);
    }
    let mut vectors = Array2::zeros((k, n));
    for (i, v) in vecs.iter().enumerate() {
        vectors.row_mut(i).assign(&ndarray::ArrayView1::from(v.as_slice()));
    }
    Ok(Spectrum { values, vectors, count_below, threshold })
}

/// Eigenvectors 2..=m+1 of `M` by subspace iteration with `M⁺` on `g⊥`.
fn cluster_vectors(w: &DiscreteWitten, pinv: &PseudoInverse, m: usize) -> Result<Vec<Vec<f64>>> {
    let n = w.n();
    let guard = 2.min(n - 1 - m);
    let b = m + guard;
    let kernel = pinv.unit_kernel().to_vec();
    let weights = w.kernel();
    let mut q: Vec<Vec<f64>> = (1..=b)
        .map(|k| {
            (0..n).map(|j| weights[j] * (k as f64 * std::f64::consts::PI * j as f64 / (n - 1) as f64).cos()).collect()
        })
        .collect();
    gram_schmidt(&mut q, &[&kernel]);

    let mut prev: Option<Vec<f64>> = None;
    for _ in 0..SUBSPACE_MAX_ITER {
        let mut z: Vec<Vec<f64>> = q.iter().map(|v| pinv.apply(v)).collect();
        gram_schmidt(&mut z, &[&kernel]);
        let mz: Vec<Vec<f64>> = z.iter().map(|v| pinv.apply(v)).collect();
        let mut hmat = Array2::zeros((b, b));
        for i in 0..b {
            for j in 0..b {
                hmat[[i, j]] = dot(&z[i], &mz[j]);
            }
        }
        let eig = sym_eigen(&SymMatrix::symmetrized(hmat))?;
        // largest Ritz values of M⁺ are the smallest eigenvalues of M
        let order: Vec<usize> = (0..b).rev().collect();
        q = order
            .iter()
            .map(|&c| {
                let mut v = vec![0.0; n];
                for (i, zi) in z.iter().enumerate() {
                    crate::linalg::axpy(eig.vectors[[i, c]], zi, &mut v);
                }
                v
            })
            .collect();
        gram_schmidt(&mut q, &[&kernel]);
        let theta: Vec<f64> = order.iter().map(|&c| eig.values[c]).collect();
        let converged = (0..m).all(|i| {
            let r = pinv.apply(&q[i]);
            let res: f64 = r.iter().zip(&q[i]).map(|(a, b)| (a - theta[i] * b).powi(2)).sum::<f64>().sqrt();
            res <= 1e-12 * theta[i].abs()
        });
        if converged {
            q.truncate(m);
            return Ok(q);
        }
        if let Some(p) = &prev {
            if p.iter().zip(&theta).all(|(a, b)| (a - b).abs() <= 1e-15 * b.abs()) && theta[0] > 0.0 {
                q.truncate(m);
                return Ok(q);
            }
        }
        prev = Some(theta);
    }
    Err(Error::NonConvergence { algorithm: "pseudo-inverse subspace iteration", iterations: SUBSPACE_MAX_ITER })
}

fn inverse_iteration(w: &DiscreteWitten, lambda: f64, previous: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = w.m();
    let lu = m.factor_shifted(lambda);
    let n = w.n();
    let against: Vec<&[f64]> = previous.iter().map(|v| v.as_slice()).collect();
    let mut v: Vec<f64> = (0..n).map(|j| 1.0 + ((j * 7919) % 104_729) as f64 / 104_729.0).collect();
    let mut one = [v];
    gram_schmidt(&mut one, &against);
    [v] = one;
    for _ in 0..INVERSE_ITERATIONS {
        lu.solve(&mut v);
        let mut one = [v];
        let norms = gram_schmidt(&mut one, &against);
        [v] = one;
        if !(norms[0].is_finite() && norms[0] > 0.0) {
            return Err(Error::NonConvergence { algorithm: "inverse iteration", iterations: INVERSE_ITERATIONS });
        }
    }
    Ok(v)
}

/// Complete eigen-decomposition of `M` by tridiagonal QL, with the low
/// cluster replaced by the high-accuracy pairs from `low`.
pub fn full_spectrum(w: &DiscreteWitten, low: &Spectrum) -> Result<Spectrum> {
    let n = w.n();
    if n > MAX_DENSE_NODES {
        return Err(Error::GridTooLarge { n, max: MAX_DENSE_NODES });
    }
    let eig = w.m().eigen_full()?;
    let keep = low.count_below.min(low.len());
    let mut values = eig.values.to_vec();
    let mut vectors = eig.vectors;
    for i in 0..keep {
        values[i] = low.values[i];
        vectors.row_mut(i).assign(&low.vectors.row(i));
    }
    let low_rows: Vec<Vec<f64>> = (0..keep).map(|i| low.vector(i)).collect();
    let against: Vec<&[f64]> = low_rows.iter().map(|v| v.as_slice()).collect();
    for i in keep..n {
        let mut one = [vectors.row(i).to_vec()];
        gram_schmidt(&mut one, &against);
        vectors.row_mut(i).assign(&ndarray::ArrayView1::from(one[0].as_slice()));
    }
    Ok(Spectrum { values, vectors, count_below: low.count_below, threshold: low.threshold })
}
