//! Reduced N×N models: the 1D matrices L₀ and A₀, the weighted graph
//! Laplacian for user-supplied critical-point graphs, and the reduced flow
//! α(τ) = e^{−τA}β.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::landscape::WellDecomposition;
use crate::linalg::{sym_eigen, SymEigen, SymMatrix};

fn check_hessians(mu: &[f64], nu: &[f64]) -> Result<()> {
    if mu.is_empty() {
        return Err(Error::SizeMismatch("at least one minimum is required".into()));
    }
    if nu.len() + 1 != mu.len() {
        return Err(Error::SizeMismatch(format!(
            "{} minima need {} saddles, got {}",
            mu.len(),
            mu.len() - 1,
            nu.len()
        )));
    }
    for &m in mu {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::NonPositiveHessian { which: "mu", value: m });
        }
    }
    for &n in nu {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NonPositiveHessian { which: "nu", value: n });
        }
    }
    Ok(())
}

/// `(N−1)×N` matrix with `(L₀)_{ij} = ν_i^{1/4} μ_j^{1/4} (−δ_{ij} + δ_{i+1,j})`.
pub fn build_l0(mu: &[f64], nu: &[f64]) -> Result<Array2<f64>> {
    check_hessians(mu, nu)?;
    let n = mu.len();
    let mut l = Array2::zeros((n - 1, n));
    for (i, v) in nu.iter().enumerate() {
        let v4 = v.powf(0.25);
        l[[i, i]] = -v4 * mu[i].powf(0.25);
        l[[i, i + 1]] = v4 * mu[i + 1].powf(0.25);
    }
    Ok(l)
}

/// Tridiagonal A₀ from its closed-form entries (equal to `L₀ᵀL₀/π`).
pub fn build_a0(mu: &[f64], nu: &[f64]) -> Result<SymMatrix> {
    check_hessians(mu, nu)?;
    let n = mu.len();
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        let left = if i > 0 { nu[i - 1].sqrt() } else { 0.0 };
        let right = nu.get(i).map_or(0.0, |v| v.sqrt());
        a[[i, i]] = mu[i].sqrt() * (left + right) / PI;
        if i + 1 < n {
            let off = -nu[i].sqrt() * (mu[i] * mu[i + 1]).powf(0.25) / PI;
            a[[i, i + 1]] = off;
            a[[i + 1, i]] = off;
        }
    }
    Ok(SymMatrix::symmetrized(a))
}

/// Unit vector proportional to `(μ_n^{−1/4})_n`, the kernel of A₀.
pub fn kernel_vector(mu: &[f64]) -> Array1<f64> {
    let v = Array1::from_iter(mu.iter().map(|m| m.powf(-0.25)));
    let norm = v.dot(&v).sqrt();
    v / norm
}

/// A vertex given by position or by label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexRef {
    Index(usize),
    Label(String),
}

/// Graph of minima joined by index-1 saddles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<[VertexRef; 2]>,
    /// Edge weight. When absent it is derived from `mu` and `nu`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl GraphSpec {
    /// `κ` if given, otherwise `π⁻¹μ^{1/2}ν^{1/2}`.
    pub fn weight(&self) -> Result<f64> {
        let k = match (self.kappa, self.mu, self.nu) {
            (Some(k), _, _) => k,
            (None, Some(m), Some(n)) => {
                check_hessians(&[m, m], &[n])?;
                (m * n).sqrt() / PI
            }
            _ => return Err(Error::InvalidArgument("graph needs either kappa or both mu and nu".into())),
        };
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("edge weight {k} must be positive")));
        }
        Ok(k)
    }

    /// Edges as index pairs, after rejecting unknown vertices, self-loops and multi-edges.
    pub fn resolved_edges(&self) -> Result<Vec<(usize, usize)>> {
        let mut lookup = HashMap::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if lookup.insert(v.as_str(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate vertex label {v:?}")));
            }
        }
        let resolve = |r: &VertexRef| -> Result<usize> {
            match r {
                VertexRef::Index(i) if *i < self.vertices.len() => Ok(*i),
                VertexRef::Index(i) => Err(Error::UnknownVertex(i.to_string())),
                VertexRef::Label(l) => lookup.get(l.as_str()).copied().ok_or_else(|| Error::UnknownVertex(l.clone())),
            }
        };
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(self.edges.len());
        for [a, b] in &self.edges {
            let (i, j) = (resolve(a)?, resolve(b)?);
            if i == j {
                return Err(Error::SelfLoop(self.vertices[i].clone()));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::MultiEdge(self.vertices[i].clone(), self.vertices[j].clone()));
            }
            out.push((i, j));
        }
        Ok(out)
    }
}

fn component_count(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut count = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            count -= 1;
        }
    }
    count
}

/// `κ·(D − A)` for a simple connected graph.
pub fn graph_laplacian(spec: &GraphSpec, kappa: f64) -> Result<SymMatrix> {
    let n = spec.vertices.len();
    if n == 0 {
        return Err(Error::InvalidArgument("graph has no vertices".into()));
    }
    let edges = spec.resolved_edges()?;
    let components = component_count(n, &edges);
    if components > 1 {
        return Err(Error::DisconnectedGraph { components });
    }
    let mut m = Array2::zeros((n, n));
    for (i, j) in edges {
        m[[i, i]] += kappa;
        m[[j, j]] += kappa;
        m[[i, j]] -= kappa;
        m[[j, i]] -= kappa;
    }
    Ok(SymMatrix::symmetrized(m))
}

/// Cached eigen-decomposition of a PSD generator for repeated `e^{−τA}β`.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigen: SymEigen,
}

impl Propagator {
    pub fn new(a: &SymMatrix) -> Result<Self> {
        let eigen = sym_eigen(a)?;
        let floor = -1e-10 * a.norm();
        if let Some(&low) = eigen.values.iter().find(|&&v| v < floor) {
            return Err(Error::NotPositiveSemiDefinite { eigenvalue: low });
        }
        Ok(Self { eigen })
    }

    pub fn eigen(&self) -> &SymEigen {
        &self.eigen
    }

    pub fn apply(&self, beta: &[f64], tau: f64) -> Result<Array1<f64>> {
        let n = self.eigen.values.len();
        if beta.len() != n {
            return Err(Error::SizeMismatch(format!("beta has {} entries, matrix order is {n}", beta.len())));
        }
        if !(tau >= 0.0) {
            return Err(Error::InvalidArgument(format!("tau = {tau} must be non-negative")));
        }
        let v = &self.eigen.vectors;
        let coeffs = v.t().dot(&Array1::from(beta.to_vec()));
        let decayed = Array1::from_iter(
            coeffs.iter().zip(self.eigen.values.iter()).map(|(c, lam)| c * (-tau * lam.max(0.0)).exp()),
        );
        Ok(v.dot(&decayed))
    }
}

/// `e^{−τA}β` through the spectral decomposition of `A`.
pub fn reduced_evolve(a: &SymMatrix, beta: &[f64], tau: f64) -> Result<Array1<f64>> {
    Propagator::new(a)?.apply(beta, tau)
}

fn serialize_rows<S: Serializer>(m: &Array2<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.rows().into_iter().map(|r| r.to_vec()).collect();
    rows.serialize(s)
}

fn serialize_vec<S: Serializer>(v: &Array1<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    v.to_vec().serialize(s)
}

fn serialize_columns<S: Serializer>(m: &Array2<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let cols: Vec<Vec<f64>> = m.columns().into_iter().map(|c| c.to_vec()).collect();
    cols.serialize(s)
}

/// Reduced generator together with its spectral data.
#[derive(Debug, Clone, Serialize)]
pub struct ReducedModel {
    #[serde(rename = "A0")]
    pub a0: SymMatrix,
    /// `L₀` for 1D models; empty for graph models.
    #[serde(rename = "L0", serialize_with = "serialize_rows")]
    pub l0: Array2<f64>,
    /// Uniform edge weight when it is meaningful (equal Hessians or graph input).
    pub kappa: Option<f64>,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(serialize_with = "serialize_vec")]
    pub eigenvalues: Array1<f64>,
    /// Listed one eigenvector per entry, matching `eigenvalues`.
    #[serde(serialize_with = "serialize_columns")]
    pub eigenvectors: Array2<f64>,
    #[serde(serialize_with = "serialize_vec")]
    pub kernel_vector: Array1<f64>,
}

impl ReducedModel {
    pub fn from_hessians(mu: &[f64], nu: &[f64], s: f64) -> Result<Self> {
        let a0 = build_a0(mu, nu)?;
        let l0 = build_l0(mu, nu)?;
        let eig = sym_eigen(&a0)?;
        let equal = |v: &[f64]| v.windows(2).all(|w| (w[0] - w[1]).abs() <= 1e-12 * w[0].abs());
        let kappa = (equal(mu) && equal(nu) && !nu.is_empty()).then(|| (mu[0] * nu[0]).sqrt());
        Ok(Self {
            a0,
            l0,
            kappa,
            s,
            eigenvalues: eig.values,
            eigenvectors: eig.vectors,
            kernel_vector: kernel_vector(mu),
        })
    }

    pub fn from_decomposition(decomp: &WellDecomposition) -> Result<Self> {
        Self::from_hessians(&decomp.mu, &decomp.nu, decomp.s)
    }

    /// Graph model; `S` is unknown in this setting and recorded as NaN.
    pub fn from_graph(spec: &GraphSpec) -> Result<Self> {
        let kappa = spec.weight()?;
        let a0 = graph_laplacian(spec, kappa)?;
        let eig = sym_eigen(&a0)?;
        let n = spec.vertices.len();
        Ok(Self {
            a0,
            l0: Array2::zeros((0, n)),
            kappa: Some(kappa),
            s: f64::NAN,
            eigenvalues: eig.values,
            eigenvectors: eig.vectors,
            kernel_vector: Array1::from_elem(n, 1.0 / (n as f64).sqrt()),
        })
    }

    /// `ν_h = h e^{−2S/h}`.
    pub fn time_scale(&self, h: f64) -> f64 {
        h * (-2.0 * self.s / h).exp()
    }

    pub fn evolve(&self, beta: &[f64], tau: f64) -> Result<Array1<f64>> {
        reduced_evolve(&self.a0, beta, tau)
    }
}
