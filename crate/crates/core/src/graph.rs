//! Conductance graphs and the model parameter triple (W, theta, eta).
//!
//! `H_beta = 2 diag(beta) - W` and `K_t = Id - diag(t) W` are the two matrix
//! families everything else is built from. `K_t` is generally not symmetric
//! when `t` has unequal entries; `H_beta` always is.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, SquareMat};

/// Symmetric nonnegative conductance matrix over a finite connected graph.
/// Self-loops (positive diagonal entries) are allowed.
#[derive(Debug, Clone)]
pub struct ConductanceMatrix {
    w: SquareMat,
}

impl ConductanceMatrix {
    pub fn new(w: SquareMat) -> Result<Self> {
        if !w.is_symmetric(0.0) {
            return Err(Error::NonSymmetric {
                max_asym: w.max_asymmetry(),
            });
        }
        for i in 0..w.n() {
            for j in 0..w.n() {
                if !(w[(i, j)] >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "W[{i},{j}] = {} must be nonnegative",
                        w[(i, j)]
                    )));
                }
            }
        }
        if !is_connected(&w) {
            return Err(Error::DisconnectedGraph);
        }
        Ok(ConductanceMatrix { w })
    }

    pub fn n(&self) -> usize {
        self.w.n()
    }

    pub fn matrix(&self) -> &SquareMat {
        &self.w
    }

    pub fn is_zero(&self) -> bool {
        self.w.max_abs() == 0.0
    }

    /// Row sum excluding the diagonal: sum_{j != i} W_{i,j}.
    pub fn offdiag_row_sum(&self, i: usize) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n() {
            if j != i {
                s += self.w[(i, j)];
            }
        }
        s
    }
}

/// Union-find connectivity over strictly positive off-diagonal entries.
fn is_connected(w: &SquareMat) -> bool {
    let n = w.n();
    if n <= 1 {
        return true;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if w[(i, j)] > 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let root = find(&mut parent, 0);
    (1..n).all(|i| find(&mut parent, i) == root)
}

/// The triple (W, theta, eta) indexing every SDE and density in the library.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub w: ConductanceMatrix,
    pub theta: Vec<f64>,
    pub eta: Vec<f64>,
}

impl ModelParams {
    pub fn new(w: ConductanceMatrix, theta: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        let n = w.n();
        if theta.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: theta.len(),
            });
        }
        if eta.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: eta.len(),
            });
        }
        for (i, &t) in theta.iter().enumerate() {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "theta[{i}] = {t} must be strictly positive"
                )));
            }
        }
        for (i, &e) in eta.iter().enumerate() {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "eta[{i}] = {e} must be nonnegative"
                )));
            }
        }
        Ok(ModelParams { w, theta, eta })
    }

    pub fn n(&self) -> usize {
        self.w.n()
    }

    /// H_beta = 2 diag(beta) - W.
    pub fn h_beta(&self, beta: &[f64]) -> Result<SquareMat> {
        h_beta(self.w.matrix(), beta)
    }

    /// K_t = Id - diag(t) W. All entries of `t` must be finite; callers clamp
    /// with `t ∧ T0` first when absorption times are involved.
    pub fn k_t(&self, t: &TimeVector) -> Result<SquareMat> {
        k_t(self.w.matrix(), t)
    }
}

pub fn h_beta(w: &SquareMat, beta: &[f64]) -> Result<SquareMat> {
    let n = w.n();
    if beta.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: beta.len(),
        });
    }
    let mut h = SquareMat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = -w[(i, j)];
        }
        h[(i, i)] += 2.0 * beta[i];
    }
    Ok(h)
}

pub fn k_t(w: &SquareMat, t: &TimeVector) -> Result<SquareMat> {
    let n = w.n();
    if t.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: t.len(),
        });
    }
    let mut k = SquareMat::zeros(n);
    for i in 0..n {
        let ti = t[i];
        if !ti.is_finite() {
            return Err(Error::InfiniteTimeEntry { index: i });
        }
        for j in 0..n {
            k[(i, j)] = -ti * w[(i, j)];
        }
        k[(i, i)] += 1.0;
    }
    Ok(k)
}

/// Vector of per-coordinate times; entries are nonnegative, with `+inf`
/// standing for "not yet" (e.g. a coordinate that has not been absorbed).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeVector(Vec<f64>);

impl TimeVector {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        for (i, &v) in t.iter().enumerate() {
            if v.is_nan() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "time entry {i} = {v} must be >= 0 or +inf"
                )));
            }
        }
        Ok(TimeVector(t))
    }

    pub fn zeros(n: usize) -> Self {
        TimeVector(vec![0.0; n])
    }

    pub fn constant(n: usize, v: f64) -> Result<Self> {
        Self::new(vec![v; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Entrywise minimum t ∧ other.
    pub fn min_with(&self, other: &TimeVector) -> TimeVector {
        assert_eq!(self.len(), other.len());
        TimeVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.min(*b))
                .collect(),
        )
    }
}

impl std::ops::Index<usize> for TimeVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A point of the beta potential's domain {H_beta > 0}, carrying the Cholesky
/// factorization of H_beta as the positive-definiteness certificate.
#[derive(Debug, Clone)]
pub struct BetaPoint {
    beta: Vec<f64>,
    h_beta: SquareMat,
    factor: Cholesky,
}

impl BetaPoint {
    pub fn new(params: &ModelParams, beta: Vec<f64>) -> Result<Self> {
        let h = params.h_beta(&beta)?;
        let factor = Cholesky::new(&h).ok_or(Error::NotPositiveDefinite)?;
        Ok(BetaPoint {
            beta,
            h_beta: h,
            factor,
        })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn h_beta(&self) -> &SquareMat {
        &self.h_beta
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }
}

/// Graph description accepted on the wire: 0-based vertex indices, one entry
/// per undirected edge, self-loops as `[i, i, w]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub theta: Vec<f64>,
    pub eta: Vec<f64>,
}

impl GraphJson {
    pub fn to_params(&self) -> Result<ModelParams> {
        let mut w = SquareMat::zeros(self.n);
        for &(i, j, wij) in &self.edges {
            if i >= self.n || j >= self.n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({i}, {j}) out of range for n = {}",
                    self.n
                )));
            }
            if !(wij >= 0.0 && wij.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "edge weight W[{i},{j}] = {wij} must be nonnegative"
                )));
            }
            w[(i, j)] = wij;
            w[(j, i)] = wij;
        }
        ModelParams::new(
            ConductanceMatrix::new(w)?,
            self.theta.clone(),
            self.eta.clone(),
        )
    }

    pub fn from_params(p: &ModelParams) -> Self {
        let n = p.n();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i..n {
                let w = p.w.matrix()[(i, j)];
                if w > 0.0 {
                    edges.push((i, j, w));
                }
            }
        }
        GraphJson {
            n,
            edges,
            theta: p.theta.clone(),
            eta: p.eta.clone(),
        }
    }
}

/// Two-vertex single-edge graph, the workhorse of the verification suites.
pub fn two_vertex_params(w01: f64, theta: [f64; 2], eta: [f64; 2]) -> ModelParams {
    let mut w = SquareMat::zeros(2);
    w[(0, 1)] = w01;
    w[(1, 0)] = w01;
    ModelParams::new(ConductanceMatrix::new(w).unwrap(), theta.to_vec(), eta.to_vec()).unwrap()
}

/// Single vertex with an optional self-loop.
pub fn one_vertex_params(w00: f64, theta: f64, eta: f64) -> ModelParams {
    let mut w = SquareMat::zeros(1);
    w[(0, 0)] = w00;
    ModelParams::new(ConductanceMatrix::new(w).unwrap(), vec![theta], vec![eta]).unwrap()
}

/// Path graph on n vertices with unit conductances.
pub fn path_graph_params(n: usize, theta: Vec<f64>, eta: Vec<f64>) -> Result<ModelParams> {
    let mut w = SquareMat::zeros(n);
    for i in 0..n.saturating_sub(1) {
        w[(i, i + 1)] = 1.0;
        w[(i + 1, i)] = 1.0;
    }
    ModelParams::new(ConductanceMatrix::new(w)?, theta, eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_positive_definite;

    // A zero 2x2 conductance matrix is disconnected, so the W = 0 cases in the
    // h_beta/k_t contracts are exercised on the raw matrix ops.
    #[test]
    fn h_beta_on_raw_matrices() {
        let w0 = SquareMat::zeros(2);
        let h = h_beta(&w0, &[1.0, 2.0]).unwrap();
        assert_eq!(h[(0, 0)], 2.0);
        assert_eq!(h[(1, 1)], 4.0);
        assert_eq!(h[(0, 1)], 0.0);

        let p = two_vertex_params(1.0, [1.0, 1.0], [0.0, 0.0]);
        let h = p.h_beta(&[1.0, 1.0]).unwrap();
        assert_eq!(h[(0, 0)], 2.0);
        assert_eq!(h[(0, 1)], -1.0);
        assert_eq!(h[(1, 0)], -1.0);
        assert_eq!(h[(1, 1)], 2.0);

        let mut w = SquareMat::zeros(2);
        w[(0, 0)] = 0.5;
        w[(0, 1)] = 1.0;
        w[(1, 0)] = 1.0;
        let h = h_beta(&w, &[2.0, 3.0]).unwrap();
        assert_eq!(h[(0, 0)], 3.5);
        assert_eq!(h[(0, 1)], -1.0);
        assert_eq!(h[(1, 1)], 6.0);

        assert!(matches!(
            h_beta(&w, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn k_t_examples() {
        let p = two_vertex_params(1.0, [1.0, 1.0], [0.0, 0.0]);
        let k = p.k_t(&TimeVector::zeros(2)).unwrap();
        assert_eq!(k, SquareMat::identity(2));

        let k = p.k_t(&TimeVector::new(vec![1.0, 2.0]).unwrap()).unwrap();
        assert_eq!(k[(0, 0)], 1.0);
        assert_eq!(k[(0, 1)], -1.0);
        assert_eq!(k[(1, 0)], -2.0);
        assert_eq!(k[(1, 1)], 1.0);

        // K_t = diag(t) H_{1/(2t)}
        let t = TimeVector::new(vec![0.25, 0.25]).unwrap();
        let k = p.k_t(&t).unwrap();
        assert_eq!(k[(0, 0)], 1.0);
        assert_eq!(k[(0, 1)], -0.25);
        let h = p.h_beta(&[2.0, 2.0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(k[(i, j)], t[i] * h[(i, j)]);
            }
        }

        let inf = TimeVector::new(vec![1.0, f64::INFINITY]).unwrap();
        assert!(matches!(
            p.k_t(&inf),
            Err(Error::InfiniteTimeEntry { index: 1 })
        ));
    }

    #[test]
    fn pd_monotone_in_beta() {
        let p = two_vertex_params(1.0, [1.0, 1.0], [0.0, 0.0]);
        let lo = [0.6, 0.6];
        let hi = [0.9, 1.4];
        let h_lo = p.h_beta(&lo).unwrap();
        let h_hi = p.h_beta(&hi).unwrap();
        assert!(is_positive_definite(&h_lo).unwrap());
        assert!(is_positive_definite(&h_hi).unwrap());
    }

    #[test]
    fn beta_point_requires_pd() {
        let p = two_vertex_params(1.0, [1.0, 1.0], [0.0, 0.0]);
        assert!(BetaPoint::new(&p, vec![1.0, 1.0]).is_ok());
        assert!(matches!(
            BetaPoint::new(&p, vec![0.4, 0.4]),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn graph_json_round_trip_and_validation() {
        let json = r#"{"n": 2, "edges": [[0, 1, 1.0]], "theta": [1.0, 1.0], "eta": [0.5, 0.5]}"#;
        let g: GraphJson = serde_json::from_str(json).unwrap();
        let p = g.to_params().unwrap();
        assert_eq!(p.n(), 2);
        assert_eq!(p.w.matrix()[(0, 1)], 1.0);

        let disconnected = GraphJson {
            n: 2,
            edges: vec![],
            theta: vec![1.0, 1.0],
            eta: vec![0.0, 0.0],
        };
        assert!(matches!(
            disconnected.to_params(),
            Err(Error::DisconnectedGraph)
        ));

        let bad_theta = GraphJson {
            n: 1,
            edges: vec![],
            theta: vec![0.0],
            eta: vec![0.0],
        };
        assert!(bad_theta.to_params().is_err());
    }

    #[test]
    fn self_loops_allowed() {
        let p = one_vertex_params(0.5, 1.0, 0.0);
        assert_eq!(p.w.matrix()[(0, 0)], 0.5);
    }
}
