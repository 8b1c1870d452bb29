//! Vectorized graph representation, the degree operator, Laplacians, total
//! variation, and the graph Fourier transform.
//!
//! An undirected weighted graph on `n` nodes with no self-loops is stored as
//! the vector of its upper-triangular adjacency entries in lexicographic
//! order, so edge weights live in `R^{n(n-1)/2}`. All spectral quantities are
//! derived from the combinatorial Laplacian `L = diag(W 1) - W`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Number of unordered node pairs, i.e. the length of an edge-weight vector.
pub fn edge_dim(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Position of the pair `(i, j)`, `i < j < n`, in lexicographic
/// upper-triangular order.
pub fn pair_index(i: usize, j: usize, n: usize) -> Result<usize> {
    if i >= j || j >= n {
        return Err(Error::InvalidPair { i, j, n });
    }
    Ok(i * n - i * (i + 1) / 2 + (j - i - 1))
}

/// All pairs `(i, j)` with `i < j < n`, in the order fixed by [`pair_index`].
pub fn pair_iter(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
}

/// Nonnegative upper-triangular edge weights of an undirected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVector {
    n: usize,
    w: DVector<f64>,
}

impl EdgeVector {
    /// Validates length, finiteness and nonnegativity.
    pub fn new(n: usize, w: DVector<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 nodes, got {n}"
            )));
        }
        if w.len() != edge_dim(n) {
            return Err(Error::DimensionMismatch {
                context: "edge vector",
                expected: edge_dim(n),
                got: w.len(),
            });
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "edge vector",
            });
        }
        if w.iter().any(|&x| x < 0.0) {
            return Err(Error::Negative {
                context: "edge vector",
            });
        }
        Ok(Self { n, w })
    }

    /// Caller guarantees the invariants (used on solver outputs, which are
    /// nonnegative by construction).
    pub(crate) fn from_parts_unchecked(n: usize, w: DVector<f64>) -> Self {
        debug_assert_eq!(w.len(), edge_dim(n));
        Self { n, w }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            w: DVector::zeros(edge_dim(n)),
        }
    }

    /// Uniform weights giving every node the requested degree.
    pub fn uniform_with_degree(n: usize, degree: f64) -> Self {
        let w = degree / (n - 1) as f64;
        Self {
            n,
            w: DVector::from_element(edge_dim(n), w),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.w
    }

    pub fn into_weights(self) -> DVector<f64> {
        self.w
    }

    /// Weight of the edge `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self.w[pair_index(i, j, self.n)?])
    }

    /// Number of entries strictly above `threshold`.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.w.iter().filter(|&&x| x > threshold).count()
    }

    /// Copy with entries at or below `threshold` zeroed.
    pub fn pruned(&self, threshold: f64) -> Self {
        let w = self.w.map(|x| if x > threshold { x } else { 0.0 });
        Self { n: self.n, w }
    }

    /// Copy scaled by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "scale factor must be positive and finite, got {s}"
            )));
        }
        Ok(Self {
            n: self.n,
            w: &self.w * s,
        })
    }

    /// Dense symmetric adjacency matrix with zero diagonal.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for (k, (i, j)) in pair_iter(self.n).enumerate() {
            a[(i, j)] = self.w[k];
            a[(j, i)] = self.w[k];
        }
        a
    }
}

/// Vectorized pairwise squared Euclidean distances between node rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceVector {
    n: usize,
    z: DVector<f64>,
}

impl DistanceVector {
    pub fn new(n: usize, z: DVector<f64>) -> Result<Self> {
        if z.len() != edge_dim(n) {
            return Err(Error::DimensionMismatch {
                context: "distance vector",
                expected: edge_dim(n),
                got: z.len(),
            });
        }
        if z.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "distance vector",
            });
        }
        if z.iter().any(|&x| x < 0.0) {
            return Err(Error::Negative {
                context: "distance vector",
            });
        }
        Ok(Self { n, z })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            z: DVector::zeros(edge_dim(n)),
        }
    }

    /// Squared differences `(x_i - x_j)^2` of a single signal, the one-sample
    /// distance statistic consumed by the streaming learner.
    pub fn from_signal(x: &DVector<f64>) -> Result<Self> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "signal" });
        }
        let n = x.len();
        let mut z = DVector::zeros(edge_dim(n));
        for (k, (i, j)) in pair_iter(n).enumerate() {
            let d = x[i] - x[j];
            z[k] = d * d;
        }
        Ok(Self { n, z })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.z
    }

    pub fn into_values(self) -> DVector<f64> {
        self.z
    }

    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "scale factor must be positive and finite, got {s}"
            )));
        }
        Ok(Self {
            n: self.n,
            z: &self.z * s,
        })
    }
}

/// An `N x P` data matrix whose columns are graph signals; row `i` collects
/// the `P` measurements taken at node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalMatrix {
    data: DMatrix<f64>,
}

impl SignalMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() < 2 {
            return Err(Error::InvalidConfig(format!(
                "signal matrix needs at least 2 nodes, got {}",
                data.nrows()
            )));
        }
        if data.ncols() < 1 {
            return Err(Error::InvalidConfig(
                "signal matrix needs at least one signal".into(),
            ));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "signal matrix",
            });
        }
        Ok(Self { data })
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn p(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn signal(&self, p: usize) -> DVector<f64> {
        self.data.column(p).into_owned()
    }

    /// Matrix restricted to columns `[from, to)`.
    pub fn slice_signals(&self, from: usize, to: usize) -> Result<Self> {
        if from >= to || to > self.p() {
            return Err(Error::InvalidConfig(format!(
                "invalid signal range {from}..{to} for {} signals",
                self.p()
            )));
        }
        Ok(Self {
            data: self.data.columns(from, to - from).into_owned(),
        })
    }
}

/// Nodal degrees `d = S w`, the row sums of the reconstructed adjacency.
pub fn degrees(w: &EdgeVector) -> DVector<f64> {
    degrees_of(w.n, &w.w)
}

pub(crate) fn degrees_of(n: usize, w: &DVector<f64>) -> DVector<f64> {
    let mut d = DVector::zeros(n);
    accumulate_degrees(n, w, &mut d);
    d
}

pub(crate) fn accumulate_degrees(n: usize, w: &DVector<f64>, out: &mut DVector<f64>) {
    out.fill(0.0);
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            out[i] += w[k];
            out[j] += w[k];
            k += 1;
        }
    }
}

/// Adjoint of the degree operator: `(S^T u)_{(i,j)} = u_i + u_j`.
pub(crate) fn degree_adjoint(n: usize, u: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(edge_dim(n));
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            out[k] = u[i] + u[j];
            k += 1;
        }
    }
    out
}

/// The degree operator `S` materialized as an `N x N(N-1)/2` 0/1 matrix.
/// Mostly useful for checks; the fast paths never build it.
pub fn degree_operator(n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(n, edge_dim(n));
    for (k, (i, j)) in pair_iter(n).enumerate() {
        s[(i, k)] = 1.0;
        s[(j, k)] = 1.0;
    }
    s
}

/// Pairwise squared Euclidean distances between the rows of the data matrix.
pub fn distance_vector(x: &SignalMatrix) -> DistanceVector {
    let n = x.n();
    let data = x.data();
    let mut z = DVector::zeros(edge_dim(n));
    for (k, (i, j)) in pair_iter(n).enumerate() {
        let mut acc = 0.0;
        for p in 0..x.p() {
            let d = data[(i, p)] - data[(j, p)];
            acc += d * d;
        }
        z[k] = acc;
    }
    DistanceVector { n, z }
}

/// Combinatorial Laplacian `L = diag(d) - W`.
pub fn laplacian(w: &EdgeVector) -> DMatrix<f64> {
    let n = w.n;
    let mut l = DMatrix::zeros(n, n);
    for (k, (i, j)) in pair_iter(n).enumerate() {
        let wij = w.w[k];
        l[(i, j)] = -wij;
        l[(j, i)] = -wij;
        l[(i, i)] += wij;
        l[(j, j)] += wij;
    }
    l
}

/// Total variation (Dirichlet energy) `x^T L x`.
///
/// Panics if dimensions do not match.
pub fn total_variation(l: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    assert_eq!(l.nrows(), x.len(), "laplacian/signal dimension mismatch");
    (x.transpose() * l * x)[(0, 0)]
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct GftBasis {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl GftBasis {
    pub(crate) fn from_parts(eigenvalues: DVector<f64>, eigenvectors: DMatrix<f64>) -> Self {
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> DVector<f64> {
        self.eigenvectors.column(k).into_owned()
    }
}

/// Eigendecomposition of a symmetric matrix with a deterministic convention:
/// eigenvalues ascending (ties kept in the solver's stable order), and each
/// eigenvector flipped so its first component of magnitude above `1e-12` is
/// positive.
pub fn symmetric_eigen_sorted(m: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: "symmetric eigendecomposition",
            expected: n,
            got: m.ncols(),
        });
    }
    let scale = m.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1.0);
    let mut max_delta = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            max_delta = max_delta.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    if max_delta > 1e-9 * scale {
        return Err(Error::NotSymmetric { max_delta });
    }

    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });

    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = eig.eigenvalues[src];
        let col = eig.eigenvectors.column(src);
        let sign = col
            .iter()
            .find(|v| v.abs() > 1e-12)
            .map_or(1.0, |&v| if v < 0.0 { -1.0 } else { 1.0 });
        for r in 0..n {
            vectors[(r, dst)] = sign * col[r];
        }
    }
    Ok((values, vectors))
}

/// Spectral decomposition of a combinatorial Laplacian.
///
/// Eigenvalues in `[-1e-9, 0)` are snapped to zero so the basis carries
/// nonnegative graph frequencies.
pub fn gft_decompose(l: &DMatrix<f64>) -> Result<GftBasis> {
    let (mut values, vectors) = symmetric_eigen_sorted(l)?;
    for v in values.iter_mut() {
        if *v < 0.0 && *v >= -1e-9 {
            *v = 0.0;
        }
    }
    Ok(GftBasis {
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

/// GFT coefficients `V^T x`.
///
/// Panics if dimensions do not match.
pub fn gft_project(basis: &GftBasis, x: &DVector<f64>) -> DVector<f64> {
    assert_eq!(basis.n(), x.len(), "basis/signal dimension mismatch");
    basis.eigenvectors.tr_mul(x)
}

/// Inverse GFT `V x_tilde`.
pub fn gft_reconstruct(basis: &GftBasis, coeffs: &DVector<f64>) -> DVector<f64> {
    assert_eq!(basis.n(), coeffs.len(), "basis/coefficient dimension mismatch");
    &basis.eigenvectors * coeffs
}
