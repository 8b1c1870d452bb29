//! Evaluation metrics: edge-recovery F-measure, temporal deviation of graph
//! sequences, algebraic connectivity, spectral energy profiles, and the
//! financial series transforms.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{gft_decompose, gft_project, laplacian, pair_iter, EdgeVector, GftBasis, SignalMatrix};

/// Node pairs whose weight survives pruning at a threshold.
#[derive(Debug, Clone)]
pub struct EdgeSet {
    n: usize,
    threshold: f64,
    pairs: BTreeSet<(usize, usize)>,
}

impl EdgeSet {
    /// Keeps pairs with weight strictly above `threshold`.
    pub fn from_edges(w: &EdgeVector, threshold: f64) -> Self {
        let pairs = pair_iter(w.n())
            .enumerate()
            .filter(|(k, _)| w.weights()[*k] > threshold)
            .map(|(_, pair)| pair)
            .collect();
        Self {
            n: w.n(),
            threshold,
            pairs,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&(i.min(j), i.max(j)))
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(usize, usize)> {
        self.pairs.iter()
    }

    pub fn intersection_size(&self, other: &EdgeSet) -> usize {
        self.pairs.intersection(&other.pairs).count()
    }
}

/// Edge precision and recall of `estimate` against `truth`.
///
/// An empty estimate yields zero precision (sweeps must not abort); an empty
/// truth leaves recall undefined and errors.
pub fn precision_recall(estimate: &EdgeSet, truth: &EdgeSet) -> Result<(f64, f64)> {
    if estimate.n() != truth.n() {
        return Err(Error::DimensionMismatch {
            context: "edge sets",
            expected: truth.n(),
            got: estimate.n(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let hits = estimate.intersection_size(truth) as f64;
    let precision = if estimate.is_empty() {
        0.0
    } else {
        hits / estimate.len() as f64
    };
    let recall = hits / truth.len() as f64;
    Ok((precision, recall))
}

/// Harmonic mean of edge precision and recall after pruning both graphs at
/// `threshold`; zero when both are zero.
pub fn f_measure(estimate: &EdgeVector, truth: &EdgeVector, threshold: f64) -> Result<f64> {
    let est = EdgeSet::from_edges(estimate, threshold);
    let tru = EdgeSet::from_edges(truth, threshold);
    let (precision, recall) = precision_recall(&est, &tru)?;
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

/// `||W_t - W_{t-1}||_F / ||W_{t-1}||_F`; identical on the vectorized form
/// since the sqrt(2) factors cancel.
pub fn relative_temporal_deviation(w_t: &EdgeVector, w_prev: &EdgeVector) -> Result<f64> {
    if w_t.n() != w_prev.n() {
        return Err(Error::DimensionMismatch {
            context: "edge vectors",
            expected: w_prev.n(),
            got: w_t.n(),
        });
    }
    let denom = w_prev.weights().norm();
    if denom == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok((w_t.weights() - w_prev.weights()).norm() / denom)
}

/// Second-smallest Laplacian eigenvalue; zero exactly when the graph is
/// disconnected.
pub fn algebraic_connectivity(w: &EdgeVector) -> Result<f64> {
    let basis = gft_decompose(&laplacian(w))?;
    Ok(basis.eigenvalues()[1])
}

/// Running share of signal energy captured by the first `k` GFT
/// coefficients, for `k = 1..=N`. Zero signals map to an all-zero profile.
pub fn cumulative_relative_energy(basis: &GftBasis, x: &DVector<f64>) -> DVector<f64> {
    let coeffs = gft_project(basis, x);
    let total = coeffs.norm_squared();
    let n = basis.n();
    let mut out = DVector::zeros(n);
    if total == 0.0 {
        return out;
    }
    let mut acc = 0.0;
    for k in 0..n {
        acc += coeffs[k] * coeffs[k];
        out[k] = acc / total;
    }
    out
}

/// Transform applied to raw per-node price series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesMode {
    /// Log prices.
    Log,
    /// Relative daily temporal variation `|p(t) - p(t-1)| / |p(t-1)|`.
    Rdtv,
}

/// Turns a `T x N` price table (rows are time points) into a signal matrix,
/// one signal per time step. The RDTV stream starts at the second time point.
pub fn series_transform(prices: &DMatrix<f64>, mode: SeriesMode) -> Result<SignalMatrix> {
    let t = prices.nrows();
    let n = prices.ncols();
    for &p in prices.iter() {
        if !p.is_finite() {
            return Err(Error::NonFinite { context: "prices" });
        }
        if p <= 0.0 {
            return Err(Error::NonPositivePrice(p));
        }
    }
    match mode {
        SeriesMode::Log => {
            let data = DMatrix::from_fn(n, t, |i, c| prices[(c, i)].ln());
            SignalMatrix::new(data)
        }
        SeriesMode::Rdtv => {
            if t < 2 {
                return Err(Error::TooFewTimePoints);
            }
            let data = DMatrix::from_fn(n, t - 1, |i, c| {
                let prev = prices[(c, i)];
                (prices[(c + 1, i)] - prev).abs() / prev.abs()
            });
            SignalMatrix::new(data)
        }
    }
}
