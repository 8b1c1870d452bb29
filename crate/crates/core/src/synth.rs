//! Seeded generators for the synthetic experiments: random graph families,
//! partial edge rewiring, Gaussian smooth signals, and piecewise-constant
//! streams. Everything is a pure function of its seed.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge_dim, gft_decompose, laplacian, pair_iter, EdgeVector, SignalMatrix};

const CONNECTIVITY_RETRIES: u32 = 100;

/// Random graph family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphKind {
    /// Each pair present independently with probability `p`.
    Er { p: f64 },
    /// Seed clique of `m` nodes, then preferential attachment adding `m`
    /// edges per new node.
    Ba { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    #[serde(flatten)]
    pub kind: GraphKind,
    pub n: usize,
    pub seed: u64,
}

impl GraphSpec {
    pub fn er(n: usize, p: f64, seed: u64) -> Self {
        Self {
            kind: GraphKind::Er { p },
            n,
            seed,
        }
    }

    pub fn ba(n: usize, m: usize, seed: u64) -> Self {
        Self {
            kind: GraphKind::Ba { m },
            n,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 nodes, got {}",
                self.n
            )));
        }
        match self.kind {
            GraphKind::Er { p } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "edge probability must lie in (0, 1], got {p}"
                    )));
                }
            }
            GraphKind::Ba { m } => {
                if m == 0 || m >= self.n {
                    return Err(Error::InvalidConfig(format!(
                        "attachment count must satisfy 1 <= m < n, got m={m}, n={}",
                        self.n
                    )));
                }
            }
        }
        Ok(())
    }
}

/// SplitMix64 step, used to derive independent sub-seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed.wrapping_add(salt.wrapping_mul(0x9e3779b97f4a7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Samples a unit-weight graph from the family, retrying with an incremented
/// seed salt until connected. Returns the graph and the retry count.
pub fn gen_graph_with_retries(spec: &GraphSpec) -> Result<(EdgeVector, u32)> {
    spec.validate()?;
    for attempt in 0..CONNECTIVITY_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(spec.seed, attempt as u64));
        let w = match spec.kind {
            GraphKind::Er { p } => er_edges(spec.n, p, &mut rng),
            GraphKind::Ba { m } => ba_edges(spec.n, m, &mut rng),
        };
        if is_connected(spec.n, &w) {
            return Ok((EdgeVector::new(spec.n, w)?, attempt));
        }
    }
    Err(Error::ConnectivityRetries(CONNECTIVITY_RETRIES))
}

/// Samples a connected unit-weight graph from the family.
pub fn gen_graph(spec: &GraphSpec) -> Result<EdgeVector> {
    gen_graph_with_retries(spec).map(|(w, _)| w)
}

fn er_edges(n: usize, p: f64, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(edge_dim(n), |_, _| {
        if rng.random_bool(p) {
            1.0
        } else {
            0.0
        }
    })
}

fn ba_edges(n: usize, m: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let mut w = DVector::zeros(edge_dim(n));
    // One endpoint entry per incident edge, so sampling from this list is
    // degree-proportional.
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * m * n);
    let set_edge = |w: &mut DVector<f64>, a: usize, b: usize| {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        w[crate::graph::pair_index(i, j, n).expect("valid pair")] = 1.0;
    };
    for i in 0..m {
        for j in (i + 1)..m {
            set_edge(&mut w, i, j);
            endpoints.push(i);
            endpoints.push(j);
        }
    }
    for v in m..n {
        let mut chosen: Vec<usize> = Vec::with_capacity(m);
        while chosen.len() < m {
            let candidate = if endpoints.is_empty() {
                // m = 1 starts from an edgeless seed node; fall back to a
                // uniform pick among existing nodes.
                rng.random_range(0..v)
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            if candidate != v && !chosen.contains(&candidate) {
                chosen.push(candidate);
            }
        }
        for &u in &chosen {
            set_edge(&mut w, u, v);
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    w
}

fn is_connected(n: usize, w: &DVector<f64>) -> bool {
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, (i, j)) in pair_iter(n).enumerate() {
        if w[k] > 0.0 {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adjacency[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

/// Outcome of a rewiring pass.
#[derive(Debug, Clone)]
pub struct Rewired {
    pub edges: EdgeVector,
    /// Edges removed (and inserted).
    pub moved: usize,
    /// The graph was complete: nothing could move, input returned unchanged.
    pub saturated: bool,
}

/// Replaces `floor(fraction * |E|)` uniformly chosen edges with uniformly
/// chosen absent pairs, preserving the edge count. Inserted edges get unit
/// weight.
pub fn rewire(w: &EdgeVector, fraction: f64, seed: u64) -> Result<Rewired> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidConfig(format!(
            "rewire fraction must lie in [0, 1], got {fraction}"
        )));
    }
    let present: Vec<usize> = (0..w.weights().len())
        .filter(|&k| w.weights()[k] > 0.0)
        .collect();
    let absent: Vec<usize> = (0..w.weights().len())
        .filter(|&k| w.weights()[k] == 0.0)
        .collect();
    let k_move = (fraction * present.len() as f64).floor() as usize;
    if k_move == 0 {
        return Ok(Rewired {
            edges: w.clone(),
            moved: 0,
            saturated: false,
        });
    }
    if absent.is_empty() {
        log::warn!("rewire: graph is complete, returning it unchanged");
        return Ok(Rewired {
            edges: w.clone(),
            moved: 0,
            saturated: true,
        });
    }
    if k_move > absent.len() {
        return Err(Error::TooDense {
            needed: k_move,
            available: absent.len(),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let removed = sample_without_replacement(&present, k_move, &mut rng);
    let inserted = sample_without_replacement(&absent, k_move, &mut rng);
    let mut out = w.weights().clone();
    for &k in &removed {
        out[k] = 0.0;
    }
    for &k in &inserted {
        out[k] = 1.0;
    }
    Ok(Rewired {
        edges: EdgeVector::new(w.n(), out)?,
        moved: k_move,
        saturated: false,
    })
}

fn sample_without_replacement(pool: &[usize], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut items = pool.to_vec();
    // Partial Fisher-Yates.
    for i in 0..k {
        let j = rng.random_range(i..items.len());
        items.swap(i, j);
    }
    items.truncate(k);
    items
}

/// Draws `p` i.i.d. signals from `N(0, L^+ + sigma_e^2 I)`: Gaussian factor
/// loadings on the positive-eigenvalue GFT components scaled by
/// `lambda^{-1/2}`, plus white noise.
pub fn gen_smooth_signals(
    w: &EdgeVector,
    p: usize,
    sigma_e: f64,
    seed: u64,
) -> Result<SignalMatrix> {
    if p == 0 {
        return Err(Error::InvalidConfig("need at least one signal".into()));
    }
    if !(sigma_e >= 0.0 && sigma_e.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "noise level must be >= 0, got {sigma_e}"
        )));
    }
    let n = w.n();
    let basis = gft_decompose(&laplacian(w))?;
    // Eigenvalues at or below 1e-9 belong to the null space and are skipped.
    let active: Vec<usize> = (0..n)
        .filter(|&k| basis.eigenvalues()[k] > 1e-9)
        .collect();
    if active.len() < n - 1 && sigma_e == 0.0 {
        log::warn!(
            "gen_smooth_signals: disconnected graph with zero noise; \
             covariance is rank-deficient per component"
        );
    }
    let scales: Vec<f64> = active
        .iter()
        .map(|&k| 1.0 / basis.eigenvalues()[k].sqrt())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = DMatrix::zeros(n, p);
    for col in 0..p {
        let mut x = DVector::zeros(n);
        for (idx, &k) in active.iter().enumerate() {
            let u: f64 = rng.sample(StandardNormal);
            x.axpy(scales[idx] * u, &basis.eigenvectors().column(k).into_owned(), 1.0);
        }
        if sigma_e > 0.0 {
            for i in 0..n {
                let e: f64 = rng.sample(StandardNormal);
                x[i] += sigma_e * e;
            }
        }
        data.set_column(col, &x);
    }
    SignalMatrix::new(data)
}

/// Graph backing one stream segment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "graph", rename_all = "snake_case")]
pub enum SegmentGraph {
    Generate(GraphSpec),
    /// Rewire the previous segment's graph by this fraction of its edges.
    RewirePrevious { fraction: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamSegment {
    #[serde(flatten)]
    pub graph: SegmentGraph,
    pub duration: usize,
}

/// Piecewise-constant stream description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamSpec {
    pub segments: Vec<StreamSegment>,
    pub sigma_e: f64,
    pub seed: u64,
}

/// One emitted sample with its ground-truth segment id.
#[derive(Debug, Clone)]
pub struct StreamPoint {
    pub t: u64,
    pub segment: usize,
    pub x: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct GeneratedStream {
    pub n: usize,
    pub points: Vec<StreamPoint>,
    /// Ground-truth graph per segment.
    pub truths: Vec<EdgeVector>,
    /// First time index (1-based) of each segment.
    pub segment_starts: Vec<u64>,
}

/// Emits i.i.d. smooth signals from each segment's graph for its duration,
/// in order, along with the ground-truth graphs.
pub fn gen_stream(spec: &StreamSpec) -> Result<GeneratedStream> {
    if spec.segments.is_empty() {
        return Err(Error::InvalidConfig("stream needs at least one segment".into()));
    }
    if matches!(spec.segments[0].graph, SegmentGraph::RewirePrevious { .. }) {
        return Err(Error::InvalidConfig(
            "first segment must generate a graph".into(),
        ));
    }
    let mut truths: Vec<EdgeVector> = Vec::with_capacity(spec.segments.len());
    let mut points = Vec::new();
    let mut segment_starts = Vec::with_capacity(spec.segments.len());
    let mut t: u64 = 0;
    let mut n = 0;
    for (s, segment) in spec.segments.iter().enumerate() {
        if segment.duration == 0 {
            return Err(Error::InvalidConfig(format!(
                "segment {s} has zero duration"
            )));
        }
        let graph = match &segment.graph {
            SegmentGraph::Generate(graph_spec) => gen_graph(graph_spec)?,
            SegmentGraph::RewirePrevious { fraction } => {
                let prev = truths.last().expect("checked above");
                rewire(prev, *fraction, mix_seed(spec.seed, 1000 + s as u64))?.edges
            }
        };
        if s == 0 {
            n = graph.n();
        } else if graph.n() != n {
            return Err(Error::DimensionMismatch {
                context: "stream segments",
                expected: n,
                got: graph.n(),
            });
        }
        let signals = gen_smooth_signals(
            &graph,
            segment.duration,
            spec.sigma_e,
            mix_seed(spec.seed, 2000 + s as u64),
        )?;
        segment_starts.push(t + 1);
        for c in 0..segment.duration {
            t += 1;
            points.push(StreamPoint {
                t,
                segment: s,
                x: signals.signal(c),
            });
        }
        truths.push(graph);
    }
    Ok(GeneratedStream {
        n,
        points,
        truths,
        segment_starts,
    })
}
