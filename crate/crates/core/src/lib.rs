//! Learning graph topologies from smooth signals.
//!
//! The library infers class-conditional graphs under the assumption that
//! each class's signals vary little across the edges of its latent graph.
//! It provides:
//!
//! - [`graph`]: vectorized edge weights, the degree operator, Laplacians,
//!   total variation, and the graph Fourier transform;
//! - [`batch`]: proximal gradient learning of one graph per class, with a
//!   log-barrier on degrees, Frobenius shrinkage, and a discriminative term
//!   that pushes other classes' energy to high frequencies;
//! - [`online`]: a streaming tracker that folds one sample per time slot
//!   into a running distance statistic and takes adaptive prox-gradient
//!   steps, with non-asymptotic tracking-error bounds;
//! - [`classify`]: GFT filter banks over the learned graphs and a low-pass
//!   energy classification rule;
//! - [`synth`]: seeded random-graph and smooth-signal generators for
//!   benchmarks;
//! - [`eval`]: edge-recovery and spectral metrics plus financial series
//!   transforms;
//! - [`io`]: the CSV/NDJSON file formats shared with the command-line tools.

pub mod batch;
pub mod classify;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod online;
pub mod synth;

pub use batch::{
    learn_batch, lipschitz_constant, BatchDiagnostics, DiscriminativeProblem, LearnConfig,
    DEFAULT_EDGE_THRESHOLD,
};
pub use classify::{Classification, ClassifierModel, FitOptions};
pub use error::{Error, Result};
pub use eval::{EdgeSet, SeriesMode};
pub use graph::{DistanceVector, EdgeVector, GftBasis, SignalMatrix};
pub use online::{MemoryMode, StreamSample, StreamState, TrackingReport};
pub use synth::{GraphKind, GraphSpec, StreamSpec};
