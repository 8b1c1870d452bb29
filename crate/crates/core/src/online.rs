//! Streaming discriminative graph tracking.
//!
//! One labeled signal arrives per time slot. The slot's class folds the
//! sample's pairwise squared differences into its running distance statistic
//! (EMA, sliding window, or running mean), then takes one or more proximal
//! gradient steps on the induced instantaneous cost with an adaptive step
//! size. Memory and per-sample work are `O(N^2)`, independent of the horizon.

use std::collections::VecDeque;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::batch::{DiscriminativeProblem, LearnConfig};
use crate::error::{Error, Result};
use crate::graph::{degrees_of, edge_dim, DistanceVector, EdgeVector};

/// How past samples are discounted in the running distance statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MemoryMode {
    /// `zbar_t = (1 - theta) zbar_{t-1} + theta z_t`, `theta` in (0, 1).
    Ema { theta: f64 },
    /// Mean over the most recent `window` samples.
    Sliding { window: usize },
    /// Running sample mean over the whole stream.
    Infinite,
}

impl MemoryMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MemoryMode::Ema { theta } => {
                if !(theta > 0.0 && theta < 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "EMA discount must lie strictly inside (0, 1), got {theta}"
                    )));
                }
            }
            MemoryMode::Sliding { window } => {
                if window == 0 {
                    return Err(Error::InvalidConfig("sliding window must be >= 1".into()));
                }
            }
            MemoryMode::Infinite => {}
        }
        Ok(())
    }
}

/// One line of the NDJSON stream format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StreamSample {
    pub t: u64,
    pub class: usize,
    pub x: Vec<f64>,
}

/// Per-slot diagnostics attached to a snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotDiagnostics {
    pub t: u64,
    pub objective: f64,
    pub step: f64,
    pub min_degree: f64,
}

/// Streaming state: per-class running distance averages, per-class edge
/// estimates, and the time index. Single-writer; clone to snapshot.
#[derive(Debug, Clone)]
pub struct StreamState {
    n: usize,
    config: LearnConfig,
    mode: MemoryMode,
    inner_iters: usize,
    zbar: Vec<DVector<f64>>,
    w: Vec<DVector<f64>>,
    class_counts: Vec<u64>,
    windows: Vec<VecDeque<DVector<f64>>>,
    t: u64,
    low_degree_slots: u64,
}

impl StreamState {
    pub fn new(
        n: usize,
        num_classes: usize,
        config: LearnConfig,
        mode: MemoryMode,
        inner_iters: usize,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 nodes, got {n}")));
        }
        if num_classes == 0 {
            return Err(Error::InvalidConfig("need at least one class".into()));
        }
        if inner_iters == 0 {
            return Err(Error::InvalidConfig("inner_iters must be >= 1".into()));
        }
        config.validate(n)?;
        mode.validate()?;
        let m = edge_dim(n);
        let w0 = EdgeVector::uniform_with_degree(n, config.d_min.max(1.0)).into_weights();
        Ok(Self {
            n,
            config,
            mode,
            inner_iters,
            zbar: vec![DVector::zeros(m); num_classes],
            w: vec![w0; num_classes],
            class_counts: vec![0; num_classes],
            windows: vec![VecDeque::new(); num_classes],
            t: 0,
            low_degree_slots: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_classes(&self) -> usize {
        self.zbar.len()
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn config(&self) -> &LearnConfig {
        &self.config
    }

    pub fn inner_iters(&self) -> usize {
        self.inner_iters
    }

    /// Slots whose minimum degree fell below `d_min` when the step size was
    /// formed; on such slots the recorded step comes from the clamped degree.
    pub fn low_degree_slots(&self) -> u64 {
        self.low_degree_slots
    }

    fn check_class(&self, class: usize) -> Result<()> {
        if class >= self.num_classes() {
            return Err(Error::UnknownClass {
                label: class,
                num_classes: self.num_classes(),
            });
        }
        Ok(())
    }

    /// Seeds `zbar` for a class from signals acquired before the stream
    /// starts; does not advance time.
    pub fn warm_up(&mut self, class: usize, signals: &[DVector<f64>]) -> Result<()> {
        self.check_class(class)?;
        if signals.is_empty() {
            return Ok(());
        }
        let mut acc = DVector::zeros(edge_dim(self.n));
        for x in signals {
            if x.len() != self.n {
                return Err(Error::DimensionMismatch {
                    context: "warm-up signal",
                    expected: self.n,
                    got: x.len(),
                });
            }
            acc += DistanceVector::from_signal(x)?.values();
        }
        acc /= signals.len() as f64;
        self.zbar[class] = acc;
        Ok(())
    }

    /// Folds one signal into the class's running distance statistic and
    /// advances the clock.
    pub fn distance_update(&mut self, class: usize, x: &DVector<f64>) -> Result<()> {
        self.check_class(class)?;
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "stream signal",
                expected: self.n,
                got: x.len(),
            });
        }
        let z_t = DistanceVector::from_signal(x)?.into_values();
        self.class_counts[class] += 1;
        match self.mode {
            MemoryMode::Ema { theta } => {
                let zbar = &mut self.zbar[class];
                *zbar *= 1.0 - theta;
                zbar.axpy(theta, &z_t, 1.0);
            }
            MemoryMode::Infinite => {
                let c = self.class_counts[class] as f64;
                let zbar = &mut self.zbar[class];
                *zbar *= (c - 1.0) / c;
                zbar.axpy(1.0 / c, &z_t, 1.0);
            }
            MemoryMode::Sliding { window } => {
                let buf = &mut self.windows[class];
                buf.push_back(z_t);
                if buf.len() > window {
                    buf.pop_front();
                }
                let mut mean = DVector::zeros(edge_dim(self.n));
                for z in buf.iter() {
                    mean += z;
                }
                mean /= buf.len() as f64;
                self.zbar[class] = mean;
            }
        }
        self.t += 1;
        Ok(())
    }

    /// Adaptive step `mu_t = (4 beta + 2 alpha (N-1) / min(S w)^2)^{-1}`,
    /// with the minimum degree clamped at the solver floor.
    pub fn adaptive_step(&self, class: usize) -> Result<f64> {
        self.check_class(class)?;
        Ok(1.0 / self.step_eta(class))
    }

    /// The instantaneous Lipschitz estimate `eta_t` behind the adaptive step.
    pub fn step_eta(&self, class: usize) -> f64 {
        let min_deg = self.min_degree(class).max(self.config.degree_floor());
        4.0 * self.config.beta
            + 2.0 * self.config.alpha * (self.n as f64 - 1.0) / (min_deg * min_deg)
    }

    pub fn min_degree(&self, class: usize) -> f64 {
        degrees_of(self.n, &self.w[class]).min()
    }

    /// Threshold base `zbar_c - gamma sum_{k != c} zbar_k` at the current slot.
    pub fn threshold_base(&self, class: usize) -> DVector<f64> {
        let mut base = self.zbar[class].clone();
        if self.config.gamma > 0.0 {
            for (k, z) in self.zbar.iter().enumerate() {
                if k != class {
                    base.axpy(-self.config.gamma, z, 1.0);
                }
            }
        }
        base
    }

    /// Takes `inner_iters` proximal gradient steps on the instantaneous cost
    /// with the slot's step size held fixed. Returns the step size used.
    pub fn online_step(&mut self, class: usize) -> Result<f64> {
        self.check_class(class)?;
        let min_deg = self.min_degree(class);
        if min_deg < self.config.d_min {
            self.low_degree_slots += 1;
        }
        let mu = 1.0 / self.step_eta(class);
        let base = self.threshold_base(class);
        let m = edge_dim(self.n);
        for _ in 0..self.inner_iters {
            let (grad, _) =
                crate::batch::grad_smooth_clamped(self.n, &self.w[class], &self.config);
            let w = &mut self.w[class];
            for k in 0..m {
                w[k] = (w[k] - mu * grad[k] - 2.0 * mu * base[k]).max(0.0);
            }
        }
        Ok(mu)
    }

    /// `distance_update` followed by `online_step` for the slot's class.
    pub fn ingest(&mut self, class: usize, x: &DVector<f64>) -> Result<f64> {
        self.distance_update(class, x)?;
        self.online_step(class)
    }

    pub fn edge_estimate(&self, class: usize) -> Result<EdgeVector> {
        self.check_class(class)?;
        Ok(EdgeVector::from_parts_unchecked(
            self.n,
            self.w[class].clone(),
        ))
    }

    pub fn distance_state(&self, class: usize) -> Result<DistanceVector> {
        self.check_class(class)?;
        DistanceVector::new(self.n, self.zbar[class].clone())
    }

    /// The batch problem induced by freezing the current distance statistics;
    /// its solution is the instantaneous optimum the stream tracks.
    pub fn frozen_problem(&self, class: usize) -> Result<DiscriminativeProblem> {
        self.check_class(class)?;
        let own = self.distance_state(class)?;
        let mut others = Vec::new();
        for k in 0..self.num_classes() {
            if k != class {
                others.push(self.distance_state(k)?);
            }
        }
        DiscriminativeProblem::new(own, others, self.config.clone())
    }

    /// Instantaneous objective value at the class's current estimate.
    pub fn objective(&self, class: usize) -> Result<f64> {
        let prob = self.frozen_problem(class)?;
        Ok(prob.objective(&self.edge_estimate(class)?))
    }

    pub fn snapshot_diagnostics(&self, class: usize) -> Result<SnapshotDiagnostics> {
        Ok(SnapshotDiagnostics {
            t: self.t,
            objective: self.objective(class)?,
            step: self.adaptive_step(class)?,
            min_degree: self.min_degree(class),
        })
    }
}

/// Per-time tracking-error bounds derived from the contraction history.
#[derive(Debug, Clone)]
pub struct TrackingBoundSeries {
    /// Exact sequential bound `b_{t+1} = L_t^{i_t} b_t + v_t`, equal to the
    /// product form `Ltilde_{t-1} (e_1 + sum v_tau / Ltilde_tau)` but stable
    /// for long horizons.
    pub exact: Vec<f64>,
    /// Worst-case geometric form `Lhat^t e_1 + vhat / (1 - Lhat)`.
    pub simplified: Vec<f64>,
    /// Some contraction factor reached 1; the bound no longer decays.
    pub degenerate: bool,
}

/// Builds the tracking bound from the per-slot contraction factors
/// `L_t = max(|1 - 4 mu_t beta|, |1 - mu_t eta_t|)`, the inner iteration
/// counts, the optimum drifts `v_t = ||w*_{t+1} - w*_t||`, and the initial
/// distance `e_1 = ||w_1 - w*_1||`. Entry `t` bounds the error at time `t+1`.
pub fn tracking_bound(
    contractions: &[f64],
    inner_iters: &[usize],
    drifts: &[f64],
    initial_distance: f64,
) -> TrackingBoundSeries {
    assert_eq!(contractions.len(), drifts.len(), "history length mismatch");
    assert_eq!(contractions.len(), inner_iters.len(), "history length mismatch");
    let horizon = contractions.len();
    let mut exact = Vec::with_capacity(horizon + 1);
    let mut simplified = Vec::with_capacity(horizon + 1);
    exact.push(initial_distance);
    simplified.push(initial_distance);

    let mut degenerate = false;
    let mut b = initial_distance;
    let mut l_hat = 0.0f64;
    let mut v_hat = 0.0f64;
    for t in 0..horizon {
        let l_eff = contractions[t].powi(inner_iters[t] as i32);
        if contractions[t] >= 1.0 {
            degenerate = true;
        }
        b = l_eff * b + drifts[t];
        exact.push(b);

        l_hat = l_hat.max(contractions[t]);
        v_hat = v_hat.max(drifts[t]);
        let s = if l_hat < 1.0 {
            l_hat.powi((t + 1) as i32) * initial_distance + v_hat / (1.0 - l_hat)
        } else {
            f64::INFINITY
        };
        simplified.push(s);
    }
    TrackingBoundSeries {
        exact,
        simplified,
        degenerate,
    }
}

/// One comparison against the instantaneous batch optimum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrackingCheckpoint {
    pub time: u64,
    pub online_objective: f64,
    pub batch_objective: f64,
    pub distance: f64,
    pub bound: f64,
}

impl TrackingCheckpoint {
    pub fn objective_gap(&self) -> f64 {
        self.online_objective - self.batch_objective
    }
}

/// Checkpointed tracking history of one streaming run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TrackingReport {
    pub checkpoints: Vec<TrackingCheckpoint>,
}

impl TrackingReport {
    /// Checkpoints where the measured distance exceeds the bound beyond the
    /// stated slack.
    pub fn bound_violations(&self, slack: f64) -> usize {
        self.checkpoints
            .iter()
            .filter(|c| c.distance > c.bound + slack)
            .count()
    }
}
