//! Batch discriminative graph learning via proximal gradient iterations.
//!
//! Each class graph is the minimizer of a composite cost over nonnegative
//! edge weights `w`:
//!
//! ```text
//! F(w) = 2 w'z_c  -  alpha 1'log(S w)  +  2 beta ||w||^2  -  gamma sum_{k != c} 2 w'z_k
//! ```
//!
//! split into a smooth part `g(w) = -alpha 1'log(S w) + 2 beta ||w||^2` and a
//! nonsmooth part (the linear data terms plus the nonnegativity indicator)
//! whose proximal operator is a nonnegative soft threshold. `g` is
//! `4 beta`-strongly convex and its gradient is Lipschitz with constant
//! `eta = 4 beta + 2 alpha (N-1) / d_min^2` whenever nodal degrees stay above
//! `d_min`, which fixes the admissible step sizes.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{accumulate_degrees, degree_adjoint, degrees_of, edge_dim, DistanceVector, EdgeVector};

/// Default pruning level applied to learned graphs at evaluation boundaries.
pub const DEFAULT_EDGE_THRESHOLD: f64 = 1e-3;

/// Regularization weights and solver controls.
///
/// Serialized as a flat JSON object with exactly these keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnConfig {
    /// Log-barrier weight on nodal degrees.
    pub alpha: f64,
    /// Frobenius (squared norm) weight.
    pub beta: f64,
    /// Discriminative weight on the other classes' smoothness terms.
    pub gamma: f64,
    /// Degree floor used in the Lipschitz constant.
    pub d_min: f64,
    /// Fixed step size; `None` selects `2 / eta`.
    pub step: Option<f64>,
    /// Relative iterate-change convergence tolerance.
    pub tol: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Momentum extrapolation with function-value restart.
    pub accelerated: bool,
    /// Post-hoc pruning level; never applied inside the solver.
    pub edge_threshold: f64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.5,
            gamma: 0.0,
            d_min: 1.0,
            step: None,
            tol: 1e-8,
            max_iter: 10_000,
            accelerated: false,
            edge_threshold: DEFAULT_EDGE_THRESHOLD,
        }
    }
}

impl LearnConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !(self.d_min > 0.0 && self.d_min.is_finite()) {
            return Err(Error::InvalidConfig(format!("d_min must be > 0, got {}", self.d_min)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        if self.edge_threshold < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "edge_threshold must be >= 0, got {}",
                self.edge_threshold
            )));
        }
        if let Some(step) = self.step {
            let cap = 2.0 / lipschitz_constant(self, n);
            if !(step > 0.0 && step <= cap) {
                return Err(Error::InvalidConfig(format!(
                    "step must lie in (0, 2/eta] = (0, {cap:.6e}], got {step}"
                )));
            }
        }
        Ok(())
    }

    /// Step size actually used by the solver: the supplied one, or `2 / eta`.
    pub fn effective_step(&self, n: usize) -> f64 {
        self.step.unwrap_or(2.0 / lipschitz_constant(self, n))
    }

    /// Degrees are clamped at this floor during gradient evaluation instead
    /// of erroring mid-run; the prox can zero a node's edges transiently.
    pub(crate) fn degree_floor(&self) -> f64 {
        1e-9 * self.d_min.max(1.0)
    }
}

/// Lipschitz constant of the smooth gradient:
/// `eta = 4 beta + 2 alpha (N-1) / d_min^2`.
pub fn lipschitz_constant(config: &LearnConfig, n: usize) -> f64 {
    4.0 * config.beta + 2.0 * config.alpha * (n as f64 - 1.0) / (config.d_min * config.d_min)
}

/// Smooth part `g(w) = -alpha 1'log(S w) + 2 beta ||w||^2`; infinite when a
/// degree is nonpositive.
pub fn smooth_objective(w: &EdgeVector, config: &LearnConfig) -> f64 {
    let deg = degrees_of(w.n(), w.weights());
    if deg.iter().any(|&d| d <= 0.0) {
        return f64::INFINITY;
    }
    let barrier: f64 = deg.iter().map(|&d| d.ln()).sum();
    -config.alpha * barrier + 2.0 * config.beta * w.weights().norm_squared()
}

/// Gradient of the smooth part, `4 beta w - alpha S'(1 / (S w))`.
///
/// Degrees below the floor are clamped rather than rejected; see
/// [`grad_smooth_clamped`] when the caller needs to know clamping occurred.
pub fn grad_smooth(w: &EdgeVector, config: &LearnConfig) -> DVector<f64> {
    grad_smooth_clamped(w.n(), w.weights(), config).0
}

pub(crate) fn grad_smooth_clamped(
    n: usize,
    w: &DVector<f64>,
    config: &LearnConfig,
) -> (DVector<f64>, bool) {
    let mut deg = degrees_of(n, w);
    let floor = config.degree_floor();
    let mut clamped = false;
    for d in deg.iter_mut() {
        if *d < floor {
            *d = floor;
            clamped = true;
        }
        *d = 1.0 / *d;
    }
    let mut grad = degree_adjoint(n, &deg);
    grad *= -config.alpha;
    grad.axpy(4.0 * config.beta, w, 1.0);
    (grad, clamped)
}

/// Nonnegative soft threshold `max(0, v - thresholds)`, the proximal operator
/// of the nonsmooth part. Negative thresholds are valid and push entries up.
///
/// Panics if lengths differ.
pub fn prox_nonsmooth(v: &DVector<f64>, thresholds: &DVector<f64>) -> DVector<f64> {
    assert_eq!(v.len(), thresholds.len(), "prox dimension mismatch");
    DVector::from_fn(v.len(), |k, _| (v[k] - thresholds[k]).max(0.0))
}

/// One class's learning problem: its own distance statistic, the other
/// classes' statistics entering through the discriminative term, and the
/// solver configuration.
#[derive(Debug, Clone)]
pub struct DiscriminativeProblem {
    own: DistanceVector,
    others: Vec<DistanceVector>,
    config: LearnConfig,
}

impl DiscriminativeProblem {
    pub fn new(
        own: DistanceVector,
        others: Vec<DistanceVector>,
        config: LearnConfig,
    ) -> Result<Self> {
        let n = own.n();
        for other in &others {
            if other.n() != n {
                return Err(Error::DimensionMismatch {
                    context: "distance vectors",
                    expected: n,
                    got: other.n(),
                });
            }
        }
        config.validate(n)?;
        Ok(Self { own, others, config })
    }

    pub fn n(&self) -> usize {
        self.own.n()
    }

    pub fn edge_dim(&self) -> usize {
        edge_dim(self.n())
    }

    pub fn config(&self) -> &LearnConfig {
        &self.config
    }

    pub fn own(&self) -> &DistanceVector {
        &self.own
    }

    pub fn others(&self) -> &[DistanceVector] {
        &self.others
    }

    /// `z_c - gamma sum_{k != c} z_k`; scaled by `2 mu` it becomes the prox
    /// threshold vector. May carry negative entries when `gamma` dominates.
    pub fn threshold_base(&self) -> DVector<f64> {
        let mut base = self.own.values().clone();
        for other in &self.others {
            base.axpy(-self.config.gamma, other.values(), 1.0);
        }
        base
    }

    /// Full composite cost; `+inf` outside the domain (a negative weight or a
    /// nonpositive degree).
    pub fn objective(&self, w: &EdgeVector) -> f64 {
        self.objective_vec(w.weights(), &self.threshold_base())
    }

    fn objective_vec(&self, w: &DVector<f64>, base: &DVector<f64>) -> f64 {
        if w.iter().any(|&x| x < 0.0) {
            return f64::INFINITY;
        }
        let deg = degrees_of(self.n(), w);
        if deg.iter().any(|&d| d <= 0.0) {
            return f64::INFINITY;
        }
        let barrier: f64 = deg.iter().map(|&d| d.ln()).sum();
        2.0 * w.dot(base) - self.config.alpha * barrier
            + 2.0 * self.config.beta * w.norm_squared()
    }

    /// Subgradient of the smooth-plus-linear part,
    /// `grad g(w) + 2 (z_c - gamma sum z_k)`. At a minimizer this vanishes on
    /// the support and is nonnegative off it.
    pub fn stationarity_residual(&self, w: &EdgeVector) -> DVector<f64> {
        let (grad, _) = grad_smooth_clamped(self.n(), w.weights(), &self.config);
        let mut r = self.threshold_base();
        r *= 2.0;
        r += grad;
        r
    }

    /// Runs the proximal gradient iteration from `w0` (defaults to uniform
    /// weights giving every node degree `max(d_min, 1)`).
    pub fn solve(&self, w0: Option<&EdgeVector>) -> Result<(EdgeVector, BatchDiagnostics)> {
        let n = self.n();
        let m = self.edge_dim();
        if let Some(w0) = w0 {
            if w0.n() != n {
                return Err(Error::DimensionMismatch {
                    context: "initial edge vector",
                    expected: n,
                    got: w0.n(),
                });
            }
        }
        let base = self.threshold_base();
        if base.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "threshold base",
            });
        }

        let mu = self.config.effective_step(n);
        let thresholds = &base * (2.0 * mu);

        let mut w = w0
            .map(|w| w.weights().clone())
            .unwrap_or_else(|| {
                EdgeVector::uniform_with_degree(n, self.config.d_min.max(1.0)).into_weights()
            });
        let mut y = w.clone();
        let mut momentum = 1.0f64;

        let mut f_curr = self.objective_vec(&w, &base);
        let mut best_w = w.clone();
        let mut best_f = f_curr;

        let mut grad = DVector::zeros(m);
        let mut deg = DVector::zeros(n);
        let mut clamped_any = false;
        let mut converged = false;
        let mut iterations = 0;

        let step_from = |point: &DVector<f64>,
                             grad: &mut DVector<f64>,
                             deg: &mut DVector<f64>,
                             clamped_any: &mut bool|
         -> DVector<f64> {
            accumulate_degrees(n, point, deg);
            let floor = self.config.degree_floor();
            for d in deg.iter_mut() {
                if *d < floor {
                    *d = floor;
                    *clamped_any = true;
                }
                *d = 1.0 / *d;
            }
            let mut k = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    grad[k] = 4.0 * self.config.beta * point[k]
                        - self.config.alpha * (deg[i] + deg[j]);
                    k += 1;
                }
            }
            DVector::from_fn(m, |k, _| {
                (point[k] - mu * grad[k] - thresholds[k]).max(0.0)
            })
        };

        for _ in 0..self.config.max_iter {
            iterations += 1;
            let point = if self.config.accelerated { &y } else { &w };
            let mut w_next = step_from(point, &mut grad, &mut deg, &mut clamped_any);
            let mut f_next = self.objective_vec(&w_next, &base);

            if self.config.accelerated {
                if f_next > f_curr {
                    // Momentum overshot: restart and take a plain step from w.
                    momentum = 1.0;
                    w_next = step_from(&w, &mut grad, &mut deg, &mut clamped_any);
                    f_next = self.objective_vec(&w_next, &base);
                    y = w_next.clone();
                } else {
                    let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
                    let mix = (momentum - 1.0) / next_momentum;
                    y = &w_next + (&w_next - &w) * mix;
                    momentum = next_momentum;
                }
            }

            let change = (&w_next - &w).norm() / w.norm().max(1e-12);
            w = w_next;
            f_curr = f_next;
            if f_curr < best_f {
                best_f = f_curr;
                best_w = w.clone();
            }
            if change < self.config.tol {
                converged = true;
                break;
            }
        }

        let (out_w, out_f) = if converged && f_curr <= best_f {
            (w, f_curr)
        } else {
            (best_w, best_f)
        };
        let diagnostics = BatchDiagnostics {
            iterations,
            final_objective: out_f,
            converged,
            clamping_activated: clamped_any,
        };
        Ok((EdgeVector::from_parts_unchecked(n, out_w), diagnostics))
    }
}

/// Solver outcome summary, serialized with exactly these keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchDiagnostics {
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
    pub clamping_activated: bool,
}

/// Proximal gradient solve of one class problem; see
/// [`DiscriminativeProblem::solve`].
pub fn learn_batch(
    prob: &DiscriminativeProblem,
    w0: Option<&EdgeVector>,
) -> Result<(EdgeVector, BatchDiagnostics)> {
    prob.solve(w0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{degree_operator, laplacian, pair_index, symmetric_eigen_sorted, SignalMatrix};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use nalgebra::DMatrix;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn config(alpha: f64, beta: f64, gamma: f64) -> LearnConfig {
        LearnConfig {
            alpha,
            beta,
            gamma,
            ..LearnConfig::default()
        }
    }

    fn random_positive_edges(n: usize, rng: &mut ChaCha8Rng) -> EdgeVector {
        let w = DVector::from_fn(edge_dim(n), |_, _| rng.random_range(0.1..2.0));
        EdgeVector::new(n, w).unwrap()
    }

    /// Rescales so the minimum degree is exactly `d_min * (1 + margin)`.
    fn with_degree_at_least(w: &EdgeVector, d_min: f64, margin: f64) -> EdgeVector {
        let min_deg = crate::graph::degrees(w).min();
        w.scaled(d_min * (1.0 + margin) / min_deg).unwrap()
    }

    #[test]
    fn lipschitz_closed_form() {
        let cfg = LearnConfig {
            d_min: 1.0,
            ..config(1.0, 1.0, 0.0)
        };
        assert_abs_diff_eq!(lipschitz_constant(&cfg, 2), 6.0, epsilon = 1e-12);
    }

    #[test]
    fn lipschitz_alpha_limit_and_dmin_scaling() {
        let cfg = LearnConfig {
            alpha: 1e-300,
            ..config(1.0, 1.0, 0.0)
        };
        assert_abs_diff_eq!(lipschitz_constant(&cfg, 5), 4.0, epsilon = 1e-9);

        let base = config(2.0, 0.3, 0.0);
        let doubled = LearnConfig {
            d_min: 2.0,
            ..base.clone()
        };
        let alpha_term = |c: &LearnConfig| lipschitz_constant(c, 7) - 4.0 * c.beta;
        assert_relative_eq!(alpha_term(&doubled), alpha_term(&base) / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn objective_hand_value() {
        // N=3, w = 1, z_c = 0, alpha = beta = 1, gamma = 0:
        // degrees are all 2, so F = 6 - 3 log 2.
        let prob = DiscriminativeProblem::new(
            DistanceVector::zeros(3),
            vec![],
            config(1.0, 1.0, 0.0),
        )
        .unwrap();
        let w = EdgeVector::new(3, DVector::from_element(3, 1.0)).unwrap();
        assert_relative_eq!(
            prob.objective(&w),
            6.0 - 3.0 * 2.0f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn objective_infinite_on_isolated_node() {
        let prob = DiscriminativeProblem::new(
            DistanceVector::zeros(3),
            vec![],
            config(1.0, 1.0, 0.0),
        )
        .unwrap();
        let w = EdgeVector::new(3, DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        assert!(prob.objective(&w).is_infinite());
    }

    #[test]
    fn objective_agrees_with_matrix_form() {
        // Independent evaluation in adjacency-matrix form:
        // ||W o Z||_1 - alpha 1'log(W 1) + beta ||W||_F^2 - gamma sum ||W o Z_k||_1.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 6;
        for _ in 0..20 {
            let w = random_positive_edges(n, &mut rng);
            let z_own = DVector::from_fn(edge_dim(n), |_, _| rng.random_range(0.0..3.0));
            let z_other = DVector::from_fn(edge_dim(n), |_, _| rng.random_range(0.0..3.0));
            let cfg = config(
                rng.random_range(0.2..2.0),
                rng.random_range(0.2..2.0),
                rng.random_range(0.0..0.8),
            );
            let prob = DiscriminativeProblem::new(
                DistanceVector::new(n, z_own.clone()).unwrap(),
                vec![DistanceVector::new(n, z_other.clone()).unwrap()],
                cfg.clone(),
            )
            .unwrap();

            let sym = |v: &DVector<f64>| {
                let mut m = DMatrix::zeros(n, n);
                for (k, (i, j)) in crate::graph::pair_iter(n).enumerate() {
                    m[(i, j)] = v[k];
                    m[(j, i)] = v[k];
                }
                m
            };
            let wm = sym(w.weights());
            let l1 = |a: &DMatrix<f64>, b: &DMatrix<f64>|ents(a, b);
            fn ents(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
                a.iter().zip(b.iter()).map(|(x, y)| (x * y).abs()).sum()
            }
            let degree: DVector<f64> = &wm * DVector::from_element(n, 1.0);
            let matrix_form = l1(&wm, &sym(&z_own))
                - cfg.alpha * degree.iter().map(|d| d.ln()).sum::<f64>()
                + cfg.beta * wm.norm_squared()
                - cfg.gamma * l1(&wm, &sym(&z_other));
            assert_relative_eq!(prob.objective(&w), matrix_form, epsilon = 1e-10);
        }
    }

    #[test]
    fn gradient_vanishes_at_balanced_point() {
        // 4 beta w = (1,1,1) and S'(1/(Sw)) = (1,1,1) cancel exactly.
        let w = EdgeVector::new(3, DVector::from_element(3, 1.0)).unwrap();
        let grad = grad_smooth(&w, &config(1.0, 0.25, 0.0));
        assert_abs_diff_eq!(grad.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 6;
        let cfg = config(0.8, 0.6, 0.0);
        for _ in 0..10 {
            let w = random_positive_edges(n, &mut rng);
            let grad = grad_smooth(&w, &cfg);
            let mut fd = DVector::zeros(edge_dim(n));
            let h = 1e-6;
            for k in 0..edge_dim(n) {
                let mut plus = w.weights().clone();
                let mut minus = w.weights().clone();
                plus[k] += h;
                minus[k] -= h;
                let f_plus =
                    smooth_objective(&EdgeVector::new(n, plus).unwrap(), &cfg);
                let f_minus =
                    smooth_objective(&EdgeVector::new(n, minus).unwrap(), &cfg);
                fd[k] = (f_plus - f_minus) / (2.0 * h);
            }
            assert!((grad - &fd).norm() / fd.norm() < 1e-6);
        }
    }

    #[test]
    fn gradient_is_linear_in_alpha() {
        let w = EdgeVector::new(4, DVector::from_vec(vec![0.5, 1.2, 0.8, 0.4, 1.0, 0.6]))
            .unwrap();
        let beta = 0.7;
        let g1 = grad_smooth(&w, &config(1.0, beta, 0.0));
        let g2 = grad_smooth(&w, &config(2.0, beta, 0.0));
        let barrier_only = grad_smooth(&w, &config(1.0, 1e-300, 0.0));
        assert_relative_eq!(&g2 - &g1, barrier_only, epsilon = 1e-9);
    }

    #[test]
    fn prox_formula() {
        let v = DVector::from_vec(vec![1.0, 0.5]);
        let t = DVector::from_vec(vec![0.3, 0.8]);
        assert_eq!(prox_nonsmooth(&v, &t), DVector::from_vec(vec![0.7, 0.0]));
    }

    #[test]
    fn prox_negative_threshold_adds() {
        let v = DVector::from_vec(vec![0.1]);
        let t = DVector::from_vec(vec![-0.2]);
        assert_relative_eq!(prox_nonsmooth(&v, &t)[0], 0.3, epsilon = 1e-15);
    }

    #[test]
    fn prox_zero_threshold_projects() {
        let v = DVector::from_vec(vec![-1.0, 0.0, 2.5]);
        let t = DVector::zeros(3);
        assert_eq!(
            prox_nonsmooth(&v, &t),
            DVector::from_vec(vec![0.0, 0.0, 2.5])
        );
    }

    #[test]
    fn strong_convexity_constant() {
        // (grad g(w1) - grad g(w2))'(w1 - w2) >= 4 beta ||w1 - w2||^2.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = config(1.3, 0.9, 0.0);
        let n = 5;
        for _ in 0..100 {
            let w1 = random_positive_edges(n, &mut rng);
            let w2 = random_positive_edges(n, &mut rng);
            let dg = grad_smooth(&w1, &cfg) - grad_smooth(&w2, &cfg);
            let dw = w1.weights() - w2.weights();
            assert!(dg.dot(&dw) >= 4.0 * cfg.beta * dw.norm_squared() - 1e-9);
        }
    }

    #[test]
    fn gradient_lipschitz_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let cfg = LearnConfig {
            d_min: 0.8,
            ..config(1.1, 0.4, 0.0)
        };
        let n = 6;
        let eta = lipschitz_constant(&cfg, n);
        for _ in 0..100 {
            let w1 = with_degree_at_least(&random_positive_edges(n, &mut rng), cfg.d_min, 0.05);
            let w2 = with_degree_at_least(&random_positive_edges(n, &mut rng), cfg.d_min, 0.3);
            let dg = (grad_smooth(&w1, &cfg) - grad_smooth(&w2, &cfg)).norm();
            let dw = (w1.weights() - w2.weights()).norm();
            assert!(dg <= eta * dw + 1e-9);
        }
    }

    #[test]
    fn degree_operator_spectrum_lemma() {
        // S S' = (N-2) I + 11' has top eigenvalue 2(N-1), the rest N-2.
        for n in [3usize, 5, 10] {
            let s = degree_operator(n);
            let sst = &s * s.transpose();
            let (vals, _) = symmetric_eigen_sorted(&sst).unwrap();
            assert_abs_diff_eq!(vals[n - 1], 2.0 * (n as f64 - 1.0), epsilon = 1e-8);
            for k in 0..n - 1 {
                assert_abs_diff_eq!(vals[k], n as f64 - 2.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn monotone_descent_with_conservative_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 6;
        let z = DVector::from_fn(edge_dim(n), |_, _| rng.random_range(0.0..2.0));
        let mut cfg = config(1.0, 0.5, 0.0);
        cfg.step = Some(1.0 / lipschitz_constant(&cfg, n));
        cfg.max_iter = 400;
        let prob =
            DiscriminativeProblem::new(DistanceVector::new(n, z).unwrap(), vec![], cfg.clone())
                .unwrap();

        let base = prob.threshold_base();
        let mu = cfg.step.unwrap();
        let thresholds = &base * (2.0 * mu);
        let mut w = EdgeVector::uniform_with_degree(n, 1.0).into_weights();
        let mut f_prev = prob.objective_vec(&w, &base);
        for _ in 0..200 {
            let (grad, _) = grad_smooth_clamped(n, &w, &cfg);
            w = prox_nonsmooth(&(&w - grad * mu), &thresholds);
            let f = prob.objective_vec(&w, &base);
            assert!(f <= f_prev + 1e-12);
            f_prev = f;
        }
    }

    #[test]
    fn uniform_distances_give_uniform_solution() {
        let n = 5;
        let z = DVector::from_element(edge_dim(n), 0.7);
        let prob = DiscriminativeProblem::new(
            DistanceVector::new(n, z).unwrap(),
            vec![],
            config(1.0, 0.5, 0.0),
        )
        .unwrap();
        let (w, diag) = prob.solve(None).unwrap();
        assert!(diag.converged);
        let mean = w.weights().mean();
        for &x in w.weights().iter() {
            assert_abs_diff_eq!(x, mean, epsilon = 1e-7);
        }
    }

    #[test]
    fn closest_pair_gets_largest_weight() {
        // Large distances push node 2's degree near alpha/(2 z) = 0.05, so
        // d_min must reflect that for the default step to be stable.
        let cfg = LearnConfig {
            d_min: 0.04,
            max_iter: 500_000,
            ..config(1.0, 0.1, 0.0)
        };
        let prob = DiscriminativeProblem::new(
            DistanceVector::new(3, DVector::from_vec(vec![0.0, 10.0, 10.0])).unwrap(),
            vec![],
            cfg,
        )
        .unwrap();
        let (w, diag) = prob.solve(None).unwrap();
        assert!(diag.converged);
        let w01 = w.get(0, 1).unwrap();
        assert!(w01 > w.get(0, 2).unwrap());
        assert!(w01 > w.get(1, 2).unwrap());
    }

    /// Long-run tiny-step projected gradient on the same composite cost,
    /// independent of the solver loop.
    fn tiny_step_oracle(prob: &DiscriminativeProblem, iters: usize) -> (DVector<f64>, f64) {
        let n = prob.n();
        let base = prob.threshold_base();
        let cfg = prob.config();
        let mu = 0.05 / lipschitz_constant(cfg, n);
        let mut w = EdgeVector::uniform_with_degree(n, cfg.d_min.max(1.0)).into_weights();
        for _ in 0..iters {
            let deg = degrees_of(n, &w);
            let floor = cfg.degree_floor();
            let inv = deg.map(|d| 1.0 / d.max(floor));
            let grad = degree_adjoint(n, &inv) * (-cfg.alpha) + &w * (4.0 * cfg.beta);
            for k in 0..w.len() {
                w[k] = (w[k] - mu * (grad[k] + 2.0 * base[k])).max(0.0);
            }
        }
        let f = prob.objective_vec(&w, &base);
        (w, f)
    }

    #[test]
    fn solver_matches_tiny_step_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 5;
        for _ in 0..3 {
            let z = DVector::from_fn(edge_dim(n), |_, _| rng.random_range(0.0..0.5));
            let prob = DiscriminativeProblem::new(
                DistanceVector::new(n, z).unwrap(),
                vec![],
                config(1.0, 0.4, 0.0),
            )
            .unwrap();
            let (w, diag) = prob.solve(None).unwrap();
            assert!(diag.converged);
            let (_, f_oracle) = tiny_step_oracle(&prob, 300_000);
            assert!(diag.final_objective <= f_oracle + 1e-6);
            assert!((diag.final_objective - f_oracle).abs() <= 1e-6);
            assert_relative_eq!(prob.objective(&w), diag.final_objective, epsilon = 1e-12);
        }
    }

    #[test]
    fn accelerated_reaches_same_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 6;
        let z = DVector::from_fn(edge_dim(n), |_, _| rng.random_range(0.0..2.0));
        let own = DistanceVector::new(n, z).unwrap();
        let plain = DiscriminativeProblem::new(own.clone(), vec![], config(1.0, 0.4, 0.0)).unwrap();
        let accel = DiscriminativeProblem::new(
            own,
            vec![],
            LearnConfig {
                accelerated: true,
                ..config(1.0, 0.4, 0.0)
            },
        )
        .unwrap();
        let (_, d1) = plain.solve(None).unwrap();
        let (_, d2) = accel.solve(None).unwrap();
        assert!(d1.converged && d2.converged);
        assert_abs_diff_eq!(d1.final_objective, d2.final_objective, epsilon = 1e-6);
    }

    #[test]
    fn kkt_residuals_at_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 5;
        let z = DVector::from_fn(edge_dim(n), |_, _| rng.random_range(0.0..0.5));
        let prob = DiscriminativeProblem::new(
            DistanceVector::new(n, z).unwrap(),
            vec![],
            config(1.0, 0.4, 0.0),
        )
        .unwrap();
        let (w, _) = prob.solve(None).unwrap();
        let eta = lipschitz_constant(prob.config(), n);
        let r = prob.stationarity_residual(&w);
        for k in 0..prob.edge_dim() {
            if w.weights()[k] > prob.config().edge_threshold {
                assert!(r[k].abs() <= 1e-5 * eta, "active residual {}", r[k]);
            } else if w.weights()[k] == 0.0 {
                assert!(r[k] >= -1e-5 * eta, "inactive residual {}", r[k]);
            }
        }
    }

    #[test]
    fn gamma_zero_ignores_other_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let n = 5;
        let z = DVector::from_fn(edge_dim(n), |_, _| rng.random_range(0.0..2.0));
        let other = DVector::from_fn(edge_dim(n), |_, _| rng.random_range(0.0..9.0));
        let own = DistanceVector::new(n, z).unwrap();
        let cfg = config(1.0, 0.5, 0.0);
        let with_others = DiscriminativeProblem::new(
            own.clone(),
            vec![DistanceVector::new(n, other).unwrap()],
            cfg.clone(),
        )
        .unwrap();
        let without = DiscriminativeProblem::new(own, vec![], cfg).unwrap();
        let (w1, _) = with_others.solve(None).unwrap();
        let (w2, _) = without.solve(None).unwrap();
        assert_relative_eq!(w1.weights(), w2.weights(), epsilon = 1e-12);
    }

    #[test]
    fn minimizer_invariant_under_joint_rescaling() {
        // argmin for (z, alpha, beta) equals argmin for (s z, s alpha, s beta).
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let n = 5;
        let s = 3.7;
        let z = DVector::from_fn(edge_dim(n), |_, _| rng.random_range(0.0..2.0));
        let tight = LearnConfig {
            tol: 1e-12,
            ..config(1.0, 0.4, 0.0)
        };
        let scaled_cfg = LearnConfig {
            alpha: tight.alpha * s,
            beta: tight.beta * s,
            ..tight.clone()
        };
        let p1 = DiscriminativeProblem::new(
            DistanceVector::new(n, z.clone()).unwrap(),
            vec![],
            tight,
        )
        .unwrap();
        let p2 = DiscriminativeProblem::new(
            DistanceVector::new(n, z * s).unwrap(),
            vec![],
            scaled_cfg,
        )
        .unwrap();
        let (w1, _) = p1.solve(None).unwrap();
        let (w2, _) = p2.solve(None).unwrap();
        assert!((w1.weights() - w2.weights()).norm() < 1e-6);
    }

    #[test]
    fn step_validation_enforces_the_cap() {
        let n = 4;
        let mut cfg = config(1.0, 1.0, 0.0);
        let cap = 2.0 / lipschitz_constant(&cfg, n);
        cfg.step = Some(cap);
        assert!(cfg.validate(n).is_ok());
        cfg.step = Some(cap * 1.0001);
        assert!(cfg.validate(n).is_err());
        cfg.step = Some(0.0);
        assert!(cfg.validate(n).is_err());
    }

    #[test]
    fn config_json_round_trip_with_exact_keys() {
        let cfg = config(1.5, 0.25, 0.1);
        let json = serde_json::to_value(&cfg).unwrap();
        let obj = json.as_object().unwrap();
        for key in [
            "alpha",
            "beta",
            "gamma",
            "d_min",
            "step",
            "tol",
            "max_iter",
            "accelerated",
            "edge_threshold",
        ] {
            assert!(obj.contains_key(key), "missing key {key}");
        }
        let back: LearnConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back.alpha, cfg.alpha);
        assert_eq!(back.step, cfg.step);
    }

    #[test]
    fn distance_statistics_from_signals_feed_the_problem() {
        // Smoke check wiring distance_vector output into a solve; the raw
        // sum over 12 signals is rescaled to a per-sample statistic.
        let data = DMatrix::from_fn(4, 12, |i, j| ((i + 1) as f64 * (j as f64 + 0.5)).sin());
        let x = SignalMatrix::new(data).unwrap();
        let z = crate::graph::distance_vector(&x).scaled(1.0 / 12.0).unwrap();
        let cfg = LearnConfig {
            d_min: 0.4,
            ..config(1.0, 0.5, 0.0)
        };
        let prob = DiscriminativeProblem::new(z, vec![], cfg).unwrap();
        let (w, diag) = prob.solve(None).unwrap();
        assert!(diag.converged);
        assert!(w.weights().iter().all(|&x| x >= 0.0));
        assert!(pair_index(0, 1, 4).unwrap() < w.weights().len());
        assert!(laplacian(&w).row(0).sum().abs() < 1e-12);
    }
}
