//! Supervised pipeline: fit class-conditional graphs, build GFT filter
//! banks, and classify unseen signals by low-pass energy.
//!
//! Training solves one discriminative learning problem per class, each using
//! the other classes' distance statistics in the penalty term. A test signal
//! is projected on every class basis and labeled by the class whose first
//! `bandwidth` spectral coefficients capture the most energy.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::batch::{DiscriminativeProblem, LearnConfig};
use crate::error::{Error, Result};
use crate::graph::{
    distance_vector, gft_decompose, gft_project, laplacian, pair_iter, DistanceVector, EdgeVector,
    GftBasis, SignalMatrix,
};

/// Training options on top of the per-class [`LearnConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitOptions {
    /// Low-pass width; defaults to `max(1, N/3)`.
    pub bandwidth: Option<usize>,
    /// Rescale each learned adjacency to unit Frobenius norm before
    /// decomposition (leaves eigenvectors untouched).
    pub normalize_adjacency: bool,
    /// Divide each class's distance vector by its signal count. Off by
    /// default: raw per-class sums.
    pub normalize_counts: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            bandwidth: None,
            normalize_adjacency: false,
            normalize_counts: false,
        }
    }
}

/// Classification outcome: winning label, per-class low-pass energies, and
/// whether the argmax was tied (broken toward the lowest class index).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classification {
    pub label: usize,
    pub energies: Vec<f64>,
    pub tie: bool,
}

/// Filter bank of per-class GFT bases derived from learned graphs.
#[derive(Debug, Clone)]
pub struct ClassifierModel {
    classes: Vec<usize>,
    bandwidth: usize,
    normalized: bool,
    graphs: Vec<EdgeVector>,
    bases: Vec<GftBasis>,
}

impl ClassifierModel {
    /// Learns one graph per class and assembles the filter bank. Classes are
    /// trained concurrently; they share only the immutable distance vectors.
    pub fn fit(
        datasets: &[SignalMatrix],
        config: &LearnConfig,
        options: &FitOptions,
    ) -> Result<Self> {
        if datasets.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 classes, got {}",
                datasets.len()
            )));
        }
        let n = datasets[0].n();
        for (c, data) in datasets.iter().enumerate() {
            if data.n() != n {
                return Err(Error::DimensionMismatch {
                    context: "class datasets",
                    expected: n,
                    got: data.n(),
                });
            }
            if data.p() == 0 {
                return Err(Error::EmptyClass(c));
            }
        }
        let bandwidth = options.bandwidth.unwrap_or((n / 3).max(1));
        if bandwidth == 0 || bandwidth > n {
            return Err(Error::InvalidConfig(format!(
                "bandwidth must lie in 1..={n}, got {bandwidth}"
            )));
        }

        let mut distances: Vec<DistanceVector> = Vec::with_capacity(datasets.len());
        for data in datasets {
            let mut z = distance_vector(data);
            if options.normalize_counts {
                z = z.scaled(1.0 / data.p() as f64)?;
            }
            distances.push(z);
        }

        let mut problems = Vec::with_capacity(datasets.len());
        for c in 0..datasets.len() {
            let others: Vec<DistanceVector> = distances
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != c)
                .map(|(_, z)| z.clone())
                .collect();
            problems.push(DiscriminativeProblem::new(
                distances[c].clone(),
                others,
                config.clone(),
            )?);
        }

        let mut learned: Vec<Option<Result<EdgeVector>>> = (0..problems.len()).map(|_| None).collect();
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for prob in &problems {
                handles.push(scope.spawn(move || prob.solve(None).map(|(w, _)| w)));
            }
            for (slot, handle) in learned.iter_mut().zip(handles) {
                *slot = Some(handle.join().expect("class solver panicked"));
            }
        });

        let mut graphs = Vec::with_capacity(problems.len());
        let mut bases = Vec::with_capacity(problems.len());
        for outcome in learned {
            let w = outcome.expect("filled above")?;
            let mut w = w.pruned(config.edge_threshold);
            if options.normalize_adjacency {
                // ||W||_F = sqrt(2) ||w||.
                let norm = 2.0f64.sqrt() * w.weights().norm();
                if norm > 0.0 {
                    w = w.scaled(1.0 / norm)?;
                }
            }
            bases.push(gft_decompose(&laplacian(&w))?);
            graphs.push(w);
        }

        Ok(Self {
            classes: (0..datasets.len()).collect(),
            bandwidth,
            normalized: options.normalize_adjacency,
            graphs,
            bases,
        })
    }

    /// Builds the filter bank directly from given graphs, bypassing training.
    pub fn from_graphs(graphs: Vec<EdgeVector>, bandwidth: usize) -> Result<Self> {
        if graphs.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 classes, got {}",
                graphs.len()
            )));
        }
        let n = graphs[0].n();
        if bandwidth == 0 || bandwidth > n {
            return Err(Error::InvalidConfig(format!(
                "bandwidth must lie in 1..={n}, got {bandwidth}"
            )));
        }
        let mut bases = Vec::with_capacity(graphs.len());
        for g in &graphs {
            if g.n() != n {
                return Err(Error::DimensionMismatch {
                    context: "class graphs",
                    expected: n,
                    got: g.n(),
                });
            }
            bases.push(gft_decompose(&laplacian(g))?);
        }
        Ok(Self {
            classes: (0..graphs.len()).collect(),
            bandwidth,
            normalized: false,
            graphs,
            bases,
        })
    }

    pub fn n(&self) -> usize {
        self.bases[0].n()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn basis(&self, class: usize) -> Result<&GftBasis> {
        self.bases.get(class).ok_or(Error::UnknownClass {
            label: class,
            num_classes: self.num_classes(),
        })
    }

    pub fn graph(&self, class: usize) -> Result<&EdgeVector> {
        self.graphs.get(class).ok_or(Error::UnknownClass {
            label: class,
            num_classes: self.num_classes(),
        })
    }

    /// Energy of the projection onto the class's `bandwidth`
    /// lowest-frequency eigenvectors.
    pub fn lowpass_energy(&self, class: usize, x: &DVector<f64>) -> Result<f64> {
        let basis = self.basis(class)?;
        let coeffs = gft_project(basis, x);
        Ok(coeffs
            .iter()
            .take(self.bandwidth)
            .map(|c| c * c)
            .sum())
    }

    /// Labels a signal by the class with the largest low-pass energy; exact
    /// ties go to the lowest class index and are flagged.
    pub fn classify(&self, x: &DVector<f64>) -> Result<Classification> {
        let mut energies = Vec::with_capacity(self.num_classes());
        for c in 0..self.num_classes() {
            energies.push(self.lowpass_energy(c, x)?);
        }
        let mut label = 0;
        for (c, &e) in energies.iter().enumerate() {
            if e > energies[label] {
                label = c;
            }
        }
        let tie = energies
            .iter()
            .enumerate()
            .any(|(c, &e)| c != label && e == energies[label]);
        Ok(Classification {
            label: self.classes[label],
            energies,
            tie,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        serde_json::to_writer_pretty(BufWriter::new(file), &ModelFile::from(self))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let model: ModelFile = serde_json::from_reader(BufReader::new(file))?;
        model.try_into()
    }
}

/// Serialized form: eigen data row-major per class plus the pruned edge list.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    classes: Vec<usize>,
    bandwidth: usize,
    normalized: bool,
    per_class: Vec<ClassEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ClassEntry {
    eigenvalues: Vec<f64>,
    /// Row-major `N x N` eigenvector matrix.
    eigenvectors: Vec<f64>,
    /// Pruned edge list as `(i, j, weight)`.
    edges: Vec<(usize, usize, f64)>,
}

impl From<&ClassifierModel> for ModelFile {
    fn from(model: &ClassifierModel) -> Self {
        let per_class = model
            .classes
            .iter()
            .map(|&c| {
                let basis = &model.bases[c];
                let n = basis.n();
                let mut eigenvectors = Vec::with_capacity(n * n);
                for r in 0..n {
                    for col in 0..n {
                        eigenvectors.push(basis.eigenvectors()[(r, col)]);
                    }
                }
                let edges = pair_iter(n)
                    .enumerate()
                    .filter(|(k, _)| model.graphs[c].weights()[*k] > 0.0)
                    .map(|(k, (i, j))| (i, j, model.graphs[c].weights()[k]))
                    .collect();
                ClassEntry {
                    eigenvalues: basis.eigenvalues().iter().copied().collect(),
                    eigenvectors,
                    edges,
                }
            })
            .collect();
        ModelFile {
            classes: model.classes.clone(),
            bandwidth: model.bandwidth,
            normalized: model.normalized,
            per_class,
        }
    }
}

impl TryFrom<ModelFile> for ClassifierModel {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<Self> {
        if file.per_class.is_empty() {
            return Err(Error::Parse("model has no classes".into()));
        }
        let n = file.per_class[0].eigenvalues.len();
        let mut graphs = Vec::with_capacity(file.per_class.len());
        let mut bases = Vec::with_capacity(file.per_class.len());
        for entry in &file.per_class {
            if entry.eigenvalues.len() != n || entry.eigenvectors.len() != n * n {
                return Err(Error::Parse("inconsistent model dimensions".into()));
            }
            let eigenvectors = DMatrix::from_fn(n, n, |r, c| entry.eigenvectors[r * n + c]);
            bases.push(crate::graph::GftBasis::from_parts(
                DVector::from_vec(entry.eigenvalues.clone()),
                eigenvectors,
            ));
            let mut w = DVector::zeros(crate::graph::edge_dim(n));
            for &(i, j, weight) in &entry.edges {
                let k = crate::graph::pair_index(i, j, n)?;
                w[k] = weight;
            }
            graphs.push(EdgeVector::new(n, w)?);
        }
        Ok(ClassifierModel {
            classes: file.classes,
            bandwidth: file.bandwidth,
            normalized: file.normalized,
            graphs,
            bases,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch::lipschitz_constant;
    use crate::synth::{gen_graph, gen_smooth_signals, GraphSpec};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn two_class_data(n: usize, p: usize, sigma: f64, seed: u64) -> (Vec<SignalMatrix>, Vec<EdgeVector>) {
        let g0 = gen_graph(&GraphSpec::er(n, 0.2, seed)).unwrap();
        let g1 = gen_graph(&GraphSpec::ba(n, 2, seed + 1)).unwrap();
        let x0 = gen_smooth_signals(&g0, p, sigma, seed + 2).unwrap();
        let x1 = gen_smooth_signals(&g1, p, sigma, seed + 3).unwrap();
        (vec![x0, x1], vec![g0, g1])
    }

    fn fit_config() -> LearnConfig {
        LearnConfig {
            alpha: 1.0,
            beta: 0.25,
            gamma: 0.05,
            ..LearnConfig::default()
        }
    }

    /// Per-sample distance statistics keep the solution degrees near d_min.
    fn fit_options() -> FitOptions {
        FitOptions {
            normalize_counts: true,
            ..FitOptions::default()
        }
    }

    #[test]
    fn identical_datasets_learn_identical_graphs() {
        let (data, _) = two_class_data(12, 30, 0.1, 5);
        let datasets = vec![data[0].clone(), data[0].clone()];
        let cfg = LearnConfig {
            gamma: 0.0,
            ..fit_config()
        };
        let model = ClassifierModel::fit(&datasets, &cfg, &fit_options()).unwrap();
        let a = model.graph(0).unwrap();
        let b = model.graph(1).unwrap();
        assert!((a.weights() - b.weights()).norm() < 1e-8);
    }

    #[test]
    fn adjacency_normalization_preserves_eigenvectors() {
        let (data, _) = two_class_data(10, 25, 0.1, 9);
        let cfg = fit_config();
        let plain = ClassifierModel::fit(&data, &cfg, &fit_options()).unwrap();
        let normalized = ClassifierModel::fit(
            &data,
            &cfg,
            &FitOptions {
                normalize_adjacency: true,
                ..fit_options()
            },
        )
        .unwrap();
        for c in 0..2 {
            assert_relative_eq!(
                plain.basis(c).unwrap().eigenvectors(),
                normalized.basis(c).unwrap().eigenvectors(),
                epsilon = 1e-8
            );
            // Frobenius norm of the normalized adjacency is one.
            let w = normalized.graph(c).unwrap();
            assert_relative_eq!(
                2.0f64.sqrt() * w.weights().norm(),
                1.0,
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn full_band_energy_is_the_squared_norm() {
        let (_, graphs) = two_class_data(8, 10, 0.1, 13);
        let model = ClassifierModel::from_graphs(graphs, 8).unwrap();
        let x = DVector::from_fn(8, |i, _| (i as f64 - 3.0) * 0.8);
        for c in 0..2 {
            assert_relative_eq!(
                model.lowpass_energy(c, &x).unwrap(),
                x.norm_squared(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn energy_of_out_of_band_signal_is_zero() {
        let (_, graphs) = two_class_data(8, 10, 0.1, 17);
        let model = ClassifierModel::from_graphs(graphs, 3).unwrap();
        let basis = model.basis(0).unwrap();
        // Any combination of eigenvectors 3.. is orthogonal to the band.
        let x = basis.eigenvector(4) * 0.6 + basis.eigenvector(6) * 1.1;
        assert_abs_diff_eq!(model.lowpass_energy(0, &x).unwrap(), 0.0, epsilon = 1e-18);
    }

    #[test]
    fn own_eigenvector_has_unit_energy() {
        let (_, graphs) = two_class_data(8, 10, 0.1, 19);
        let model = ClassifierModel::from_graphs(graphs, 2).unwrap();
        let v2 = model.basis(0).unwrap().eigenvector(1);
        assert_relative_eq!(model.lowpass_energy(0, &v2).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn energy_decomposes_into_low_and_high_bands() {
        let (_, graphs) = two_class_data(9, 10, 0.1, 23);
        let bandwidth = 4;
        let model = ClassifierModel::from_graphs(graphs, bandwidth).unwrap();
        let x = DVector::from_fn(9, |i, _| ((i * i) as f64 * 0.3).sin());
        for c in 0..2 {
            let low = model.lowpass_energy(c, &x).unwrap();
            let coeffs = gft_project(model.basis(c).unwrap(), &x);
            let high: f64 = coeffs.iter().skip(bandwidth).map(|v| v * v).sum();
            assert_relative_eq!(low + high, x.norm_squared(), epsilon = 1e-9);
        }
    }

    #[test]
    fn classify_picks_the_matching_basis() {
        // Lowest nontrivial eigenvector of class 0's graph carries all its
        // energy at frequency index 1 on its own basis.
        let (_, graphs) = two_class_data(12, 10, 0.1, 29);
        let model = ClassifierModel::from_graphs(graphs.clone(), 4).unwrap();
        let x = model.basis(0).unwrap().eigenvector(1);
        let result = model.classify(&x).unwrap();
        assert_eq!(result.label, 0);

        // Direct energy computation agrees.
        let e0: f64 = gft_project(model.basis(0).unwrap(), &x)
            .iter()
            .take(4)
            .map(|v| v * v)
            .sum();
        let e1: f64 = gft_project(model.basis(1).unwrap(), &x)
            .iter()
            .take(4)
            .map(|v| v * v)
            .sum();
        assert_relative_eq!(result.energies[0], e0, epsilon = 1e-12);
        assert_relative_eq!(result.energies[1], e1, epsilon = 1e-12);
        assert!(e0 > e1);
    }

    #[test]
    fn classification_is_scale_invariant() {
        let (_, graphs) = two_class_data(10, 10, 0.1, 31);
        let model = ClassifierModel::from_graphs(graphs, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..20 {
            let x = DVector::from_fn(10, |_, _| rng.random_range(-1.0..1.0));
            let s = rng.random_range(0.01..50.0);
            let a = model.classify(&x).unwrap();
            let b = model.classify(&(&x * s)).unwrap();
            assert_eq!(a.label, b.label);
            for c in 0..2 {
                assert_relative_eq!(b.energies[c], a.energies[c] * s * s, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn classification_is_invariant_to_adjacency_scaling() {
        let (_, graphs) = two_class_data(10, 10, 0.1, 37);
        let model = ClassifierModel::from_graphs(graphs.clone(), 3).unwrap();
        let scaled = ClassifierModel::from_graphs(
            vec![graphs[0].scaled(7.3).unwrap(), graphs[1].clone()],
            3,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        for _ in 0..20 {
            let x = DVector::from_fn(10, |_, _| rng.random_range(-1.0..1.0));
            assert_eq!(
                model.classify(&x).unwrap().label,
                scaled.classify(&x).unwrap().label
            );
        }
    }

    #[test]
    fn tie_breaks_toward_lowest_class() {
        let g = gen_graph(&GraphSpec::er(6, 0.4, 41)).unwrap();
        let model = ClassifierModel::from_graphs(vec![g.clone(), g], 3).unwrap();
        let x = DVector::from_fn(6, |i, _| i as f64);
        let result = model.classify(&x).unwrap();
        assert_eq!(result.label, 0);
        assert!(result.tie);
    }

    #[test]
    fn default_bandwidth_is_a_third_of_the_nodes() {
        let (data, _) = two_class_data(12, 20, 0.1, 43);
        let model = ClassifierModel::fit(&data, &fit_config(), &fit_options()).unwrap();
        assert_eq!(model.bandwidth(), 4);
    }

    #[test]
    fn model_json_round_trip() {
        let (data, _) = two_class_data(9, 20, 0.1, 47);
        let model = ClassifierModel::fit(&data, &fit_config(), &fit_options()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        let loaded = ClassifierModel::load(&path).unwrap();
        assert_eq!(loaded.bandwidth(), model.bandwidth());
        assert_eq!(loaded.num_classes(), model.num_classes());
        let mut rng = ChaCha8Rng::seed_from_u64(49);
        for _ in 0..10 {
            let x = DVector::from_fn(9, |_, _| rng.random_range(-1.0..1.0));
            let a = model.classify(&x).unwrap();
            let b = loaded.classify(&x).unwrap();
            assert_eq!(a.label, b.label);
            for c in 0..2 {
                assert_relative_eq!(a.energies[c], b.energies[c], epsilon = 1e-12);
            }
        }
        let _ = lipschitz_constant(&fit_config(), 9);
    }
}
