//! Scratch: does the per-sample distance statistic separate true edges from
//! non-edges? Compares against the best-possible thresholding of z itself.

use topolearn::eval::f_measure;
use topolearn::graph::{distance_vector, edge_dim, pair_iter, EdgeVector};
use topolearn::synth::{gen_graph, gen_smooth_signals, GraphSpec};
use nalgebra::DVector;

fn main() {
    let n = 60;
    let p = 40;
    let sigma = 0.05;
    for seed in [1u64, 2, 3] {
        let g = gen_graph(&GraphSpec::er(n, 0.1, seed)).unwrap();
        let x = gen_smooth_signals(&g, p, sigma, seed + 100).unwrap();
        let z = distance_vector(&x).scaled(1.0 / p as f64).unwrap();

        let mut edge_z = Vec::new();
        let mut non_edge_z = Vec::new();
        for (k, _) in pair_iter(n).enumerate() {
            if g.weights()[k] > 0.0 {
                edge_z.push(z.values()[k]);
            } else {
                non_edge_z.push(z.values()[k]);
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "seed {seed}: edges {} mean_z(edge)={:.4} mean_z(non)={:.4}",
            edge_z.len(),
            mean(&edge_z),
            mean(&non_edge_z)
        );

        // Oracle: mark the |E| smallest-z pairs as edges.
        let mut order: Vec<usize> = (0..edge_dim(n)).collect();
        order.sort_by(|&a, &b| z.values()[a].partial_cmp(&z.values()[b]).unwrap());
        let mut west = DVector::zeros(edge_dim(n));
        for &k in order.iter().take(edge_z.len()) {
            west[k] = 1.0;
        }
        let west = EdgeVector::new(n, west).unwrap();
        println!("  z-threshold oracle F = {:.3}", f_measure(&west, &g, 1e-3).unwrap());
    }
}
