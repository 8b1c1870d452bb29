//! Scratch grid search for the ER/BA classification protocol parameters.

use nalgebra::DVector;
use topolearn::classify::{ClassifierModel, FitOptions};
use topolearn::eval::{cumulative_relative_energy, f_measure};
use topolearn::synth::{gen_graph, gen_smooth_signals, GraphSpec};
use topolearn::{LearnConfig, SignalMatrix};

fn main() {
    let n = 60;
    let per_class = 50;
    let sigma: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.5);
    let trials = 4u64;

    for alpha in [0.3, 1.0, 3.0, 10.0] {
        for beta in [0.05, 0.15, 0.4, 1.0] {
            for gamma in [0.0, 0.1] {
                for d_min in [0.3] {
                    let cfg = LearnConfig {
                        alpha,
                        beta,
                        gamma,
                        d_min,
                        accelerated: true,
                        max_iter: 20000,
                        ..LearnConfig::default()
                    };
                    let mut acc_sum = 0.0;
                    let mut f_sum = [0.0, 0.0];
                    let mut disc_hits = 0usize;
                    let mut disc_total = 0usize;
                    let mut conv = true;
                    for trial in 0..trials {
                        let seed = 1000 + trial * 17;
                        let g_er = gen_graph(&GraphSpec::er(n, 0.1, seed)).unwrap();
                        let g_ba = gen_graph(&GraphSpec::ba(n, 3, seed + 1)).unwrap();
                        let x_er = gen_smooth_signals(&g_er, per_class, sigma, seed + 2).unwrap();
                        let x_ba = gen_smooth_signals(&g_ba, per_class, sigma, seed + 3).unwrap();
                        let train = 40;
                        let tr: Vec<SignalMatrix> = vec![
                            x_er.slice_signals(0, train).unwrap(),
                            x_ba.slice_signals(0, train).unwrap(),
                        ];
                        let te = [
                            x_er.slice_signals(train, per_class).unwrap(),
                            x_ba.slice_signals(train, per_class).unwrap(),
                        ];
                        let opts = FitOptions {
                            normalize_counts: true,
                            ..FitOptions::default()
                        };
                        let model = match ClassifierModel::fit(&tr, &cfg, &opts) {
                            Ok(m) => m,
                            Err(e) => {
                                println!("fit error: {e}");
                                conv = false;
                                break;
                            }
                        };
                        let truths = [&g_er, &g_ba];
                        for c in 0..2 {
                            f_sum[c] +=
                                f_measure(model.graph(c).unwrap(), truths[c], 1e-3).unwrap();
                        }
                        if trial == 0 {
                            eprintln!(
                                "  edges: learned {} / {} truth {} / {}",
                                model.graph(0).unwrap().count_above(1e-3),
                                model.graph(1).unwrap().count_above(1e-3),
                                g_er.count_above(0.0),
                                g_ba.count_above(0.0)
                            );
                        }
                        let bw = model.bandwidth();
                        let mut correct = 0;
                        let mut total = 0;
                        for c in 0..2 {
                            for pidx in 0..te[c].p() {
                                let x: DVector<f64> = te[c].signal(pidx);
                                let label = model.classify(&x).unwrap().label;
                                if label == c {
                                    correct += 1;
                                }
                                total += 1;
                                let own =
                                    cumulative_relative_energy(model.basis(c).unwrap(), &x);
                                let other = cumulative_relative_energy(
                                    model.basis(1 - c).unwrap(),
                                    &x,
                                );
                                if own[bw - 1] > other[bw - 1] {
                                    disc_hits += 1;
                                }
                                disc_total += 1;
                            }
                        }
                        acc_sum += correct as f64 / total as f64;
                    }
                    if !conv {
                        continue;
                    }
                    println!(
                        "a={alpha} b={beta} g={gamma} dmin={d_min} | acc={:.3} fE={:.3} fB={:.3} disc={:.3}",
                        acc_sum / trials as f64,
                        f_sum[0] / trials as f64,
                        f_sum[1] / trials as f64,
                        disc_hits as f64 / disc_total as f64,
                    );
                }
            }
        }
    }
}
