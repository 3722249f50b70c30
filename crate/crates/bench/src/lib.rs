//! Fixtures shared by the criterion benchmarks in `benches/`.

use monokan::network::MonotonicitySpec;
use monokan::{init_model, Dataset, Direction, ModelConfig, MonoKanModel, Task};

/// An initialized model with alternating increasing/decreasing/free inputs.
pub fn model(widths: &[usize], knots: usize, seed: u64) -> MonoKanModel {
    let dirs = (0..widths[0])
        .map(|i| match i % 3 {
            0 => Direction::Increasing,
            1 => Direction::Decreasing,
            _ => Direction::Free,
        })
        .collect();
    let config = ModelConfig {
        hidden: widths[1..widths.len() - 1].to_vec(),
        knots,
        ..ModelConfig::default()
    };
    init_model(widths, &MonotonicitySpec::new(dirs), &config, seed).expect("fixture model")
}

/// `model` with every slope flipped, so projection has work to do.
pub fn infeasible_model(widths: &[usize], knots: usize, seed: u64) -> MonoKanModel {
    let mut m = model(widths, knots, seed);
    for layer in m.layers_mut() {
        for edge in layer.edges_mut() {
            for s in edge.spline.slopes_mut() {
                *s = -3.0 * *s - 1.0;
            }
            edge.omega_phi = -edge.omega_phi;
        }
    }
    m
}

/// Deterministic rows on a quasi-random lattice in `[-1, 1]^d`.
pub fn inputs(rows: usize, d: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|r| {
            (0..d)
                .map(|c| {
                    let t = ((r as f64 + 0.5) * (0.618_033_988_749_895 + 0.1 * c as f64)).fract();
                    2.0 * t - 1.0
                })
                .collect()
        })
        .collect()
}

/// A smooth regression target over `inputs(rows, d)`.
pub fn dataset(rows: usize, d: usize) -> Dataset {
    let features = inputs(rows, d);
    let targets = features
        .iter()
        .map(|x| {
            x.iter()
                .enumerate()
                .map(|(i, v)| if i % 3 == 1 { -v } else { v.sin() })
                .sum()
        })
        .collect();
    let names = (0..d).map(|i| format!("x{i}")).collect();
    Dataset::new(features, targets, names, Task::Regression).expect("fixture dataset")
}
