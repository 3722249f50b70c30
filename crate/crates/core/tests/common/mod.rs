#![allow(dead_code)]

use monokan::network::{BasisFunction, Edge, InputScaler, Layer, MonoKanModel, MonotonicitySpec};
use monokan::{Dataset, Direction, HermiteSpline, KnotGrid, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strictly increasing knots on `[lo, hi]` with random spacing.
pub fn random_grid(rng: &mut ChaCha8Rng, lo: f64, hi: f64, count: usize) -> KnotGrid {
    let gaps: Vec<f64> = (0..count - 1).map(|_| rng.random_range(0.3..1.0)).collect();
    let total: f64 = gaps.iter().sum();
    let mut knots = vec![lo];
    let mut x = lo;
    for g in &gaps[..count - 2] {
        x += g / total * (hi - lo);
        knots.push(x);
    }
    knots.push(hi);
    KnotGrid::new(knots).unwrap()
}

pub fn random_spline(rng: &mut ChaCha8Rng, grid: KnotGrid, scale: f64) -> HermiteSpline {
    let k = grid.len();
    let values = (0..k).map(|_| rng.random_range(-scale..scale)).collect();
    let slopes = (0..k).map(|_| rng.random_range(-2.0 * scale..2.0 * scale)).collect();
    HermiteSpline::new(grid, values, slopes).unwrap()
}

pub fn random_direction(rng: &mut ChaCha8Rng) -> Direction {
    match rng.random_range(0..3) {
        0 => Direction::Increasing,
        1 => Direction::Decreasing,
        _ => Direction::Free,
    }
}

/// Random widths bounded by `[8, 6, 4, 1]`: up to two hidden layers.
pub fn random_widths(rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut w = vec![rng.random_range(1..=8)];
    let hidden = rng.random_range(0..=2);
    if hidden >= 1 {
        w.push(rng.random_range(1..=6));
    }
    if hidden == 2 {
        w.push(rng.random_range(1..=4));
    }
    w.push(1);
    w
}

/// A model with arbitrary (generally infeasible) parameters, random knot
/// placement, random spec and basis. At least one feature is constrained.
pub fn random_model(seed: u64) -> MonoKanModel {
    let mut rng = rng(seed);
    let widths = random_widths(&mut rng);
    let knots = if rng.random_bool(0.5) { 4 } else { 8 };
    random_model_with(&mut rng, &widths, knots)
}

pub fn random_model_with(rng: &mut ChaCha8Rng, widths: &[usize], knots: usize) -> MonoKanModel {
    let mut dirs: Vec<Direction> = (0..widths[0]).map(|_| random_direction(rng)).collect();
    if dirs.iter().all(|d| !d.is_constrained()) {
        let r = rng.random_range(0..dirs.len());
        dirs[r] = if rng.random_bool(0.5) {
            Direction::Increasing
        } else {
            Direction::Decreasing
        };
    }
    let basis = BasisFunction::OFFERED[rng.random_range(0..BasisFunction::OFFERED.len())];
    let mut layers = Vec::new();
    for l in 0..widths.len() - 1 {
        let (n_in, n_out) = (widths[l], widths[l + 1]);
        let half = if l == 0 { 1.0 } else { 2.0 };
        let edges = (0..n_in * n_out)
            .map(|_| {
                let grid = random_grid(rng, -half, half, knots);
                let spline = random_spline(rng, grid, 1.0);
                Edge::new(spline, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            })
            .collect();
        let biases = (0..n_out).map(|_| rng.random_range(-0.5..0.5)).collect();
        layers.push(Layer::new(n_in, n_out, edges, biases).unwrap());
    }
    MonoKanModel::new(
        layers,
        MonotonicitySpec::new(dirs),
        basis,
        InputScaler::identity(widths[0]),
    )
    .unwrap()
}

/// `n` evenly spaced points on `[-1, 1]` with targets `f(x)`.
pub fn synthetic_1d(n: usize, f: impl Fn(f64) -> f64) -> Dataset {
    let xs: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    Dataset::new(
        xs.iter().map(|&x| vec![x]).collect(),
        xs.iter().map(|&x| f(x)).collect(),
        vec!["x".into()],
        Task::Regression,
    )
    .unwrap()
}

/// Least-squares nondecreasing fit by pool-adjacent-violators. `y` must be
/// ordered by increasing `x`.
pub fn isotonic_fit(y: &[f64]) -> Vec<f64> {
    // blocks of (mean, weight)
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, w2) = blocks[blocks.len() - 1];
            let (m1, w1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            blocks.push(((m1 * w1 as f64 + m2 * w2 as f64) / (w1 + w2) as f64, w1 + w2));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, w)| std::iter::repeat_n(m, w))
        .collect()
}

pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

/// Central finite difference of every flat parameter of `model` at `x`.
pub fn finite_difference_gradient(model: &MonoKanModel, x: &[f64], h: f64) -> Vec<f64> {
    let base = model.flat_params();
    let mut probe = model.clone();
    let mut out = Vec::with_capacity(base.len());
    for p in 0..base.len() {
        let mut params = base.clone();
        params[p] = base[p] + h;
        probe.set_flat_params(&params).unwrap();
        let up = probe.predict_scaled(x).unwrap();
        params[p] = base[p] - h;
        probe.set_flat_params(&params).unwrap();
        let down = probe.predict_scaled(x).unwrap();
        out.push((up - down) / (2.0 * h));
    }
    out
}

/// Largest relative error between analytic and finite-difference gradients.
/// Entries where both are tiny are compared absolutely, since a relative
/// error of two values near zero is meaningless.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-3))
        .fold(0.0, f64::max)
}
