//! Spline curves as CSV (and optionally SVG) for plotting.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use monokan::{Direction, HermiteSpline, MonoKanModel};

/// Sampling margin beyond the first and last knot.
const MARGIN: f64 = 0.5;

fn sample_points(spline: &HermiteSpline, samples: usize) -> Vec<f64> {
    let lo = spline.grid().first() - MARGIN;
    let hi = spline.grid().last() + MARGIN;
    (0..samples)
        .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
        .collect()
}

/// The monotonicity the certifier requires of edge `(l, j, i)`.
fn edge_direction(model: &MonoKanModel, layer: usize, input: usize) -> Direction {
    if layer == 0 {
        model.spec().get(input)
    } else {
        Direction::Increasing
    }
}

fn edges(model: &MonoKanModel) -> impl Iterator<Item = (usize, usize, usize, &HermiteSpline)> {
    model.layers().iter().enumerate().flat_map(|(l, layer)| {
        (0..layer.n_out()).flat_map(move |j| (0..layer.n_in()).map(move |i| (l, j, i, &layer.edge(j, i).spline)))
    })
}

/// Writes `edge_l{l}_o{j}_i{i}.csv` with columns `x,phi,dphi` for every edge
/// and an `index.csv` mapping coordinates to files. Returns the edge count.
pub fn write_edge_csvs(model: &MonoKanModel, dir: &Path, samples: usize) -> Result<usize> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut index = String::from("layer,output,input,direction,omega_phi,omega_b,file\n");
    let mut count = 0;
    for (l, j, i, spline) in edges(model) {
        let name = format!("edge_l{l}_o{j}_i{i}.csv");
        let mut body = String::from("x,phi,dphi\n");
        for x in sample_points(spline, samples) {
            let (y, dy) = spline.eval_with_derivative(x);
            writeln!(body, "{x},{y},{dy}").unwrap();
        }
        let path = dir.join(&name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
        let edge = model.layers()[l].edge(j, i);
        let dir = edge_direction(model, l, i);
        writeln!(index, "{l},{j},{i},{dir},{},{},{name}", edge.omega_phi, edge.omega_b).unwrap();
        count += 1;
    }
    let path = dir.join("index.csv");
    std::fs::write(&path, index).with_context(|| format!("writing {}", path.display()))?;
    Ok(count)
}

const CELL_W: f64 = 180.0;
const CELL_H: f64 = 130.0;
const PAD: f64 = 14.0;

/// A self-contained SVG with one panel per edge, one row per layer output.
pub fn small_multiples_svg(model: &MonoKanModel, samples: usize) -> String {
    let rows: Vec<(usize, usize)> = model
        .layers()
        .iter()
        .enumerate()
        .flat_map(|(l, layer)| (0..layer.n_out()).map(move |j| (l, j)))
        .collect();
    let cols = model.layers().iter().map(|l| l.n_in()).max().unwrap_or(1);
    let width = cols as f64 * CELL_W;
    let height = rows.len() as f64 * CELL_H;
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"10\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for (l, j, i, spline) in edges(model) {
        let row = rows.iter().position(|&r| r == (l, j)).unwrap();
        let (ox, oy) = (i as f64 * CELL_W, row as f64 * CELL_H);
        let xs = sample_points(spline, samples);
        let ys: Vec<f64> = xs.iter().map(|&x| spline.eval(x)).collect();
        let (x0, x1) = (xs[0], xs[xs.len() - 1]);
        let (mut y0, mut y1) = ys
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
        if y1 - y0 < 1e-12 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let px = |x: f64| ox + PAD + (x - x0) / (x1 - x0) * (CELL_W - 2.0 * PAD);
        let py = |y: f64| oy + CELL_H - PAD - (y - y0) / (y1 - y0) * (CELL_H - 2.0 * PAD - 10.0);
        let colour = match edge_direction(model, l, i) {
            Direction::Increasing => "#1f77b4",
            Direction::Decreasing => "#d62728",
            Direction::Free => "#555555",
        };
        writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#ddd\"/>",
            ox + 2.0,
            oy + 2.0,
            CELL_W - 4.0,
            CELL_H - 4.0
        )
        .unwrap();
        writeln!(svg, "<text x=\"{}\" y=\"{}\">({l},{j},{i})</text>", ox + PAD, oy + PAD).unwrap();
        for &k in spline.knots() {
            let x = px(k);
            writeln!(
                svg,
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#eee\"/>",
                oy + PAD + 4.0,
                oy + CELL_H - PAD
            )
            .unwrap();
        }
        let points: Vec<String> = xs
            .iter()
            .zip(&ys)
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.join(" ")
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
