//! Projection of parameters onto the certified-monotone feasible set.
//!
//! [`apply_cons`] makes every edge of one input column increasing:
//!
//! 1. `ω_φ ← max(0, ω_φ)`, `ω_b ← max(0, ω_b)`;
//! 2. for each interval `k` in order: `y_{k+1} ← max(y_{k+1}, y_k)`, then
//!    recompute `d_k`; if `d_k = 0` zero both slopes, otherwise clamp both
//!    slopes to be nonnegative and, if `α² + β² > 9`, scale `(m_k, m_{k+1})`
//!    back onto the circle of radius 3 in `(α, β)` coordinates.
//!
//! Slope `m_{k+1}` is shared with interval `k + 1`, which may shrink it
//! further; shrinking a nonnegative slope never leaves the disk, so one
//! forward sweep suffices.

use serde::{Deserialize, Serialize};

use crate::network::{Edge, MonoKanModel};
use crate::spline::{Direction, FRITSCH_RADIUS_SQ, ZERO_SLOPE_TOL};

/// Counts of what a projection changed. All zero means the input was
/// already feasible and was left bit-identical.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub edges_touched: usize,
    pub weights_clamped: usize,
    pub values_clamped: usize,
    pub slopes_zeroed: usize,
    pub fritsch_rescaled: usize,
}

impl ProjectionReport {
    pub fn is_identity(&self) -> bool {
        *self == Self::default()
    }

    pub fn merge(&mut self, other: &ProjectionReport) {
        self.edges_touched += other.edges_touched;
        self.weights_clamped += other.weights_clamped;
        self.values_clamped += other.values_clamped;
        self.slopes_zeroed += other.slopes_zeroed;
        self.fritsch_rescaled += other.fritsch_rescaled;
    }
}

impl std::ops::AddAssign for ProjectionReport {
    fn add_assign(&mut self, rhs: Self) {
        self.merge(&rhs);
    }
}

#[inline]
fn clamp_nonneg(v: &mut f64) -> bool {
    // `< 0.0` leaves -0.0 alone, so a second pass is bit-identical
    if *v < 0.0 {
        *v = 0.0;
        true
    } else {
        false
    }
}

fn project_edge(edge: &mut Edge) -> ProjectionReport {
    let mut report = ProjectionReport::default();
    report.weights_clamped += clamp_nonneg(&mut edge.omega_phi) as usize;
    report.weights_clamped += clamp_nonneg(&mut edge.omega_b) as usize;

    let knots = edge.spline.knots().to_vec();
    let (values, slopes) = edge.spline.params_mut();
    for k in 0..knots.len() - 1 {
        if values[k + 1] < values[k] {
            values[k + 1] = values[k];
            report.values_clamped += 1;
        }
        let d = (values[k + 1] - values[k]) / (knots[k + 1] - knots[k]);
        if d.abs() < ZERO_SLOPE_TOL {
            for m in &mut slopes[k..=k + 1] {
                if *m != 0.0 {
                    *m = 0.0;
                    report.slopes_zeroed += 1;
                }
            }
            continue;
        }
        for m in &mut slopes[k..=k + 1] {
            report.slopes_zeroed += clamp_nonneg(m) as usize;
        }
        let alpha = slopes[k] / d;
        let beta = slopes[k + 1] / d;
        let r2 = alpha * alpha + beta * beta;
        if r2 > FRITSCH_RADIUS_SQ {
            let tau = FRITSCH_RADIUS_SQ.sqrt() / r2.sqrt();
            slopes[k] = tau * alpha * d;
            slopes[k + 1] = tau * beta * d;
            // rounding can leave the recomputed radius a few ulps above 3;
            // nudge inward so a second projection sees a feasible point
            while disk_radius_sq(slopes[k], slopes[k + 1], d) > FRITSCH_RADIUS_SQ {
                slopes[k] *= 1.0 - 4.0 * f64::EPSILON;
                slopes[k + 1] *= 1.0 - 4.0 * f64::EPSILON;
            }
            report.fritsch_rescaled += 1;
        }
    }

    if report != ProjectionReport::default() {
        report.edges_touched = 1;
    }
    report
}

#[inline]
fn disk_radius_sq(m0: f64, m1: f64, d: f64) -> f64 {
    let a = m0 / d;
    let b = m1 / d;
    a * a + b * b
}

fn negate_for_decreasing(edge: &mut Edge) {
    edge.omega_b = -edge.omega_b;
    let (values, slopes) = edge.spline.params_mut();
    for v in values.iter_mut().chain(slopes.iter_mut()) {
        *v = -*v;
    }
}

/// Projects every edge in `column` onto the increasing feasible set.
pub fn apply_cons<'a>(column: impl IntoIterator<Item = &'a mut Edge>) -> ProjectionReport {
    let mut report = ProjectionReport::default();
    for edge in column {
        report += project_edge(edge);
    }
    report
}

/// Projects every edge in `column` onto the decreasing feasible set:
/// nonincreasing splines with `ω_φ ≥ 0` and `ω_b ≤ 0`.
pub fn apply_cons_decreasing<'a>(column: impl IntoIterator<Item = &'a mut Edge>) -> ProjectionReport {
    let mut report = ProjectionReport::default();
    for edge in column {
        negate_for_decreasing(edge);
        report += project_edge(edge);
        negate_for_decreasing(edge);
    }
    report
}

fn column_mut(edges: &mut [Edge], n_in: usize, input: usize) -> impl Iterator<Item = &mut Edge> {
    edges.iter_mut().skip(input).step_by(n_in)
}

/// Projects a whole model: layer-0 columns according to the model's
/// monotonicity spec, every column of every later layer as increasing.
pub fn project_model(model: &mut MonoKanModel) -> ProjectionReport {
    let spec = model.spec().clone();
    let mut report = ProjectionReport::default();
    for (l, layer) in model.layers_mut().iter_mut().enumerate() {
        let n_in = layer.n_in();
        for input in 0..n_in {
            let column = column_mut(layer.edges_mut(), n_in, input);
            if l == 0 {
                match spec.get(input) {
                    Direction::Increasing => report += apply_cons(column),
                    Direction::Decreasing => report += apply_cons_decreasing(column),
                    Direction::Free => {}
                }
            } else {
                report += apply_cons(column);
            }
        }
    }
    report
}
