//! Cubic Hermite splines with linear extrapolation.
//!
//! A spline is defined by fixed knots `x_1 < ... < x_K`, learnable values
//! `y_k` and learnable slopes `m_k`. Inside `[x_1, x_K]` each interval is the
//! cubic Hermite interpolant of its two endpoints; outside it the spline
//! continues as the tangent line at the nearest end knot, so it is C¹ on all
//! of ℝ and monotone on ℝ whenever it is monotone on `[x_1, x_K]` with
//! sign-correct end slopes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Secant slopes with magnitude below this are treated as exactly flat.
pub const ZERO_SLOPE_TOL: f64 = 1e-12;

/// Squared radius of the Fritsch-Carlson disk `α² + β² ≤ 9`.
pub const FRITSCH_RADIUS_SQ: f64 = 9.0;

/// Slack accepted on the disk membership test, to absorb rounding after a
/// projection lands exactly on the boundary.
pub const FRITSCH_TOL: f64 = 1e-9;

/// Monotonicity requirement attached to one input feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
    Free,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Increasing => "increasing",
            Direction::Decreasing => "decreasing",
            Direction::Free => "free",
        })
    }
}

impl Direction {
    pub fn is_constrained(self) -> bool {
        !matches!(self, Direction::Free)
    }

    /// +1 for increasing, -1 for decreasing, 0 for free.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Increasing => 1.0,
            Direction::Decreasing => -1.0,
            Direction::Free => 0.0,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "increasing" | "inc" | "+" | "+1" | "1" => Ok(Direction::Increasing),
            "decreasing" | "dec" | "-" | "-1" => Ok(Direction::Decreasing),
            "free" | "none" | "0" => Ok(Direction::Free),
            other => Err(Error::arg(format!("unknown direction {other:?}"))),
        }
    }
}

/// Strictly increasing knot abscissae, at least two of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct KnotGrid {
    knots: Vec<f64>,
}

impl KnotGrid {
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::arg(format!(
                "a knot grid needs at least 2 knots, got {}",
                knots.len()
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::arg("knots must be finite"));
        }
        if let Some(w) = knots.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::arg(format!(
                "knots must be strictly increasing (x[{}] = {} >= x[{}] = {})",
                w,
                knots[w],
                w + 1,
                knots[w + 1]
            )));
        }
        Ok(Self { knots })
    }

    /// `count` equally spaced knots spanning `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::arg("a knot grid needs at least 2 knots"));
        }
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::arg(format!("empty grid range [{lo}, {hi}]")));
        }
        let step = (hi - lo) / (count - 1) as f64;
        let mut knots: Vec<f64> = (0..count).map(|k| lo + step * k as f64).collect();
        knots[count - 1] = hi;
        Self::new(knots)
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn first(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Width of interval `k`, i.e. `x_{k+1} - x_k`.
    pub fn width(&self, k: usize) -> f64 {
        self.knots[k + 1] - self.knots[k]
    }

    fn locate(&self, x: f64) -> Segment {
        let k = self.knots.len();
        if x < self.knots[0] {
            Segment::Left
        } else if x >= self.knots[k - 1] {
            Segment::Right
        } else {
            // first knot strictly greater than x, minus one
            let idx = self.knots.partition_point(|&knot| knot <= x) - 1;
            let width = self.width(idx);
            Segment::Inside {
                k: idx,
                t: (x - self.knots[idx]) / width,
                width,
            }
        }
    }
}

impl TryFrom<Vec<f64>> for KnotGrid {
    type Error = Error;

    fn try_from(knots: Vec<f64>) -> Result<Self> {
        Self::new(knots)
    }
}

impl From<KnotGrid> for Vec<f64> {
    fn from(grid: KnotGrid) -> Self {
        grid.knots
    }
}

#[derive(Debug, Clone, Copy)]
enum Segment {
    Left,
    Inside { k: usize, t: f64, width: f64 },
    Right,
}

/// The four cubic Hermite basis polynomials `(h00, h10, h01, h11)` at `t`.
pub fn hermite_basis(t: f64) -> Result<(f64, f64, f64, f64)> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain {
            value: t,
            domain: "[0, 1]",
        });
    }
    Ok(basis_unchecked(t))
}

#[inline]
fn basis_unchecked(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

/// Derivatives of `(h10, h01, h11)` with respect to `t`. `h00' = -h01'`.
#[inline]
fn basis_derivative(t: f64) -> (f64, f64, f64) {
    let t2 = t * t;
    (3.0 * t2 - 4.0 * t + 1.0, 6.0 * t - 6.0 * t2, 3.0 * t2 - 2.0 * t)
}

/// Gradient of a spline evaluation with respect to the (at most) two knots
/// that influence it. Entries for all other knots are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalGradient {
    /// Index of the left knot of the active interval.
    pub knot: usize,
    /// `∂p/∂y` for knots `knot` and `knot + 1`.
    pub dvalues: [f64; 2],
    /// `∂p/∂m` for knots `knot` and `knot + 1`.
    pub dslopes: [f64; 2],
}

/// Dense gradient of a spline evaluation with respect to all values and slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineGradient {
    pub dvalues: Vec<f64>,
    pub dslopes: Vec<f64>,
}

/// One learnable cubic Hermite spline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermiteSpline {
    grid: KnotGrid,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl HermiteSpline {
    pub fn new(grid: KnotGrid, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        let k = grid.len();
        if values.len() != k || slopes.len() != k {
            return Err(Error::arg(format!(
                "spline with {k} knots needs {k} values and slopes, got {} and {}",
                values.len(),
                slopes.len()
            )));
        }
        if values.iter().chain(&slopes).any(|v| !v.is_finite()) {
            return Err(Error::arg("spline values and slopes must be finite"));
        }
        Ok(Self { grid, values, slopes })
    }

    /// The spline equal to `x ↦ x` on the whole real line.
    pub fn identity(grid: KnotGrid) -> Self {
        let values = grid.knots().to_vec();
        let slopes = vec![1.0; grid.len()];
        Self { grid, values, slopes }
    }

    pub fn grid(&self) -> &KnotGrid {
        &self.grid
    }

    pub fn knots(&self) -> &[f64] {
        self.grid.knots()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn slopes_mut(&mut self) -> &mut [f64] {
        &mut self.slopes
    }

    /// Values and slopes borrowed mutably at once.
    pub fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.values, &mut self.slopes)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.grid.locate(x) {
            Segment::Left => self.values[0] + self.slopes[0] * (x - self.grid.first()),
            Segment::Right => {
                let last = self.len() - 1;
                self.values[last] + self.slopes[last] * (x - self.grid.last())
            }
            Segment::Inside { k, t, width } => {
                let (_, h10, h01, h11) = basis_unchecked(t);
                // h00 = 1 - h01; written relative to y_k so that a flat
                // interval with zero slopes evaluates to exactly y_k
                let (y0, y1) = (self.values[k], self.values[k + 1]);
                y0 + (y1 - y0) * h01 + width * (h10 * self.slopes[k] + h11 * self.slopes[k + 1])
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).1
    }

    /// `(p(x), p'(x))` with a single interval lookup.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        match self.grid.locate(x) {
            Segment::Left => (
                self.values[0] + self.slopes[0] * (x - self.grid.first()),
                self.slopes[0],
            ),
            Segment::Right => {
                let last = self.len() - 1;
                (
                    self.values[last] + self.slopes[last] * (x - self.grid.last()),
                    self.slopes[last],
                )
            }
            Segment::Inside { k, t, width } => {
                let (_, h10, h01, h11) = basis_unchecked(t);
                let (dh10, dh01, dh11) = basis_derivative(t);
                let (y0, y1) = (self.values[k], self.values[k + 1]);
                let (m0, m1) = (self.slopes[k], self.slopes[k + 1]);
                let value = y0 + (y1 - y0) * h01 + width * (h10 * m0 + h11 * m1);
                let secant = (y1 - y0) / width;
                (value, secant * dh01 + m0 * dh10 + m1 * dh11)
            }
        }
    }

    /// Sparse parameter gradient of `p(x)`.
    pub fn local_gradient(&self, x: f64) -> LocalGradient {
        let last = self.len() - 1;
        match self.grid.locate(x) {
            Segment::Left => LocalGradient {
                knot: 0,
                dvalues: [1.0, 0.0],
                dslopes: [x - self.grid.first(), 0.0],
            },
            // anchored on the last interval with the right knot active
            Segment::Right => LocalGradient {
                knot: last - 1,
                dvalues: [0.0, 1.0],
                dslopes: [0.0, x - self.grid.last()],
            },
            Segment::Inside { k, t, width } => {
                let (h00, h10, h01, h11) = basis_unchecked(t);
                LocalGradient {
                    knot: k,
                    dvalues: [h00, h01],
                    dslopes: [width * h10, width * h11],
                }
            }
        }
    }

    /// Dense parameter gradient `(∂p/∂y, ∂p/∂m)`, each of length K.
    pub fn param_gradients(&self, x: f64) -> SplineGradient {
        let local = self.local_gradient(x);
        let mut dvalues = vec![0.0; self.len()];
        let mut dslopes = vec![0.0; self.len()];
        for side in 0..2 {
            dvalues[local.knot + side] = local.dvalues[side];
            dslopes[local.knot + side] = local.dslopes[side];
        }
        SplineGradient { dvalues, dslopes }
    }

    /// Secant slopes `d_k = (y_{k+1} - y_k) / (x_{k+1} - x_k)`, K−1 of them.
    pub fn secant_slopes(&self) -> Vec<f64> {
        (0..self.len() - 1).map(|k| self.secant(k)).collect()
    }

    pub(crate) fn secant(&self, k: usize) -> f64 {
        (self.values[k + 1] - self.values[k]) / self.grid.width(k)
    }

    /// Whether the spline satisfies the sufficient monotonicity conditions
    /// for `dir` on every interval (and therefore on all of ℝ).
    pub fn is_monotone(&self, dir: Direction) -> Result<bool> {
        let sign = match dir {
            Direction::Increasing => 1.0,
            Direction::Decreasing => -1.0,
            Direction::Free => return Err(Error::arg("monotonicity check needs a constrained direction")),
        };
        Ok((0..self.len() - 1).all(|k| {
            let d = sign * self.secant(k);
            let m0 = sign * self.slopes[k];
            let m1 = sign * self.slopes[k + 1];
            interval_check(d, m0, m1).is_ok()
        }))
    }
}

/// Why an interval (already sign-normalised to the increasing case) fails the
/// sufficient monotonicity conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum IntervalFault {
    /// `d_k < 0`.
    SecantSign,
    /// `d_k = 0` but a slope is nonzero.
    FlatSlopes,
    /// `d_k > 0` but a slope is negative.
    SlopeSign,
    /// `α² + β²` outside the disk; carries the observed sum.
    Disk(f64),
}

/// Checks one interval in increasing orientation: `d` is the secant slope,
/// `m0`, `m1` the endpoint slopes.
pub(crate) fn interval_check(d: f64, m0: f64, m1: f64) -> Result<(), IntervalFault> {
    if d.abs() < ZERO_SLOPE_TOL {
        return if m0 == 0.0 && m1 == 0.0 {
            Ok(())
        } else {
            Err(IntervalFault::FlatSlopes)
        };
    }
    if d < 0.0 {
        return Err(IntervalFault::SecantSign);
    }
    if m0 < 0.0 || m1 < 0.0 {
        return Err(IntervalFault::SlopeSign);
    }
    let alpha = m0 / d;
    let beta = m1 / d;
    let r2 = alpha * alpha + beta * beta;
    if r2 <= FRITSCH_RADIUS_SQ + FRITSCH_TOL {
        Ok(())
    } else {
        Err(IntervalFault::Disk(r2))
    }
}
