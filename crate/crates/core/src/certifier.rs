//! Exact certification of partial monotonicity, and a randomized falsifier.
//!
//! Certification checks ten closed-form conditions on stored parameters.
//! For every constrained input column `r` of layer 0 (conditions 1–5) and
//! for every edge of every later layer (conditions 6–10):
//!
//! | cond | layer 0 | later layers | meaning |
//! |------|---------|--------------|---------|
//! | 1 / 6  | ✓ | ✓ | `ω_φ ≥ 0`, `ω_b ≥ 0` (decreasing column: `ω_b ≤ 0`) |
//! | 2 / 7  | ✓ | ✓ | secant slopes `d_k` have the required sign |
//! | 3 / 8  | ✓ | ✓ | `d_k = 0` ⇒ `m_k = m_{k+1} = 0` |
//! | 4 / 9  | ✓ | ✓ | `d_k ≠ 0` ⇒ slopes share the sign of `d_k` |
//! | 5 / 10 | ✓ | ✓ | `α_k² + β_k² ≤ 9` |
//!
//! Together with an increasing basis function these imply the model is
//! monotone in each constrained feature on all of ℝⁿ. They are sufficient,
//! not necessary: a model can be monotone and still fail certification.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::network::{Edge, MonoKanModel, Scratch};
use crate::spline::{interval_check, Direction, IntervalFault, FRITSCH_RADIUS_SQ, FRITSCH_TOL, ZERO_SLOPE_TOL};

/// Output differences smaller than this are not counted as violations.
pub const FALSIFY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    WeightSign,
    SecantSign,
    FlatSlopes,
    SlopeSign,
    FritschDisk,
    /// The model's basis function is not increasing.
    BasisNotMonotone,
}

impl ViolationKind {
    fn offset(self) -> Option<u8> {
        match self {
            ViolationKind::WeightSign => Some(1),
            ViolationKind::SecantSign => Some(2),
            ViolationKind::FlatSlopes => Some(3),
            ViolationKind::SlopeSign => Some(4),
            ViolationKind::FritschDisk => Some(5),
            ViolationKind::BasisNotMonotone => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Condition number 1–10; `None` for model-wide hypotheses.
    pub condition: Option<u8>,
    pub layer: usize,
    pub output: usize,
    pub input: usize,
    pub interval: Option<usize>,
    /// Required direction of the offending edge.
    pub direction: Direction,
    pub observed: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub zero_slope: f64,
    pub fritsch_radius_sq: f64,
    pub fritsch_membership: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero_slope: ZERO_SLOPE_TOL,
            fritsch_radius_sq: FRITSCH_RADIUS_SQ,
            fritsch_membership: FRITSCH_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub violations: Vec<Violation>,
    pub tolerances: Tolerances,
    pub edges_checked: usize,
    pub constrained_features: Vec<usize>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn observed(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn check_edge(edge: &Edge, dir: Direction, layer: usize, output: usize, input: usize, out: &mut Vec<Violation>) {
    let base = if layer == 0 { 0 } else { 5 };
    let sign = dir.sign();
    let mut push = |kind: ViolationKind, interval: Option<usize>, obs: BTreeMap<String, f64>| {
        out.push(Violation {
            kind,
            condition: kind.offset().map(|c| c + base),
            layer,
            output,
            input,
            interval,
            direction: dir,
            observed: obs,
        });
    };

    if edge.omega_phi < 0.0 || sign * edge.omega_b < 0.0 {
        push(
            ViolationKind::WeightSign,
            None,
            observed(&[("omega_phi", edge.omega_phi), ("omega_b", edge.omega_b)]),
        );
    }

    let s = &edge.spline;
    for k in 0..s.len() - 1 {
        let d = s.secant(k);
        let (m0, m1) = (s.slopes()[k], s.slopes()[k + 1]);
        let fault = match interval_check(sign * d, sign * m0, sign * m1) {
            Ok(()) => continue,
            Err(f) => f,
        };
        let mut obs = observed(&[("d", d), ("m_k", m0), ("m_k1", m1)]);
        let kind = match fault {
            IntervalFault::SecantSign => ViolationKind::SecantSign,
            IntervalFault::FlatSlopes => ViolationKind::FlatSlopes,
            IntervalFault::SlopeSign => ViolationKind::SlopeSign,
            IntervalFault::Disk(r2) => {
                obs.insert("alpha_sq_plus_beta_sq".into(), r2);
                ViolationKind::FritschDisk
            }
        };
        push(kind, Some(k), obs);
    }
}

/// Checks every sufficient condition on the stored parameters.
pub fn certify(model: &MonoKanModel) -> Certificate {
    let mut violations = Vec::new();
    let mut edges_checked = 0;
    let spec = model.spec();
    let constrained_features: Vec<usize> = spec.constrained().map(|(r, _)| r).collect();

    if !model.basis().is_increasing() && !constrained_features.is_empty() {
        violations.push(Violation {
            kind: ViolationKind::BasisNotMonotone,
            condition: None,
            layer: 0,
            output: 0,
            input: 0,
            interval: None,
            direction: Direction::Increasing,
            observed: BTreeMap::new(),
        });
    }

    for (l, layer) in model.layers().iter().enumerate() {
        for j in 0..layer.n_out() {
            for i in 0..layer.n_in() {
                let dir = if l == 0 { spec.get(i) } else { Direction::Increasing };
                if !dir.is_constrained() {
                    continue;
                }
                edges_checked += 1;
                check_edge(layer.edge(j, i), dir, l, j, i, &mut violations);
            }
        }
    }

    Certificate {
        verdict: if violations.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        violations,
        tolerances: Tolerances::default(),
        edges_checked,
        constrained_features,
    }
}

/// A pair of scaled inputs differing only in one feature whose outputs are
/// ordered against the required direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub x: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub f_x: f64,
    pub f_x_prime: f64,
    /// How far the output pair is on the wrong side.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureFalsification {
    pub feature: usize,
    pub direction: Direction,
    pub pairs: usize,
    pub violations: usize,
    pub worst: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalsificationReport {
    pub total_violations: usize,
    pub range: (f64, f64),
    pub features: Vec<FeatureFalsification>,
}

impl FalsificationReport {
    pub fn worst(&self) -> Option<&Counterexample> {
        self.features
            .iter()
            .filter_map(|f| f.worst.as_ref())
            .max_by(|a, b| a.gap.total_cmp(&b.gap))
    }
}

const CHUNK: usize = 4096;

struct ChunkResult {
    violations: usize,
    worst: Option<Counterexample>,
}

fn falsify_chunk(
    model: &MonoKanModel,
    feature: usize,
    dir: Direction,
    pairs: usize,
    half_width: f64,
    mut rng: ChaCha8Rng,
) -> ChunkResult {
    let n = model.n_inputs();
    let mut scratch = Scratch::default();
    let mut x = vec![0.0; n];
    let mut xp = vec![0.0; n];
    let mut violations = 0;
    let mut worst: Option<Counterexample> = None;
    for _ in 0..pairs {
        for v in x.iter_mut() {
            *v = rng.random_range(-half_width..=half_width);
        }
        let a = rng.random_range(-half_width..=half_width);
        let b = rng.random_range(-half_width..=half_width);
        xp.copy_from_slice(&x);
        x[feature] = a.min(b);
        xp[feature] = a.max(b);
        let fx = model.predict_scaled_with(&x, &mut scratch);
        let fxp = model.predict_scaled_with(&xp, &mut scratch);
        // positive gap = ordered against the required direction
        let gap = match dir {
            Direction::Increasing => fx - fxp,
            Direction::Decreasing => fxp - fx,
            Direction::Free => continue,
        };
        if gap > FALSIFY_SLACK || gap.is_nan() {
            violations += 1;
            if worst.as_ref().is_none_or(|w| gap > w.gap) {
                worst = Some(Counterexample {
                    x: x.clone(),
                    x_prime: xp.clone(),
                    f_x: fx,
                    f_x_prime: fxp,
                    gap,
                });
            }
        }
    }
    ChunkResult { violations, worst }
}

/// Searches for monotonicity violations with `n_pairs` random pairs per
/// constrained feature, drawn from the scaled box
/// `[-(1 + range_expansion), 1 + range_expansion]ⁿ`. Results depend only on
/// the arguments, not on the thread count.
pub fn falsify(model: &MonoKanModel, n_pairs: usize, seed: u64, range_expansion: f64) -> FalsificationReport {
    let half_width = 1.0 + range_expansion.max(0.0);
    let features = model
        .spec()
        .constrained()
        .map(|(feature, dir)| {
            let n_chunks = n_pairs.div_ceil(CHUNK);
            let results: Vec<ChunkResult> = (0..n_chunks)
                .into_par_iter()
                .map(|c| {
                    let pairs = CHUNK.min(n_pairs - c * CHUNK);
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(((feature as u64) << 32) | c as u64);
                    falsify_chunk(model, feature, dir, pairs, half_width, rng)
                })
                .collect();
            let mut violations = 0;
            let mut worst: Option<Counterexample> = None;
            for r in results {
                violations += r.violations;
                if let Some(w) = r.worst {
                    if worst.as_ref().is_none_or(|cur| w.gap > cur.gap) {
                        worst = Some(w);
                    }
                }
            }
            FeatureFalsification {
                feature,
                direction: dir,
                pairs: n_pairs,
                violations,
                worst,
            }
        })
        .collect::<Vec<_>>();
    FalsificationReport {
        total_violations: features.iter().map(|f| f.violations).sum(),
        range: (-half_width, half_width),
        features,
    }
}
