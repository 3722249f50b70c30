//! KAN layers and models.
//!
//! Node `j` of layer `l + 1` is
//!
//! ```text
//! x[l+1][j] = Σ_i ( ω_φ[l][j][i] · φ[l][j][i](x[l][i]) + ω_b[l][j][i] · b(x[l][i]) ) + θ[l][j]
//! ```
//!
//! where every `φ` is a [`HermiteSpline`] and `b` is a fixed, strictly
//! increasing basis function shared by the whole model.

mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::{Direction, HermiteSpline, KnotGrid};

pub use io::MODEL_SCHEMA;

/// Fixed activation added alongside every spline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisFunction {
    #[default]
    Sigmoid,
    Tanh,
    Softplus,
    Identity,
    /// `x · sigmoid(x)`. Not monotone; only accepted so that foreign model
    /// files can be loaded and rejected by the certifier. Models built by
    /// this crate refuse it.
    Silu,
}

impl BasisFunction {
    /// Basis functions offered for training: all strictly increasing on ℝ.
    pub const OFFERED: [BasisFunction; 4] = [
        BasisFunction::Sigmoid,
        BasisFunction::Tanh,
        BasisFunction::Softplus,
        BasisFunction::Identity,
    ];

    pub fn is_increasing(self) -> bool {
        !matches!(self, BasisFunction::Silu)
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisFunction::Sigmoid => "sigmoid",
            BasisFunction::Tanh => "tanh",
            BasisFunction::Softplus => "softplus",
            BasisFunction::Identity => "identity",
            BasisFunction::Silu => "silu",
        }
    }

    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            BasisFunction::Sigmoid => sigmoid(x),
            BasisFunction::Tanh => x.tanh(),
            BasisFunction::Softplus => softplus(x),
            BasisFunction::Identity => x,
            BasisFunction::Silu => x * sigmoid(x),
        }
    }

    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            BasisFunction::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            BasisFunction::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            BasisFunction::Softplus => sigmoid(x),
            BasisFunction::Identity => 1.0,
            BasisFunction::Silu => {
                let s = sigmoid(x);
                s + x * s * (1.0 - s)
            }
        }
    }
}

impl std::str::FromStr for BasisFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sigmoid" | "logistic" => Ok(BasisFunction::Sigmoid),
            "tanh" => Ok(BasisFunction::Tanh),
            "softplus" => Ok(BasisFunction::Softplus),
            "identity" | "linear" => Ok(BasisFunction::Identity),
            "silu" | "swish" => Ok(BasisFunction::Silu),
            other => Err(Error::arg(format!("unknown basis function {other:?}"))),
        }
    }
}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `ln(1 + e^x)`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// A spline with its spline weight `ω_φ` and basis weight `ω_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub spline: HermiteSpline,
    pub omega_phi: f64,
    pub omega_b: f64,
}

impl Edge {
    pub fn new(spline: HermiteSpline, omega_phi: f64, omega_b: f64) -> Self {
        Self {
            spline,
            omega_phi,
            omega_b,
        }
    }
}

/// An `n_out × n_in` matrix of edges plus one bias per output node.
///
/// Edges are stored row-major: the edge from input `i` to output `j` lives
/// at index `j * n_in + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    n_in: usize,
    n_out: usize,
    edges: Vec<Edge>,
    biases: Vec<f64>,
}

impl Layer {
    pub fn new(n_in: usize, n_out: usize, edges: Vec<Edge>, biases: Vec<f64>) -> Result<Self> {
        if n_in == 0 || n_out == 0 {
            return Err(Error::arg("layer widths must be positive"));
        }
        if edges.len() != n_in * n_out {
            return Err(Error::arg(format!(
                "layer {n_out}x{n_in} needs {} edges, got {}",
                n_in * n_out,
                edges.len()
            )));
        }
        if biases.len() != n_out {
            return Err(Error::arg(format!(
                "layer with {n_out} outputs needs {n_out} biases, got {}",
                biases.len()
            )));
        }
        if biases.iter().any(|b| !b.is_finite())
            || edges.iter().any(|e| !e.omega_phi.is_finite() || !e.omega_b.is_finite())
        {
            return Err(Error::arg("layer parameters must be finite"));
        }
        Ok(Self {
            n_in,
            n_out,
            edges,
            biases,
        })
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edges_mut(&mut self) -> &mut [Edge] {
        &mut self.edges
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn biases_mut(&mut self) -> &mut [f64] {
        &mut self.biases
    }

    pub fn edge(&self, output: usize, input: usize) -> &Edge {
        &self.edges[output * self.n_in + input]
    }

    pub fn edge_mut(&mut self, output: usize, input: usize) -> &mut Edge {
        &mut self.edges[output * self.n_in + input]
    }

    /// Indices (into [`Layer::edges`]) of every edge leaving `input`.
    pub fn column_indices(&self, input: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_out).map(move |j| j * self.n_in + input)
    }

    fn forward_into(&self, basis: BasisFunction, input: &[f64], basis_buf: &mut Vec<f64>, out: &mut Vec<f64>) {
        basis_buf.clear();
        basis_buf.extend(input.iter().map(|&x| basis.eval(x)));
        out.clear();
        for j in 0..self.n_out {
            let row = &self.edges[j * self.n_in..(j + 1) * self.n_in];
            let mut acc = 0.0;
            for ((edge, &x), &bx) in row.iter().zip(input).zip(basis_buf.iter()) {
                acc += edge.omega_phi * edge.spline.eval(x) + edge.omega_b * bx;
            }
            out.push(acc + self.biases[j]);
        }
    }
}

/// Per-input-feature monotonicity requirements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MonotonicitySpec {
    directions: Vec<Direction>,
}

impl MonotonicitySpec {
    pub fn new(directions: Vec<Direction>) -> Self {
        Self { directions }
    }

    pub fn free(n: usize) -> Self {
        Self::new(vec![Direction::Free; n])
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn get(&self, feature: usize) -> Direction {
        self.directions[feature]
    }

    /// `(feature index, direction)` for every constrained feature.
    pub fn constrained(&self) -> impl Iterator<Item = (usize, Direction)> + '_ {
        self.directions
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, d)| d.is_constrained())
    }
}

/// Per-feature affine map `scaled = (raw - shift) * scale` with `scale > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputScaler {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl InputScaler {
    pub fn identity(n: usize) -> Self {
        Self {
            shift: vec![0.0; n],
            scale: vec![1.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.shift.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shift.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.shift.len() != self.scale.len() {
            return Err(Error::arg("scaler shift and scale lengths differ"));
        }
        if self.shift.iter().any(|s| !s.is_finite()) {
            return Err(Error::arg("scaler shifts must be finite"));
        }
        if self.scale.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::arg("scaler scales must be finite and positive"));
        }
        Ok(())
    }

    pub fn transform(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(self.shift.iter().zip(&self.scale))
            .map(|(&x, (&shift, &scale))| (x - shift) * scale)
            .collect()
    }
}

/// Activations recorded by [`MonoKanModel::forward`]: `activations[l]` is the
/// input vector of layer `l`; the last entry holds the scalar output.
#[derive(Debug, Clone, PartialEq)]
pub struct Tape {
    pub activations: Vec<Vec<f64>>,
}

impl Tape {
    pub fn output(&self) -> f64 {
        self.activations.last().map(|a| a[0]).unwrap_or(f64::NAN)
    }
}

/// Reusable buffers for tape-free evaluation.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<f64>,
}

/// Gradient of one edge's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGradients {
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    pub omega_phi: f64,
    pub omega_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradients {
    pub edges: Vec<EdgeGradients>,
    pub biases: Vec<f64>,
}

/// Gradients with the same shape as a model's trainable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradients>,
}

impl Gradients {
    pub fn zeros_like(model: &MonoKanModel) -> Self {
        let layers = model
            .layers
            .iter()
            .map(|layer| LayerGradients {
                edges: layer
                    .edges
                    .iter()
                    .map(|e| EdgeGradients {
                        values: vec![0.0; e.spline.len()],
                        slopes: vec![0.0; e.spline.len()],
                        omega_phi: 0.0,
                        omega_b: 0.0,
                    })
                    .collect(),
                biases: vec![0.0; layer.n_out],
            })
            .collect();
        Self { layers }
    }

    /// Adds `other` elementwise; shapes must match.
    pub fn add_assign(&mut self, other: &Gradients) {
        for (la, lb) in self.layers.iter_mut().zip(&other.layers) {
            for (ea, eb) in la.edges.iter_mut().zip(&lb.edges) {
                for (a, b) in ea.values.iter_mut().zip(&eb.values) {
                    *a += b;
                }
                for (a, b) in ea.slopes.iter_mut().zip(&eb.slopes) {
                    *a += b;
                }
                ea.omega_phi += eb.omega_phi;
                ea.omega_b += eb.omega_b;
            }
            for (a, b) in la.biases.iter_mut().zip(&lb.biases) {
                *a += b;
            }
        }
    }

    /// Flattens in the order used by [`MonoKanModel::flat_params`].
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            for e in &layer.edges {
                out.extend_from_slice(&e.values);
                out.extend_from_slice(&e.slopes);
                out.push(e.omega_phi);
                out.push(e.omega_b);
            }
            out.extend_from_slice(&layer.biases);
        }
        out
    }
}

/// A scalar-output KAN together with its monotonicity requirements and the
/// input scaling it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct MonoKanModel {
    widths: Vec<usize>,
    layers: Vec<Layer>,
    spec: MonotonicitySpec,
    basis: BasisFunction,
    input_scaler: InputScaler,
}

impl MonoKanModel {
    pub fn new(
        layers: Vec<Layer>,
        spec: MonotonicitySpec,
        basis: BasisFunction,
        input_scaler: InputScaler,
    ) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::InvalidModel("a model needs at least one layer".into()))?;
        let mut widths = vec![first.n_in];
        for (l, layer) in layers.iter().enumerate() {
            let expected = widths[l];
            if layer.n_in != expected {
                return Err(Error::InvalidModel(format!(
                    "layer {l} takes {} inputs but the previous layer has {expected} outputs",
                    layer.n_in
                )));
            }
            widths.push(layer.n_out);
        }
        if *widths.last().unwrap() != 1 {
            return Err(Error::InvalidModel(format!(
                "the output layer must have width 1, got {}",
                widths.last().unwrap()
            )));
        }
        if spec.len() != widths[0] {
            return Err(Error::InvalidModel(format!(
                "monotonicity spec has {} entries for {} inputs",
                spec.len(),
                widths[0]
            )));
        }
        if input_scaler.len() != widths[0] {
            return Err(Error::InvalidModel(format!(
                "input scaler has {} entries for {} inputs",
                input_scaler.len(),
                widths[0]
            )));
        }
        input_scaler
            .validate()
            .map_err(|e| Error::InvalidModel(e.to_string()))?;
        Ok(Self {
            widths,
            layers,
            spec,
            basis,
            input_scaler,
        })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn n_inputs(&self) -> usize {
        self.widths[0]
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn spec(&self) -> &MonotonicitySpec {
        &self.spec
    }

    pub fn basis(&self) -> BasisFunction {
        self.basis
    }

    pub fn input_scaler(&self) -> &InputScaler {
        &self.input_scaler
    }

    pub fn set_input_scaler(&mut self, scaler: InputScaler) -> Result<()> {
        if scaler.len() != self.n_inputs() {
            return Err(Error::Dimension {
                expected: self.n_inputs(),
                got: scaler.len(),
            });
        }
        scaler.validate()?;
        self.input_scaler = scaler;
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_inputs() {
            return Err(Error::Dimension {
                expected: self.n_inputs(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("inputs must be finite"));
        }
        Ok(())
    }

    /// Evaluates the model on an already-scaled input, recording a tape for
    /// [`MonoKanModel::backward`].
    pub fn forward(&self, x: &[f64]) -> Result<(f64, Tape)> {
        self.check_input(x)?;
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(x.to_vec());
        let mut basis_buf = Vec::new();
        for layer in &self.layers {
            let mut out = Vec::with_capacity(layer.n_out);
            layer.forward_into(self.basis, activations.last().unwrap(), &mut basis_buf, &mut out);
            activations.push(out);
        }
        let tape = Tape { activations };
        Ok((tape.output(), tape))
    }

    /// Evaluates the model on an already-scaled input without recording.
    /// Panics if `x` has the wrong length.
    pub fn predict_scaled_with(&self, x: &[f64], scratch: &mut Scratch) -> f64 {
        assert_eq!(x.len(), self.n_inputs(), "input width mismatch");
        scratch.a.clear();
        scratch.a.extend_from_slice(x);
        for layer in &self.layers {
            layer.forward_into(self.basis, &scratch.a, &mut scratch.basis, &mut scratch.b);
            std::mem::swap(&mut scratch.a, &mut scratch.b);
        }
        scratch.a[0]
    }

    pub fn predict_scaled(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.predict_scaled_with(x, &mut Scratch::default()))
    }

    /// Applies the input scaler, then evaluates.
    pub fn predict_raw(&self, raw: &[f64]) -> Result<f64> {
        self.check_input(raw)?;
        let x = self.input_scaler.transform(raw);
        Ok(self.predict_scaled_with(&x, &mut Scratch::default()))
    }

    /// Exact reverse-mode gradient of the output, scaled by `upstream`.
    pub fn backward(&self, tape: &Tape, upstream: f64) -> Result<Gradients> {
        let mut grads = Gradients::zeros_like(self);
        self.backward_accumulate(tape, upstream, &mut grads)?;
        Ok(grads)
    }

    /// Like [`MonoKanModel::backward`] but adds into an existing buffer.
    pub fn backward_accumulate(&self, tape: &Tape, upstream: f64, grads: &mut Gradients) -> Result<()> {
        if tape.activations.len() != self.layers.len() + 1
            || tape.activations.iter().zip(&self.widths).any(|(a, &w)| a.len() != w)
        {
            return Err(Error::StaleTape(format!(
                "tape shape {:?} vs widths {:?}",
                tape.activations.iter().map(Vec::len).collect::<Vec<_>>(),
                self.widths
            )));
        }
        if grads.layers.len() != self.layers.len() {
            return Err(Error::StaleTape("gradient buffer has the wrong depth".into()));
        }

        let mut upstream_vec = vec![upstream];
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let input = &tape.activations[l];
            let lg = &mut grads.layers[l];
            let mut downstream = vec![0.0; layer.n_in];
            for (j, &g) in upstream_vec.iter().enumerate() {
                lg.biases[j] += g;
                if g == 0.0 {
                    continue;
                }
                for (i, &x) in input.iter().enumerate() {
                    let idx = j * layer.n_in + i;
                    let edge = &layer.edges[idx];
                    let eg = &mut lg.edges[idx];
                    let (phi, dphi) = edge.spline.eval_with_derivative(x);
                    let bx = self.basis.eval(x);
                    eg.omega_phi += g * phi;
                    eg.omega_b += g * bx;
                    let local = edge.spline.local_gradient(x);
                    let scale = g * edge.omega_phi;
                    for side in 0..2 {
                        eg.values[local.knot + side] += scale * local.dvalues[side];
                        eg.slopes[local.knot + side] += scale * local.dslopes[side];
                    }
                    downstream[i] += g * (edge.omega_phi * dphi + edge.omega_b * self.basis.derivative(x));
                }
            }
            upstream_vec = downstream;
        }
        Ok(())
    }

    /// Number of trainable parameters: `2K + 2` per edge plus one bias per
    /// non-input node.
    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|layer| layer.edges.iter().map(|e| 2 * e.spline.len() + 2).sum::<usize>() + layer.n_out)
            .sum()
    }

    /// All trainable parameters, per layer: for each edge (row-major)
    /// values, slopes, `ω_φ`, `ω_b`; then the layer's biases.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            for e in &layer.edges {
                out.extend_from_slice(e.spline.values());
                out.extend_from_slice(e.spline.slopes());
                out.push(e.omega_phi);
                out.push(e.omega_b);
            }
            out.extend_from_slice(&layer.biases);
        }
        out
    }

    /// Inverse of [`MonoKanModel::flat_params`].
    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Dimension {
                expected: self.param_count(),
                got: params.len(),
            });
        }
        let mut it = params.iter().copied();
        for layer in &mut self.layers {
            for e in &mut layer.edges {
                let (values, slopes) = e.spline.params_mut();
                for v in values.iter_mut().chain(slopes.iter_mut()) {
                    *v = it.next().unwrap();
                }
                e.omega_phi = it.next().unwrap();
                e.omega_b = it.next().unwrap();
            }
            for b in &mut layer.biases {
                *b = it.next().unwrap();
            }
        }
        Ok(())
    }

    /// Scales the model output by `scale > 0` and then adds `offset`, by
    /// rewriting the last layer. Positive scaling keeps every weight sign.
    pub fn rescale_output(&mut self, scale: f64, offset: f64) -> Result<()> {
        if !(scale.is_finite() && scale > 0.0 && offset.is_finite()) {
            return Err(Error::arg("output rescaling needs a finite positive scale"));
        }
        let last = self.layers.last_mut().unwrap();
        for e in &mut last.edges {
            e.omega_phi *= scale;
            e.omega_b *= scale;
        }
        for b in &mut last.biases {
            *b = *b * scale + offset;
        }
        Ok(())
    }

    /// The model `x ↦ outer(inner(x))` on scaled inputs. `outer` must take a
    /// single input; its input scaler is not applied. Each feature's
    /// direction in the result is the inner direction composed with the
    /// outer one.
    pub fn compose(inner: &MonoKanModel, outer: &MonoKanModel) -> Result<MonoKanModel> {
        if outer.n_inputs() != 1 {
            return Err(Error::arg("the outer model of a composition must take one input"));
        }
        if inner.basis != outer.basis {
            return Err(Error::arg("composed models must share a basis function"));
        }
        let outer_dir = outer.spec.get(0);
        let directions = inner
            .spec
            .directions()
            .iter()
            .map(|&d| match (d, outer_dir) {
                (Direction::Free, _) | (_, Direction::Free) => Direction::Free,
                (a, b) if a == b => Direction::Increasing,
                _ => Direction::Decreasing,
            })
            .collect();
        let layers = inner.layers.iter().chain(&outer.layers).cloned().collect();
        MonoKanModel::new(
            layers,
            MonotonicitySpec::new(directions),
            inner.basis,
            inner.input_scaler.clone(),
        )
    }
}

/// Builds a layer whose every edge uses the same spline and weights. Mostly
/// useful for hand-built models in tests and examples.
pub fn uniform_layer(
    n_in: usize,
    n_out: usize,
    spline: &HermiteSpline,
    omega_phi: f64,
    omega_b: f64,
    bias: f64,
) -> Result<Layer> {
    let edges = (0..n_in * n_out)
        .map(|_| Edge::new(spline.clone(), omega_phi, omega_b))
        .collect();
    Layer::new(n_in, n_out, edges, vec![bias; n_out])
}

/// Identity spline on a uniform grid, a convenient building block.
pub fn identity_spline(lo: f64, hi: f64, knots: usize) -> Result<HermiteSpline> {
    Ok(HermiteSpline::identity(KnotGrid::uniform(lo, hi, knots)?))
}
