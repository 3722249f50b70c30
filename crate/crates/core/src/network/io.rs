//! The `monokan-model-v1` JSON document.
//!
//! ```json
//! {
//!   "schema": "monokan-model-v1",
//!   "widths": [n0, n1, ..., 1],
//!   "spec": ["increasing", "free", ...],
//!   "basis": "sigmoid",
//!   "input_scaler": { "shift": [...], "scale": [...] },
//!   "layers": [
//!     { "biases": [...],
//!       "edges": [ { "knots": [...], "values": [...], "slopes": [...],
//!                    "omega_phi": 1.0, "omega_b": 0.05 }, ... ] }
//!   ]
//! }
//! ```
//!
//! Edges within a layer are listed row-major (output-major): edge `(j, i)`
//! is entry `j * n_in + i`. Floats are written in shortest round-trip
//! decimal form, so save/load is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BasisFunction, Edge, InputScaler, Layer, MonoKanModel, MonotonicitySpec};
use crate::error::{Error, Result};
use crate::spline::{HermiteSpline, KnotGrid};

pub const MODEL_SCHEMA: &str = "monokan-model-v1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    schema: String,
    widths: Vec<usize>,
    spec: MonotonicitySpec,
    basis: BasisFunction,
    input_scaler: InputScaler,
    layers: Vec<LayerDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    biases: Vec<f64>,
    edges: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    omega_phi: f64,
    omega_b: f64,
}

impl MonoKanModel {
    fn to_doc(&self) -> ModelDoc {
        ModelDoc {
            schema: MODEL_SCHEMA.to_string(),
            widths: self.widths.clone(),
            spec: self.spec.clone(),
            basis: self.basis,
            input_scaler: self.input_scaler.clone(),
            layers: self
                .layers
                .iter()
                .map(|layer| LayerDoc {
                    biases: layer.biases.clone(),
                    edges: layer
                        .edges
                        .iter()
                        .map(|e| EdgeDoc {
                            knots: e.spline.knots().to_vec(),
                            values: e.spline.values().to_vec(),
                            slopes: e.spline.slopes().to_vec(),
                            omega_phi: e.omega_phi,
                            omega_b: e.omega_b,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    fn from_doc(doc: ModelDoc) -> Result<Self> {
        if doc.schema != MODEL_SCHEMA {
            return Err(Error::InvalidModel(format!(
                "unsupported schema {:?} (expected {MODEL_SCHEMA:?})",
                doc.schema
            )));
        }
        if doc.widths.len() != doc.layers.len() + 1 {
            return Err(Error::InvalidModel(format!(
                "{} widths listed for {} layers",
                doc.widths.len(),
                doc.layers.len()
            )));
        }
        let mut layers = Vec::with_capacity(doc.layers.len());
        for (l, layer) in doc.layers.into_iter().enumerate() {
            let (n_in, n_out) = (doc.widths[l], doc.widths[l + 1]);
            let edges = layer
                .edges
                .into_iter()
                .enumerate()
                .map(|(idx, e)| {
                    KnotGrid::new(e.knots)
                        .and_then(|grid| HermiteSpline::new(grid, e.values, e.slopes))
                        .map(|spline| Edge::new(spline, e.omega_phi, e.omega_b))
                        .map_err(|err| Error::InvalidModel(format!("layer {l} edge {idx}: {err}")))
                })
                .collect::<Result<Vec<_>>>()?;
            layers.push(
                Layer::new(n_in, n_out, edges, layer.biases)
                    .map_err(|err| Error::InvalidModel(format!("layer {l}: {err}")))?,
            );
        }
        MonoKanModel::new(layers, doc.spec, doc.basis, doc.input_scaler)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text)?;
        Self::from_doc(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
