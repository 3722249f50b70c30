use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{sigmoid, softplus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Mean squared error.
    Mse,
    /// Mean logistic loss on logits; targets in {0, 1}.
    BinaryCrossEntropy,
}

impl LossKind {
    /// Loss of a single prediction and its derivative with respect to it.
    #[inline]
    pub fn pointwise(self, pred: f64, target: f64) -> (f64, f64) {
        match self {
            LossKind::Mse => {
                let r = pred - target;
                (r * r, 2.0 * r)
            }
            // softplus(z) - y z == -[y ln σ(z) + (1 - y) ln(1 - σ(z))]
            LossKind::BinaryCrossEntropy => (softplus(pred) - target * pred, sigmoid(pred) - target),
        }
    }
}

/// Mean loss over a batch and its gradient with respect to each prediction.
pub fn loss(pred: &[f64], target: &[f64], kind: LossKind) -> Result<(f64, Vec<f64>)> {
    if pred.len() != target.len() {
        return Err(Error::Dimension {
            expected: target.len(),
            got: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::arg("loss of an empty batch"));
    }
    if kind == LossKind::BinaryCrossEntropy && target.iter().any(|&t| t != 0.0 && t != 1.0) {
        return Err(Error::arg("binary cross-entropy targets must be 0 or 1"));
    }
    let n = pred.len() as f64;
    let mut total = 0.0;
    let grad = pred
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let (l, g) = kind.pointwise(p, t);
            total += l;
            g / n
        })
        .collect();
    Ok((total / n, grad))
}
