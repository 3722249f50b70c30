//! Monotone Kolmogorov-Arnold networks.
//!
//! Every edge activation is a cubic Hermite spline with learnable values and
//! slopes, extended linearly outside its knot range. Training alternates
//! optimizer steps with a projection that keeps the parameters inside a set
//! of closed-form sufficient conditions for partial monotonicity, and
//! [`certify`] checks those conditions exactly, so a passing certificate
//! holds for every input in ℝⁿ rather than for sampled points.

pub mod certifier;
pub mod constraints;
pub mod dataio;
pub mod error;
pub mod network;
pub mod spline;
pub mod trainer;

pub use certifier::{certify, falsify, Certificate, FalsificationReport, Verdict, Violation, ViolationKind};
pub use constraints::{apply_cons, apply_cons_decreasing, project_model, ProjectionReport};
pub use dataio::{Dataset, DatasetSpec, Splits, Task};
pub use error::{Error, Result};
pub use network::{
    BasisFunction, Edge, Gradients, InputScaler, Layer, MonoKanModel, MonotonicitySpec, Tape, MODEL_SCHEMA,
};
pub use spline::{hermite_basis, Direction, HermiteSpline, KnotGrid};
pub use trainer::{
    evaluate, init_model, train, train_with_observer, LossKind, Metrics, ModelConfig, RunConfig, TrainConfig, TrainLog,
};
