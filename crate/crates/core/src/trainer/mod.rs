//! Projected training: loss, gradient, optimizer step, projection.

mod loss;
mod optim;

use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use loss::{loss, LossKind};
pub use optim::OptimizerKind;

use crate::constraints::{project_model, ProjectionReport};
use crate::dataio::{Dataset, Task};
use crate::error::{Error, Result};
use crate::network::{BasisFunction, Edge, Gradients, InputScaler, Layer, MonoKanModel, MonotonicitySpec, Scratch};
use crate::spline::{Direction, HermiteSpline, KnotGrid};
use optim::Optimizer;

/// Architecture and grid settings for [`init_model`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Hidden layer widths; input and output widths come from the data.
    pub hidden: Vec<usize>,
    /// Knots per spline.
    pub knots: usize,
    /// Half-width of the input-layer knot grid (inputs are scaled to [-1, 1]).
    pub input_grid: f64,
    /// Half-width of the hidden-layer knot grids.
    pub hidden_grid: f64,
    pub basis: BasisFunction,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden: Vec::new(),
            knots: 8,
            input_grid: 1.0,
            hidden_grid: 2.0,
            basis: BasisFunction::Sigmoid,
        }
    }
}

impl ModelConfig {
    /// `[n_inputs, hidden..., 1]`.
    pub fn widths(&self, n_inputs: usize) -> Vec<usize> {
        let mut w = vec![n_inputs];
        w.extend_from_slice(&self.hidden);
        w.push(1);
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    /// Project after every optimizer step.
    #[default]
    PerStep,
    /// Project once at the end of each epoch.
    PerEpoch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchMode {
    Full,
    /// Full batch up to [`AUTO_FULL_BATCH_ROWS`] rows, otherwise 256.
    #[default]
    Auto,
}

/// Mini-batch size: `"full"`, `"auto"` or a row count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BatchSize {
    Rows(usize),
    Mode(BatchMode),
}

impl Default for BatchSize {
    fn default() -> Self {
        BatchSize::Mode(BatchMode::Auto)
    }
}

pub const AUTO_FULL_BATCH_ROWS: usize = 4096;
const AUTO_BATCH_ROWS: usize = 256;

impl BatchSize {
    pub fn resolve(self, rows: usize) -> usize {
        match self {
            BatchSize::Rows(n) => n.clamp(1, rows.max(1)),
            BatchSize::Mode(BatchMode::Full) => rows,
            BatchSize::Mode(BatchMode::Auto) if rows <= AUTO_FULL_BATCH_ROWS => rows,
            BatchSize::Mode(BatchMode::Auto) => AUTO_BATCH_ROWS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub batch_size: BatchSize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub projection: Projection,
    /// Defaults to MSE for regression and cross-entropy for classification.
    pub loss: Option<LossKind>,
    /// Stop after this many epochs without validation improvement and
    /// restore the best model. Off when unset.
    pub early_stopping: Option<usize>,
    /// Fit regression models on standardized targets and fold the scaling
    /// into the output layer afterwards.
    pub standardize_target: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_epochs: 200,
            batch_size: BatchSize::default(),
            learning_rate: 1e-2,
            optimizer: OptimizerKind::default(),
            seed: 0,
            projection: Projection::PerStep,
            loss: None,
            early_stopping: None,
            standardize_target: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs < 1 {
            return Err(Error::arg("max_epochs must be at least 1"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::arg("learning_rate must be positive"));
        }
        if self.early_stopping == Some(0) {
            return Err(Error::arg("early_stopping patience must be at least 1"));
        }
        if let BatchSize::Rows(0) = self.batch_size {
            return Err(Error::arg("batch_size must be at least 1"));
        }
        Ok(())
    }
}

/// A whole run: architecture plus training settings, as read from a TOML file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.train.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}

/// Random increasing knot values: positive secant slopes around 0.1,
/// centred on zero.
fn increasing_values(grid: &KnotGrid, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut values = Vec::with_capacity(grid.len());
    let mut y = 0.0;
    values.push(y);
    for k in 0..grid.len() - 1 {
        y += 0.1 * (1.0 + rng.random_range(-0.5..0.5)) * grid.width(k);
        values.push(y);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter_mut().for_each(|v| *v -= mean);
    values
}

/// Slopes from neighbouring secants: averaged at interior knots, one-sided at
/// the ends. For increasing data whose adjacent secants differ by at most a
/// factor 3 this keeps `α, β ≤ 2`, well inside the disk.
fn secant_average_slopes(grid: &KnotGrid, values: &[f64]) -> Vec<f64> {
    let d: Vec<f64> = (0..grid.len() - 1)
        .map(|k| (values[k + 1] - values[k]) / grid.width(k))
        .collect();
    let last = d.len() - 1;
    (0..grid.len())
        .map(|k| match k {
            0 => d[0],
            k if k > last => d[last],
            k => 0.5 * (d[k - 1] + d[k]),
        })
        .collect()
}

fn init_edge(grid: &KnotGrid, dir: Direction, rng: &mut ChaCha8Rng) -> Result<Edge> {
    let (values, omega_b) = match dir {
        Direction::Increasing => (increasing_values(grid, rng), 0.05),
        Direction::Decreasing => (increasing_values(grid, rng).into_iter().map(|v| -v).collect(), -0.05),
        Direction::Free => ((0..grid.len()).map(|_| rng.random_range(-0.1..0.1)).collect(), 0.05),
    };
    let slopes = secant_average_slopes(grid, &values);
    Ok(Edge::new(
        HermiteSpline::new(grid.clone(), values, slopes)?,
        1.0,
        omega_b,
    ))
}

/// A seeded model whose constrained edges already satisfy every
/// certification condition.
pub fn init_model(widths: &[usize], spec: &MonotonicitySpec, config: &ModelConfig, seed: u64) -> Result<MonoKanModel> {
    if widths.len() < 2 || widths.contains(&0) {
        return Err(Error::arg(format!("invalid widths {widths:?}")));
    }
    if *widths.last().unwrap() != 1 {
        return Err(Error::arg("the output width must be 1"));
    }
    if spec.len() != widths[0] {
        return Err(Error::arg(format!(
            "monotonicity spec has {} entries for {} inputs",
            spec.len(),
            widths[0]
        )));
    }
    if !config.basis.is_increasing() {
        return Err(Error::arg(format!(
            "basis function {} is not increasing and cannot be certified",
            config.basis.name()
        )));
    }
    if config.knots < 2 {
        return Err(Error::arg("splines need at least 2 knots"));
    }
    let input_grid = KnotGrid::uniform(-config.input_grid, config.input_grid, config.knots)?;
    let hidden_grid = KnotGrid::uniform(-config.hidden_grid, config.hidden_grid, config.knots)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut layers = Vec::with_capacity(widths.len() - 1);
    for l in 0..widths.len() - 1 {
        let (n_in, n_out) = (widths[l], widths[l + 1]);
        let grid = if l == 0 { &input_grid } else { &hidden_grid };
        let mut edges = Vec::with_capacity(n_in * n_out);
        for _j in 0..n_out {
            for i in 0..n_in {
                let dir = if l == 0 { spec.get(i) } else { Direction::Increasing };
                edges.push(init_edge(grid, dir, &mut rng)?);
            }
        }
        layers.push(Layer::new(n_in, n_out, edges, vec![0.0; n_out])?);
    }
    MonoKanModel::new(layers, spec.clone(), config.basis, InputScaler::identity(widths[0]))
}

/// Evaluation metrics on one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub rows: usize,
    /// MSE for regression, mean cross-entropy for classification.
    pub loss: f64,
    pub mse: Option<f64>,
    pub rmse: Option<f64>,
    pub accuracy: Option<f64>,
}

impl Metrics {
    /// RMSE for regression, accuracy for classification.
    pub fn headline(&self) -> (&'static str, f64) {
        match (self.rmse, self.accuracy) {
            (_, Some(acc)) => ("accuracy", acc),
            (Some(rmse), _) => ("rmse", rmse),
            _ => ("loss", self.loss),
        }
    }
}

/// Metrics of `model` on an already-scaled dataset.
pub fn evaluate(model: &MonoKanModel, data: &Dataset) -> Result<Metrics> {
    if data.n_features() != model.n_inputs() {
        return Err(Error::Dimension {
            expected: model.n_inputs(),
            got: data.n_features(),
        });
    }
    if data.is_empty() {
        return Err(Error::arg("cannot evaluate on an empty dataset"));
    }
    let mut scratch = Scratch::default();
    let preds: Vec<f64> = data
        .features
        .iter()
        .map(|x| model.predict_scaled_with(x, &mut scratch))
        .collect();
    metrics_from_predictions(&preds, &data.targets, data.task)
}

fn metrics_from_predictions(preds: &[f64], targets: &[f64], task: Task) -> Result<Metrics> {
    let rows = preds.len();
    Ok(match task {
        Task::Regression => {
            let (mse, _) = loss(preds, targets, LossKind::Mse)?;
            Metrics {
                rows,
                loss: mse,
                mse: Some(mse),
                rmse: Some(mse.sqrt()),
                accuracy: None,
            }
        }
        Task::BinaryClassification => {
            let (bce, _) = loss(preds, targets, LossKind::BinaryCrossEntropy)?;
            let correct = preds
                .iter()
                .zip(targets)
                .filter(|(&p, &t)| (p > 0.0) == (t > 0.5))
                .count();
            Metrics {
                rows,
                loss: bce,
                mse: None,
                rmse: None,
                accuracy: Some(correct as f64 / rows as f64),
            }
        }
    })
}

/// One completed epoch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean training loss over the epoch's batches, in target units.
    pub train_loss: f64,
    pub val_loss: Option<f64>,
    /// Validation RMSE or accuracy.
    pub val_metric: Option<f64>,
    pub projection: ProjectionReport,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose parameters were kept when early stopping restored them.
    pub restored_epoch: Option<usize>,
}

impl TrainLog {
    /// One JSON object per line, one line per epoch.
    pub fn to_ndjson(&self) -> Result<String> {
        let mut out = String::new();
        for record in &self.epochs {
            out.push_str(&serde_json::to_string(record)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn final_train_loss(&self) -> Option<f64> {
        self.epochs.last().map(|r| r.train_loss)
    }
}

/// Where the trainer is when it calls the step observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepInfo {
    pub epoch: usize,
    /// Global optimizer step counter, starting at 1.
    pub step: usize,
}

/// Rows per parallel gradient chunk. Fixed so that the reduction order, and
/// therefore every bit of the result, is independent of the thread count.
const GRAD_CHUNK: usize = 32;

fn batch_gradient(
    model: &MonoKanModel,
    data: &Dataset,
    targets: &[f64],
    rows: &[usize],
    kind: LossKind,
) -> Result<(f64, Gradients)> {
    let n = rows.len() as f64;
    let partials: Vec<Result<(f64, Gradients)>> = rows
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| {
            let mut grads = Gradients::zeros_like(model);
            let mut total = 0.0;
            for &r in chunk {
                let (pred, tape) = model.forward(&data.features[r])?;
                let (l, dl) = kind.pointwise(pred, targets[r]);
                total += l;
                model.backward_accumulate(&tape, dl / n, &mut grads)?;
            }
            Ok((total, grads))
        })
        .collect();
    let mut total = 0.0;
    let mut grads = Gradients::zeros_like(model);
    for part in partials {
        let (l, g) = part?;
        total += l;
        grads.add_assign(&g);
    }
    Ok((total / n, grads))
}

/// Trains `model` on an already-scaled dataset. See [`train_with_observer`].
pub fn train(
    model: MonoKanModel,
    train_set: &Dataset,
    validation: Option<&Dataset>,
    config: &TrainConfig,
) -> Result<(MonoKanModel, TrainLog)> {
    train_with_observer(model, train_set, validation, config, |_, _| {})
}

/// The training loop: for each epoch and mini-batch compute the loss and its
/// exact gradient, take an optimizer step, then project the parameters back
/// onto the feasible set (every step, or once per epoch). `observer` sees the
/// model after each step's projection.
///
/// With `standardize_target`, regression targets are standardized for
/// training and the returned model has the scaling folded into its output
/// layer, so it predicts raw targets. Optimizer moments are never touched by
/// the projection.
pub fn train_with_observer(
    mut model: MonoKanModel,
    train_set: &Dataset,
    validation: Option<&Dataset>,
    config: &TrainConfig,
    mut observer: impl FnMut(StepInfo, &MonoKanModel),
) -> Result<(MonoKanModel, TrainLog)> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::arg("training set is empty"));
    }
    if train_set.n_features() != model.n_inputs() {
        return Err(Error::Dimension {
            expected: model.n_inputs(),
            got: train_set.n_features(),
        });
    }
    if let Some(val) = validation {
        if val.n_features() != model.n_inputs() {
            return Err(Error::Dimension {
                expected: model.n_inputs(),
                got: val.n_features(),
            });
        }
    }
    let kind = config.loss.unwrap_or(match train_set.task {
        Task::Regression => LossKind::Mse,
        Task::BinaryClassification => LossKind::BinaryCrossEntropy,
    });
    if kind == LossKind::BinaryCrossEntropy && train_set.targets.iter().any(|&t| t != 0.0 && t != 1.0) {
        return Err(Error::arg("cross-entropy loss needs 0/1 targets"));
    }

    let (mu, sigma) = if kind == LossKind::Mse && config.standardize_target {
        target_moments(&train_set.targets)
    } else {
        (0.0, 1.0)
    };
    let targets: Vec<f64> = train_set.targets.iter().map(|t| (t - mu) / sigma).collect();
    let loss_scale = if kind == LossKind::Mse { sigma * sigma } else { 1.0 };

    let n = train_set.len();
    let batch = config.batch_size.resolve(n);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut optimizer = Optimizer::new(config.optimizer, model.param_count());
    let mut order: Vec<usize> = (0..n).collect();
    let mut log = TrainLog::default();
    let mut step = 0;
    let mut best: Option<(f64, usize, MonoKanModel)> = None;
    let mut since_best = 0;

    for epoch in 1..=config.max_epochs {
        let started = Instant::now();
        if batch < n {
            order.shuffle(&mut rng);
        }
        let mut report = ProjectionReport::default();
        let mut epoch_loss = 0.0;
        for rows in order.chunks(batch) {
            step += 1;
            let (batch_loss, grads) = batch_gradient(&model, train_set, &targets, rows, kind)?;
            if !batch_loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    step,
                    loss: batch_loss * loss_scale,
                });
            }
            epoch_loss += batch_loss * rows.len() as f64;

            let mut params = model.flat_params();
            optimizer.step(&mut params, &grads.to_flat(), config.learning_rate);
            if params.iter().any(|p| !p.is_finite()) {
                return Err(Error::Diverged {
                    epoch,
                    step,
                    loss: f64::NAN,
                });
            }
            model.set_flat_params(&params)?;
            if config.projection == Projection::PerStep {
                report += project_model(&mut model);
            }
            observer(StepInfo { epoch, step }, &model);
        }
        if config.projection == Projection::PerEpoch {
            report += project_model(&mut model);
        }

        let (val_loss, val_metric) = match validation {
            Some(val) if !val.is_empty() => {
                let m = evaluate_rescaled(&model, val, mu, sigma)?;
                (Some(m.loss), Some(m.headline().1))
            }
            _ => (None, None),
        };
        log.epochs.push(EpochRecord {
            epoch,
            train_loss: epoch_loss / n as f64 * loss_scale,
            val_loss,
            val_metric,
            projection: report,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });

        if let (Some(patience), Some(vl)) = (config.early_stopping, val_loss) {
            if best.as_ref().is_none_or(|(b, _, _)| vl < *b) {
                best = Some((vl, epoch, model.clone()));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= patience {
                    break;
                }
            }
        }
    }

    if let Some((_, epoch, best_model)) = best {
        if log.epochs.last().map(|r| r.epoch) != Some(epoch) {
            model = best_model;
            log.restored_epoch = Some(epoch);
        }
    }
    if sigma != 1.0 || mu != 0.0 {
        model.rescale_output(sigma, mu)?;
    }
    Ok((model, log))
}

fn target_moments(targets: &[f64]) -> (f64, f64) {
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let var = targets.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    (mean, if sd > 0.0 && sd.is_finite() { sd } else { 1.0 })
}

/// Metrics of a model trained on standardized targets, reported in raw units.
fn evaluate_rescaled(model: &MonoKanModel, data: &Dataset, mu: f64, sigma: f64) -> Result<Metrics> {
    let mut scratch = Scratch::default();
    let preds: Vec<f64> = data
        .features
        .iter()
        .map(|x| sigma * model.predict_scaled_with(x, &mut scratch) + mu)
        .collect();
    metrics_from_predictions(&preds, &data.targets, data.task)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::certify;

    fn spec(dirs: &[Direction]) -> MonotonicitySpec {
        MonotonicitySpec::new(dirs.to_vec())
    }

    #[test]
    fn init_is_feasible_and_deterministic() {
        let s = spec(&[Direction::Increasing, Direction::Decreasing, Direction::Free]);
        let cfg = ModelConfig::default();
        let mut a = init_model(&[3, 4, 2, 1], &s, &cfg, 42).unwrap();
        let b = init_model(&[3, 4, 2, 1], &s, &cfg, 42).unwrap();
        assert_eq!(a, b);
        assert!(certify(&a).passed());
        assert!(project_model(&mut a).is_identity());
        assert_eq!(a, b);
        assert_ne!(a, init_model(&[3, 4, 2, 1], &s, &cfg, 43).unwrap());
    }

    #[test]
    fn init_slopes_sit_well_inside_the_disk() {
        let s = spec(&[Direction::Increasing]);
        let m = init_model(&[1, 1], &s, &ModelConfig::default(), 5).unwrap();
        let spline = &m.layers()[0].edge(0, 0).spline;
        for (k, d) in spline.secant_slopes().into_iter().enumerate() {
            let a = spline.slopes()[k] / d;
            let b = spline.slopes()[k + 1] / d;
            assert!(a * a + b * b <= 8.0 + 1e-12);
        }
    }

    #[test]
    fn init_rejects_bad_arguments() {
        let cfg = ModelConfig::default();
        assert!(init_model(&[2], &spec(&[Direction::Free; 2]), &cfg, 0).is_err());
        assert!(init_model(&[2, 0, 1], &spec(&[Direction::Free; 2]), &cfg, 0).is_err());
        assert!(init_model(&[2, 2], &spec(&[Direction::Free; 2]), &cfg, 0).is_err());
        assert!(init_model(&[2, 1], &spec(&[Direction::Free; 3]), &cfg, 0).is_err());
        let silu = ModelConfig {
            basis: BasisFunction::Silu,
            ..ModelConfig::default()
        };
        assert!(init_model(&[2, 1], &spec(&[Direction::Free; 2]), &silu, 0).is_err());
    }

    #[test]
    fn batch_size_resolution() {
        assert_eq!(BatchSize::default().resolve(100), 100);
        assert_eq!(BatchSize::default().resolve(5000), 256);
        assert_eq!(BatchSize::Mode(BatchMode::Full).resolve(5000), 5000);
        assert_eq!(BatchSize::Rows(32).resolve(10), 10);
    }

    #[test]
    fn run_config_from_toml() {
        let cfg = RunConfig::from_toml(
            r#"
            [model]
            hidden = [3]
            knots = 6
            basis = "tanh"

            [train]
            max_epochs = 10
            batch_size = 16
            projection = "per_epoch"
            optimizer = { kind = "sgd", momentum = 0.9 }
            "#,
        )
        .unwrap();
        assert_eq!(cfg.model.hidden, vec![3]);
        assert_eq!(cfg.model.basis, BasisFunction::Tanh);
        assert_eq!(cfg.train.batch_size, BatchSize::Rows(16));
        assert_eq!(cfg.train.projection, Projection::PerEpoch);
        assert_eq!(cfg.train.optimizer, OptimizerKind::Sgd { momentum: 0.9 });
        assert_eq!(cfg.train.learning_rate, 1e-2);

        let full = RunConfig::from_toml("[train]\nbatch_size = \"full\"\n").unwrap();
        assert_eq!(full.train.batch_size, BatchSize::Mode(BatchMode::Full));

        let err = RunConfig::from_toml("[train]\nmax_epochs = \"many\"\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(RunConfig::from_toml("[train]\nlearning_rate = -1.0\n").is_err());
        assert!(RunConfig::from_toml("[trian]\n").is_err());
    }

    #[test]
    fn empty_dataset_rejected() {
        let m = init_model(&[1, 1], &spec(&[Direction::Increasing]), &ModelConfig::default(), 0).unwrap();
        let empty = Dataset::new(vec![], vec![], vec!["x".into()], Task::Regression).unwrap();
        assert!(matches!(
            train(m, &empty, None, &TrainConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn huge_learning_rate_diverges_with_diagnostic() {
        let m = init_model(&[1, 1], &spec(&[Direction::Free]), &ModelConfig::default(), 0).unwrap();
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 10.0 - 1.0]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1e200 * x[0]).collect();
        let data = Dataset::new(xs, ys, vec!["x".into()], Task::Regression).unwrap();
        let cfg = TrainConfig {
            learning_rate: 1e300,
            standardize_target: false,
            max_epochs: 50,
            optimizer: OptimizerKind::Sgd { momentum: 0.0 },
            ..TrainConfig::default()
        };
        let err = train(m, &data, None, &cfg).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
    }
}
