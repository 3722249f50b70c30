mod common;

use monokan::network::MonotonicitySpec;
use monokan::trainer::{train_with_observer, Projection};
use monokan::{certify, evaluate, init_model, train, Direction, ModelConfig, MonoKanModel, TrainConfig};

fn one_input(dir: Direction, seed: u64) -> MonoKanModel {
    init_model(
        &[1, 1],
        &MonotonicitySpec::new(vec![dir]),
        &ModelConfig::default(),
        seed,
    )
    .unwrap()
}

#[test]
fn identity_target_is_learned() {
    let data = common::synthetic_1d(100, |x| x);
    let (m, log) = train(
        one_input(Direction::Increasing, 0),
        &data,
        None,
        &TrainConfig::default(),
    )
    .unwrap();
    assert_eq!(log.epochs.len(), 200);
    let mse = evaluate(&m, &data).unwrap().mse.unwrap();
    assert!(mse < 1e-3, "mse {mse}");
    assert!(log.epochs[199].train_loss < log.epochs[0].train_loss);
    assert!(certify(&m).passed());
}

#[test]
fn negated_identity_target_is_learned() {
    let data = common::synthetic_1d(100, |x| -x);
    let (m, log) = train(
        one_input(Direction::Decreasing, 0),
        &data,
        None,
        &TrainConfig::default(),
    )
    .unwrap();
    let mse = evaluate(&m, &data).unwrap().mse.unwrap();
    assert!(mse < 1e-3, "mse {mse}");
    assert!(log.epochs[199].train_loss < log.epochs[0].train_loss);
    assert!(certify(&m).passed());
}

#[test]
fn analytic_solution_is_exactly_representable() {
    // the oracle for the identity task: identity spline, ω^φ = 1, ω^b = 0
    use monokan::network::{identity_spline, uniform_layer, BasisFunction, InputScaler};
    let data = common::synthetic_1d(100, |x| x);
    let layer = uniform_layer(1, 1, &identity_spline(-1.0, 1.0, 8).unwrap(), 1.0, 0.0, 0.0).unwrap();
    let m = MonoKanModel::new(
        vec![layer],
        MonotonicitySpec::new(vec![Direction::Increasing]),
        BasisFunction::Sigmoid,
        InputScaler::identity(1),
    )
    .unwrap();
    assert!(evaluate(&m, &data).unwrap().mse.unwrap() < 1e-28);
    assert!(certify(&m).passed());
}

#[test]
fn non_monotone_target_stays_certified_above_isotonic_bound() {
    let f = |x: f64| x.powi(3) + (5.0 * x).sin();
    let data = common::synthetic_1d(200, f);
    let config = TrainConfig {
        max_epochs: 300,
        ..TrainConfig::default()
    };
    let (m, _) = train(one_input(Direction::Increasing, 3), &data, None, &config).unwrap();
    assert!(certify(&m).passed());
    let bound = common::mse(&common::isotonic_fit(&data.targets), &data.targets);
    let mse = evaluate(&m, &data).unwrap().mse.unwrap();
    assert!(mse >= bound - 1e-9, "mse {mse} below isotonic bound {bound}");
}

#[test]
fn certified_after_every_step() {
    let data = common::synthetic_1d(64, |x| (3.0 * x).sin());
    let spec = MonotonicitySpec::new(vec![Direction::Decreasing, Direction::Free]);
    let rows: Vec<Vec<f64>> = data.features.iter().map(|x| vec![x[0], x[0] * x[0]]).collect();
    let data = monokan::Dataset::new(rows, data.targets, vec!["a".into(), "b".into()], data.task).unwrap();
    let cfg = ModelConfig {
        hidden: vec![3],
        ..ModelConfig::default()
    };
    let model = init_model(&[2, 3, 1], &spec, &cfg, 9).unwrap();
    let config = TrainConfig {
        max_epochs: 20,
        batch_size: monokan::trainer::BatchSize::Rows(8),
        learning_rate: 0.05,
        ..TrainConfig::default()
    };
    let mut checked = 0;
    train_with_observer(model, &data, None, &config, |info, m| {
        if info.step % 10 == 0 {
            let cert = certify(m);
            assert!(cert.passed(), "step {}: {:?}", info.step, cert.violations);
            checked += 1;
        }
    })
    .unwrap();
    assert_eq!(checked, 20 * 8 / 10);
}

#[test]
fn per_epoch_projection_certifies_the_result() {
    let data = common::synthetic_1d(50, |x| 2.0 * x + 0.3 * (7.0 * x).sin());
    let config = TrainConfig {
        max_epochs: 30,
        projection: Projection::PerEpoch,
        batch_size: monokan::trainer::BatchSize::Rows(10),
        ..TrainConfig::default()
    };
    let (m, log) = train(one_input(Direction::Increasing, 1), &data, None, &config).unwrap();
    assert!(certify(&m).passed());
    assert_eq!(log.epochs.len(), 30);
}

#[test]
fn training_is_bit_reproducible() {
    let data = common::synthetic_1d(300, |x| x.powi(3) + 0.5 * x);
    let spec = MonotonicitySpec::new(vec![Direction::Increasing]);
    let cfg = ModelConfig {
        hidden: vec![4],
        ..ModelConfig::default()
    };
    let config = TrainConfig {
        max_epochs: 15,
        batch_size: monokan::trainer::BatchSize::Rows(64),
        ..TrainConfig::default()
    };
    let run = || {
        let m = init_model(&[1, 4, 1], &spec, &cfg, 5).unwrap();
        train(m, &data, Some(&data), &config).unwrap()
    };
    let (m1, l1) = run();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let (m2, l2) = pool.install(run);
    assert_eq!(m1, m2);
    let losses = |l: &monokan::TrainLog| -> Vec<u64> {
        l.epochs
            .iter()
            .flat_map(|r| [r.train_loss.to_bits(), r.val_loss.unwrap().to_bits()])
            .collect()
    };
    assert_eq!(losses(&l1), losses(&l2));
}

#[test]
fn early_stopping_restores_best_validation_model() {
    let train_set = common::synthetic_1d(40, |x| x + 0.4 * (9.0 * x).sin());
    let val = common::synthetic_1d(17, |x| x);
    let config = TrainConfig {
        max_epochs: 2000,
        learning_rate: 0.05,
        early_stopping: Some(5),
        ..TrainConfig::default()
    };
    let (m, log) = train(one_input(Direction::Increasing, 2), &train_set, Some(&val), &config).unwrap();
    assert!(log.epochs.len() < 2000);
    let best = log
        .epochs
        .iter()
        .min_by(|a, b| a.val_loss.unwrap().total_cmp(&b.val_loss.unwrap()))
        .unwrap();
    let restored = evaluate(&m, &val).unwrap().loss;
    assert!((restored - best.val_loss.unwrap()).abs() <= 1e-9 * (1.0 + restored));
    assert!(certify(&m).passed());
}

#[test]
fn train_log_is_ndjson_with_one_line_per_epoch() {
    let data = common::synthetic_1d(20, |x| x);
    let config = TrainConfig {
        max_epochs: 7,
        ..TrainConfig::default()
    };
    let (_, log) = train(one_input(Direction::Increasing, 0), &data, Some(&data), &config).unwrap();
    let text = log.to_ndjson().unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    for (i, line) in lines.iter().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["epoch"], i + 1);
        assert!(v["train_loss"].is_f64());
        assert!(v["val_metric"].is_f64());
        assert!(v["projection"]["edges_touched"].is_u64());
    }
}

#[test]
fn classification_learns_a_threshold() {
    let xs: Vec<f64> = (0..80).map(|i| -1.0 + 2.0 * i as f64 / 79.0).collect();
    let data = monokan::Dataset::new(
        xs.iter().map(|&x| vec![x]).collect(),
        xs.iter().map(|&x| if x > 0.1 { 1.0 } else { 0.0 }).collect(),
        vec!["x".into()],
        monokan::Task::BinaryClassification,
    )
    .unwrap();
    let (m, _) = train(
        one_input(Direction::Increasing, 0),
        &data,
        None,
        &TrainConfig::default(),
    )
    .unwrap();
    let metrics = evaluate(&m, &data).unwrap();
    assert!(metrics.accuracy.unwrap() >= 0.95, "{metrics:?}");
    assert!(certify(&m).passed());
}
