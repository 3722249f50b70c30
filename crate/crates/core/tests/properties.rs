mod common;

use monokan::constraints::project_model;
use monokan::dataio::fit_min_max;
use monokan::{certify, falsify, Dataset, Direction, HermiteSpline, KnotGrid, Task};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = KnotGrid> {
    (2usize..10, -3.0..0.0f64, prop::collection::vec(0.05..2.0f64, 9)).prop_map(|(k, lo, gaps)| {
        let mut knots = vec![lo];
        for g in &gaps[..k - 1] {
            knots.push(knots.last().unwrap() + g);
        }
        KnotGrid::new(knots).unwrap()
    })
}

fn spline_strategy() -> impl Strategy<Value = HermiteSpline> {
    grid_strategy().prop_flat_map(|grid| {
        let k = grid.len();
        (
            Just(grid),
            prop::collection::vec(-5.0..5.0f64, k),
            prop::collection::vec(-5.0..5.0f64, k),
        )
            .prop_map(|(g, v, m)| HermiteSpline::new(g, v, m).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn spline_interpolates_knots(s in spline_strategy()) {
        for (k, &x) in s.knots().iter().enumerate() {
            prop_assert!((s.eval(x) - s.values()[k]).abs() <= 1e-12);
            prop_assert!((s.derivative(x) - s.slopes()[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn spline_is_c1_across_knots(s in spline_strategy()) {
        // |h00''| ≤ 6 and |h10''|, |h11''| ≤ 4 bound the curvature per interval
        let curvature = (0..s.len() - 1)
            .map(|k| {
                let w = s.grid().width(k);
                6.0 * (s.values()[k + 1] - s.values()[k]).abs() / (w * w)
                    + 4.0 * (s.slopes()[k].abs() + s.slopes()[k + 1].abs()) / w
            })
            .fold(0.0f64, f64::max);
        let scale = 1.0 + s.values().iter().chain(s.slopes()).fold(0.0f64, |a, v| a.max(v.abs()));
        let h = 1e-10;
        for &x in s.knots() {
            let jump = (s.eval(x - h) - s.eval(x + h)).abs();
            prop_assert!(jump <= 1e-9 * scale + 2.0 * h * scale);
            let slope_jump = (s.derivative(x - h) - s.derivative(x + h)).abs();
            prop_assert!(slope_jump <= 1e-9 * scale + 2.0 * h * curvature, "{slope_jump}");
        }
    }

    #[test]
    fn spline_extrapolates_linearly(s in spline_strategy(), off in 0.0..50.0f64) {
        let (x1, xk) = (s.grid().first(), s.grid().last());
        let k = s.len() - 1;
        let left = s.values()[0] + s.slopes()[0] * (-off);
        let right = s.values()[k] + s.slopes()[k] * off;
        prop_assert!((s.eval(x1 - off) - left).abs() <= 1e-9 * (1.0 + left.abs()));
        prop_assert!((s.eval(xk + off) - right).abs() <= 1e-9 * (1.0 + right.abs()));
        prop_assert_eq!(s.derivative(x1 - off), s.slopes()[0]);
        prop_assert_eq!(s.derivative(xk + off), s.slopes()[k]);
    }

    #[test]
    fn spline_parameter_gradient_matches_finite_differences(s in spline_strategy(), t in -0.5..1.5f64) {
        let x = s.grid().first() + t * (s.grid().last() - s.grid().first());
        let g = s.param_gradients(x);
        let h = 1e-6;
        for k in 0..s.len() {
            let mut up = s.clone();
            up.values_mut()[k] += h;
            let mut down = s.clone();
            down.values_mut()[k] -= h;
            let fd = (up.eval(x) - down.eval(x)) / (2.0 * h);
            prop_assert!((fd - g.dvalues[k]).abs() <= 1e-6, "dvalue {k}: {fd} vs {}", g.dvalues[k]);

            let mut up = s.clone();
            up.slopes_mut()[k] += h;
            let mut down = s.clone();
            down.slopes_mut()[k] -= h;
            let fd = (up.eval(x) - down.eval(x)) / (2.0 * h);
            prop_assert!((fd - g.dslopes[k]).abs() <= 1e-6, "dslope {k}: {fd} vs {}", g.dslopes[k]);
        }
    }

    #[test]
    fn projected_spline_is_monotone_everywhere(s in spline_strategy()) {
        let mut edge = monokan::Edge::new(s, 1.0, 1.0);
        monokan::apply_cons([&mut edge]);
        let s = &edge.spline;
        prop_assert!(s.is_monotone(Direction::Increasing).unwrap());
        let (lo, hi) = (s.grid().first() - 2.0, s.grid().last() + 2.0);
        let mut prev = s.eval(lo);
        for i in 1..=2000 {
            let y = s.eval(lo + (hi - lo) * i as f64 / 2000.0);
            prop_assert!(y >= prev - 1e-12, "drop {prev} -> {y}");
            prev = y;
        }
    }

    #[test]
    fn projection_is_idempotent(seed in any::<u64>()) {
        let mut m = common::random_model(seed);
        project_model(&mut m);
        let once = m.clone();
        prop_assert!(project_model(&mut m).is_identity());
        prop_assert_eq!(&m, &once);
    }

    #[test]
    fn json_roundtrip_preserves_every_bit(seed in any::<u64>()) {
        let m = common::random_model(seed);
        let back = monokan::MonoKanModel::from_json(&m.to_json().unwrap()).unwrap();
        let bits = |m: &monokan::MonoKanModel| -> Vec<u64> {
            m.layers()
                .iter()
                .flat_map(|l| {
                    l.edges()
                        .iter()
                        .flat_map(|e| {
                            let s = &e.spline;
                            s.knots().iter().chain(s.values()).chain(s.slopes()).copied().chain([e.omega_phi, e.omega_b])
                        })
                        .chain(l.biases().iter().copied())
                })
                .map(f64::to_bits)
                .collect()
        };
        prop_assert_eq!(bits(&m), bits(&back));
    }

    #[test]
    fn scaler_is_strictly_increasing(
        rows in prop::collection::vec(prop::collection::vec(-1e3..1e3f64, 3), 1..20),
        a in -1e3..1e3f64,
        b in -1e3..1e3f64,
    ) {
        let n = rows.len();
        let data = Dataset::new(rows, vec![0.0; n], vec!["a".into(), "b".into(), "c".into()], Task::Regression).unwrap();
        let scaler = fit_min_max(&data).unwrap();
        prop_assert!(scaler.scale.iter().all(|&s| s > 0.0));
        let (lo, hi) = (a.min(b), a.max(b));
        let tl = scaler.transform(&[lo, lo, lo]);
        let th = scaler.transform(&[hi, hi, hi]);
        for i in 0..3 {
            prop_assert!(tl[i] <= th[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projected_models_certify_and_resist_falsification(seed in any::<u64>()) {
        let mut m = common::random_model(seed);
        project_model(&mut m);
        let cert = certify(&m);
        prop_assert!(cert.passed(), "{:?}", cert.violations);
        let report = falsify(&m, 100_000, seed, 2.0);
        prop_assert_eq!(report.total_violations, 0, "{:?}", report.worst());
    }

    #[test]
    fn reverse_mode_matches_finite_differences(seed in any::<u64>()) {
        let m = common::random_model(seed);
        let mut rng = common::rng(seed ^ 0x5eed);
        let x: Vec<f64> = (0..m.n_inputs()).map(|_| rand::Rng::random_range(&mut rng, -1.2..1.2)).collect();
        let (_, tape) = m.forward(&x).unwrap();
        let analytic = m.backward(&tape, 1.0).unwrap().to_flat();
        let numeric = common::finite_difference_gradient(&m, &x, 1e-6);
        let err = common::max_relative_error(&analytic, &numeric);
        prop_assert!(err < 1e-5, "max relative error {err}");
    }
}

#[test]
fn extrapolation_coverage_with_wide_box() {
    for seed in 0..10 {
        let mut m = common::random_model(1000 + seed);
        project_model(&mut m);
        assert!(certify(&m).passed());
        assert_eq!(falsify(&m, 20_000, seed, 10.0).total_violations, 0);
    }
}

#[test]
fn falsify_counterexamples_are_genuine() {
    // a decertified hidden edge: d = 1, m = (3, 1) on an interval the data
    // actually reaches
    use monokan::network::{identity_spline, uniform_layer, BasisFunction, InputScaler, MonotonicitySpec};
    use monokan::MonoKanModel;
    let id = identity_spline(-1.0, 1.0, 4).unwrap();
    let l0 = uniform_layer(1, 1, &id, 1.0, 0.0, 0.0).unwrap();
    let bad = HermiteSpline::new(
        KnotGrid::new(vec![-1.0, 1.0]).unwrap(),
        vec![-1.0, 1.0],
        vec![9.0, -3.0],
    )
    .unwrap();
    let mut l1 = uniform_layer(1, 1, &id, 1.0, 0.0, 0.0).unwrap();
    l1.edge_mut(0, 0).spline = bad;
    let m = MonoKanModel::new(
        vec![l0, l1],
        MonotonicitySpec::new(vec![Direction::Increasing]),
        BasisFunction::Sigmoid,
        InputScaler::identity(1),
    )
    .unwrap();
    assert!(!certify(&m).passed());
    let report = falsify(&m, 10_000, 4, 1.0);
    assert!(report.total_violations > 0);
    let w = report.worst().unwrap();
    assert!(w.x[0] < w.x_prime[0]);
    assert!(m.predict_scaled(&w.x).unwrap() > m.predict_scaled(&w.x_prime).unwrap());
}
