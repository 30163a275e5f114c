use sscc_core::apps::{run_uncoded, sigmoid, App, AppState, Dataset, UncodedEngine};
use sscc_core::linalg::Lu;
use sscc_core::predictor::PredictorKind;
use sscc_core::sim::{run_experiment, ExperimentConfig, SpeedModel, Strategy};
use sscc_core::{DenseMatrix, DenseVector};

fn chain() -> DenseMatrix {
    // 0 -> 1 -> 2 -> {0, 1, 2}; columns are out-link distributions.
    let t = 1.0 / 3.0;
    DenseMatrix::from_rows(&[[0.0, 0.0, t], [1.0, 0.0, t], [0.0, 1.0, t]]).unwrap()
}

#[test]
fn pagerank_reaches_the_linear_solve_fixed_point() {
    let alpha = 0.85;
    let p = chain();
    let data = Dataset { a: p.clone(), y: None, x0: None };
    let got = run_uncoded(&App::PageRank { alpha }, &data, 50).unwrap().x;
    // (I - alpha P) x = (1 - alpha) / N
    let sys = DenseMatrix::from_fn(3, 3, |i, j| f64::from(u8::from(i == j)) - alpha * p.get(i, j));
    let want = Lu::factor(&sys).unwrap().solve(&[(1.0 - alpha) / 3.0; 3]);
    for (g, w) in got.as_slice().iter().zip(&want) {
        assert!((g - w).abs() <= 1e-6, "{g} vs {w}");
    }
}

#[test]
fn pagerank_stays_a_probability_vector_on_a_coded_cluster() {
    let app = App::PageRank { alpha: 0.85 };
    let data = Dataset::synthetic(&app, 90, 90, 6).unwrap();
    let mut cfg = ExperimentConfig::new(
        Strategy::S2c2General { n: 6, k: 4 },
        app.clone(),
        SpeedModel::Constant {
            speeds: vec![1.0, 2.0, 1.0, 0.5, 3.0, 1.0],
        },
    );
    cfg.predictor = PredictorKind::LastValue;
    for iterations in [1, 5, 15] {
        cfg.iterations = iterations;
        let x = run_experiment(&cfg, &data).unwrap().state.x;
        assert!((x.sum() - 1.0).abs() <= 1e-12);
        assert!(x.as_slice().iter().all(|&v| v >= 0.0));
    }
}

#[test]
fn three_hops_equal_the_cubed_laplacian() {
    let app = App::GraphFilter { hops: 3 };
    let data = Dataset::synthetic(&app, 30, 30, 2).unwrap();
    let l = &data.a;
    let x0 = data.x0.clone().unwrap();
    let cube = l.matmul(l).unwrap().matmul(l).unwrap();
    let want = sscc_core::matrix::matvec_full(&cube, &x0).unwrap();
    let mut cfg = ExperimentConfig::new(Strategy::Mds { n: 5, k: 3 }, app.clone(), SpeedModel::Constant { speeds: vec![1.0; 5] });
    cfg.iterations = 1;
    let got = run_experiment(&cfg, &data).unwrap().state.x;
    assert!(got.relative_error(&want) <= 1e-8);
}

#[test]
fn constant_signal_is_filtered_to_zero() {
    let app = App::GraphFilter { hops: 1 };
    let mut data = Dataset::synthetic(&app, 12, 12, 2).unwrap();
    data.x0 = Some(DenseVector::filled(12, 3.0));
    let x = run_uncoded(&app, &data, 1).unwrap().x;
    assert!(x.norm() <= 1e-12);
}

#[test]
fn zero_step_size_keeps_weights() {
    for app in [App::Lr { eta: 0.0 }, App::Svm { eta: 0.0, lambda: 0.3 }] {
        let data = Dataset::synthetic(&app, 20, 4, 1).unwrap();
        let state = run_uncoded(&app, &data, 3).unwrap();
        assert_eq!(state.x, DenseVector::zeros(4));
        assert_eq!(state.iter, 3);
    }
}

fn logistic_loss(data: &Dataset, w: &DenseVector) -> f64 {
    let y = data.y.as_ref().unwrap();
    let z = sscc_core::matrix::matvec_full(&data.a, w).unwrap();
    z.as_slice()
        .iter()
        .zip(y)
        .map(|(&z, &y)| {
            let p = sigmoid(y * z);
            -p.ln()
        })
        .sum::<f64>()
        / y.len() as f64
}

#[test]
fn logistic_loss_does_not_increase() {
    let app = App::Lr { eta: 0.1 };
    let data = Dataset::synthetic(&app, 80, 6, 12).unwrap();
    let mut engine = UncodedEngine::new(&app, &data);
    let mut state: AppState = app.init_state(&data);
    let mut last = logistic_loss(&data, &state.x);
    for _ in 0..30 {
        state = app.step(&state, &data, &mut engine).unwrap();
        let loss = logistic_loss(&data, &state.x);
        assert!(loss <= last + 1e-9, "{loss} > {last}");
        last = loss;
    }
}

#[test]
fn classifiers_agree_across_strategies() {
    for app in [App::Lr { eta: 0.5 }, App::Svm { eta: 0.1, lambda: 0.01 }] {
        let data = Dataset::synthetic(&app, 64, 8, 3).unwrap();
        let oracle = run_uncoded(&app, &data, 15).unwrap();
        for s in [
            Strategy::Mds { n: 6, k: 4 },
            Strategy::S2c2Basic { n: 6, k: 4 },
            Strategy::S2c2General { n: 6, k: 4 },
        ] {
            let mut cfg = ExperimentConfig::new(
                s,
                app.clone(),
                SpeedModel::Constant {
                    speeds: vec![1.0, 1.0, 0.1, 2.0, 1.0, 1.5],
                },
            );
            cfg.predictor = PredictorKind::Ar1;
            let out = run_experiment(&cfg, &data).unwrap();
            assert!(out.state.relative_diff(&oracle) <= 1e-6);
        }
    }
}
