//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sscc_bench::cmd::cmd_run;
use sscc_bench::parse_config;
use sscc_core::apps::{run_uncoded, App, AppState, Dataset};
use sscc_core::matrix::matvec_full;
use sscc_core::mds::{CodedMatrix, DecodeCache, GeneratorMatrix};
use sscc_core::poly::{direct_hessian, encode_hessian, hessian_from, poly_encode, PolyScheme};
use sscc_core::predictor::{
    ar1_one_step, evaluate_split, loss_and_grad, lstm_one_step, lstm_train, LstmModel, LstmState, LstmWeights,
    PredictorKind, TrainConfig,
};
use sscc_core::scheduler::{basic_s2c2, general_s2c2, verify_coverage, SpeedVector};
use sscc_core::sim::{
    gen_speed_trace, run_experiment, synthetic_family, CostModel, ExperimentConfig, Injection, MetricsReport,
    SpeedModel, SpeedTrace, Strategy, TraceParams,
};
use sscc_core::{DenseMatrix, DenseVector};

const MDS_REL_TOL: f64 = 1e-8;
const MDS_TIME_LIMIT: Duration = Duration::from_secs(5);
const RATIO_TOL: f64 = 1e-6;
const HEADLINE_TIME_LIMIT: Duration = Duration::from_secs(10);
const APP_REL_TOL: f64 = 1e-6;
const DEADLINE_FACTOR: f64 = 1.15;
const THETA: f64 = 0.15;
const POLY_IDENTITY_TOL: f64 = 1e-10;
const HESSIAN_REL_TOL: f64 = 1e-8;
const POLY_TIME_LIMIT: Duration = Duration::from_secs(30);
const GRAD_REL_TOL: f64 = 1e-5;
const LSTM_MAPE_LIMIT: f64 = 25.0;
const APPS_TIME_LIMIT: Duration = Duration::from_secs(30);

type Verdict = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn uniform_vector(rng: &mut ChaCha8Rng, len: usize) -> DenseVector {
    DenseVector::new((0..len).map(|_| rng.random_range(-1.0..1.0)).collect())
}

fn experiment(strategy: Strategy, app: &App, speeds: SpeedModel, predictor: PredictorKind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(strategy, app.clone(), speeds);
    cfg.predictor = predictor;
    cfg
}

fn equal(n: usize) -> SpeedModel {
    SpeedModel::Constant { speeds: vec![1.0; n] }
}

fn mds_round_trip() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut subsets = 0;
    for (n, k) in [(4, 2), (10, 7), (12, 9), (12, 6)] {
        let a = uniform_matrix(&mut rng, 120, 40);
        let x = uniform_vector(&mut rng, 40);
        let want = matvec_full(&a, &x).unwrap();
        let coded = CodedMatrix::encode(&a, GeneratorMatrix::vandermonde(n, k, None).unwrap(), 1).unwrap();
        let mut cache = DecodeCache::new();
        for set in (0..n).combinations(k) {
            let got = coded.product_from(&set, &x, &mut cache).unwrap();
            worst = worst.max(got.relative_error(&want));
            subsets += 1;
        }
    }
    let took = start.elapsed();
    ensure(
        worst <= MDS_REL_TOL && took < MDS_TIME_LIMIT,
        format!("{subsets} subsets, max rel err {worst:.2e} (tol {MDS_REL_TOL:e}), {took:.2?} (limit {MDS_TIME_LIMIT:?})"),
    )
}

fn basic_one_straggler() -> Verdict {
    let asg = basic_s2c2(&[true, true, true, false], 2).unwrap();
    let chunks = asg.chunk_counts();
    let coverage = verify_coverage(&asg).per_chunk;
    let layout_ok = asg.c == 3 && chunks == vec![2, 2, 2, 0] && coverage.iter().all(|&c| c == 2);

    // Same cluster in the simulator: 12 rows of work, so A/3 is 4 rows.
    let app = App::GraphFilter { hops: 1 };
    let data = Dataset::synthetic(&app, 12, 12, 1).unwrap();
    let speeds = SpeedModel::Constant {
        speeds: vec![1.0, 1.0, 1.0, 0.1],
    };
    let mut cfg = experiment(Strategy::S2c2Basic { n: 4, k: 2 }, &app, speeds, PredictorKind::Oracle);
    cfg.c_target = 3;
    cfg.iterations = 1;
    let rec = &run_experiment(&cfg, &data).unwrap().report.records[0];
    let rows: Vec<usize> = rec.workers.iter().map(|w| w.computed_rows).collect();
    ensure(
        layout_ok && rows == vec![4, 4, 4, 0],
        format!("chunks {chunks:?} of C={}, coverage {coverage:?}, simulated rows {rows:?} of 12", asg.c),
    )
}

fn general_example() -> Verdict {
    let asg = general_s2c2(&SpeedVector::new(vec![2, 2, 2, 2, 1]), 4).unwrap();
    let chunks = asg.chunk_counts();
    let coverage = verify_coverage(&asg).per_chunk;
    ensure(
        asg.c == 9 && chunks == vec![8, 8, 8, 8, 4] && coverage.iter().all(|&c| c == 4),
        format!("C={}, chunks {chunks:?}, coverage {coverage:?}", asg.c),
    )
}

struct Headline {
    n: usize,
    k: usize,
    mds: MetricsReport,
    s2c2: MetricsReport,
    took: Duration,
}

/// Equal speeds, oracle predictions, zero communication and decode cost,
/// `C_target = n` and a matrix whose rows fill the padding exactly.
fn headline_runs() -> Vec<Headline> {
    let app = App::PageRank { alpha: 0.85 };
    [(10, 7), (12, 9), (50, 40)]
        .into_iter()
        .map(|(n, k)| {
            let rows = k * n;
            let data = Dataset::synthetic(&app, rows, rows, 7).unwrap();
            let run = |s: Strategy| {
                let mut cfg = experiment(s, &app, equal(n), PredictorKind::Oracle);
                cfg.c_target = n;
                cfg.cost = CostModel::default();
                run_experiment(&cfg, &data).unwrap().report
            };
            let start = Instant::now();
            let mds = run(Strategy::Mds { n, k });
            let s2c2 = run(Strategy::S2c2General { n, k });
            Headline {
                n,
                k,
                mds,
                s2c2,
                took: start.elapsed(),
            }
        })
        .collect()
}

fn headline_ratios(runs: &[Headline]) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for h in runs {
        let ratio = h.mds.mean_latency / h.s2c2.mean_latency;
        let want = h.n as f64 / h.k as f64;
        ok &= (ratio - want).abs() <= RATIO_TOL && h.took < HEADLINE_TIME_LIMIT && h.s2c2.records.len() == 15;
        parts.push(format!("({},{}) {ratio:.6} vs {want:.6} in {:.2?}", h.n, h.k, h.took));
    }
    ensure(ok, format!("{} (tol {RATIO_TOL:e})", parts.join(", ")))
}

fn waste(runs: &[Headline]) -> Verdict {
    let oracle_waste: Vec<usize> = runs.iter().map(|h| h.s2c2.wasted_rows).collect();
    let mds10 = &runs[0].mds;
    let fraction = mds10.waste_fraction();
    // Three of ten workers, each a full partition, every iteration.
    let full_partitions = mds10.records.len() * 3 * (mds10.computed_rows / mds10.records.len() / 10);

    let app = App::GraphFilter { hops: 1 };
    let data = Dataset::synthetic(&app, 700, 700, 3).unwrap();
    let mut orderings = Vec::new();
    for seed in 0..10 {
        let speeds = SpeedModel::Stochastic {
            params: TraceParams {
                base: vec![1.0; 10],
                iterations: 15,
                noise: 0.2,
                change_prob: 0.3,
                min_level: 0.1,
                injections: Vec::new(),
            },
            seed,
        };
        let run = |s: Strategy| {
            let cfg = experiment(s, &app, speeds.clone(), PredictorKind::LastValue);
            run_experiment(&cfg, &data).unwrap().report
        };
        let s2c2 = run(Strategy::S2c2General { n: 10, k: 7 });
        let mds = run(Strategy::Mds { n: 10, k: 7 });
        orderings.push((s2c2.wasted_rows, mds.wasted_rows, s2c2.mispredict_rate));
    }
    let ordered = orderings.iter().all(|&(s, m, _)| s < m);
    let mispredicted = orderings.iter().all(|&(_, _, r)| r > 0.0);
    ensure(
        oracle_waste.iter().all(|&w| w == 0) && fraction == 0.3 && mds10.wasted_rows == full_partitions && ordered && mispredicted,
        format!(
            "oracle S2C2 waste {oracle_waste:?}, MDS(10,7) waste fraction {fraction} ({} rows), mispredicted (S2C2, MDS) waste {:?}",
            mds10.wasted_rows,
            orderings.iter().map(|&(s, m, _)| (s, m)).collect::<Vec<_>>()
        ),
    )
}

fn timeout_robustness() -> Verdict {
    // An unpredicted 10x slowdown on workers 2 and 5 from iteration 5.
    let app = App::Lr { eta: 0.5 };
    let data = Dataset::synthetic(&app, 700, 20, 4).unwrap();
    let speeds = SpeedModel::StragglerInjection {
        base: vec![1.0; 10],
        injections: [2, 5]
            .map(|worker| Injection {
                worker,
                factor: 10.0,
                start: 5,
                end: 15,
            })
            .to_vec(),
    };
    let cfg = experiment(Strategy::S2c2General { n: 10, k: 7 }, &app, speeds, PredictorKind::Lstm);
    let out = run_experiment(&cfg, &data).unwrap();
    let oracle = run_uncoded(&app, &data, 15).unwrap();
    let diff = out.state.relative_diff(&oracle);
    let timeouts = out.report.records.iter().filter(|r| r.timed_out).count();
    let mut deadline_err: f64 = 0.0;
    let mut deadlines = 0;
    for round in out.report.records.iter().flat_map(|r| &r.rounds) {
        if let Some(d) = round.deadline {
            let first = &round.first_arrivals;
            let want = DEADLINE_FACTOR * first.iter().sum::<f64>() / first.len() as f64;
            deadline_err = deadline_err.max(if first.len() == 7 { (d - want).abs() / want } else { f64::INFINITY });
            deadlines += 1;
        }
    }

    // Total predictor failure: every worker flips between 10 and 1 each
    // iteration, so the last value is always wrong.
    let app = App::GraphFilter { hops: 1 };
    let data = Dataset::synthetic(&app, 700, 700, 5).unwrap();
    let trace = SpeedTrace {
        speeds: (0..10)
            .map(|w| (0..15).map(|t| if (w + t) % 2 == 0 { 10.0 } else { 1.0 }).collect())
            .collect(),
    };
    let run = |s: Strategy| {
        let cfg = experiment(s, &app, SpeedModel::Trace { trace: trace.clone() }, PredictorKind::LastValue);
        run_experiment(&cfg, &data).unwrap().report
    };
    let s2c2 = run(Strategy::S2c2General { n: 10, k: 7 });
    let mds = run(Strategy::Mds { n: 10, k: 7 });
    let worst_ratio = s2c2
        .records
        .iter()
        .zip(&mds.records)
        .map(|(s, m)| s.latency.total / m.latency.total)
        .fold(0.0_f64, f64::max);
    let failed = s2c2.mispredict_rate;
    ensure(
        diff <= APP_REL_TOL && timeouts > 0 && deadlines > 0 && deadline_err <= 1e-12 && worst_ratio <= 2.0 + THETA && failed == 1.0,
        format!(
            "injection: rel diff {diff:.2e} (tol {APP_REL_TOL:e}), {timeouts} timed-out iterations, {deadlines} deadlines within {deadline_err:.1e} of {DEADLINE_FACTOR} x mean first-7; \
             predictor failure (mispredict rate {failed}): max S2C2/MDS latency {worst_ratio:.4} (bound {})",
            2.0 + THETA
        ),
    )
}

fn polynomial_codes() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let scheme = PolyScheme::integer(5, 2, 2).unwrap();
    let mut identity_err: f64 = 0.0;
    for _ in 0..20 {
        let a: Vec<DenseMatrix> = (0..2).map(|_| uniform_matrix(&mut rng, 3, 4)).collect();
        let b: Vec<DenseMatrix> = (0..2).map(|_| uniform_matrix(&mut rng, 4, 2)).collect();
        let pairs = poly_encode(&a, &b, &scheme).unwrap();
        let prod = |l: &DenseMatrix, r: &DenseMatrix| l.matmul(r).unwrap();
        for (i, pair) in pairs.iter().enumerate() {
            let p = i as f64;
            let mut want = prod(&a[0], &b[0]);
            want.add_scaled(p, &prod(&a[1], &b[0])).unwrap();
            want.add_scaled(p * p, &prod(&a[0], &b[1])).unwrap();
            want.add_scaled(p * p * p, &prod(&a[1], &b[1])).unwrap();
            let got = pair.left_tilde.matmul(&pair.right_tilde).unwrap();
            identity_err = identity_err.max(got.max_abs_diff(&want) / want.frobenius_norm().max(1.0));
        }
    }

    let a = uniform_matrix(&mut rng, 6, 6);
    let x = DenseVector::new((0..6).map(|_| rng.random_range(0.1..1.0)).collect());
    let scheme = PolyScheme::new(12, 3, 3).unwrap();
    let pairs = encode_hessian(&a, &scheme).unwrap();
    let want = direct_hessian(&a, &x).unwrap();
    let mut hessian_err: f64 = 0.0;
    let mut subsets = 0;
    for set in (0..12).combinations(9) {
        let h = hessian_from(&a, &scheme, &pairs, &set, &x).unwrap();
        hessian_err = hessian_err.max(h.max_abs_diff(&want) / want.frobenius_norm());
        subsets += 1;
    }
    let took = start.elapsed();
    ensure(
        identity_err <= POLY_IDENTITY_TOL && hessian_err <= HESSIAN_REL_TOL && subsets == 220 && took < POLY_TIME_LIMIT,
        format!(
            "product identity err {identity_err:.2e} (tol {POLY_IDENTITY_TOL:e}), Hessian over {subsets} 9-subsets err {hessian_err:.2e} (tol {HESSIAN_REL_TOL:e}), {took:.2?}"
        ),
    )
}

fn predictor() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for seed in 0..4 {
        let model = LstmModel::random(100 + seed, 1.0);
        let inputs: Vec<f64> = (0..6).map(|_| rng.random_range(0.2..1.0)).collect();
        let targets: Vec<f64> = (0..6).map(|_| rng.random_range(0.2..1.0)).collect();
        let start = LstmState::default();
        let (_, grad, _) = loss_and_grad(&model.weights, &start, &inputs, &targets);
        let g = grad.to_flat();
        let p = model.weights.to_flat();
        let h = 1e-3;
        let loss_at = |i: usize, delta: f64| {
            let mut q = p.clone();
            q[i] += delta;
            loss_and_grad(&LstmWeights::from_flat(&q), &start, &inputs, &targets).0
        };
        for i in 0..p.len() {
            let numeric =
                (-loss_at(i, 2.0 * h) + 8.0 * loss_at(i, h) - 8.0 * loss_at(i, -h) + loss_at(i, -2.0 * h)) / (12.0 * h);
            let denom = numeric.abs().max(g[i].abs()).max(1e-7);
            worst = worst.max((numeric - g[i]).abs() / denom);
        }
    }

    let traces = gen_speed_trace(&synthetic_family(300), 2024).unwrap().speeds;
    let cfg = TrainConfig::default();
    let model = lstm_train(&traces, &cfg).unwrap();
    let (_, lstm) = evaluate_split(&traces, &cfg, |s| lstm_one_step(&model, s)).unwrap();
    let (_, ar1) = evaluate_split(&traces, &cfg, |s| ar1_one_step(s, &cfg).unwrap()).unwrap();
    ensure(
        worst <= GRAD_REL_TOL && lstm <= ar1 && lstm <= LSTM_MAPE_LIMIT,
        format!(
            "gradient rel err {worst:.2e} (tol {GRAD_REL_TOL:e}); test MAPE LSTM {lstm:.3}% vs AR(1) {ar1:.3}% (limit {LSTM_MAPE_LIMIT}%)"
        ),
    )
}

fn app_equivalence() -> Verdict {
    let start = Instant::now();
    let speeds = SpeedModel::Stochastic {
        params: TraceParams {
            base: vec![1.0, 1.5, 0.8, 2.0, 1.0, 0.1, 1.2, 1.0],
            iterations: 15,
            noise: 0.2,
            change_prob: 0.1,
            min_level: 0.2,
            injections: Vec::new(),
        },
        seed: 9,
    };
    let apps = [
        App::Lr { eta: 0.5 },
        App::Svm { eta: 0.1, lambda: 0.01 },
        App::PageRank { alpha: 0.85 },
        App::GraphFilter { hops: 2 },
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for app in &apps {
        let (rows, cols) = match app {
            App::Lr { .. } | App::Svm { .. } => (200, 16),
            _ => (120, 120),
        };
        let data = Dataset::synthetic(app, rows, cols, 21).unwrap();
        let mut states: Vec<AppState> = vec![run_uncoded(app, &data, 15).unwrap()];
        for s in [
            Strategy::Mds { n: 8, k: 5 },
            Strategy::S2c2Basic { n: 8, k: 5 },
            Strategy::S2c2General { n: 8, k: 5 },
        ] {
            let cfg = experiment(s, app, speeds.clone(), PredictorKind::Lstm);
            states.push(run_experiment(&cfg, &data).unwrap().state);
        }
        let app_worst = states
            .iter()
            .tuple_combinations()
            .map(|(a, b)| a.relative_diff(b))
            .fold(0.0_f64, f64::max);
        worst = worst.max(app_worst);
        parts.push(format!("{} {app_worst:.1e}", app.name()));
    }
    let took = start.elapsed();
    ensure(
        worst <= APP_REL_TOL && took < APPS_TIME_LIMIT,
        format!("max pairwise rel diff: {} (tol {APP_REL_TOL:e}), {took:.2?}", parts.join(", ")),
    )
}

fn determinism() -> Verdict {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let tmp = tempfile::tempdir().unwrap();
    let cfg = parse_config(&golden.join("s2c2_general.json")).unwrap();
    let bytes = |dir: &Path| {
        let files = cmd_run(&cfg, dir, true).unwrap();
        [files.metrics, files.waste, files.events.unwrap()].map(|p| std::fs::read(p).unwrap())
    };
    let twice = bytes(&tmp.path().join("a")) == bytes(&tmp.path().join("b"));

    let mut kinds = Vec::new();
    let mut mismatched = Vec::new();
    for entry in std::fs::read_dir(&golden).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "json") {
            continue;
        }
        let cfg = parse_config(&path).unwrap();
        kinds.push(cfg.scheme.name().trim_end_matches("_s2c2").to_string());
        let files = cmd_run(&cfg, &tmp.path().join("golden"), false).unwrap();
        for file in [files.metrics, files.waste] {
            let name = file.file_name().unwrap().to_owned();
            if std::fs::read(&file).unwrap() != std::fs::read(golden.join("expected").join(&name)).unwrap() {
                mismatched.push(name.to_string_lossy().into_owned());
            }
        }
    }
    kinds.sort();
    let all_kinds = [
        "mds",
        "over_decomposition",
        "poly",
        "replication",
        "s2c2_basic",
        "s2c2_general",
        "uncoded",
    ];
    ensure(
        twice && mismatched.is_empty() && kinds == all_kinds,
        format!("repeat run byte-identical: {twice}; golden kinds {kinds:?}, mismatched {mismatched:?}"),
    )
}

fn main() -> ExitCode {
    let headline = catch_unwind(headline_runs);
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("MDS decodes from every k-subset", Box::new(mds_round_trip)),
        ("basic S2C2 with one straggler", Box::new(basic_one_straggler)),
        ("general S2C2 on u = {2,2,2,2,1}", Box::new(general_example)),
        (
            "headline latency ratios",
            Box::new(|| headline.as_ref().map_err(|_| "headline runs panicked".to_string()).and_then(|h| headline_ratios(h))),
        ),
        (
            "wasted computation",
            Box::new(|| headline.as_ref().map_err(|_| "headline runs panicked".to_string()).and_then(|h| waste(h))),
        ),
        ("timeout and robustness", Box::new(timeout_robustness)),
        ("polynomial codes", Box::new(polynomial_codes)),
        ("speed predictor", Box::new(predictor)),
        ("application equivalence", Box::new(app_equivalence)),
        ("end-to-end determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match verdict {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
