//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion, and exits non-zero if any failed.

mod common;

use std::process::Command;
use std::time::Instant;

use common::*;
use nacl::baselines::{fit_imputer, impute, ImputerKind};
use nacl::conformance::{check_conformance, lr_to_nb, nb_to_lr};
use nacl::evaluation::{entropy, run_experiment, EvalMethod, ExperimentConfig, Metric, Predictor};
use nacl::expectation::{brute_force_expectation, expected_prediction, linear_expected_prediction};
use nacl::explain::{sufficient_explanation, ExplanationStatus, Search};
use nacl::learn::{fit_nacl, log_likelihood, AlphaPolicy, FitOptions, Method};
use nacl::math::sigmoid;
use nacl::{BinaryDataset, LogisticRegression, ModelDocument, NaiveBayes, PartialObservation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn near(a: f64, b: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((a - b).abs() <= tol, || format!("{what}: {a} vs {b} (tol {tol})"))
}

fn toy_model_reproduction() -> Check {
    let lr = nb_to_lr(&p1()).map_err(|e| e.to_string())?;
    for (got, want) in lr.weights()[0].iter().zip([-1.16, 2.23, -0.20]) {
        near(*got, want, 0.005, "P1 weight")?;
    }
    let fig = toy_lr();
    for (x, want) in [([1u8, 1], 0.70), ([1, 0], 0.74), ([0, 1], 0.20), ([0, 0], 0.24)] {
        near(fig.predict(&x).unwrap()[1], want, 0.005, &format!("F{x:?}"))?;
    }
    let none = PartialObservation::from_total(&[0, 0]);
    near(p1().marginal(&none).unwrap(), 0.23, 0.005, "P1(x1=0,x2=0)")?;
    near(p2().marginal(&none).unwrap(), 0.06, 0.005, "P2(x1=0,x2=0)")?;
    let derived = lr_to_nb(&fig, &[0.6, 0.9]).unwrap();
    let listed = p2();
    near(derived.prior()[1], listed.prior()[1], 0.005, "P2 prior")?;
    for k in 0..2 {
        for i in 0..2 {
            near(derived.cond()[k][i], listed.cond()[k][i], 0.005, &format!("P2 cond[{k}][{i}]"))?;
        }
    }
    Ok("weights, LR table, marginals and P2 parameters within 0.005".into())
}

fn relative(lr: &LogisticRegression) -> Vec<Vec<f64>> {
    let w = lr.class_weights();
    w.iter()
        .map(|row| row.iter().zip(&w[0]).map(|(a, b)| a - b).collect())
        .collect()
}

fn translation_round_trips() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_w: f64 = 0.0;
    let mut worst_c: f64 = 0.0;
    for trial in 0..1000 {
        let n = rng.random_range(1..=10);
        let k = if rng.random_bool(0.5) { 2 } else { 3 };
        let lr = random_lr(&mut rng, n, k, 3.0);
        let theta: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.95)).collect();
        let nb = lr_to_nb(&lr, &theta).map_err(|e| format!("trial {trial}: {e}"))?;
        let back = nb_to_lr(&nb).map_err(|e| format!("trial {trial}: {e}"))?;
        for (a, b) in relative(&lr).iter().flatten().zip(relative(&back).iter().flatten()) {
            worst_w = worst_w.max((a - b).abs());
        }
        let report = check_conformance(&nb, &lr, 1e-9).unwrap();
        worst_c = worst_c.max(report.max_deviation);
    }
    ensure(worst_w <= 1e-9, || format!("weight error {worst_w:e}"))?;
    ensure(worst_c <= 1e-9, || format!("conformance deviation {worst_c:e}"))?;
    Ok(format!("1000 pairs, max weight error {worst_w:.1e}, max deviation {worst_c:.1e}"))
}

fn expectation_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.random_range(1..=12);
        let k = rng.random_range(2..=4);
        let nb = random_nb(&mut rng, n, k, 0.02);
        let keep = rng.random_range(0.0..1.0);
        let y = random_partial(&mut rng, n, keep);
        let fast = expected_prediction(&nb, &y).unwrap();
        let slow = brute_force_expectation(|x| nb.posterior(x).unwrap(), &nb, &y).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-10, || format!("max difference {worst:e}"))?;
    Ok(format!("500 models, max difference {worst:.1e}"))
}

fn nacl_dataset<R: Rng>(rng: &mut R, n: usize, k: usize) -> BinaryDataset {
    let truth = random_nb(rng, n, k, 0.1);
    let rows = rng.random_range(30..200);
    let d = sample_nb(rng, &truth, rows);
    BinaryDataset::new(n, d.rows().to_vec()).unwrap()
}

fn fit(lr: &LogisticRegression, d: &BinaryDataset, method: Method, alpha: AlphaPolicy) -> Result<nacl::NaclFit, String> {
    let opts = FitOptions {
        method,
        alpha_policy: alpha,
        ..FitOptions::default()
    };
    fit_nacl(lr, d, &opts).map_err(|e| format!("{method:?}: {e}"))
}

fn grid(n: usize, step: f64) -> Vec<Vec<f64>> {
    let ticks: Vec<f64> = (1..)
        .map(|j| j as f64 * step)
        .take_while(|&t| t < 1.0 - 1e-9)
        .collect();
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                ticks.iter().map(move |&t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    out
}

fn nacl_correctness() -> Check {
    // (a) one feature, LR with zero weights: theta is the empirical frequency
    let d = BinaryDataset::new(1, vec![vec![1], vec![1], vec![1], vec![0]]).unwrap();
    let zero = LogisticRegression::zeros(1, 2).unwrap();
    for method in [Method::Gp, Method::Reduced] {
        let m = fit(&zero, &d, method, AlphaPolicy::LrPosterior)?.model;
        near(m.cond()[0][0], 0.75, 1e-4, "analytic theta")?;
        near(m.cond()[1][0], 0.75, 1e-4, "analytic theta")?;
    }

    // (b) no grid point in the conformant family beats the fit
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut grid_gap = f64::NEG_INFINITY;
    for trial in 0..6 {
        let n = 1 + trial % 3;
        let k = if trial < 3 { 2 } else { 3 };
        let lr = random_lr(&mut rng, n, k, 1.0);
        let d = nacl_dataset(&mut rng, n, k);
        let fitted = fit(&lr, &d, Method::Reduced, AlphaPolicy::LrPosterior)?;
        for theta in grid(n, 0.02) {
            let ll = log_likelihood(&lr_to_nb(&lr, &theta).unwrap(), &d).unwrap();
            grid_gap = grid_gap.max(ll - fitted.report.log_likelihood);
        }
    }
    ensure(grid_gap <= 1e-6, || format!("a grid point is better by {grid_gap:e}"))?;

    // (c) GP and reduced agree, (d) both conform, (e) alpha does not matter
    let mut agree: f64 = 0.0;
    let mut conform: f64 = 0.0;
    let mut alpha_gap: f64 = 0.0;
    for trial in 0..100 {
        let n = rng.random_range(1..=8);
        let k = if rng.random_bool(0.5) { 2 } else { 3 };
        let lr = random_lr(&mut rng, n, k, 1.0);
        let d = nacl_dataset(&mut rng, n, k);
        let gp = fit(&lr, &d, Method::Gp, AlphaPolicy::LrPosterior).map_err(|e| format!("trial {trial}: {e}"))?;
        let red = fit(&lr, &d, Method::Reduced, AlphaPolicy::LrPosterior)?;
        agree = agree.max((gp.report.log_likelihood - red.report.log_likelihood).abs());
        conform = conform
            .max(gp.report.conformance_max_dev)
            .max(red.report.conformance_max_dev);
        if trial % 4 == 0 {
            let uni = fit(&lr, &d, Method::Gp, AlphaPolicy::Uniform)?;
            alpha_gap = alpha_gap.max((uni.report.log_likelihood - gp.report.log_likelihood).abs());
        }
    }
    ensure(agree <= 1e-4, || format!("GP and reduced differ by {agree:e}"))?;
    ensure(conform <= 1e-6, || format!("conformance deviation {conform:e}"))?;
    ensure(alpha_gap <= 1e-5, || format!("alpha policies differ by {alpha_gap:e}"))?;
    Ok(format!(
        "grid gap {grid_gap:.1e}, GP/reduced {agree:.1e}, conformance {conform:.1e}, alpha {alpha_gap:.1e}"
    ))
}

fn imputation_examples() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=8);
        let w: Vec<f64> = (0..=n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let means: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let y = random_partial(&mut rng, n, 0.5);
        let linear = linear_expected_prediction(&w, &means, &y).unwrap();
        let indep = NaiveBayes::independent(&means.iter().map(|m| m.clamp(1e-9, 1.0 - 1e-9)).collect::<Vec<_>>()).unwrap();
        let score = |x: &[u8]| vec![w[0] + x.iter().zip(&w[1..]).map(|(&b, wi)| b as f64 * wi).sum::<f64>()];
        let brute = brute_force_expectation(score, &indep, &y).unwrap()[0];
        let imputer = nacl::Imputer::new(ImputerKind::Mean, means.clone()).unwrap();
        let filled = impute(&imputer, &y, n).unwrap();
        let lr = LogisticRegression::binary(w.clone()).unwrap();
        let imputed_score = lr.scores(&filled).unwrap()[1];
        worst = worst.max((linear - imputed_score).abs()).max((linear - brute).abs());
    }
    ensure(worst <= 1e-10, || format!("linear identity off by {worst:e}"))?;

    let mut strict = 0;
    for _ in 0..50 {
        let n = rng.random_range(2..=8);
        let missing = rng.random_range(1..=n);
        let mut w: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.5..1.5)).collect();
        // every missing weight non-zero, and a bias that keeps every completion positive
        for wi in &mut w[1..=missing] {
            if wi.abs() < 0.2 {
                *wi = 0.5;
            }
        }
        let negative_mass: f64 = w[1..].iter().filter(|v| **v < 0.0).sum();
        w[0] = -negative_mass + rng.random_range(0.1..1.0);
        let means: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..0.9)).collect();
        let y: PartialObservation = (missing..n).map(|i| (i, rng.random_bool(0.5) as u8)).collect();
        let nb = NaiveBayes::independent(&means).unwrap();
        let lr = LogisticRegression::binary(w.clone()).unwrap();
        let expected = brute_force_expectation(|x| lr.predict(x).unwrap(), &nb, &y).unwrap()[1];
        let linear = linear_expected_prediction(&w, &means, &y).unwrap();
        if sigmoid(linear) > expected {
            strict += 1;
        }
    }
    ensure(strict == 50, || format!("strict inequality on {strict}/50 instances"))?;
    Ok(format!("linear identity within {worst:.1e}; Jensen strict on 50/50"))
}

fn end_to_end_ordering() -> Check {
    let rates = [0.0, 0.2, 0.4, 0.6, 0.8];
    let mut nacl_ce = [0.0; 5];
    let mut mean_ce = [0.0; 5];
    let seeds = 20;
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let truth = random_nb(&mut rng, 8, 2, 0.1);
        let train = sample_nb(&mut rng, &truth, 2000);
        let test = sample_nb(&mut rng, &truth, 500);
        let lr = nacl::train_lr(&train, &nacl::TrainOptions::default()).map_err(|e| e.to_string())?;
        let nb = fit_nacl(&lr, &train, &FitOptions::default()).map_err(|e| e.to_string())?.model;
        let methods = vec![
            EvalMethod::new("nacl", Predictor::Conformant(nb)),
            EvalMethod::new("mean", Predictor::Impute(fit_imputer(&train, ImputerKind::Mean).unwrap())),
            EvalMethod::new("median", Predictor::Impute(fit_imputer(&train, ImputerKind::Median).unwrap())),
            EvalMethod::new("min", Predictor::Impute(fit_imputer(&train, ImputerKind::Min).unwrap())),
            EvalMethod::new("max", Predictor::Impute(fit_imputer(&train, ImputerKind::Max).unwrap())),
        ];
        let config = ExperimentConfig {
            lr: lr.clone(),
            methods,
            rates: rates.to_vec(),
            repetitions: 1,
            seed,
            metrics: vec![Metric::CrossEntropy, Metric::Accuracy],
            threads: None,
        };
        let report = run_experiment(&config, &test).map_err(|e| e.to_string())?;
        let bare = test
            .rows()
            .iter()
            .map(|x| entropy(&lr.predict(x).unwrap()))
            .sum::<f64>()
            / test.len() as f64;
        let bare_acc = test
            .rows()
            .iter()
            .zip(test.labels().unwrap())
            .filter(|(x, &l)| nacl::math::argmax(&lr.predict(x).unwrap()) == l)
            .count() as f64
            / test.len() as f64;
        for name in ["nacl", "mean", "median", "min", "max"] {
            let ce = report.get(name, 0.0, Metric::CrossEntropy).unwrap().mean;
            let acc = report.get(name, 0.0, Metric::Accuracy).unwrap().mean;
            ensure(ce == bare && acc == bare_acc, || {
                format!("seed {seed}: {name} at rate 0 gives {ce}/{acc}, bare LR {bare}/{bare_acc}")
            })?;
        }
        for (j, &rate) in rates.iter().enumerate() {
            nacl_ce[j] += report.get("nacl", rate, Metric::CrossEntropy).unwrap().mean / seeds as f64;
            mean_ce[j] += report.get("mean", rate, Metric::CrossEntropy).unwrap().mean / seeds as f64;
        }
    }
    for j in 1..rates.len() {
        ensure(nacl_ce[j] <= mean_ce[j], || {
            format!("rate {}: NaCL {} > mean imputation {}", rates[j], nacl_ce[j], mean_ce[j])
        })?;
    }
    let cells: Vec<String> = (1..rates.len())
        .map(|j| format!("{}: {:.4}<={:.4}", rates[j], nacl_ce[j], mean_ce[j]))
        .collect();
    Ok(format!("rate 0 exact; {}", cells.join(", ")))
}

fn satisfies(nb: &NaiveBayes, x: &[u8], opposing: &[usize], e: &[usize], f: f64) -> bool {
    let y: PartialObservation = opposing.iter().chain(e).map(|&i| (i, x[i])).collect();
    let p = expected_prediction(nb, &y).unwrap()[1];
    (p - 0.5).signum() == (f - 0.5).signum() && (p == 0.5) == (f == 0.5)
}

fn explanation_contract() -> Check {
    let nb = p1();
    let lr = nb_to_lr(&nb).unwrap();
    for search in [Search::Greedy, Search::Exact { cap: 3 }] {
        let ex = sufficient_explanation(&lr, &nb, &[1, 0], search).unwrap();
        ensure(ex.features == vec![0], || format!("toy explanation {:?}", ex.features))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut found = 0;
    let mut agreements = 0;
    for trial in 0..200 {
        let n = if trial % 2 == 0 { 6 } else { rng.random_range(1..=10) };
        let nb = random_nb(&mut rng, n, 2, 0.05);
        let lr = nb_to_lr(&nb).unwrap();
        let x = random_bits(&mut rng, n);
        let f = lr.predict(&x).unwrap()[1];
        let exact = sufficient_explanation(&lr, &nb, &x, Search::Exact { cap: n }).unwrap();
        let greedy = sufficient_explanation(&lr, &nb, &x, Search::Greedy).unwrap();
        let part = &exact.partition;
        for ex in [&exact, &greedy] {
            if ex.status == ExplanationStatus::Found {
                found += 1;
                ensure(satisfies(&nb, &x, &part.opposing, &ex.features, f), || {
                    format!("trial {trial}: {:?} violates the sign condition", ex.features)
                })?;
                ensure(ex.features.iter().all(|i| part.support.contains(i)), || {
                    format!("trial {trial}: explanation leaves the support set")
                })?;
            }
        }
        if exact.status == ExplanationStatus::Found {
            let s = &part.support;
            for mask in 0u32..(1 << s.len()) {
                if (mask.count_ones() as usize) < exact.features.len() {
                    let subset: Vec<usize> = (0..s.len()).filter(|j| mask >> j & 1 == 1).map(|j| s[j]).collect();
                    ensure(!satisfies(&nb, &x, &part.opposing, &subset, f), || {
                        format!("trial {trial}: {subset:?} is smaller than {:?}", exact.features)
                    })?;
                }
            }
            if n == 6 && exact.features.len() <= 2 {
                ensure(greedy.features.len() == exact.features.len(), || {
                    format!("trial {trial}: greedy {:?} vs exact {:?}", greedy.features, exact.features)
                })?;
                agreements += 1;
            }
        }
    }
    Ok(format!("{found} explanations checked, exact minimal, {agreements} greedy/exact agreements"))
}

fn cli_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let truth = random_nb(&mut rng, 6, 2, 0.1);
    let train = sample_nb(&mut rng, &truth, 300);
    let test = sample_nb(&mut rng, &truth, 120);
    let lr = nacl::train_lr(&train, &nacl::TrainOptions::default()).unwrap();
    let p = |name: &str| dir.path().join(name);
    ModelDocument::Lr(lr).save(p("lr.json")).unwrap();
    nacl::ingest::write_dataset(&train, p("train.csv")).unwrap();
    nacl::ingest::write_dataset(&test, p("test.csv")).unwrap();
    let run = |threads: &str, out: &str| -> Result<Vec<u8>, String> {
        let status = Command::new(env!("CARGO_BIN_EXE_nacl"))
            .env("NACL_THREADS", threads)
            .args(["eval", "--lr"])
            .arg(p("lr.json"))
            .arg("--train")
            .arg(p("train.csv"))
            .arg("--test")
            .arg(p("test.csv"))
            .args(["--rates", "0,0.3,0.7", "--reps", "3", "--seed", "11"])
            .args(["--methods", "nacl,mean,median,nb"])
            .arg("--csv-out")
            .arg(p(out))
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("eval exited with {status}"))?;
        std::fs::read(p(out)).map_err(|e| e.to_string())
    };
    let reference = run("1", "r1.csv")?;
    for (threads, out) in [("1", "r1b.csv"), ("2", "r2.csv"), ("4", "r4.csv"), ("7", "r7.csv")] {
        let other = run(threads, out)?;
        ensure(other == reference, || format!("NACL_THREADS={threads} changed the report"))?;
    }
    Ok(format!("{} identical report bytes across 1/2/4/7 threads", reference.len()))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 8] = [
        ("toy model reproduction", toy_model_reproduction),
        ("translation round trips", translation_round_trips),
        ("expected-prediction identity", expectation_identity),
        ("NaCL correctness", nacl_correctness),
        ("imputation examples", imputation_examples),
        ("end-to-end ordering", end_to_end_ordering),
        ("explanation contract", explanation_contract),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 8 acceptance criteria passed");
}
