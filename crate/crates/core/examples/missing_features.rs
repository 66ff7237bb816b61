//! Benchmark conformant expected predictions against imputation when test
//! features go missing completely at random.

use nacl::{
    fit_imputer, fit_nacl, run_experiment, train_lr, BinaryDataset, EvalMethod, ExperimentConfig, FitOptions,
    ImputerKind, Metric, Predictor, TrainOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample(rng: &mut ChaCha8Rng, rows: usize) -> nacl::Result<BinaryDataset> {
    let means = [0.8, 0.3, 0.6, 0.55, 0.2, 0.7, 0.45, 0.65];
    let (mut data, mut labels) = (Vec::new(), Vec::new());
    for _ in 0..rows {
        let c = rng.random_bool(0.5) as usize;
        data.push(
            means
                .iter()
                .map(|&m| rng.random_bool(if c == 1 { m } else { 1.0 - m }) as u8)
                .collect(),
        );
        labels.push(c);
    }
    BinaryDataset::new(means.len(), data)?.with_labels(labels)
}

fn main() -> nacl::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let train = sample(&mut rng, 600)?;
    let test = sample(&mut rng, 200)?;
    let lr = train_lr(&train, &TrainOptions::default())?;
    let nb = fit_nacl(&lr, &train, &FitOptions::default())?.model;

    let mut methods = vec![EvalMethod::new("nacl", Predictor::Conformant(nb))];
    for kind in [ImputerKind::Mean, ImputerKind::Median, ImputerKind::Min, ImputerKind::Max] {
        methods.push(EvalMethod::new(kind.name(), Predictor::Impute(fit_imputer(&train, kind)?)));
    }
    let config = ExperimentConfig {
        lr,
        methods,
        rates: vec![0.0, 0.2, 0.4, 0.6, 0.8],
        repetitions: 5,
        seed: 0,
        metrics: vec![Metric::CrossEntropy, Metric::Accuracy],
        threads: None,
    };
    let report = run_experiment(&config, &test)?;
    print!("{}", report.summary_table(Metric::CrossEntropy));
    print!("{}", report.summary_table(Metric::Accuracy));
    Ok(())
}
