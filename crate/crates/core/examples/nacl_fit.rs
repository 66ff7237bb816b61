//! Learn the most likely naive Bayes model that conforms with a trained
//! logistic regression, with both the reduced optimizer and the GP solver.

use nacl::{fit_nacl, train_lr, BinaryDataset, FitOptions, Method, TrainOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> nacl::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 6;
    let (mut rows, mut labels) = (Vec::new(), Vec::new());
    for _ in 0..400 {
        let c = rng.random_bool(0.4) as usize;
        let p = if c == 1 { 0.7 } else { 0.35 };
        rows.push((0..n).map(|_| rng.random_bool(p) as u8).collect());
        labels.push(c);
    }
    let data = BinaryDataset::new(n, rows)?.with_labels(labels)?;
    let lr = train_lr(&data, &TrainOptions::default())?;
    println!("trained LR: {:.3?}", lr.weights()[0]);

    for method in [Method::Reduced, Method::Gp] {
        let opts = FitOptions {
            method,
            ..FitOptions::default()
        };
        let fit = fit_nacl(&lr, &data, &opts)?;
        println!("{}", fit.report.to_json());
        println!("  prior {:.4?}", fit.model.prior());
    }
    Ok(())
}
