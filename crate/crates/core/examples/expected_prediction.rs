//! Expected predictions of a logistic regression when features are missing,
//! taken with respect to a conformant naive Bayes distribution.

use nacl::{brute_force_expectation, expected_prediction, lr_to_nb, LogisticRegression, PartialObservation};

fn main() -> nacl::Result<()> {
    let lr = LogisticRegression::binary(vec![-1.16, 2.23, -0.20])?;
    let nb = lr_to_nb(&lr, &[0.3, 0.5])?;

    let mut y = PartialObservation::new();
    println!("nothing observed: {:.4}", expected_prediction(&nb, &y)?[1]);
    y.insert(0, 1);
    let closed = expected_prediction(&nb, &y)?;
    let brute = brute_force_expectation(|x| lr.predict(x).expect("instance length matches"), &nb, &y)?;
    println!("x0 = 1: closed form {:.6}, by enumeration {:.6}", closed[1], brute[1]);
    y.insert(1, 0);
    println!(
        "fully observed (1, 0): {:.6} vs LR {:.6}",
        expected_prediction(&nb, &y)?[1],
        lr.predict(&[1u8, 0])?[1]
    );
    Ok(())
}
