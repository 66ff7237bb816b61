//! Translate between naive Bayes and logistic regression and confirm that
//! both produce the same posterior on every instance.

use nacl::{check_conformance, lr_to_nb, nb_to_lr, LogisticRegression, NaiveBayes};

fn main() -> nacl::Result<()> {
    let nb = NaiveBayes::binary(0.5, vec![0.8, 0.45], vec![0.3, 0.5])?;
    let lr = nb_to_lr(&nb)?;
    println!("NB {:?} / {:?}", nb.prior(), nb.cond());
    println!("equivalent LR weights: {:?}", lr.weights()[0]);

    let report = check_conformance(&nb, &lr, 1e-12)?;
    println!("max posterior deviation over all instances: {:e}", report.max_deviation);

    // infinitely many NB models share one LR: pick the positive-class
    // conditionals and the rest follows
    let target = LogisticRegression::binary(vec![-1.16, 2.23, -0.20])?;
    for theta in [[0.3, 0.5], [0.6, 0.9], [0.2, 0.2]] {
        let nb = lr_to_nb(&target, &theta)?;
        let back = nb_to_lr(&nb)?;
        println!(
            "theta {theta:?}: prior {:.4}, negative conditionals {:.4?}, weights {:.4?}",
            nb.prior()[1],
            nb.cond()[0],
            back.weights()[0]
        );
    }
    Ok(())
}
