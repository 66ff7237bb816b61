mod common;

use nacl::gp::{to_log_convex, VarId};
use nacl::{
    expected_prediction, lr_to_nb, nb_to_lr, partition_support, BinaryDataset, GeometricProgram, LogisticRegression,
    Monomial, NaiveBayes, PartialObservation, Posynomial,
};
use proptest::prelude::*;

fn lr_strategy(max_n: usize) -> impl Strategy<Value = LogisticRegression> {
    (1..=max_n, 2usize..=4).prop_flat_map(|(n, k)| {
        let rows = if k == 2 { 1 } else { k };
        prop::collection::vec(prop::collection::vec(-3.0f64..3.0, n + 1), rows)
            .prop_map(move |w| LogisticRegression::new(k, w).unwrap())
    })
}

fn nb_strategy(max_n: usize) -> impl Strategy<Value = NaiveBayes> {
    (1..=max_n, 2usize..=4).prop_flat_map(|(n, k)| {
        (
            prop::collection::vec(0.05f64..1.0, k),
            prop::collection::vec(prop::collection::vec(0.02f64..0.98, n), k),
        )
            .prop_map(|(raw, cond)| {
                let total: f64 = raw.iter().sum();
                NaiveBayes::new(raw.iter().map(|p| p / total).collect(), cond).unwrap()
            })
    })
}

fn partial(n: usize, mask: &[Option<bool>]) -> PartialObservation {
    let mut y = PartialObservation::new();
    for (i, m) in mask.iter().take(n).enumerate() {
        if let Some(b) = m {
            y.insert(i, *b as u8);
        }
    }
    y
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn translated_lr_reproduces_weights(lr in lr_strategy(6), t in 0.05f64..0.95) {
        let theta = vec![t; lr.num_features()];
        let nb = lr_to_nb(&lr, &theta).unwrap();
        let back = nb_to_lr(&nb).unwrap();
        // weights are compared relative to class 0, where the multiclass gauge is fixed
        let (w, v) = (lr.class_weights(), back.class_weights());
        for k in 1..w.len() {
            for i in 0..w[k].len() {
                let (a, b) = (w[k][i] - w[0][i], v[k][i] - v[0][i]);
                prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn posterior_of_nb_equals_its_lr(nb in nb_strategy(6), bits in prop::collection::vec(any::<bool>(), 6)) {
        let lr = nb_to_lr(&nb).unwrap();
        let x: Vec<u8> = bits.iter().take(nb.num_features()).map(|&b| b as u8).collect();
        let p = nb.posterior(&x).unwrap();
        let q = lr.predict(&x).unwrap();
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn expected_prediction_is_a_distribution(
        nb in nb_strategy(7),
        mask in prop::collection::vec(prop::option::of(any::<bool>()), 7),
    ) {
        let y = partial(nb.num_features(), &mask);
        let p = expected_prediction(&nb, &y).unwrap();
        prop_assert_eq!(p.len(), nb.num_classes());
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginalizing_one_feature_averages_expectations(
        nb in nb_strategy(5),
        mask in prop::collection::vec(prop::option::of(any::<bool>()), 5),
    ) {
        let y = partial(nb.num_features(), &mask);
        let Some(&free) = y.missing(nb.num_features()).first() else { return Ok(()); };
        let marginal = nb.marginal(&y).unwrap();
        let mut mixed = vec![0.0; nb.num_classes()];
        for bit in [0u8, 1] {
            let z = y.with(free, bit);
            let weight = nb.marginal(&z).unwrap() / marginal;
            for (m, p) in mixed.iter_mut().zip(expected_prediction(&nb, &z).unwrap()) {
                *m += weight * p;
            }
        }
        for (a, b) in mixed.iter().zip(expected_prediction(&nb, &y).unwrap()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn partition_is_disjoint_and_complete(
        w in prop::collection::vec(-2.0f64..2.0, 6),
        cond in prop::collection::vec(0.05f64..0.95, 5),
        bits in prop::collection::vec(any::<bool>(), 5),
    ) {
        let lr = LogisticRegression::binary(w).unwrap();
        let nb = lr_to_nb(&lr, &cond).unwrap();
        let x: Vec<u8> = bits.iter().map(|&b| b as u8).collect();
        let part = partition_support(&lr, &nb, &x).unwrap();
        let mut all: Vec<usize> = part.support.iter().chain(&part.opposing).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..5).collect::<Vec<_>>());
    }

    #[test]
    fn log_sum_exp_gradient_matches_finite_differences(
        coeffs in prop::collection::vec((0.1f64..5.0, -2.0f64..2.0, -2.0f64..2.0), 1..5),
        u in prop::collection::vec(-1.5f64..1.5, 2),
    ) {
        let mut gp = GeometricProgram::new();
        let a = gp.add_variable("a");
        let b = gp.add_variable("b");
        let terms: Vec<Monomial> = coeffs
            .iter()
            .map(|&(c, ea, eb)| Monomial::new(c).unwrap().pow(a, ea).pow(b, eb))
            .collect();
        gp.set_objective(Posynomial::new(terms).unwrap());
        let lse = to_log_convex(&gp).objective;
        let g = lse.gradient(&u);
        for i in 0..2 {
            let h = 1e-6;
            let mut up = u.clone();
            up[i] += h;
            let mut down = u.clone();
            down[i] -= h;
            let fd = (lse.eval(&up) - lse.eval(&down)) / (2.0 * h);
            prop_assert!((fd - g[i]).abs() <= 1e-5 * g[i].abs().max(1.0), "{fd} vs {}", g[i]);
        }
        prop_assert_eq!(VarId(1), b);
    }

    #[test]
    fn dataset_counts_preserve_rows(rows in prop::collection::vec(prop::collection::vec(any::<bool>(), 4), 1..40)) {
        let data: Vec<Vec<u8>> = rows.iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect();
        let d = BinaryDataset::new(4, data).unwrap();
        let total: usize = d.counts().iter().map(|(_, c)| c).sum();
        prop_assert_eq!(total, d.len());
    }
}
