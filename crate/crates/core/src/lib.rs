//! Naive conformant learning.
//!
//! Given a logistic regression classifier, this crate finds the most likely
//! naive Bayes distribution whose conditional `P(C | x)` equals the
//! classifier everywhere, then uses that distribution to take expectations
//! of the classifier over missing features. The same expectations drive
//! sufficient explanations of individual predictions.
//!
//! ```
//! use nacl::{lr_to_nb, expected_prediction, LogisticRegression, PartialObservation};
//!
//! let lr = LogisticRegression::binary(vec![-1.16, 2.23, -0.20]).unwrap();
//! let nb = lr_to_nb(&lr, &[0.6, 0.9]).unwrap();
//! let y: PartialObservation = [(0, 1)].into_iter().collect();
//! let p = expected_prediction(&nb, &y).unwrap();
//! assert!(p[1] > 0.5);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cli;
pub mod conformance;
pub mod error;
pub mod evaluation;
pub mod expectation;
pub mod explain;
pub mod gp;
pub mod ingest;
pub mod learn;
pub mod math;
pub mod model;
pub mod persist;
pub mod train;

pub use baselines::{fit_imputer, fit_ml_nb, impute, Imputer, ImputerKind};
pub use conformance::{check_conformance, lr_to_nb, nb_to_lr, ConformanceReport};
pub use error::{Error, Result};
pub use evaluation::{run_experiment, EvalMethod, ExperimentConfig, ExperimentReport, Metric, Predictor};
pub use expectation::{brute_force_expectation, expected_prediction, linear_expected_prediction};
pub use explain::{partition_support, sufficient_explanation, Explanation, ExplanationStatus, Search};
pub use gp::{GeometricProgram, Monomial, Posynomial, SolveStatus, SolverOptions};
pub use learn::{fit_nacl, AlphaPolicy, FitOptions, FitReport, Method, NaclFit};
pub use model::{BinaryDataset, LogisticRegression, NaiveBayes, PartialObservation};
pub use persist::ModelDocument;
pub use train::{train_lr, TrainOptions};
