//! The `nacl` command-line interface.
//!
//! Exit codes: 0 on success, 1 for user errors (bad flags, unreadable or
//! malformed input), 2 for numerical failures.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::baselines::{fit_imputer, fit_ml_nb, ImputerKind};
use crate::conformance::{check_conformance, check_conformance_sampled, nb_to_lr, MAX_EXHAUSTIVE_FEATURES};
use crate::error::{Error, Result};
use crate::evaluation::{run_experiment, EvalMethod, ExperimentConfig, Metric, Predictor};
use crate::explain::{render_grid, sufficient_explanation, ExplanationStatus, Search};
use crate::ingest::{apply_stats, binarize, read_dataset, write_dataset, FittedStats, IngestSchema, RawTable};
use crate::learn::{clamped_nacl_program, fit_nacl, AlphaPolicy, FitOptions, Method};
use crate::persist::ModelDocument;
use crate::train::{train_lr, TrainOptions};

#[derive(Debug, Parser)]
#[command(name = "nacl", version, about = "Naive conformant learning toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Binarize a CSV table into a dataset file.
    Ingest {
        #[arg(long)]
        csv: PathBuf,
        /// Schema JSON; required unless --stats-in is given.
        #[arg(long)]
        schema: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Where to store the fitted binarization statistics.
        #[arg(long)]
        stats_out: Option<PathBuf>,
        /// Reuse statistics fitted on a training table.
        #[arg(long, conflicts_with = "schema")]
        stats_in: Option<PathBuf>,
    },
    /// Train a logistic regression on a labelled dataset file.
    TrainLr {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-4)]
        l2: f64,
        #[arg(long, default_value_t = 20_000)]
        max_epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Learn the most likely naive Bayes model conforming with an LR.
    NaclFit {
        #[arg(long)]
        lr: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "reduced")]
        method: String,
        #[arg(long, default_value = "posterior")]
        alpha: String,
        /// Also write the fit report JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the geometric program as text, one constraint per line.
        #[arg(long)]
        dump_gp: Option<PathBuf>,
    },
    /// Compare methods for prediction with missing features.
    Eval {
        #[arg(long)]
        lr: PathBuf,
        /// Training split, used for imputation statistics and model fits.
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// A previously fitted conformant model; fitted on --train if absent.
        #[arg(long)]
        nb: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0,0.2,0.4,0.6,0.8")]
        rates: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Any of nacl, nb, min, max, mean, median.
        #[arg(long, value_delimiter = ',', default_value = "nacl,mean,median,min,max")]
        methods: Vec<String>,
        #[arg(long)]
        csv_out: Option<PathBuf>,
        #[arg(long)]
        json_out: Option<PathBuf>,
        /// Print a per-rate cross-entropy table.
        #[arg(long)]
        summary: bool,
    },
    /// Explain the classification of one dataset row.
    Explain {
        #[arg(long)]
        lr: PathBuf,
        #[arg(long)]
        nb: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        index: usize,
        /// greedy, exact, or exact:N
        #[arg(long, default_value = "greedy")]
        search: String,
        #[arg(long)]
        image_out: Option<PathBuf>,
        #[arg(long, requires = "image_out")]
        width: Option<usize>,
        #[arg(long, requires = "image_out")]
        height: Option<usize>,
    },
    /// Inspect a model file, optionally translating naive Bayes to LR.
    Convert {
        #[arg(long)]
        model: PathBuf,
        /// Write the LR equivalent of a naive Bayes model here.
        #[arg(long)]
        to_lr: Option<PathBuf>,
    },
}

/// Worker count from `NACL_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("NACL_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Parse(format!("NACL_THREADS must be a positive integer, got '{v}'"))),
        },
    }
}

fn load_lr(path: &PathBuf) -> Result<crate::model::LogisticRegression> {
    ModelDocument::load(path)?.into_lr()
}

fn load_nb(path: &PathBuf) -> Result<crate::model::NaiveBayes> {
    ModelDocument::load(path)?.into_nb()
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest {
            csv,
            schema,
            out,
            stats_out,
            stats_in,
        } => {
            let table = RawTable::load(csv)?;
            let (d, stats) = match (schema, stats_in) {
                (_, Some(path)) => {
                    let stats = FittedStats::load(path)?;
                    (apply_stats(&table, &stats)?, stats)
                }
                (Some(path), None) => binarize(&table, &IngestSchema::load(path)?)?,
                (None, None) => return Err(Error::Parse("ingest needs --schema or --stats-in".into())),
            };
            write_dataset(&d, &out)?;
            if let Some(path) = stats_out {
                stats.save(path)?;
            }
            println!("{} rows, {} features", d.len(), d.num_features());
        }
        Command::TrainLr {
            data,
            out,
            l2,
            max_epochs,
            seed,
        } => {
            let d = read_dataset(data)?;
            let lr = train_lr(
                &d,
                &TrainOptions {
                    l2,
                    max_epochs,
                    seed,
                    ..TrainOptions::default()
                },
            )?;
            ModelDocument::Lr(lr).save(out)?;
        }
        Command::NaclFit {
            lr,
            data,
            out,
            method,
            alpha,
            report,
            dump_gp,
        } => {
            let lr = load_lr(&lr)?;
            let d = read_dataset(data)?;
            let opts = FitOptions {
                method: Method::parse(&method)?,
                alpha_policy: AlphaPolicy::parse(&alpha)?,
                ..FitOptions::default()
            };
            if let Some(path) = dump_gp {
                std::fs::write(path, clamped_nacl_program(&lr, &d, &opts)?.gp.to_string())?;
            }
            let fit = fit_nacl(&lr, &d, &opts)?;
            ModelDocument::Nb(fit.model).save(out)?;
            let text = fit.report.to_json();
            if let Some(path) = report {
                std::fs::write(path, &text)?;
            }
            println!("{text}");
        }
        Command::Eval {
            lr,
            train,
            test,
            nb,
            rates,
            reps,
            seed,
            methods,
            csv_out,
            json_out,
            summary,
        } => {
            let lr = load_lr(&lr)?;
            let train = read_dataset(train)?;
            let test = read_dataset(test)?;
            let mut eval_methods = Vec::new();
            for name in &methods {
                let predictor = match name.as_str() {
                    "nacl" => Predictor::Conformant(match &nb {
                        Some(path) => load_nb(path)?,
                        None => fit_nacl(&lr, &train, &FitOptions::default())?.model,
                    }),
                    "nb" => Predictor::Generative(fit_ml_nb(&train, 1.0)?),
                    other => Predictor::Impute(fit_imputer(&train, ImputerKind::parse(other)?)?),
                };
                eval_methods.push(EvalMethod::new(name.clone(), predictor));
            }
            let metrics = if test.labels().is_some() {
                vec![Metric::CrossEntropy, Metric::Accuracy, Metric::WeightedF1]
            } else {
                vec![Metric::CrossEntropy]
            };
            let config = ExperimentConfig {
                lr,
                methods: eval_methods,
                rates,
                repetitions: reps,
                seed,
                metrics,
                threads: threads_from_env()?,
            };
            let report = run_experiment(&config, &test)?;
            let csv = report.to_csv();
            match &csv_out {
                Some(path) => std::fs::write(path, &csv)?,
                None if json_out.is_none() => print!("{csv}"),
                None => {}
            }
            if let Some(path) = json_out {
                std::fs::write(path, report.to_json())?;
            }
            if summary {
                print!("{}", report.summary_table(Metric::CrossEntropy));
            }
        }
        Command::Explain {
            lr,
            nb,
            data,
            index,
            search,
            image_out,
            width,
            height,
        } => {
            let lr = load_lr(&lr)?;
            let nb = load_nb(&nb)?;
            let d = read_dataset(data)?;
            let x = d.rows().get(index).ok_or(Error::IndexOutOfRange {
                index,
                num_features: d.len(),
            })?;
            let ex = sufficient_explanation(&lr, &nb, x, Search::parse(&search)?)?;
            let found = ex.status == ExplanationStatus::Found;
            println!(
                "{}",
                json!({
                    "index": index,
                    "prediction": ex.prediction,
                    "status": if found { "found" } else { "not_found" },
                    "explanation": ex.features,
                    "expectation": ex.expectation,
                    "support": ex.partition.support,
                    "opposing": ex.partition.opposing,
                })
            );
            if let Some(path) = image_out {
                let n = x.len();
                let (w, h) = match (width, height) {
                    (Some(w), Some(h)) => (w, h),
                    (Some(w), None) if w > 0 => (w, n / w),
                    (None, Some(h)) if h > 0 => (n / h, h),
                    _ => {
                        let side = (n as f64).sqrt().round() as usize;
                        (side, side)
                    }
                };
                render_grid(x, &ex.features, w, h)?.write_pgm(path)?;
            }
        }
        Command::Convert { model, to_lr } => {
            let doc = ModelDocument::load(&model)?;
            match doc {
                ModelDocument::Lr(lr) => println!(
                    "{}",
                    json!({"type": "lr", "num_features": lr.num_features(), "num_classes": lr.num_classes()})
                ),
                ModelDocument::Imputer(imp) => println!(
                    "{}",
                    json!({"type": "imputer", "kind": imp.kind().name(), "num_features": imp.fill().len()})
                ),
                ModelDocument::Nb(nb) => {
                    let violations: Vec<String> = nb.validate().iter().map(ToString::to_string).collect();
                    println!(
                        "{}",
                        json!({
                            "type": "nb",
                            "num_features": nb.num_features(),
                            "num_classes": nb.num_classes(),
                            "violations": violations,
                        })
                    );
                    if let Some(path) = to_lr {
                        let lr = nb_to_lr(&nb)?;
                        let dev = if nb.num_features() <= MAX_EXHAUSTIVE_FEATURES {
                            check_conformance(&nb, &lr, 0.0)?
                        } else {
                            check_conformance_sampled(&nb, &lr, 0.0, 4096, 0)?
                        };
                        log::info!("translated model deviates by {:e}", dev.max_deviation);
                        ModelDocument::Lr(lr).save(path)?;
                    }
                    return Ok(());
                }
            }
            if to_lr.is_some() {
                return Err(Error::Unsupported("--to-lr needs a naive Bayes model".into()));
            }
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}
