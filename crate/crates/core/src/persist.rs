//! JSON envelopes for models and imputers.
//!
//! Documents are written by hand so that the field order is fixed and every
//! number carries 17 significant digits, which round-trips an `f64` exactly.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::baselines::{Imputer, ImputerKind};
use crate::error::{check_len, Error, Result};
use crate::model::{LogisticRegression, NaiveBayes};

/// Any document that can appear in a model file.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelDocument {
    Lr(LogisticRegression),
    Nb(NaiveBayes),
    Imputer(Imputer),
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum RawDocument {
    Lr {
        num_features: usize,
        num_classes: usize,
        weights: Vec<Vec<f64>>,
    },
    Nb {
        num_features: usize,
        num_classes: usize,
        prior: Vec<f64>,
        cond: Vec<Vec<f64>>,
    },
    Imputer {
        kind: String,
        num_features: usize,
        fill: Vec<f64>,
    },
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn vector(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|&x| num(x)).collect();
    format!("[{}]", items.join(","))
}

fn matrix(m: &[Vec<f64>]) -> String {
    let rows: Vec<String> = m.iter().map(|r| vector(r)).collect();
    format!("[{}]", rows.join(","))
}

pub fn lr_to_json(lr: &LogisticRegression) -> String {
    let mut s = String::new();
    write!(
        s,
        "{{\"type\":\"lr\",\"num_features\":{},\"num_classes\":{},\"weights\":{}}}",
        lr.num_features(),
        lr.num_classes(),
        matrix(lr.weights())
    )
    .unwrap();
    s
}

pub fn nb_to_json(nb: &NaiveBayes) -> String {
    format!(
        "{{\"type\":\"nb\",\"num_features\":{},\"num_classes\":{},\"prior\":{},\"cond\":{}}}",
        nb.num_features(),
        nb.num_classes(),
        vector(nb.prior()),
        matrix(nb.cond())
    )
}

pub fn imputer_to_json(imp: &Imputer) -> String {
    format!(
        "{{\"type\":\"imputer\",\"kind\":\"{}\",\"num_features\":{},\"fill\":{}}}",
        imp.kind().name(),
        imp.fill().len(),
        vector(imp.fill())
    )
}

impl ModelDocument {
    pub fn to_json(&self) -> String {
        match self {
            ModelDocument::Lr(m) => lr_to_json(m),
            ModelDocument::Nb(m) => nb_to_json(m),
            ModelDocument::Imputer(m) => imputer_to_json(m),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        match serde_json::from_str::<RawDocument>(text)? {
            RawDocument::Lr {
                num_features,
                num_classes,
                weights,
            } => {
                let lr = LogisticRegression::new(num_classes, weights)?;
                check_len(num_features, lr.num_features())?;
                Ok(ModelDocument::Lr(lr))
            }
            RawDocument::Nb {
                num_features,
                num_classes,
                prior,
                cond,
            } => {
                let nb = NaiveBayes::new(prior, cond)?;
                check_len(num_features, nb.num_features())?;
                check_len(num_classes, nb.num_classes())?;
                Ok(ModelDocument::Nb(nb))
            }
            RawDocument::Imputer {
                kind,
                num_features,
                fill,
            } => {
                let kind = ImputerKind::parse(&kind)?;
                check_len(num_features, fill.len())?;
                Ok(ModelDocument::Imputer(Imputer::new(kind, fill)?))
            }
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn into_lr(self) -> Result<LogisticRegression> {
        match self {
            ModelDocument::Lr(m) => Ok(m),
            other => Err(Error::Parse(format!("expected an lr document, got {}", other.kind()))),
        }
    }

    pub fn into_nb(self) -> Result<NaiveBayes> {
        match self {
            ModelDocument::Nb(m) => Ok(m),
            other => Err(Error::Parse(format!("expected an nb document, got {}", other.kind()))),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ModelDocument::Lr(_) => "lr",
            ModelDocument::Nb(_) => "nb",
            ModelDocument::Imputer(_) => "imputer",
        }
    }
}
