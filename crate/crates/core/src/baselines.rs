//! Imputation baselines and a maximum-likelihood naive Bayes comparator.

use crate::error::{check_len, Error, Result};
use crate::model::{BinaryDataset, NaiveBayes, PartialObservation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImputerKind {
    Min,
    Max,
    Mean,
    Median,
}

impl ImputerKind {
    pub const ALL: [ImputerKind; 4] = [Self::Min, Self::Max, Self::Mean, Self::Median];

    pub fn name(self) -> &'static str {
        match self {
            Self::Min => "min",
            Self::Max => "max",
            Self::Mean => "mean",
            Self::Median => "median",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown imputer kind '{s}'")))
    }
}

/// Per-feature substitute values.
#[derive(Debug, Clone, PartialEq)]
pub struct Imputer {
    kind: ImputerKind,
    fill: Vec<f64>,
}

impl Imputer {
    pub fn new(kind: ImputerKind, fill: Vec<f64>) -> Result<Self> {
        if let Some(&v) = fill.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::Domain(format!("fill value {v} outside [0, 1]")));
        }
        Ok(Self { kind, fill })
    }

    pub fn kind(&self) -> ImputerKind {
        self.kind
    }

    pub fn fill(&self) -> &[f64] {
        &self.fill
    }
}

/// Fits per-feature statistics on the rows of `d`. Medians of an even
/// number of values take the upper middle element.
pub fn fit_imputer(d: &BinaryDataset, kind: ImputerKind) -> Result<Imputer> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let rows = d.rows();
    let fill = (0..d.num_features())
        .map(|i| {
            let ones = rows.iter().filter(|r| r[i] == 1).count();
            let zeros = rows.len() - ones;
            match kind {
                ImputerKind::Min => (zeros == 0) as u8 as f64,
                ImputerKind::Max => (ones > 0) as u8 as f64,
                ImputerKind::Mean => ones as f64 / rows.len() as f64,
                // sorted column is `zeros` 0s then `ones` 1s
                ImputerKind::Median => (rows.len() / 2 >= zeros) as u8 as f64,
            }
        })
        .collect();
    Imputer::new(kind, fill)
}

/// Total vector with observed values from `y` and fill values elsewhere.
pub fn impute(imp: &Imputer, y: &PartialObservation, n: usize) -> Result<Vec<f64>> {
    check_len(n, imp.fill.len())?;
    y.check(n)?;
    let mut out = imp.fill.clone();
    for (i, b) in y.iter() {
        out[i] = b as f64;
    }
    Ok(out)
}

/// Smoothed relative-frequency naive Bayes:
/// `P(x_i = 1 | c) = (count + s) / (N_c + 2s)` and
/// `P(c) = (N_c + s) / (N + K s)`.
pub fn fit_ml_nb(d: &BinaryDataset, smoothing: f64) -> Result<NaiveBayes> {
    let labels = d.labels().ok_or(Error::MissingLabels)?;
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(smoothing >= 0.0) {
        return Err(Error::Domain(format!("smoothing {smoothing} must be >= 0")));
    }
    let k = d.label_count().max(2);
    let n = d.num_features();
    let mut class_counts = vec![0usize; k];
    let mut ones = vec![vec![0usize; n]; k];
    for (row, &c) in d.rows().iter().zip(labels) {
        class_counts[c] += 1;
        for (i, &b) in row.iter().enumerate() {
            ones[c][i] += b as usize;
        }
    }
    let total = d.len() as f64;
    let prior: Vec<f64> = class_counts
        .iter()
        .map(|&nc| (nc as f64 + smoothing) / (total + k as f64 * smoothing))
        .collect();
    let cond: Vec<Vec<f64>> = (0..k)
        .map(|c| {
            let nc = class_counts[c] as f64;
            ones[c]
                .iter()
                .map(|&o| (o as f64 + smoothing) / (nc + 2.0 * smoothing))
                .collect()
        })
        .collect();
    let nb = NaiveBayes::new(prior, cond)?;
    if let Some(v) = nb.validate().first() {
        return Err(Error::Degenerate(v.to_string()));
    }
    Ok(nb)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(values: &[u8]) -> BinaryDataset {
        BinaryDataset::new(1, values.iter().map(|&v| vec![v]).collect()).unwrap()
    }

    #[test]
    fn fill_statistics() {
        let d = column(&[1, 1, 1, 0]);
        assert_eq!(fit_imputer(&d, ImputerKind::Mean).unwrap().fill(), &[0.75]);
        assert_eq!(fit_imputer(&d, ImputerKind::Median).unwrap().fill(), &[1.0]);
        assert_eq!(fit_imputer(&d, ImputerKind::Min).unwrap().fill(), &[0.0]);
        assert_eq!(fit_imputer(&d, ImputerKind::Max).unwrap().fill(), &[1.0]);
    }

    #[test]
    fn median_matches_sorted_middle() {
        for values in [&[0u8, 0, 1, 1][..], &[0, 1, 0], &[1], &[0, 0, 0, 1], &[1, 1, 0, 0, 0]] {
            let mut sorted = values.to_vec();
            sorted.sort();
            let want = sorted[sorted.len() / 2] as f64;
            let got = fit_imputer(&column(values), ImputerKind::Median).unwrap().fill()[0];
            assert_eq!(got, want, "{values:?}");
        }
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let d = BinaryDataset::new(3, vec![]).unwrap();
        assert!(matches!(fit_imputer(&d, ImputerKind::Mean), Err(Error::EmptyDataset)));
    }

    #[test]
    fn impute_fills_only_missing() {
        let imp = Imputer::new(ImputerKind::Mean, vec![0.75, 0.2]).unwrap();
        let y: PartialObservation = [(1, 1)].into_iter().collect();
        assert_eq!(impute(&imp, &y, 2).unwrap(), vec![0.75, 1.0]);
        assert_eq!(impute(&imp, &PartialObservation::new(), 2).unwrap(), vec![0.75, 0.2]);
        let total = PartialObservation::from_total(&[0, 1]);
        assert_eq!(impute(&imp, &total, 2).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn ml_nb_by_counting() {
        let d = column(&[1, 0]).with_labels(vec![1, 0]).unwrap();
        let nb = fit_ml_nb(&d, 1.0).unwrap();
        assert!((nb.cond()[1][0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((nb.cond()[0][0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(nb.prior(), &[0.5, 0.5]);

        let nb = fit_ml_nb(&d, 1e9).unwrap();
        assert!(nb.cond().iter().flatten().all(|&p| (p - 0.5).abs() < 1e-8));
    }

    #[test]
    fn ml_nb_degenerate_without_smoothing() {
        let d = column(&[1, 0]).with_labels(vec![1, 1]).unwrap();
        assert!(matches!(fit_ml_nb(&d, 0.0), Err(Error::Degenerate(_))));
        assert!(fit_ml_nb(&d, 1.0).is_ok());
        assert!(matches!(fit_ml_nb(&column(&[1]), 1.0), Err(Error::MissingLabels)));
    }
}
