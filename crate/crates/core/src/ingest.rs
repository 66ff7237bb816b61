//! CSV ingestion, binarization, and the dataset file format.
//!
//! A dataset file starts with one line `n_features,n_rows,has_labels`
//! (the last field `0` or `1`), followed by one CSV row of bits per
//! instance with the class index appended when labels are present.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BinaryDataset;

pub const DEFAULT_STD_FACTOR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Binary,
    Categorical,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

/// How each raw column becomes bits. Continuous columns are set to 1 when
/// the value exceeds `mean + std_factor * std`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSchema {
    pub label: String,
    pub columns: Vec<ColumnSpec>,
    #[serde(default = "default_std_factor")]
    pub std_factor: f64,
}

fn default_std_factor() -> f64 {
    DEFAULT_STD_FACTOR
}

impl IngestSchema {
    pub fn from_json(text: &str) -> Result<Self> {
        let schema: Self = serde_json::from_str(text)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for c in &self.columns {
            if c.name == self.label {
                return Err(Error::Parse(format!("label column '{}' listed as a feature", c.name)));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Parse(format!("column '{}' listed twice", c.name)));
            }
        }
        if !self.std_factor.is_finite() {
            return Err(Error::Domain("std_factor must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnStats {
    Binary { name: String },
    Categorical { name: String, categories: Vec<String> },
    Continuous { name: String, mean: f64, std: f64, threshold: f64 },
}

impl ColumnStats {
    pub fn name(&self) -> &str {
        match self {
            Self::Binary { name } | Self::Categorical { name, .. } | Self::Continuous { name, .. } => name,
        }
    }

    fn width(&self) -> usize {
        match self {
            Self::Categorical { categories, .. } => categories.len(),
            _ => 1,
        }
    }
}

/// Statistics fitted on a training table, reused verbatim on test tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedStats {
    pub label: String,
    pub classes: Vec<String>,
    pub columns: Vec<ColumnStats>,
}

impl FittedStats {
    pub fn num_features(&self) -> usize {
        self.columns.iter().map(ColumnStats::width).sum()
    }

    /// Output feature names, one per bit.
    pub fn feature_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .flat_map(|c| match c {
                ColumnStats::Categorical { name, categories } => {
                    categories.iter().map(|v| format!("{name}={v}")).collect()
                }
                other => vec![other.name().to_string()],
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// A CSV file held as strings.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub records: Vec<Vec<String>>,
}

impl RawTable {
    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = r.headers()?.iter().map(str::to_string).collect();
        let records = r
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { headers, records })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn values(&self, col: usize) -> impl Iterator<Item = &str> {
        self.records.iter().map(move |r| r[col].as_str())
    }
}

fn parse_number(name: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Parse(format!("column '{name}': '{v}' is not a finite number")))
}

fn parse_bit(name: &str, v: &str) -> Result<u8> {
    match v {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(Error::Parse(format!("column '{name}': '{v}' is not 0 or 1"))),
    }
}

/// Distinct values, numerically ordered when every value is an integer.
fn sorted_distinct<'a>(values: impl Iterator<Item = &'a str>) -> Vec<String> {
    let set: BTreeSet<&str> = values.collect();
    let mut out: Vec<String> = set.into_iter().map(str::to_string).collect();
    if out.iter().all(|v| v.parse::<i64>().is_ok()) {
        out.sort_by_key(|v| v.parse::<i64>().unwrap());
    }
    out
}

/// Fits binarization statistics on `table` and returns the binarized
/// training set alongside them.
pub fn binarize(table: &RawTable, schema: &IngestSchema) -> Result<(BinaryDataset, FittedStats)> {
    schema.validate()?;
    for h in &table.headers {
        if h != &schema.label && !schema.columns.iter().any(|c| &c.name == h) {
            return Err(Error::Parse(format!("column '{h}' is not covered by the schema")));
        }
    }
    let label_col = table
        .column(&schema.label)
        .ok_or_else(|| Error::Parse(format!("label column '{}' not found", schema.label)))?;
    let mut columns = Vec::with_capacity(schema.columns.len());
    for spec in &schema.columns {
        let col = table
            .column(&spec.name)
            .ok_or_else(|| Error::Parse(format!("column '{}' not found", spec.name)))?;
        let name = spec.name.clone();
        columns.push(match spec.kind {
            ColumnKind::Binary => ColumnStats::Binary { name },
            ColumnKind::Categorical => ColumnStats::Categorical {
                categories: sorted_distinct(table.values(col)),
                name,
            },
            ColumnKind::Continuous => {
                let xs = table
                    .values(col)
                    .map(|v| parse_number(&name, v))
                    .collect::<Result<Vec<_>>>()?;
                if xs.is_empty() {
                    return Err(Error::EmptyDataset);
                }
                let n = xs.len() as f64;
                let mean = xs.iter().sum::<f64>() / n;
                let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
                ColumnStats::Continuous {
                    name,
                    mean,
                    std,
                    threshold: mean + schema.std_factor * std,
                }
            }
        });
    }
    let stats = FittedStats {
        label: schema.label.clone(),
        classes: sorted_distinct(table.values(label_col)),
        columns,
    };
    let d = apply_stats(table, &stats)?;
    Ok((d, stats))
}

/// Binarizes `table` with frozen statistics. Categories not seen during
/// fitting map to an all-zero block. The label column is optional here.
pub fn apply_stats(table: &RawTable, stats: &FittedStats) -> Result<BinaryDataset> {
    let mut sources = Vec::with_capacity(stats.columns.len());
    for c in &stats.columns {
        sources.push(
            table
                .column(c.name())
                .ok_or_else(|| Error::Parse(format!("column '{}' not found", c.name())))?,
        );
    }
    let mut unseen = 0usize;
    let mut rows = Vec::with_capacity(table.records.len());
    for rec in &table.records {
        let mut row = Vec::with_capacity(stats.num_features());
        for (c, &col) in stats.columns.iter().zip(&sources) {
            let v = rec[col].as_str();
            match c {
                ColumnStats::Binary { name } => row.push(parse_bit(name, v)?),
                ColumnStats::Continuous { name, threshold, .. } => {
                    row.push((parse_number(name, v)? > *threshold) as u8)
                }
                ColumnStats::Categorical { categories, .. } => {
                    let hit = categories.iter().position(|cat| cat == v);
                    if hit.is_none() {
                        unseen += 1;
                    }
                    row.extend((0..categories.len()).map(|j| (Some(j) == hit) as u8));
                }
            }
        }
        rows.push(row);
    }
    if unseen > 0 {
        log::warn!("{unseen} categorical value(s) not seen during fitting were encoded as all zeros");
    }
    let d = BinaryDataset::new(stats.num_features(), rows)?;
    match table.column(&stats.label) {
        None => Ok(d),
        Some(col) => {
            let labels = table
                .values(col)
                .map(|v| {
                    stats
                        .classes
                        .iter()
                        .position(|c| c == v)
                        .ok_or_else(|| Error::Parse(format!("unknown class label '{v}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            d.with_labels(labels)
        }
    }
}

pub fn dataset_to_string(d: &BinaryDataset) -> String {
    let labels = d.labels();
    let mut out = format!("{},{},{}\n", d.num_features(), d.len(), labels.is_some() as u8);
    for (j, row) in d.rows().iter().enumerate() {
        let mut fields: Vec<String> = row.iter().map(u8::to_string).collect();
        if let Some(l) = labels {
            fields.push(l[j].to_string());
        }
        writeln!(out, "{}", fields.join(",")).unwrap();
    }
    out
}

pub fn dataset_from_str(text: &str) -> Result<BinaryDataset> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty dataset file".into()))?;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    let [n, rows, has_labels] = fields[..] else {
        return Err(Error::Parse(format!("bad dataset header '{header}'")));
    };
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad dataset header '{header}'")))
    };
    let (n, count) = (parse(n)?, parse(rows)?);
    let has_labels = match has_labels {
        "0" => false,
        "1" => true,
        _ => return Err(Error::Parse(format!("bad dataset header '{header}'"))),
    };
    let width = n + has_labels as usize;
    let mut data = Vec::with_capacity(count);
    let mut labels = Vec::new();
    for (j, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != width {
            return Err(Error::Parse(format!(
                "row {j}: expected {width} fields, found {}",
                fields.len()
            )));
        }
        data.push(
            fields[..n]
                .iter()
                .map(|v| parse_bit("row", v))
                .collect::<Result<Vec<_>>>()?,
        );
        if has_labels {
            labels.push(
                fields[n]
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("row {j}: bad label '{}'", fields[n])))?,
            );
        }
    }
    if data.len() != count {
        return Err(Error::Parse(format!(
            "header promises {count} rows, found {}",
            data.len()
        )));
    }
    let d = BinaryDataset::new(n, data)?;
    if has_labels {
        d.with_labels(labels)
    } else {
        Ok(d)
    }
}

pub fn write_dataset(d: &BinaryDataset, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, dataset_to_string(d))?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<BinaryDataset> {
    dataset_from_str(&std::fs::read_to_string(path)?)
}
