//! Dataset, instance and feature-metadata types plus tabular ingestion.
//!
//! A [`Dataset`] holds an N x |F| matrix of reals together with per-feature
//! distribution statistics ([`FeatureMeta`]) that the perturbation tests are
//! sized from. Statistics are population statistics (divide by N): they set a
//! perturbation scale, they are not used for inference.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("feature index {index} out of range (|F| = {len})")]
    FeatureIndex { index: usize, len: usize },
    #[error("dataset is empty")]
    Empty,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// How a column behaves under perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    BinaryOneHot,
    /// Ordinal-coded levels, strictly increasing.
    Ordinal {
        levels: Vec<f64>,
    },
}

/// Per-feature name, kind and distribution statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
    pub mean: f64,
    pub std_dev: f64,
    pub observed_min: f64,
    pub observed_max: f64,
}

/// A single feature-value vector, always of the owning dataset's arity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance(pub Vec<f64>);

impl Instance {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Copy of this instance with coordinate `j` replaced by `value`.
    pub fn with_value(&self, j: usize, value: f64) -> Instance {
        let mut v = self.0.clone();
        v[j] = value;
        Instance(v)
    }
}

impl From<Vec<f64>> for Instance {
    fn from(v: Vec<f64>) -> Self {
        Instance(v)
    }
}

/// Tabular dataset: rows, labels (optional) and per-feature statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<FeatureMeta>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<usize>>,
    /// Header name of the label column, kept for canonical re-emission.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_name: Option<String>,
}

impl Dataset {
    /// Build a dataset from raw rows, computing statistics per column.
    pub fn from_rows(
        names: Vec<String>,
        kinds: Vec<FeatureKind>,
        rows: Vec<Vec<f64>>,
        labels: Option<Vec<usize>>,
    ) -> Result<Dataset, DataError> {
        if rows.is_empty() {
            return Err(DataError::Empty);
        }
        let arity = names.len();
        debug_assert_eq!(kinds.len(), arity);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != arity {
                return Err(DataError::Parse {
                    row: i + 1,
                    col: row.len(),
                    msg: format!("expected {arity} values, found {}", row.len()),
                });
            }
        }
        let features = names
            .into_iter()
            .zip(kinds)
            .enumerate()
            .map(|(j, (name, kind))| {
                let (mean, std_dev, min, max) = column_stats(&rows, j);
                if let FeatureKind::BinaryOneHot = kind {
                    for (i, row) in rows.iter().enumerate() {
                        if row[j] != 0.0 && row[j] != 1.0 {
                            return Err(DataError::Parse {
                                row: i + 1,
                                col: j + 1,
                                msg: format!("binary feature '{name}' has value {}", row[j]),
                            });
                        }
                    }
                }
                if let FeatureKind::Ordinal { levels } = &kind {
                    for (i, row) in rows.iter().enumerate() {
                        if !levels.contains(&row[j]) {
                            return Err(DataError::Parse {
                                row: i + 1,
                                col: j + 1,
                                msg: format!(
                                    "value {} is not an ordinal level of '{name}'",
                                    row[j]
                                ),
                            });
                        }
                    }
                }
                Ok(FeatureMeta {
                    name,
                    kind,
                    mean,
                    std_dev,
                    observed_min: min,
                    observed_max: max,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let label_name = labels.as_ref().map(|_| "label".to_string());
        Ok(Dataset {
            features,
            rows,
            labels,
            label_name,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn instance(&self, i: usize) -> Instance {
        Instance(self.rows[i].clone())
    }

    /// Metadata of feature `j`, used to size its perturbations.
    pub fn feature_stats(&self, j: usize) -> Result<&FeatureMeta, DataError> {
        self.features.get(j).ok_or(DataError::FeatureIndex {
            index: j,
            len: self.features.len(),
        })
    }

    /// Per-feature means, e.g. as the background point for coalition tests.
    pub fn feature_means(&self) -> Vec<f64> {
        self.features.iter().map(|f| f.mean).collect()
    }

    /// Canonical tabular re-emission: header row plus one line per row,
    /// values printed with 17 significant digits so reloading is bit-exact.
    pub fn to_canonical_csv(&self, delimiter: char) -> String {
        let mut out = String::new();
        let mut header: Vec<&str> = self.features.iter().map(|f| f.name.as_str()).collect();
        if self.labels.is_some() {
            header.push(self.label_name.as_deref().unwrap_or("label"));
        }
        out.push_str(&header.join(&delimiter.to_string()));
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            let mut first = true;
            for v in row {
                if !first {
                    out.push(delimiter);
                }
                first = false;
                let _ = write!(out, "{}", format_sig17(*v));
            }
            if let Some(labels) = &self.labels {
                let _ = write!(out, "{delimiter}{}", labels[i]);
            }
            out.push('\n');
        }
        out
    }
}

/// 17-significant-digit decimal formatting; round-trips any finite f64.
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

fn column_stats(rows: &[Vec<f64>], j: usize) -> (f64, f64, f64, f64) {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
    let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
    let min = rows.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
    let max = rows.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
    (mean, var.sqrt(), min, max)
}

/// Column-kind declarations for [`load_dataset`].
///
/// Parsed from a small key-value file, one `column = kind` line per column:
///
/// ```text
/// variance = continuous
/// approved = binary
/// grade    = ordinal(1, 2, 3)
/// class    = label
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    columns: BTreeMap<String, ColumnDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnDecl {
    Feature(FeatureKind),
    Label,
}

impl Schema {
    pub fn parse(text: &str) -> Result<Schema, DataError> {
        let mut columns = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, spec) = line.split_once('=').ok_or_else(|| {
                DataError::Schema(format!("line {}: expected 'column = kind'", lineno + 1))
            })?;
            let name = name.trim().to_string();
            let decl = parse_kind_spec(spec.trim(), lineno + 1)?;
            if columns.insert(name.clone(), decl).is_some() {
                return Err(DataError::Schema(format!("column '{name}' declared twice")));
            }
        }
        if columns.is_empty() {
            return Err(DataError::Schema("schema declares no columns".into()));
        }
        Ok(Schema { columns })
    }

    fn lookup(&self, name: &str) -> Option<&ColumnDecl> {
        self.columns.get(name)
    }
}

fn parse_kind_spec(spec: &str, lineno: usize) -> Result<ColumnDecl, DataError> {
    let lower = spec.to_ascii_lowercase();
    if lower == "continuous" {
        return Ok(ColumnDecl::Feature(FeatureKind::Continuous));
    }
    if lower == "binary" || lower == "binary_onehot" {
        return Ok(ColumnDecl::Feature(FeatureKind::BinaryOneHot));
    }
    if lower == "label" {
        return Ok(ColumnDecl::Label);
    }
    if let Some(rest) = lower.strip_prefix("ordinal(") {
        let inner = rest.strip_suffix(')').ok_or_else(|| {
            DataError::Schema(format!("line {lineno}: unterminated ordinal level list"))
        })?;
        let levels: Vec<f64> = inner
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|_| {
                    DataError::Schema(format!("line {lineno}: bad ordinal level '{}'", s.trim()))
                })
            })
            .collect::<Result<_, _>>()?;
        if levels.is_empty() {
            return Err(DataError::Schema(format!(
                "line {lineno}: ordinal needs at least one level"
            )));
        }
        if !levels.windows(2).all(|w| w[0] < w[1]) {
            return Err(DataError::Schema(format!(
                "line {lineno}: ordinal levels must be strictly increasing"
            )));
        }
        return Ok(ColumnDecl::Feature(FeatureKind::Ordinal { levels }));
    }
    Err(DataError::Schema(format!(
        "line {lineno}: unknown kind '{spec}'"
    )))
}

/// Load a delimiter-separated numeric table with a mandatory header row.
///
/// Every header column must be declared in the schema; at most one column may
/// be declared `label`. Missing or non-numeric cells are rejected outright.
pub fn load_dataset<R: BufRead>(
    reader: R,
    schema: &Schema,
    delimiter: char,
) -> Result<Dataset, DataError> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or(DataError::Empty)??;
    let columns: Vec<String> = header
        .split(delimiter)
        .map(|c| c.trim().to_string())
        .collect();

    let mut label_col: Option<usize> = None;
    let mut feature_cols: Vec<(usize, String, FeatureKind)> = Vec::new();
    for (idx, name) in columns.iter().enumerate() {
        match schema.lookup(name) {
            Some(ColumnDecl::Feature(kind)) => {
                feature_cols.push((idx, name.clone(), kind.clone()));
            }
            Some(ColumnDecl::Label) => {
                if label_col.replace(idx).is_some() {
                    return Err(DataError::Schema("more than one label column".into()));
                }
            }
            None => {
                return Err(DataError::Schema(format!(
                    "column '{name}' not declared in schema"
                )));
            }
        }
    }
    if feature_cols.is_empty() {
        return Err(DataError::Schema("no feature columns declared".into()));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(delimiter).collect();
        if cells.len() != columns.len() {
            return Err(DataError::Parse {
                row: i + 1,
                col: cells.len(),
                msg: format!("expected {} cells, found {}", columns.len(), cells.len()),
            });
        }
        let mut row = Vec::with_capacity(feature_cols.len());
        for (idx, name, _) in &feature_cols {
            let cell = cells[*idx].trim();
            if cell.is_empty() {
                return Err(DataError::Parse {
                    row: i + 1,
                    col: idx + 1,
                    msg: format!("missing value in column '{name}'"),
                });
            }
            let v: f64 = cell.parse().map_err(|_| DataError::Parse {
                row: i + 1,
                col: idx + 1,
                msg: format!("non-numeric cell '{cell}' in column '{name}'"),
            })?;
            row.push(v);
        }
        if let Some(lc) = label_col {
            let cell = cells[lc].trim();
            let label: usize = cell.parse().map_err(|_| DataError::Parse {
                row: i + 1,
                col: lc + 1,
                msg: format!("non-integer label '{cell}'"),
            })?;
            labels.push(label);
        }
        rows.push(row);
    }

    let names: Vec<String> = feature_cols.iter().map(|(_, n, _)| n.clone()).collect();
    let kinds: Vec<FeatureKind> = feature_cols.into_iter().map(|(_, _, k)| k).collect();
    let mut ds = Dataset::from_rows(names, kinds, rows, label_col.map(|_| labels))?;
    if let Some(lc) = label_col {
        ds.label_name = Some(columns[lc].clone());
    }
    Ok(ds)
}
