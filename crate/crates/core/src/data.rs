//! Dataset ingestion, preprocessing and the ordinal label encodings.
//!
//! The pipeline is `load_csv` -> [`preprocess`] -> [`encode_labels`]. Every
//! stage is a pure transformation; the resulting values are immutable.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell tokens treated as missing values (after trimming).
pub const MISSING_TOKENS: [&str; 3] = ["", "?", "NA"];

fn is_missing(cell: &str) -> bool {
    MISSING_TOKENS.contains(&cell.trim())
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// A rectangular table of text cells as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    columns: Vec<String>,
    cells: Vec<Vec<String>>,
    label: usize,
}

impl RawTable {
    pub fn new(columns: Vec<String>, cells: Vec<Vec<String>>, label: usize) -> Result<Self> {
        if label >= columns.len() {
            return Err(Error::InvalidDataset(format!(
                "label column id {label} out of range for {} columns",
                columns.len()
            )));
        }
        for (r, row) in cells.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(Error::RaggedRow {
                    row: r + 1,
                    expected: columns.len(),
                    found: row.len(),
                });
            }
        }
        Ok(Self {
            columns,
            cells,
            label,
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.cells
    }

    pub fn label_index(&self) -> usize {
        self.label
    }

    pub fn n_rows(&self) -> usize {
        self.cells.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }
}

/// Picks the most frequent of comma, semicolon and tab in the header line.
/// Ties resolve in that order.
pub fn detect_delimiter(header: &str) -> u8 {
    let mut best = (b',', 0usize);
    for d in [b',', b';', b'\t'] {
        let count = header.bytes().filter(|&b| b == d).count();
        if count > best.1 {
            best = (d, count);
        }
    }
    best.0
}

/// Reads a CSV file with a header row. The delimiter is auto-detected.
pub fn load_csv(path: impl AsRef<Path>, label: &str) -> Result<RawTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, label)
}

/// Parses CSV text; see [`load_csv`].
pub fn parse_csv(text: &str, label: &str) -> Result<RawTable> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let header_line = text
        .lines()
        .next()
        .ok_or_else(|| Error::EmptyInput("missing header row".into()))?;
    let delimiter = detect_delimiter(header_line);

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());

    let columns: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Csv {
            row: 0,
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if columns.is_empty() || columns.iter().all(String::is_empty) {
        return Err(Error::EmptyInput("header row has no columns".into()));
    }
    let label_id = columns
        .iter()
        .position(|c| c == label)
        .ok_or_else(|| Error::MissingLabel(label.to_string()))?;

    let mut cells = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            row: r + 1,
            message: e.to_string(),
        })?;
        // a bare trailing blank line is not a row
        if record.len() == 1 && record.get(0).is_some_and(|c| c.trim().is_empty()) && columns.len() > 1
        {
            continue;
        }
        if record.len() != columns.len() {
            return Err(Error::RaggedRow {
                row: r + 1,
                expected: columns.len(),
                found: record.len(),
            });
        }
        cells.push(record.iter().map(|c| c.trim().to_string()).collect());
    }
    RawTable::new(columns, cells, label_id)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    /// Columns whose missing fraction is strictly above this are dropped.
    pub missing_threshold: f64,
    pub standardize: bool,
    pub dummy_encode: bool,
    pub drop_columns: Vec<String>,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self {
            missing_threshold: 0.10,
            standardize: true,
            dummy_encode: true,
            drop_columns: Vec::new(),
        }
    }
}

/// Standardized features plus ordinal labels in `1..=m+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: Vec<usize>,
    m: usize,
    feature_names: Vec<String>,
    label_name: String,
    class_levels: Vec<String>,
    warnings: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from a feature matrix and labels in `1..=max(y)`.
    /// The class count is `max(y)`, so `m = max(y) - 1`.
    pub fn new(x: DMatrix<f64>, y: Vec<usize>, feature_names: Vec<String>) -> Result<Self> {
        let m = y.iter().copied().max().unwrap_or(0).saturating_sub(1);
        let levels = (1..=m + 1).map(|l| l.to_string()).collect();
        Self::with_levels(x, y, feature_names, "label".into(), levels)
    }

    pub fn with_levels(
        x: DMatrix<f64>,
        y: Vec<usize>,
        feature_names: Vec<String>,
        label_name: String,
        class_levels: Vec<String>,
    ) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature rows but {} labels",
                x.nrows(),
                y.len()
            )));
        }
        if x.ncols() != feature_names.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature columns but {} names",
                x.ncols(),
                feature_names.len()
            )));
        }
        if y.is_empty() {
            return Err(Error::AllRowsDropped);
        }
        if class_levels.len() < 2 {
            return Err(Error::SingleClass);
        }
        let m = class_levels.len() - 1;
        if let Some(bad) = y.iter().find(|&&l| l == 0 || l > m + 1) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} outside 1..={}",
                m + 1
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite feature value".into()));
        }
        Ok(Self {
            x,
            y,
            m,
            feature_names,
            label_name,
            class_levels,
            warnings: Vec::new(),
        })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Number of classes minus one.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    /// Original label values, in class order.
    pub fn class_levels(&self) -> &[String] {
        &self.class_levels
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    /// Copy with labels replaced by `m + 2 - y`.
    pub fn reversed_labels(&self) -> Self {
        let mut out = self.clone();
        let top = self.m + 2;
        out.y = self.y.iter().map(|&l| top - l).collect();
        out.class_levels.reverse();
        out
    }

    /// Canonical CSV: feature columns then the label, floats in shortest
    /// round-trip form, LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(&self.label_name);
        out.push_str(&header.join(","));
        out.push('\n');
        for i in 0..self.n() {
            for j in 0..self.p() {
                let _ = write!(out, "{},", self.x[(i, j)]);
            }
            let _ = writeln!(out, "{}", self.y[i]);
        }
        out
    }
}

enum ColumnKind {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

fn classify(values: Vec<&str>) -> ColumnKind {
    let parsed: Option<Vec<f64>> = values.iter().map(|v| parse_number(v)).collect();
    match parsed {
        Some(nums) => ColumnKind::Numeric(nums),
        None => ColumnKind::Categorical(values.into_iter().map(str::to_string).collect()),
    }
}

/// Population mean and standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn order_labels(values: &[&str]) -> Vec<String> {
    let mut levels: Vec<&str> = values.to_vec();
    let numeric: Option<Vec<f64>> = levels.iter().map(|v| parse_number(v)).collect();
    if numeric.is_some() {
        levels.sort_by(|a, b| {
            let (a, b) = (parse_number(a).unwrap(), parse_number(b).unwrap());
            a.partial_cmp(&b).unwrap_or(Ordering::Equal)
        });
        levels.dedup_by(|a, b| parse_number(a) == parse_number(b));
    } else {
        levels.sort_unstable();
        levels.dedup();
    }
    levels.into_iter().map(str::to_string).collect()
}

/// Turns a raw table into a [`Dataset`]: drop sparse columns, drop rows with
/// remaining missing cells, standardize numeric columns, dummy-encode
/// categorical ones and remap labels to `1..=m+1`.
pub fn preprocess(table: &RawTable, opts: &PreprocessOptions) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&opts.missing_threshold) {
        return Err(Error::InvalidOption(format!(
            "missing threshold {} outside [0, 1]",
            opts.missing_threshold
        )));
    }
    for name in &opts.drop_columns {
        if !table.columns.contains(name) {
            return Err(Error::InvalidOption(format!("cannot drop unknown column `{name}`")));
        }
    }
    let n_raw = table.n_rows();
    if n_raw == 0 {
        return Err(Error::AllRowsDropped);
    }
    let mut warnings = Vec::new();
    let mut warn = |msg: String| {
        log::warn!("{msg}");
        warnings.push(msg);
    };

    let mut kept_cols = Vec::new();
    for (c, name) in table.columns.iter().enumerate() {
        if c == table.label || opts.drop_columns.contains(name) {
            continue;
        }
        let missing = table.cells.iter().filter(|r| is_missing(&r[c])).count();
        let fraction = missing as f64 / n_raw as f64;
        if fraction > opts.missing_threshold {
            warn(format!(
                "dropping column `{name}`: {:.1}% missing",
                100.0 * fraction
            ));
            continue;
        }
        kept_cols.push(c);
    }

    let rows: Vec<&Vec<String>> = table
        .cells
        .iter()
        .filter(|r| !is_missing(&r[table.label]) && kept_cols.iter().all(|&c| !is_missing(&r[c])))
        .collect();
    if rows.is_empty() {
        return Err(Error::AllRowsDropped);
    }
    if rows.len() < n_raw {
        warn(format!(
            "dropped {} rows with missing values",
            n_raw - rows.len()
        ));
    }
    let n = rows.len();

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for &c in &kept_cols {
        let name = &table.columns[c];
        let values: Vec<&str> = rows.iter().map(|r| r[c].as_str()).collect();
        match classify(values) {
            ColumnKind::Numeric(mut nums) => {
                let (mean, sd) = mean_sd(&nums);
                if sd <= 1e-12 * (1.0 + mean.abs()) {
                    warn(format!("dropping constant column `{name}`"));
                    continue;
                }
                if opts.standardize {
                    nums.iter_mut().for_each(|v| *v = (*v - mean) / sd);
                }
                columns.push(nums);
                names.push(name.clone());
            }
            ColumnKind::Categorical(cats) => {
                if !opts.dummy_encode {
                    warn(format!("dropping categorical column `{name}` (dummy encoding disabled)"));
                    continue;
                }
                let mut levels: Vec<&str> = cats.iter().map(String::as_str).collect();
                levels.sort_unstable();
                levels.dedup();
                if levels.len() < 2 {
                    warn(format!("dropping constant column `{name}`"));
                    continue;
                }
                // first level in lexicographic order is the reference
                for level in &levels[1..] {
                    columns.push(
                        cats.iter()
                            .map(|v| if v == level { 1.0 } else { 0.0 })
                            .collect(),
                    );
                    names.push(format!("{name}={level}"));
                }
            }
        }
    }

    let raw_labels: Vec<&str> = rows.iter().map(|r| r[table.label].trim()).collect();
    let levels = order_labels(&raw_labels);
    if levels.len() < 2 {
        return Err(Error::SingleClass);
    }
    let numeric_labels = parse_number(&levels[0]).is_some()
        && levels.iter().all(|l| parse_number(l).is_some());
    let y: Vec<usize> = raw_labels
        .iter()
        .map(|v| {
            let pos = if numeric_labels {
                let x = parse_number(v).unwrap();
                levels.iter().position(|l| parse_number(l) == Some(x))
            } else {
                levels.iter().position(|l| l == v)
            };
            pos.expect("label level present") + 1
        })
        .collect();

    let p = columns.len();
    let x = DMatrix::from_fn(n, p, |i, j| columns[j][i]);
    let mut ds = Dataset::with_levels(
        x,
        y,
        names,
        table.columns[table.label].clone(),
        levels,
    )?;
    ds.warnings = warnings;
    Ok(ds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            other => Err(Error::InvalidOption(format!("unknown direction `{other}`"))),
        }
    }
}

/// The indicator tensors of the sequential logit likelihood.
///
/// `delta(i, k) = 1` iff the (encoded) label of sample `i` equals `k + 1`.
/// `psi(i, k)` is `-1` when `k + 1 < y_i`, `+1` when `k + 1 == y_i`, else 0.
/// Class indices `k` are 0-based here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalEncoding {
    n: usize,
    m: usize,
    direction: Direction,
    labels: Vec<usize>,
    delta: Vec<u8>,
    psi: Vec<i8>,
}

impl OrdinalEncoding {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Labels after the direction transform.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn delta(&self, i: usize, k: usize) -> u8 {
        self.delta[i * self.m + k]
    }

    pub fn psi(&self, i: usize, k: usize) -> i8 {
        self.psi[i * self.m + k]
    }

    pub fn psi_row(&self, i: usize) -> &[i8] {
        &self.psi[i * self.m..(i + 1) * self.m]
    }

    pub fn delta_row(&self, i: usize) -> &[u8] {
        &self.delta[i * self.m..(i + 1) * self.m]
    }

    /// Rows taking part in binary subproblem `k`, with their signs.
    pub fn active_rows(&self, k: usize) -> (Vec<usize>, Vec<f64>) {
        (0..self.n)
            .filter_map(|i| match self.psi(i, k) {
                0 => None,
                s => Some((i, s as f64)),
            })
            .unzip()
    }

    /// `sum_i sum_k |psi_ik|`, i.e. `sum_i min(y_i, m)`.
    pub fn active_pairs(&self) -> usize {
        self.psi.iter().filter(|&&s| s != 0).count()
    }
}

fn encode_from(labels: Vec<usize>, m: usize, direction: Direction) -> OrdinalEncoding {
    let n = labels.len();
    let mut delta = vec![0u8; n * m];
    let mut psi = vec![0i8; n * m];
    for (i, &y) in labels.iter().enumerate() {
        for k in 0..m {
            let class = k + 1;
            if class == y {
                delta[i * m + k] = 1;
                psi[i * m + k] = 1;
            } else if class < y {
                psi[i * m + k] = -1;
            }
        }
    }
    OrdinalEncoding {
        n,
        m,
        direction,
        labels,
        delta,
        psi,
    }
}

/// Builds the encoding. Backward encoding is the forward encoding of the
/// reversed labels `m + 2 - y`.
pub fn encode_labels(data: &Dataset, direction: Direction) -> OrdinalEncoding {
    let m = data.m();
    let labels = match direction {
        Direction::Forward => data.y().to_vec(),
        Direction::Backward => data.y().iter().map(|&y| m + 2 - y).collect(),
    };
    encode_from(labels, m, direction)
}
