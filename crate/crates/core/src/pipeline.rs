//! CSV ingestion, preprocessing and seeded sampling.
//!
//! Preprocessing follows a fixed protocol: categorical columns are one-hot
//! encoded with the categories seen in the training part, date and time
//! columns are dropped, columns that are constant on the training part are
//! dropped, and everything is standardized with training means and standard
//! deviations (population, ddof = 0). Statistics never look at the rows they
//! are applied to.
//!
//! All randomness comes from ChaCha8 seeded with a `u64`, so splits and
//! subsets are reproducible across platforms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime, NaiveTime};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::kernels::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    /// Ordered categories mapped to their integer rank.
    Ordinal,
    Categorical,
    Datetime,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Text(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub data: ColumnData,
}

impl Column {
    fn len(&self) -> usize {
        match &self.data {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Text(v) => v.len(),
        }
    }

    fn select(&self, rows: &[usize]) -> Column {
        let data = match &self.data {
            ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&i| v[i]).collect()),
            ColumnData::Text(v) => ColumnData::Text(rows.iter().map(|&i| v[i].clone()).collect()),
        };
        Column { name: self.name.clone(), kind: self.kind, data }
    }
}

/// A table of typed, equally long, uniquely named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    target: Option<String>,
    row_count: usize,
}

/// Ordered category lists for ordinal columns, e.g.
/// `{"size": ["small", "medium", "large"]}`.
pub type OrdinalMap = HashMap<String, Vec<String>>;

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub has_header: bool,
    pub target: Option<String>,
    pub ordinals: OrdinalMap,
    /// Field separator, `b','` by default.
    pub delimiter: u8,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { has_header: true, target: None, ordinals: OrdinalMap::new(), delimiter: b',' }
    }
}

impl Dataset {
    pub fn new(columns: Vec<Column>, target: Option<String>) -> Result<Self> {
        let row_count = columns.first().map_or(0, Column::len);
        let mut names = BTreeSet::new();
        for c in &columns {
            if c.len() != row_count {
                return Err(Error::Data(format!("column '{}' has {} rows, expected {row_count}", c.name, c.len())));
            }
            if !names.insert(c.name.as_str()) {
                return Err(Error::Data(format!("duplicate column name '{}'", c.name)));
            }
            let numeric = matches!(c.data, ColumnData::Numeric(_));
            if numeric != matches!(c.kind, ColumnKind::Numeric | ColumnKind::Ordinal) {
                return Err(Error::Data(format!("column '{}' data does not match its kind", c.name)));
            }
        }
        if let Some(t) = &target {
            if !names.contains(t.as_str()) {
                return Err(Error::Data(format!("target column '{t}' not found")));
            }
        }
        Ok(Dataset { columns, target, row_count })
    }

    pub fn nrows(&self) -> usize {
        self.row_count
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn target_name(&self) -> Option<&str> {
        self.target.as_deref()
    }

    /// Values of the target column, which must be numeric.
    pub fn target_values(&self) -> Result<Vec<f64>> {
        let name = self.target.as_deref().ok_or_else(|| Error::Data("dataset has no target column".into()))?;
        match self.column(name).map(|c| &c.data) {
            Some(ColumnData::Numeric(v)) => Ok(v.clone()),
            _ => Err(Error::Data(format!("target column '{name}' is not numeric"))),
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = rows.iter().find(|&&i| i >= self.row_count) {
            return Err(Error::InvalidParameter(format!("row {bad} out of range for {} rows", self.row_count)));
        }
        Ok(Dataset {
            columns: self.columns.iter().map(|c| c.select(rows)).collect(),
            target: self.target.clone(),
            row_count: rows.len(),
        })
    }

    /// The first `limit` rows (all rows if there are fewer).
    pub fn head(&self, limit: usize) -> Dataset {
        let rows: Vec<usize> = (0..self.row_count.min(limit)).collect();
        self.select_rows(&rows).expect("indices are in range")
    }

    fn features(&self) -> impl Iterator<Item = &Column> {
        self.columns.iter().filter(move |c| Some(&c.name) != self.target.as_ref())
    }
}

pub fn load_csv(path: impl AsRef<Path>, has_header: bool, target: Option<&str>) -> Result<Dataset> {
    load_csv_with(path, &LoadOptions { has_header, target: target.map(str::to_owned), ..Default::default() })
}

/// Reads a CSV file. Without a header, columns are named `column_0`,
/// `column_1`, ...
pub fn load_csv_with(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    read_csv(file, opts)
}

/// Parses CSV text from any reader; see [`load_csv_with`].
pub fn read_csv(reader: impl std::io::Read, opts: &LoadOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).delimiter(opts.delimiter).flexible(true).from_reader(reader);
    let mut records = rdr.records();
    let mut names: Vec<String> = Vec::new();
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut first_line = 1;
    if opts.has_header {
        match records.next() {
            Some(rec) => names = rec?.iter().map(|s| s.trim().to_owned()).collect(),
            None => return Err(Error::Data("empty CSV file".into())),
        }
        first_line = 2;
    }
    for (k, rec) in records.enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(first_line + k as u64, |p| p.line());
        if rec.len() == 1 && rec.get(0).is_some_and(|s| s.trim().is_empty()) {
            continue;
        }
        if names.is_empty() && !opts.has_header {
            names = (0..rec.len()).map(|i| format!("column_{i}")).collect();
        }
        if rec.len() != names.len() {
            return Err(Error::Data(format!("line {line}: expected {} fields, found {}", names.len(), rec.len())));
        }
        if cells.is_empty() {
            cells = vec![Vec::new(); names.len()];
        }
        for (j, field) in rec.iter().enumerate() {
            let field = field.trim();
            if field.is_empty() {
                return Err(Error::Data(format!("line {line}: empty value in column '{}'", names[j])));
            }
            cells[j].push(field.to_owned());
        }
    }
    if cells.is_empty() {
        return Err(Error::Data("CSV file has no data rows".into()));
    }
    let columns = names
        .into_iter()
        .zip(cells)
        .map(|(name, values)| infer_column(name, values, &opts.ordinals))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(columns, opts.target.clone())
}

/// Reads an ordinal mapping sidecar: `{"column": ["low", "mid", "high"]}`.
pub fn load_ordinal_map(path: impl AsRef<Path>) -> Result<OrdinalMap> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn parse_number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn is_datetime(s: &str) -> bool {
    const DATETIME: [&str; 4] = ["%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M", "%d/%m/%Y %H:%M:%S"];
    const DATE: [&str; 4] = ["%Y-%m-%d", "%d/%m/%Y", "%Y/%m/%d", "%d-%b-%Y"];
    const TIME: [&str; 2] = ["%H:%M:%S", "%H:%M"];
    DATETIME.iter().any(|f| NaiveDateTime::parse_from_str(s, f).is_ok())
        || DATE.iter().any(|f| NaiveDate::parse_from_str(s, f).is_ok())
        || TIME.iter().any(|f| NaiveTime::parse_from_str(s, f).is_ok())
}

fn infer_column(name: String, values: Vec<String>, ordinals: &OrdinalMap) -> Result<Column> {
    if let Some(order) = ordinals.get(&name) {
        let rank: HashMap<&str, usize> = order.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let mapped = values
            .iter()
            .map(|v| {
                rank.get(v.as_str())
                    .map(|&r| r as f64)
                    .ok_or_else(|| Error::Data(format!("value '{v}' of ordinal column '{name}' is not in its mapping")))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(Column { name, kind: ColumnKind::Ordinal, data: ColumnData::Numeric(mapped) });
    }
    if let Some(nums) = values.iter().map(|v| parse_number(v)).collect::<Option<Vec<_>>>() {
        return Ok(Column { name, kind: ColumnKind::Numeric, data: ColumnData::Numeric(nums) });
    }
    let kind = if values.iter().all(|v| is_datetime(v)) { ColumnKind::Datetime } else { ColumnKind::Categorical };
    Ok(Column { name, kind, data: ColumnData::Text(values) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessOptions {
    /// Standardize to zero mean and unit variance (on by default).
    pub standardize: bool,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions { standardize: true }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PreprocessReport {
    /// Dropped source or indicator columns with the reason.
    pub dropped_columns: Vec<(String, String)>,
    pub onehot_expansions: BTreeMap<String, Vec<String>>,
    /// Names of the output columns.
    pub feature_names: Vec<String>,
    pub train_means: Vec<f64>,
    pub train_stds: Vec<f64>,
}

/// Encodes a categorical column with the given categories; unseen values
/// give an all-zero block.
fn one_hot(values: &[String], categories: &[String]) -> Vec<Vec<f64>> {
    categories.iter().map(|c| values.iter().map(|v| if v == c { 1.0 } else { 0.0 }).collect()).collect()
}

/// Turns `train` and `apply_to` into numeric matrices using statistics of
/// `train` only. The target column is excluded from both.
pub fn preprocess(train: &Dataset, apply_to: &Dataset, options: PreprocessOptions) -> Result<(DataMatrix, DataMatrix, PreprocessReport)> {
    let train_cols: Vec<&Column> = train.features().collect();
    let apply_cols: Vec<&Column> = apply_to.features().collect();
    let same_schema = train_cols.len() == apply_cols.len()
        && train_cols.iter().zip(&apply_cols).all(|(a, b)| a.name == b.name && a.kind == b.kind);
    if !same_schema || train.target != apply_to.target {
        return Err(Error::Data("datasets have different schemas".into()));
    }
    if train.nrows() == 0 {
        return Err(Error::Data("training part is empty".into()));
    }

    let mut report = PreprocessReport::default();
    let mut names = Vec::new();
    let mut train_out: Vec<Vec<f64>> = Vec::new();
    let mut apply_out: Vec<Vec<f64>> = Vec::new();
    for (tc, ac) in train_cols.iter().zip(&apply_cols) {
        match (&tc.data, &ac.data, tc.kind) {
            (_, _, ColumnKind::Datetime) => report.dropped_columns.push((tc.name.clone(), "datetime".into())),
            (ColumnData::Numeric(t), ColumnData::Numeric(a), _) => {
                names.push(tc.name.clone());
                train_out.push(t.clone());
                apply_out.push(a.clone());
            }
            (ColumnData::Text(t), ColumnData::Text(a), ColumnKind::Categorical) => {
                let cats: Vec<String> = t.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
                let expanded: Vec<String> = cats.iter().map(|c| format!("{}={c}", tc.name)).collect();
                names.extend(expanded.iter().cloned());
                report.onehot_expansions.insert(tc.name.clone(), expanded);
                train_out.extend(one_hot(t, &cats));
                apply_out.extend(one_hot(a, &cats));
            }
            _ => return Err(Error::Data(format!("column '{}' has inconsistent data", tc.name))),
        }
    }

    let mut keep = Vec::new();
    for (j, col) in train_out.iter().enumerate() {
        if col.iter().all(|&v| v == col[0]) {
            report.dropped_columns.push((names[j].clone(), "constant".into()));
        } else {
            keep.push(j);
        }
    }
    if keep.is_empty() {
        return Err(Error::Data("no usable columns remain after preprocessing".into()));
    }

    let n_train = train.nrows() as f64;
    for &j in &keep {
        let col = &train_out[j];
        let (mean, std) = if options.standardize {
            let mean = col.iter().sum::<f64>() / n_train;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n_train;
            (mean, var.sqrt())
        } else {
            (0.0, 1.0)
        };
        report.feature_names.push(names[j].clone());
        report.train_means.push(mean);
        report.train_stds.push(std);
    }

    let build = |cols: &[Vec<f64>], rows: usize| -> Result<DataMatrix> {
        let p = keep.len();
        let mut values = vec![0.0; rows * p];
        for (k, &j) in keep.iter().enumerate() {
            for (i, v) in cols[j].iter().enumerate() {
                values[i * p + k] = (v - report.train_means[k]) / report.train_stds[k];
            }
        }
        DataMatrix::from_row_major(rows, p, values)
    };
    let train_matrix = build(&train_out, train.nrows())?;
    let apply_matrix = if apply_to.nrows() == 0 {
        // DataMatrix needs at least one row; an empty target set is a caller error.
        return Err(Error::Data("dataset to transform is empty".into()));
    } else {
        build(&apply_out, apply_to.nrows())?
    };
    Ok((train_matrix, apply_matrix, report))
}

/// Random split into sorted (train, test) index lists. The test part has
/// ⌈n · test_fraction⌉ points.
pub fn train_test_split(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return param_err(format!("test fraction must lie in (0, 1), got {test_fraction}"));
    }
    // The small offset keeps products such as 10 · 0.3 = 3.0000000000000004 at 3.
    let n_test = ((n as f64 * test_fraction) - 1e-9).ceil().max(0.0) as usize;
    if n_test == 0 || n_test >= n {
        return param_err(format!("a {test_fraction} split of {n} points leaves one side empty"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// A permutation of 0..n whose first `m` entries are a uniform sample without
/// replacement; the rest keep their original order.
pub fn sample_subset(n: usize, m: usize, seed: u64) -> Result<Vec<usize>> {
    if m == 0 || m > n {
        return param_err(format!("subset size {m} must lie in 1..={n}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subset = rand::seq::index::sample(&mut rng, n, m).into_vec();
    let mut chosen = vec![false; n];
    for &i in &subset {
        chosen[i] = true;
    }
    let mut order = subset;
    order.extend((0..n).filter(|&i| !chosen[i]));
    Ok(order)
}
