//! Experiment drivers behind the `nystrompca` binary.
//!
//! * `methods`: fraction of feature-space variance captured on a 50/50 split
//!   by subset PCA, Nyström kernel PCA, full kernel PCA and linear PCA.
//! * `bound`: the confidence bound against the realized excess
//!   reconstruction error over many subset draws, uncentred throughout.
//! * `regression`: Nyström kernel PCR and Nyström kernel ridge regression on
//!   a 75/25 split.
//!
//! Each driver has a pure core working on matrices (`*_on_matrices`) and a
//! file-level wrapper that loads a CSV, writes plot-ready CSV files and a
//! `run.json` echoing the configuration. Floats are written with 17
//! significant digits and no timestamps are recorded, so identical inputs
//! give byte-identical outputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::{confidence_bound, delta_from_confidence};
use crate::eigen::{sym_eig_desc, Cutoff};
use crate::error::{param_err, Error, Result};
use crate::kernels::{median_bandwidth, DataMatrix, KernelKind, KernelSpec};
use crate::kpca_full::{fit_full_kpca_with, Centering, FullKpcaOptions};
use crate::nystrom::{exact_total_variance, fit_nystrom_kpca_with, nystrom_matrices, NystromOptions, VarianceMode};
use crate::pipeline::{load_csv_with, load_ordinal_map, preprocess, sample_subset, train_test_split, Dataset, LoadOptions, PreprocessOptions};
use crate::regression::{fit_nystrom_kpcr, fit_nystrom_krr, r_squared};
use crate::subset_pca::fit_subset_pca;
use crate::nystrom::nystrom_reconstruction_error;

/// Realized differences may exceed a zero bound by round-off only.
const COVERAGE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Rbf,
    Polynomial,
    Cauchy,
}

impl FromStr for KernelFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "rbf" | "gaussian" => Ok(KernelFamily::Rbf),
            "polynomial" | "poly" => Ok(KernelFamily::Polynomial),
            "cauchy" => Ok(KernelFamily::Cauchy),
            _ => Err(format!("unknown kernel '{s}' (expected rbf, polynomial or cauchy)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    Fixed(f64),
    /// Median pairwise distance over the Nyström subset.
    Median,
}

/// Kernel settings whose bandwidth may depend on the sampled subset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelChoice {
    pub family: KernelFamily,
    pub bandwidth: Bandwidth,
    pub offset: f64,
    pub degree: u32,
    pub normalize: bool,
}

impl Default for KernelChoice {
    fn default() -> Self {
        KernelChoice { family: KernelFamily::Rbf, bandwidth: Bandwidth::Fixed(1.0), offset: 1.0, degree: 2, normalize: false }
    }
}

impl KernelChoice {
    pub fn fixed(spec: &KernelSpec) -> Self {
        let (family, bandwidth, offset, degree) = match spec.kind {
            KernelKind::Rbf { sigma } => (KernelFamily::Rbf, Bandwidth::Fixed(sigma), 1.0, 2),
            KernelKind::Cauchy { sigma } => (KernelFamily::Cauchy, Bandwidth::Fixed(sigma), 1.0, 2),
            KernelKind::Polynomial { offset, degree } => (KernelFamily::Polynomial, Bandwidth::Fixed(1.0), offset, degree),
        };
        KernelChoice { family, bandwidth, offset, degree, normalize: spec.normalized }
    }

    /// Builds the kernel, computing a median bandwidth from `subset` if asked.
    pub fn resolve(&self, subset: &DataMatrix) -> Result<KernelSpec> {
        let sigma = || match self.bandwidth {
            Bandwidth::Fixed(s) => Ok(s),
            Bandwidth::Median => median_bandwidth(subset),
        };
        let kind = match self.family {
            KernelFamily::Rbf => KernelKind::Rbf { sigma: sigma()? },
            KernelFamily::Cauchy => KernelKind::Cauchy { sigma: sigma()? },
            KernelFamily::Polynomial => KernelKind::Polynomial { offset: self.offset, degree: self.degree },
        };
        KernelSpec::new(kind, self.normalize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Methods,
    Bound,
    Regression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub data_path: PathBuf,
    pub has_header: bool,
    /// Field separator of the data file.
    pub delimiter: u8,
    pub target: Option<String>,
    pub ordinal_map: Option<PathBuf>,
    pub kernel: KernelChoice,
    pub m: usize,
    /// PCA dimension for the regression scatter file.
    pub d: usize,
    pub max_d: usize,
    pub gamma: f64,
    pub confidence: f64,
    pub samples: usize,
    pub seed: u64,
    pub limit: Option<usize>,
    pub variance_mode: VarianceMode,
    /// Include full kernel PCA (an n × n eigenproblem) in `methods`.
    pub kernel_pca_reference: bool,
    /// Regression grids; empty means just the configured value.
    pub m_grid: Vec<usize>,
    pub d_grid: Vec<usize>,
    pub gamma_grid: Vec<f64>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(command: Command, data_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            command,
            data_path: data_path.into(),
            has_header: true,
            delimiter: b',',
            target: None,
            ordinal_map: None,
            kernel: KernelChoice::default(),
            m: 100,
            d: 90,
            max_d: 10,
            gamma: 1e-11,
            confidence: 0.9,
            samples: 100,
            seed: 1,
            limit: None,
            variance_mode: VarianceMode::Exact,
            kernel_pca_reference: true,
            m_grid: Vec::new(),
            d_grid: Vec::new(),
            gamma_grid: Vec::new(),
            output_dir: output_dir.into(),
        }
    }

    /// Checks flag combinations for the configured command.
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return param_err("--m must be at least 1");
        }
        if self.max_d == 0 && self.command != Command::Regression {
            return param_err("--max-d must be at least 1");
        }
        if let Bandwidth::Fixed(s) = self.kernel.bandwidth {
            if !(s > 0.0 && s.is_finite()) {
                return param_err(format!("--sigma must be positive, got {s}"));
            }
        }
        match self.command {
            Command::Methods => {}
            Command::Bound => {
                delta_from_confidence(self.confidence)?;
                if self.samples == 0 {
                    return param_err("--samples must be at least 1");
                }
                if self.kernel.family == KernelFamily::Polynomial && !self.kernel.normalize {
                    return param_err("the bound needs a bounded kernel; pass --normalize with the polynomial kernel");
                }
                if self.max_d > self.m {
                    return param_err(format!("--max-d {} exceeds --m {}", self.max_d, self.m));
                }
            }
            Command::Regression => {
                if self.target.is_none() {
                    return param_err("regression needs --target");
                }
                if self.d == 0 || self.d > self.m {
                    return param_err(format!("--d {} must lie in 1..={}", self.d, self.m));
                }
                if !(self.gamma >= 0.0) || self.gamma_grid.iter().any(|g| !(*g >= 0.0)) {
                    return param_err("ridge parameters must be >= 0");
                }
            }
        }
        Ok(())
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NaN".to_string(), fmt_f64)
}

fn cumulative(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    values
        .into_iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Per-column variances (about the column means) of a score matrix.
fn column_variances(scores: &DMatrix<f64>) -> Vec<f64> {
    let n = scores.nrows() as f64;
    scores
        .column_iter()
        .map(|c| {
            let mean = c.sum() / n;
            c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
        })
        .collect()
}

fn stack_rows(rows: Vec<DVector<f64>>, width: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows.len(), width);
    for (i, r) in rows.into_iter().enumerate() {
        for j in 0..width.min(r.len()) {
            out[(i, j)] = r[j];
        }
    }
    out
}

fn fraction_at(cum: &[f64], d: usize, total: f64) -> f64 {
    if total <= 0.0 || cum.is_empty() {
        return 0.0;
    }
    cum[d.min(cum.len()) - 1] / total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// Fractions of variance captured by the first `d` components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodsRow {
    pub split: Split,
    pub d: usize,
    pub subset_pca: f64,
    pub nystrom_pca: f64,
    pub kernel_pca: Option<f64>,
    pub linear_pca: f64,
}

#[derive(Debug, Clone)]
pub struct MethodsOutcome {
    pub spec: KernelSpec,
    pub subset: Vec<usize>,
    pub rows: Vec<MethodsRow>,
}

/// Linear PCA variances on the training data and test-score variances.
fn linear_pca_fractions(train: &DataMatrix, test: &DataMatrix) -> Result<(Vec<f64>, f64, Vec<f64>, f64)> {
    let xtr = train.to_matrix();
    let xte = test.to_matrix();
    let mean = xtr.row_mean();
    let n = xtr.nrows() as f64;
    let centred = DMatrix::from_fn(xtr.nrows(), xtr.ncols(), |i, j| xtr[(i, j)] - mean[j]);
    let cov = centred.tr_mul(&centred) / n;
    let eig = sym_eig_desc(&cov)?;
    let train_vars: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
    let train_total = cov.trace();
    let test_scores = &xte * &eig.vectors;
    let test_vars = column_variances(&test_scores);
    let test_total: f64 = column_variances(&xte).iter().sum();
    Ok((cumulative(train_vars), train_total, cumulative(test_vars), test_total))
}

/// Methods comparison on already preprocessed train and test matrices.
pub fn methods_on_matrices(
    kernel: &KernelChoice,
    train: &DataMatrix,
    test: &DataMatrix,
    m: usize,
    max_d: usize,
    seed: u64,
    variance_mode: VarianceMode,
    with_reference: bool,
) -> Result<MethodsOutcome> {
    let n = train.nrows();
    if m > n {
        return param_err(format!("subset size {m} exceeds the {n} training points"));
    }
    let subset: Vec<usize> = sample_subset(n, m, seed)?[..m].to_vec();
    let spec = kernel.resolve(&train.select_rows(&subset)?)?;
    let opts = NystromOptions { variance_mode, ..Default::default() };
    let model = fit_nystrom_kpca_with(&spec, train, &subset, opts)?;
    let centred = nystrom_matrices(&spec, train, &subset, Centering::Centred, opts.cutoff)?;
    let subset_pca = fit_subset_pca(&centred, n, model.total_variance(), opts.cutoff)?;
    drop(centred);

    let max_d = max_d.min(m);
    let train_total = model.total_variance();
    let ny_train = cumulative(model.lambdas().iter().copied());
    let sub_train = cumulative(subset_pca.variances.iter().copied());

    let test_total = exact_total_variance(&spec, test)?;
    let kt: Vec<DVector<f64>> =
        (0..test.nrows()).into_par_iter().map(|i| model.centred_kernel_vector(test.row(i))).collect::<Result<_>>()?;
    let ny_test_scores = stack_rows(kt.iter().map(|k| model.coeffs().tr_mul(k)).collect(), m);
    let sub_test_scores = stack_rows(kt.iter().map(|k| subset_pca.scores_from_centred(k)).collect(), m);
    drop(kt);
    let ny_test = cumulative(column_variances(&ny_test_scores));
    let sub_test = cumulative(column_variances(&sub_test_scores));

    let full = if with_reference {
        let full = fit_full_kpca_with(&spec, train, FullKpcaOptions::default())?;
        let r = full.retained_rank().min(max_d);
        let train_cum = cumulative(full.explained_variance().iter().copied());
        let rows: Vec<DVector<f64>> = (0..test.nrows())
            .into_par_iter()
            .map(|i| full.scores_new(test.row(i)).map(|w| w.rows(0, r).clone_owned()))
            .collect::<Result<_>>()?;
        let test_cum = cumulative(column_variances(&stack_rows(rows, r)));
        Some((train_cum, full.total_variance(), test_cum))
    } else {
        None
    };
    let (lin_train, lin_train_total, lin_test, lin_test_total) = linear_pca_fractions(train, test)?;

    let mut rows = Vec::with_capacity(2 * max_d);
    for split in [Split::Train, Split::Test] {
        for d in 1..=max_d {
            let row = match split {
                Split::Train => MethodsRow {
                    split,
                    d,
                    subset_pca: fraction_at(&sub_train, d, train_total),
                    nystrom_pca: fraction_at(&ny_train, d, train_total),
                    kernel_pca: full.as_ref().map(|(c, t, _)| fraction_at(c, d, *t)),
                    linear_pca: fraction_at(&lin_train, d, lin_train_total),
                },
                Split::Test => MethodsRow {
                    split,
                    d,
                    subset_pca: fraction_at(&sub_test, d, test_total),
                    nystrom_pca: fraction_at(&ny_test, d, test_total),
                    kernel_pca: full.as_ref().map(|(_, _, c)| fraction_at(c, d, test_total)),
                    linear_pca: fraction_at(&lin_test, d, lin_test_total),
                },
            };
            rows.push(row);
        }
    }
    Ok(MethodsOutcome { spec, subset, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundDraw {
    pub seed: u64,
    /// Index d − 1 holds the value for dimension d.
    pub bound: Vec<f64>,
    pub nystrom_diff: Vec<f64>,
    pub subset_diff: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub d: usize,
    pub conf_bound_mean: f64,
    pub nystrom_diff_mean: f64,
    pub subset_diff_mean: f64,
    /// Fraction of draws where the realized Nyström difference is within the bound.
    pub coverage: f64,
}

#[derive(Debug, Clone)]
pub struct BoundOutcome {
    pub spec: KernelSpec,
    pub draws: Vec<BoundDraw>,
    pub rows: Vec<BoundRow>,
}

/// Bound experiment on a preprocessed matrix. Every quantity is uncentred.
/// Draw `s` uses seed `seed + s`.
pub fn bound_on_matrix(
    kernel: &KernelChoice,
    x: &DataMatrix,
    m: usize,
    max_d: usize,
    confidence: f64,
    samples: usize,
    seed: u64,
) -> Result<BoundOutcome> {
    let n = x.nrows();
    if m == 0 || m > n {
        return param_err(format!("subset size {m} must lie in 1..={n}"));
    }
    if max_d == 0 || max_d > m {
        return param_err(format!("maximum dimension {max_d} must lie in 1..={m}"));
    }
    let delta = delta_from_confidence(confidence)?;
    let first = sample_subset(n, m, seed)?;
    let spec = kernel.resolve(&x.select_rows(&first[..m])?)?;
    let sup = spec.sup_bound();
    if !sup.is_finite() {
        return param_err("the bound needs a bounded kernel; normalize the polynomial kernel");
    }
    let cutoff = Cutoff::default();

    let full = fit_full_kpca_with(&spec, x, FullKpcaOptions { centering: Centering::Uncentred, cutoff })?;
    let total = full.total_variance();
    let full_cum = cumulative(full.explained_variance().iter().copied());
    let full_err = |d: usize| total - if full_cum.is_empty() { 0.0 } else { full_cum[d.min(full_cum.len()) - 1] };
    drop(full);

    let draws: Vec<BoundDraw> = (0..samples as u64)
        .into_par_iter()
        .map(|s| -> Result<BoundDraw> {
            let draw_seed = seed.wrapping_add(s);
            let subset = sample_subset(n, m, draw_seed)?[..m].to_vec();
            let opts = NystromOptions { centering: Centering::Uncentred, cutoff, ..Default::default() };
            let model = fit_nystrom_kpca_with(&spec, x, &subset, opts)?;
            let blocks = nystrom_matrices(&spec, x, &subset, Centering::Uncentred, cutoff)?;
            // (1/m) K_mm is what subset PCA decomposes in the uncentred setting.
            let sub = fit_subset_pca(&blocks, n, model.total_variance(), cutoff)?;
            let eigs: Vec<f64> = sub.subset_eigs.iter().copied().collect();
            let mut draw = BoundDraw { seed: draw_seed, bound: vec![], nystrom_diff: vec![], subset_diff: vec![] };
            for d in 1..=max_d {
                let reference = full_err(d);
                draw.bound.push(confidence_bound(&eigs, m, n, sup, delta, d)?.bound);
                draw.nystrom_diff.push(nystrom_reconstruction_error(&model, d)? - reference);
                draw.subset_diff.push(sub.recon_error_by_d[d] - reference);
            }
            Ok(draw)
        })
        .collect::<Result<_>>()?;

    let k = samples as f64;
    let rows = (0..max_d)
        .map(|j| BoundRow {
            d: j + 1,
            conf_bound_mean: draws.iter().map(|d| d.bound[j]).sum::<f64>() / k,
            nystrom_diff_mean: draws.iter().map(|d| d.nystrom_diff[j]).sum::<f64>() / k,
            subset_diff_mean: draws.iter().map(|d| d.subset_diff[j]).sum::<f64>() / k,
            coverage: draws.iter().filter(|d| d.nystrom_diff[j] <= d.bound[j] + COVERAGE_TOLERANCE).count() as f64 / k,
        })
        .collect();
    Ok(BoundOutcome { spec, draws, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegressionMethod {
    NystromKpcr,
    NystromKrr,
}

impl RegressionMethod {
    fn as_str(self) -> &'static str {
        match self {
            RegressionMethod::NystromKpcr => "nystrom_kpcr",
            RegressionMethod::NystromKrr => "nystrom_krr",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionGridRow {
    pub method: RegressionMethod,
    pub m: usize,
    /// d for PCR, γ for ridge regression.
    pub param: f64,
    pub train_r2: f64,
    pub test_r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterRow {
    pub method: RegressionMethod,
    /// Position in the test set.
    pub index: usize,
    pub y_true: f64,
    pub y_pred: f64,
}

#[derive(Debug, Clone)]
pub struct RegressionOutcome {
    pub spec: KernelSpec,
    pub kpcr_test_r2: f64,
    pub krr_test_r2: f64,
    pub grid: Vec<RegressionGridRow>,
    pub scatter: Vec<ScatterRow>,
}

/// R², with a constant target reported as 0 instead of an error.
pub fn r_squared_or_zero(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    match r_squared(y_true, y_pred) {
        Err(Error::DegenerateInput(_)) => Ok(0.0),
        other => other,
    }
}

/// Inputs of a regression run on preprocessed data.
#[derive(Debug, Clone, Copy)]
pub struct RegressionData<'a> {
    pub x_train: &'a DataMatrix,
    pub y_train: &'a [f64],
    pub x_test: &'a DataMatrix,
    pub y_test: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionParams {
    pub m: usize,
    pub d: usize,
    pub gamma: f64,
    pub m_grid: Vec<usize>,
    pub d_grid: Vec<usize>,
    pub gamma_grid: Vec<f64>,
    pub seed: u64,
}

/// Fits both regressions at the configured (m, d, γ) and over the grids.
/// Grid points with d > m are skipped.
pub fn regression_on_matrices(kernel: &KernelChoice, data: RegressionData<'_>, params: &RegressionParams) -> Result<RegressionOutcome> {
    let n = data.x_train.nrows();
    if params.d == 0 || params.d > params.m {
        return param_err(format!("dimension {} must lie in 1..={}", params.d, params.m));
    }
    if params.m > n {
        return param_err(format!("subset size {} exceeds the {n} training points", params.m));
    }
    let fit_at = |m: usize| -> Result<(KernelSpec, Vec<usize>, crate::nystrom::NystromPcaModel)> {
        let subset = sample_subset(n, m, params.seed)?[..m].to_vec();
        let spec = kernel.resolve(&data.x_train.select_rows(&subset)?)?;
        let model = fit_nystrom_kpca_with(&spec, data.x_train, &subset, NystromOptions::default())?;
        Ok((spec, subset, model))
    };
    let scores = |pred_train: &[f64], pred_test: &[f64]| -> Result<(f64, f64)> {
        Ok((r_squared_or_zero(data.y_train, pred_train)?, r_squared_or_zero(data.y_test, pred_test)?))
    };

    let (spec, subset, model) = fit_at(params.m)?;
    let kpcr = fit_nystrom_kpcr(&model, data.y_train, params.d)?;
    let kpcr_pred = kpcr.predict_many(data.x_test)?;
    let krr = fit_nystrom_krr(&spec, data.x_train, &subset, data.y_train, params.gamma)?;
    let krr_pred = krr.predict_many(data.x_test)?;
    let kpcr_test_r2 = r_squared_or_zero(data.y_test, &kpcr_pred)?;
    let krr_test_r2 = r_squared_or_zero(data.y_test, &krr_pred)?;
    let mut scatter = Vec::with_capacity(2 * data.y_test.len());
    for (method, pred) in [(RegressionMethod::NystromKpcr, &kpcr_pred), (RegressionMethod::NystromKrr, &krr_pred)] {
        scatter.extend(data.y_test.iter().zip(pred.iter()).enumerate().map(|(index, (&y_true, &y_pred))| ScatterRow {
            method,
            index,
            y_true,
            y_pred,
        }));
    }

    let or_default = |grid: &[usize], v: usize| if grid.is_empty() { vec![v] } else { grid.to_vec() };
    let m_grid = or_default(&params.m_grid, params.m);
    let d_grid = or_default(&params.d_grid, params.d);
    let gamma_grid = if params.gamma_grid.is_empty() { vec![params.gamma] } else { params.gamma_grid.clone() };
    let mut grid = Vec::new();
    for &m in &m_grid {
        if m == 0 || m > n {
            return param_err(format!("grid subset size {m} must lie in 1..={n}"));
        }
        let (spec_m, subset_m, model_m) = fit_at(m)?;
        for &d in d_grid.iter().filter(|&&d| d >= 1 && d <= m) {
            let fit = fit_nystrom_kpcr(&model_m, data.y_train, d)?;
            let (train_r2, test_r2) = scores(&fit.predict_many(data.x_train)?, &fit.predict_many(data.x_test)?)?;
            grid.push(RegressionGridRow { method: RegressionMethod::NystromKpcr, m, param: d as f64, train_r2, test_r2 });
        }
        for &gamma in &gamma_grid {
            let fit = fit_nystrom_krr(&spec_m, data.x_train, &subset_m, data.y_train, gamma)?;
            let (train_r2, test_r2) = scores(&fit.predict_many(data.x_train)?, &fit.predict_many(data.x_test)?)?;
            grid.push(RegressionGridRow { method: RegressionMethod::NystromKrr, m, param: gamma, train_r2, test_r2 });
        }
    }
    Ok(RegressionOutcome { spec, kpcr_test_r2, krr_test_r2, grid, scatter })
}

fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    let ordinals = match &config.ordinal_map {
        Some(p) => load_ordinal_map(p)?,
        None => Default::default(),
    };
    let opts = LoadOptions { has_header: config.has_header, target: config.target.clone(), ordinals, delimiter: config.delimiter };
    let ds = load_csv_with(&config.data_path, &opts)?;
    Ok(match config.limit {
        Some(l) => ds.head(l),
        None => ds,
    })
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "data".into(), |s| s.to_string_lossy().into_owned())
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

fn write_csv(dir: &Path, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Data(e.to_string()))?;
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, bytes)?;
    Ok(path)
}

#[derive(Debug, Clone, Serialize)]
struct RunRecord<'a> {
    version: &'static str,
    rng: &'static str,
    config: &'a ExperimentConfig,
    dataset: String,
    rows_used: usize,
    features: Vec<String>,
    kernel: KernelSpec,
    summary: serde_json::Value,
}

/// Files written by a run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Short human-readable result lines.
    pub message: String,
}

/// Runs the configured command end to end: load, preprocess, fit, write.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    config.validate()?;
    let ds = load_dataset(config)?;
    let name = dataset_name(&config.data_path);
    let out = &config.output_dir;
    let mut files = Vec::new();
    let mut message = String::new();
    let (rows_used, features, spec, summary) = match config.command {
        Command::Methods => {
            let (train_idx, test_idx) = train_test_split(ds.nrows(), 0.5, config.seed)?;
            let (xtr, xte, report) =
                preprocess(&ds.select_rows(&train_idx)?, &ds.select_rows(&test_idx)?, PreprocessOptions::default())?;
            let o = methods_on_matrices(
                &config.kernel,
                &xtr,
                &xte,
                config.m,
                config.max_d,
                config.seed,
                config.variance_mode,
                config.kernel_pca_reference,
            )?;
            let header = ["dataset", "split", "mode", "d", "subset_pca", "nystrom_pca", "kernel_pca", "linear_pca"];
            files.push(write_csv(
                out,
                "methods.csv",
                &header,
                o.rows.iter().map(|r| {
                    vec![
                        name.clone(),
                        r.split.as_str().into(),
                        "centred".into(),
                        r.d.to_string(),
                        fmt_f64(r.subset_pca),
                        fmt_f64(r.nystrom_pca),
                        fmt_opt(r.kernel_pca),
                        fmt_f64(r.linear_pca),
                    ]
                }),
            )?);
            for r in o.rows.iter().filter(|r| r.split == Split::Test) {
                let _ = writeln!(
                    message,
                    "d={:>3}  subset {:.4}  nystrom {:.4}  kernel {}  linear {:.4}",
                    r.d,
                    r.subset_pca,
                    r.nystrom_pca,
                    r.kernel_pca.map_or("-".into(), |v| format!("{v:.4}")),
                    r.linear_pca
                );
            }
            (ds.nrows(), report.feature_names, o.spec, serde_json::json!({ "subset": o.subset }))
        }
        Command::Bound => {
            let (x, _, report) = preprocess(&ds, &ds, PreprocessOptions::default())?;
            let o = bound_on_matrix(&config.kernel, &x, config.m, config.max_d, config.confidence, config.samples, config.seed)?;
            let header = ["d", "mode", "conf_bound_mean", "nystrom_diff_mean", "subset_diff_mean", "coverage"];
            files.push(write_csv(
                out,
                "bound.csv",
                &header,
                o.rows.iter().map(|r| {
                    vec![
                        r.d.to_string(),
                        "uncentred".into(),
                        fmt_f64(r.conf_bound_mean),
                        fmt_f64(r.nystrom_diff_mean),
                        fmt_f64(r.subset_diff_mean),
                        fmt_f64(r.coverage),
                    ]
                }),
            )?);
            for r in &o.rows {
                let _ = writeln!(
                    message,
                    "d={:>3}  bound {:.5}  nystrom diff {:.5}  subset diff {:.5}  coverage {:.2}",
                    r.d, r.conf_bound_mean, r.nystrom_diff_mean, r.subset_diff_mean, r.coverage
                );
            }
            (ds.nrows(), report.feature_names, o.spec, serde_json::json!({ "draws": o.draws.len() }))
        }
        Command::Regression => {
            let (train_idx, test_idx) = train_test_split(ds.nrows(), 0.25, config.seed)?;
            let train = ds.select_rows(&train_idx)?;
            let test = ds.select_rows(&test_idx)?;
            let (xtr, xte, report) = preprocess(&train, &test, PreprocessOptions::default())?;
            let (ytr, yte) = (train.target_values()?, test.target_values()?);
            let params = RegressionParams {
                m: config.m,
                d: config.d,
                gamma: config.gamma,
                m_grid: config.m_grid.clone(),
                d_grid: config.d_grid.clone(),
                gamma_grid: config.gamma_grid.clone(),
                seed: config.seed,
            };
            let data = RegressionData { x_train: &xtr, y_train: &ytr, x_test: &xte, y_test: &yte };
            let o = regression_on_matrices(&config.kernel, data, &params)?;
            files.push(write_csv(
                out,
                "regression_grid.csv",
                &["method", "m", "d_or_gamma", "train_r2", "test_r2"],
                o.grid.iter().map(|r| {
                    let param = match r.method {
                        RegressionMethod::NystromKpcr => (r.param as usize).to_string(),
                        RegressionMethod::NystromKrr => fmt_f64(r.param),
                    };
                    vec![r.method.as_str().into(), r.m.to_string(), param, fmt_f64(r.train_r2), fmt_f64(r.test_r2)]
                }),
            )?);
            files.push(write_csv(
                out,
                "regression_scatter.csv",
                &["method", "test_row", "data_row", "y_true", "y_pred"],
                o.scatter.iter().map(|r| {
                    vec![
                        r.method.as_str().into(),
                        r.index.to_string(),
                        test_idx[r.index].to_string(),
                        fmt_f64(r.y_true),
                        fmt_f64(r.y_pred),
                    ]
                }),
            )?);
            let _ = writeln!(
                message,
                "test R²: nystrom kpcr {:.4} (m={}, d={}), nystrom krr {:.4} (gamma={:e})",
                o.kpcr_test_r2, config.m, config.d, o.krr_test_r2, config.gamma
            );
            let summary = serde_json::json!({ "kpcr_test_r2": o.kpcr_test_r2, "krr_test_r2": o.krr_test_r2 });
            (ds.nrows(), report.feature_names, o.spec, summary)
        }
    };
    let record = RunRecord {
        version: env!("CARGO_PKG_VERSION"),
        rng: "ChaCha8 (rand_chacha), seed_from_u64",
        config,
        dataset: name,
        rows_used,
        features,
        kernel: spec,
        summary,
    };
    files.push(write_text(out, "run.json", &(serde_json::to_string_pretty(&record)? + "\n"))?);
    Ok(RunSummary { files, message })
}
