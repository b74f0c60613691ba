//! Regression on kernel principal scores and Nyström kernel ridge regression.
//!
//! All three models centre the targets, y' = y − ȳ, and predict ȳ + βᵀ z(x*)
//! where z is
//!
//! | kind           | z(x*)                      | β                                   |
//! |----------------|----------------------------|-------------------------------------|
//! | `Kpcr`         | first d full scores w*     | Λ_d^{-1/2} Q_dᵀ y'                  |
//! | `NystromKpcr`  | first d Nyström scores w*  | (n Λ̃_d)^{-1} W_dᵀ y'                |
//! | `NystromKrr`   | κ_m(x*)                    | (K_mn K_nm + γ K_mm)⁺ K_mn y'       |

use nalgebra::DVector;
use rayon::prelude::*;

use crate::eigen::{sym_eig_desc, Cutoff};
use crate::error::{dim_err, param_err, Error, Result};
use crate::kernels::{kernel_vector, DataMatrix, KernelSpec};
use crate::kpca_full::FullKpcaModel;
use crate::nystrom::{nystrom_blocks, NystromPcaModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegressionKind {
    Kpcr,
    NystromKpcr,
    NystromKrr,
}

#[derive(Debug, Clone)]
enum Basis<'a> {
    Full(&'a FullKpcaModel),
    Nystrom(&'a NystromPcaModel),
    Subset { spec: KernelSpec, subset_data: DataMatrix },
}

/// A fitted regression. PCR variants borrow the PCA model they were fitted on.
#[derive(Debug, Clone)]
pub struct RegressionModel<'a> {
    kind: RegressionKind,
    intercept: f64,
    coeffs: DVector<f64>,
    d: usize,
    gamma: f64,
    basis: Basis<'a>,
}

fn centred_targets(y: &[f64], n: usize) -> Result<(f64, DVector<f64>)> {
    if y.len() != n {
        return dim_err(format!("{} targets for {n} data points", y.len()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return param_err("targets must be finite");
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    Ok((mean, DVector::from_iterator(n, y.iter().map(|v| v - mean))))
}

/// Kernel principal component regression on the first `d` full-KPCA scores.
pub fn fit_kpcr<'a>(model: &'a FullKpcaModel, y: &[f64], d: usize) -> Result<RegressionModel<'a>> {
    let r = model.retained_rank();
    if d == 0 || d > r {
        return param_err(format!("dimension d = {d} outside 1..={r} (retained rank)"));
    }
    let (intercept, yc) = centred_targets(y, model.n())?;
    let q = model.components().columns(0, d);
    let mut coeffs = q.tr_mul(&yc);
    for j in 0..d {
        coeffs[j] /= model.eigenvalues()[j].sqrt();
    }
    Ok(RegressionModel { kind: RegressionKind::Kpcr, intercept, coeffs, d, gamma: 0.0, basis: Basis::Full(model) })
}

/// Principal component regression on the first `d` Nyström scores.
///
/// The model must still hold its training scores (not a deserialized copy).
pub fn fit_nystrom_kpcr<'a>(model: &'a NystromPcaModel, y: &[f64], d: usize) -> Result<RegressionModel<'a>> {
    let r = model.retained_rank();
    if d == 0 || d > r {
        return param_err(format!("dimension d = {d} outside 1..={r} (components above the cutoff)"));
    }
    let w = model
        .scores()
        .ok_or_else(|| Error::InvalidParameter("model carries no training scores".into()))?;
    let (intercept, yc) = centred_targets(y, model.n())?;
    let mut coeffs = w.columns(0, d).tr_mul(&yc);
    let n = model.n() as f64;
    for j in 0..d {
        coeffs[j] /= n * model.lambdas()[j];
    }
    Ok(RegressionModel { kind: RegressionKind::NystromKpcr, intercept, coeffs, d, gamma: 0.0, basis: Basis::Nystrom(model) })
}

/// Kernel ridge regression restricted to the span of the subset.
///
/// The m × m system is solved with a pseudo-inverse; `gamma = 0` with a
/// rank-deficient system is an error.
pub fn fit_nystrom_krr(
    spec: &KernelSpec,
    x: &DataMatrix,
    subset: &[usize],
    y: &[f64],
    gamma: f64,
) -> Result<RegressionModel<'static>> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return param_err(format!("ridge parameter must be finite and >= 0, got {gamma}"));
    }
    let (intercept, yc) = centred_targets(y, x.nrows())?;
    let (subset_data, k_nm, k_mm) = nystrom_blocks(spec, x, subset)?;
    let m = subset.len();
    let system = k_nm.tr_mul(&k_nm) + &k_mm * gamma;
    let rhs = k_nm.tr_mul(&yc);
    let eig = sym_eig_desc(&system)?;
    let threshold = Cutoff::default().threshold(eig.largest(), 0.0);
    let rank = eig.rank_above(threshold);
    if rank == 0 || (gamma == 0.0 && rank < m) {
        return Err(Error::Numerical(format!(
            "ridge system is singular (numerical rank {rank} of {m}); use gamma > 0"
        )));
    }
    let u = eig.vectors.columns(0, rank);
    let mut proj = u.tr_mul(&rhs);
    for j in 0..rank {
        proj[j] /= eig.values[j];
    }
    let coeffs = u * proj;
    Ok(RegressionModel {
        kind: RegressionKind::NystromKrr,
        intercept,
        coeffs,
        d: m,
        gamma,
        basis: Basis::Subset { spec: *spec, subset_data },
    })
}

impl RegressionModel<'_> {
    pub fn kind(&self) -> RegressionKind {
        self.kind
    }

    /// ȳ, the training target mean.
    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn coeffs(&self) -> &DVector<f64> {
        &self.coeffs
    }

    /// Number of scores used (PCR) or subset size (KRR).
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The regressors z(x*) of a point.
    pub fn features(&self, point: &[f64]) -> Result<DVector<f64>> {
        Ok(match &self.basis {
            Basis::Full(m) => m.scores_new(point)?.rows(0, self.d).clone_owned(),
            Basis::Nystrom(m) => m.scores_new(point)?.rows(0, self.d).clone_owned(),
            Basis::Subset { spec, subset_data } => kernel_vector(spec, subset_data, point)?,
        })
    }

    pub fn predict(&self, point: &[f64]) -> Result<f64> {
        Ok(self.intercept + self.coeffs.dot(&self.features(point)?))
    }

    pub fn predict_many(&self, x: &DataMatrix) -> Result<Vec<f64>> {
        (0..x.nrows()).into_par_iter().map(|i| self.predict(x.row(i))).collect()
    }
}

/// Coefficient of determination 1 − SS_res/SS_tot, with SS_tot taken about
/// the mean of `y_true`.
pub fn r_squared(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return dim_err(format!("{} targets but {} predictions", y_true.len(), y_pred.len()));
    }
    if y_true.len() < 2 {
        return param_err("R² needs at least two points");
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::DegenerateInput("R² is undefined for a constant target".into()));
    }
    let ss_res: f64 = y_true.iter().zip(y_pred).map(|(t, p)| (t - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}
