//! Symmetric eigendecompositions with descending order, a deterministic sign
//! rule and small-eigenvalue cutoffs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};

/// Default eigenvalue cutoff used for inversions and rank decisions.
pub const DEFAULT_CUTOFF: f64 = 1e-12;

/// Eigenpairs of a symmetric matrix, values descending, column `j` of
/// `vectors` paired with `values[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomposition {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn largest(&self) -> f64 {
        self.values.iter().copied().next().unwrap_or(0.0)
    }

    /// Number of leading eigenvalues strictly above `threshold`.
    pub fn rank_above(&self, threshold: f64) -> usize {
        self.values.iter().take_while(|&&v| v > threshold).count()
    }
}

/// How small eigenvalues are cut.
///
/// `Relative(tol)` resolves to `tol · max(λ_max, scale)` where `scale` is a
/// caller-supplied magnitude of the uncentred kernel (its largest diagonal
/// entry). The scale floor keeps an all-round-off spectrum from being treated
/// as signal. `Absolute(tol)` uses `tol` as is.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "tol", rename_all = "lowercase")]
pub enum Cutoff {
    Relative(f64),
    Absolute(f64),
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff::Relative(DEFAULT_CUTOFF)
    }
}

impl Cutoff {
    pub fn threshold(&self, largest: f64, scale: f64) -> f64 {
        match *self {
            Cutoff::Relative(tol) => tol * largest.max(scale).max(0.0),
            Cutoff::Absolute(tol) => tol,
        }
    }
}

fn check_square_finite(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return dim_err(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// Full eigendecomposition of a symmetric matrix, symmetrized as (M + Mᵀ)/2
/// first. Each eigenvector is signed so that its largest-magnitude entry is
/// positive (ties go to the lowest index).
pub fn sym_eig_desc(m: &DMatrix<f64>) -> Result<EigenDecomposition> {
    check_square_finite(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(EigenDecomposition { values: DVector::zeros(0), vectors: DMatrix::zeros(0, 0) });
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let values = DVector::from_iterator(n, order.iter().map(|&j| eig.eigenvalues[j]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).clone_owned();
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Applies `f` to the eigenvalues strictly above `threshold` and rebuilds
/// U₊ f(D₊) U₊ᵀ. Errors when nothing is retained.
fn spectral_map(eig: &EigenDecomposition, threshold: f64, f: impl Fn(f64) -> f64) -> Result<DMatrix<f64>> {
    let r = eig.rank_above(threshold.max(0.0));
    if r == 0 {
        return Err(Error::DegenerateInput(format!(
            "no eigenvalue above cutoff {threshold:e}; matrix is numerically rank zero"
        )));
    }
    let u = eig.vectors.columns(0, r);
    let mut scaled = u.clone_owned();
    for j in 0..r {
        let s = f(eig.values[j]);
        scaled.column_mut(j).scale_mut(s);
    }
    let out = &scaled * u.transpose();
    Ok((&out + out.transpose()) * 0.5)
}

/// Pseudo-inverse square root U₊ D₊^{-1/2} U₊ᵀ; eigenvalues at or below
/// `cutoff` (including all negative ones) are dropped.
pub fn psd_inv_sqrt(m: &DMatrix<f64>, cutoff: f64) -> Result<DMatrix<f64>> {
    psd_inv_sqrt_from(&sym_eig_desc(m)?, cutoff)
}

pub fn psd_inv_sqrt_from(eig: &EigenDecomposition, cutoff: f64) -> Result<DMatrix<f64>> {
    spectral_map(eig, cutoff, |v| 1.0 / v.sqrt())
}

/// Pseudo-inverse U₊ D₊^{-1} U₊ᵀ over the spectrum above `cutoff`.
pub fn psd_pinv(m: &DMatrix<f64>, cutoff: f64) -> Result<DMatrix<f64>> {
    psd_pinv_from(&sym_eig_desc(m)?, cutoff)
}

pub fn psd_pinv_from(eig: &EigenDecomposition, cutoff: f64) -> Result<DMatrix<f64>> {
    spectral_map(eig, cutoff, |v| 1.0 / v)
}
