//! Centred kernel PCA with the Nyström method.
//!
//! Given a subset of m data points, the principal components are sought in
//! the span of their (centred) feature vectors while all n points are used
//! to estimate them. With
//!
//! ```text
//! K̃    = K_nm K_mm⁻¹ K_mn
//! K'_nm = K_nm − 𝟙_n K_nm − K̃ 𝟙_n^{n,m} + 𝟙_n K̃ 𝟙_n^{n,m}
//! K'_mm = K_mm − 𝟙_n^{m,n} K_nm − K_mn 𝟙_n^{n,m} + 𝟙_n^{m,n} K̃ 𝟙_n^{n,m}
//! K̃'   = (1/n) K'_mm^{-1/2} K'_mn K'_nm K'_mm^{-1/2} = V Λ̃ Vᵀ
//! ```
//!
//! the explained variances are Λ̃, the component coefficients are
//! U = K'_mm^{-1/2} V and the scores are W = K'_nm U.
//!
//! Every 𝟙-matrix product collapses to a rank-one correction built from
//! μ = column means of K_nm and g = K_mm⁺ μ, so no n × n matrix is ever
//! formed and a fit costs O(nm²).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{psd_inv_sqrt_from, psd_pinv_from, sym_eig_desc, Cutoff};
use crate::error::{dim_err, param_err, Error, Result};
use crate::kernels::{kernel_diagonal, kernel_matrix, kernel_vector, DataMatrix, KernelSpec};
use crate::kpca_full::{apply_midrange_signs, Centering};

/// Version tag written into serialized models.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Negative explained variances above this are round-off and clamped to 0.
const NEGATIVE_TOLERANCE: f64 = 1e-10;

/// How (1/n) Tr(K') is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceMode {
    /// Streams over all n² kernel values without storing them.
    #[default]
    Exact,
    /// Subtracts the mean of K_nm instead of the mean of K; O(nm).
    Approximate,
}

impl std::str::FromStr for VarianceMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(VarianceMode::Exact),
            "approximate" | "approx" => Ok(VarianceMode::Approximate),
            _ => Err(format!("unknown variance mode '{s}' (expected exact or approximate)")),
        }
    }
}

/// The centred blocks K'_nm and K'_mm together with the quantities needed to
/// centre new points.
#[derive(Debug, Clone)]
pub struct CenteredNystromMatrices {
    pub kc_nm: DMatrix<f64>,
    pub kc_mm: DMatrix<f64>,
    /// μ = K_mn 1_n, the column means of K_nm.
    pub mean_kernel: DVector<f64>,
    /// g = K_mm⁺ μ, coefficients of the projected mean φ0 on {k(x_k, ·)}.
    pub phi0_coeffs: DVector<f64>,
    /// c̄ = μᵀ K_mm⁺ μ = ‖φ0‖², every entry of 𝟙^{m,n} K̃ 𝟙^{n,m}.
    pub mean_norm_sq: f64,
    /// Largest |K_mm| diagonal entry, the scale for relative cutoffs.
    pub kernel_scale: f64,
    pub centering: Centering,
}

/// Centres K_nm and K_mm in O(nm² + m³).
///
/// `k_mm` must be the rows of `k_nm` belonging to the subset (in any
/// position). K_mm is inverted as a cutoff pseudo-inverse.
pub fn center_nystrom_matrices(
    k_nm: &DMatrix<f64>,
    k_mm: &DMatrix<f64>,
    cutoff: Cutoff,
) -> Result<CenteredNystromMatrices> {
    let (n, m) = k_nm.shape();
    if k_mm.shape() != (m, m) {
        return dim_err(format!("K_mm must be {m}x{m}, got {}x{}", k_mm.nrows(), k_mm.ncols()));
    }
    if n == 0 || m == 0 {
        return dim_err("empty kernel blocks");
    }
    let kernel_scale = k_mm.diagonal().iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let eig = sym_eig_desc(k_mm)?;
    let pinv = psd_pinv_from(&eig, cutoff.threshold(eig.largest(), kernel_scale))?;

    let nf = n as f64;
    let mean_kernel = DVector::from_iterator(m, k_nm.column_iter().map(|c| c.sum() / nf));
    let phi0_coeffs = &pinv * &mean_kernel;
    let mean_norm_sq = mean_kernel.dot(&phi0_coeffs);
    // t_i = (K̃ 1_n)_i = K_nm[i, :] g
    let row_proj = k_nm * &phi0_coeffs;

    let kc_nm = DMatrix::from_fn(n, m, |i, l| k_nm[(i, l)] - mean_kernel[l] - row_proj[i] + mean_norm_sq);
    let kc_mm = DMatrix::from_fn(m, m, |k, l| k_mm[(k, l)] - mean_kernel[l] - mean_kernel[k] + mean_norm_sq);
    let kc_mm = (&kc_mm + kc_mm.transpose()) * 0.5;
    Ok(CenteredNystromMatrices {
        kc_nm,
        kc_mm,
        mean_kernel,
        phi0_coeffs,
        mean_norm_sq,
        kernel_scale,
        centering: Centering::Centred,
    })
}

/// The raw blocks wrapped as if centred; used under the zero-mean assumption.
fn uncentred_matrices(k_nm: DMatrix<f64>, k_mm: DMatrix<f64>) -> CenteredNystromMatrices {
    let m = k_mm.nrows();
    let kernel_scale = k_mm.diagonal().iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    CenteredNystromMatrices {
        kc_nm: k_nm,
        kc_mm: (&k_mm + k_mm.transpose()) * 0.5,
        mean_kernel: DVector::zeros(m),
        phi0_coeffs: DVector::zeros(m),
        mean_norm_sq: 0.0,
        kernel_scale,
        centering: Centering::Uncentred,
    }
}

/// Options for [`fit_nystrom_kpca_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct NystromOptions {
    pub variance_mode: VarianceMode,
    pub centering: Centering,
    pub cutoff: Cutoff,
}

/// A fitted Nyström kernel PCA.
///
/// Score rows follow the row order of the training data, not the
/// subset-first order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NystromPcaModel {
    format_version: u32,
    spec: KernelSpec,
    centering: Centering,
    cutoff: Cutoff,
    n: usize,
    subset_indices: Vec<usize>,
    subset_data: DataMatrix,
    /// Λ̃, descending, one per subset point.
    lambdas: DVector<f64>,
    /// U = K'_mm^{-1/2} V.
    coeffs: DMatrix<f64>,
    /// W = K'_nm U.
    #[serde(skip)]
    scores: Option<DMatrix<f64>>,
    /// Centring cache for new points: κ̃(x) = κ_m(x) − a − (gᵀκ_m(x))·1 + c̄·1,
    /// i.e. M = 1 gᵀ and b = c̄ 1.
    mean_kernel: DVector<f64>,
    phi0_coeffs: DVector<f64>,
    mean_norm_sq: f64,
    total_variance: f64,
    variance_mode: VarianceMode,
}

impl NystromPcaModel {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.subset_indices.len()
    }

    pub fn centering(&self) -> Centering {
        self.centering
    }

    pub fn subset_indices(&self) -> &[usize] {
        &self.subset_indices
    }

    pub fn subset_data(&self) -> &DataMatrix {
        &self.subset_data
    }

    pub fn lambdas(&self) -> &DVector<f64> {
        &self.lambdas
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    /// The n × m score matrix. Not serialized; `None` after deserialization.
    pub fn scores(&self) -> Option<&DMatrix<f64>> {
        self.scores.as_ref()
    }

    /// Coefficients of φ0 = (1/n) K_nm K_mm⁻¹ κ_m(·) on {k(x_k, ·)}.
    pub fn phi0_coeffs(&self) -> &DVector<f64> {
        &self.phi0_coeffs
    }

    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    pub fn variance_mode(&self) -> VarianceMode {
        self.variance_mode
    }

    /// Number of explained variances above the cutoff.
    pub fn retained_rank(&self) -> usize {
        let largest = self.lambdas.iter().copied().next().unwrap_or(0.0);
        let threshold = self.cutoff.threshold(largest, 0.0);
        self.lambdas.iter().take_while(|&&v| v > threshold).count()
    }

    /// κ̃(x*), the centred subset kernel vector of a new point.
    pub fn centred_kernel_vector(&self, point: &[f64]) -> Result<DVector<f64>> {
        let kappa = kernel_vector(&self.spec, &self.subset_data, point)?;
        Ok(match self.centering {
            Centering::Centred => {
                let shift = self.mean_norm_sq - self.phi0_coeffs.dot(&kappa);
                kappa - &self.mean_kernel + DVector::from_element(self.m(), shift)
            }
            Centering::Uncentred => kappa,
        })
    }

    pub fn scores_new(&self, point: &[f64]) -> Result<DVector<f64>> {
        nystrom_scores_new(self, point)
    }

    pub fn reconstruction_error(&self, d: usize) -> Result<f64> {
        nystrom_reconstruction_error(self, d)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(s)?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Data(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        let m = model.m();
        if model.lambdas.len() != m || model.coeffs.shape() != (m, m) || model.subset_data.nrows() != m {
            return Err(Error::Data("inconsistent model dimensions".into()));
        }
        Ok(model)
    }
}

fn validate_subset(n: usize, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return param_err("subset must contain at least one point");
    }
    if subset.len() > n {
        return param_err(format!("subset size {} exceeds data size {n}", subset.len()));
    }
    let mut seen = vec![false; n];
    for &i in subset {
        if i >= n {
            return param_err(format!("subset index {i} out of range for {n} points"));
        }
        if std::mem::replace(&mut seen[i], true) {
            return param_err(format!("duplicate subset index {i}"));
        }
    }
    Ok(())
}

/// Builds K_nm (all rows against the subset) and K_mm.
pub(crate) fn nystrom_blocks(
    spec: &KernelSpec,
    x: &DataMatrix,
    subset: &[usize],
) -> Result<(DataMatrix, DMatrix<f64>, DMatrix<f64>)> {
    validate_subset(x.nrows(), subset)?;
    let subset_data = x.select_rows(subset)?;
    let k_nm = kernel_matrix(spec, x, &subset_data)?;
    let k_mm = k_nm.select_rows(subset);
    Ok((subset_data, k_nm, k_mm))
}

/// Builds the (centred or raw) blocks for a subset.
pub fn nystrom_matrices(
    spec: &KernelSpec,
    x: &DataMatrix,
    subset: &[usize],
    centering: Centering,
    cutoff: Cutoff,
) -> Result<CenteredNystromMatrices> {
    let (_, k_nm, k_mm) = nystrom_blocks(spec, x, subset)?;
    match centering {
        Centering::Centred => center_nystrom_matrices(&k_nm, &k_mm, cutoff),
        Centering::Uncentred => Ok(uncentred_matrices(k_nm, k_mm)),
    }
}

pub fn fit_nystrom_kpca(
    spec: &KernelSpec,
    x: &DataMatrix,
    subset: &[usize],
    variance_mode: VarianceMode,
) -> Result<NystromPcaModel> {
    fit_nystrom_kpca_with(spec, x, subset, NystromOptions { variance_mode, ..Default::default() })
}

pub fn fit_nystrom_kpca_with(
    spec: &KernelSpec,
    x: &DataMatrix,
    subset: &[usize],
    opts: NystromOptions,
) -> Result<NystromPcaModel> {
    let (subset_data, k_nm, k_mm) = nystrom_blocks(spec, x, subset)?;
    let n = x.nrows();
    let total = match opts.centering {
        Centering::Centred => total_variance_from_blocks(spec, x, &k_nm, opts.variance_mode)?,
        Centering::Uncentred => kernel_diagonal(spec, x)?.iter().sum::<f64>() / n as f64,
    };
    let centred = match opts.centering {
        Centering::Centred => center_nystrom_matrices(&k_nm, &k_mm, opts.cutoff)?,
        Centering::Uncentred => uncentred_matrices(k_nm, k_mm),
    };
    let (lambdas, mut coeffs, mut scores) = decompose(&centred, opts.cutoff)?;
    apply_midrange_signs(&mut scores, &mut coeffs);

    Ok(NystromPcaModel {
        format_version: MODEL_FORMAT_VERSION,
        spec: *spec,
        centering: opts.centering,
        cutoff: opts.cutoff,
        n,
        subset_indices: subset.to_vec(),
        subset_data,
        lambdas,
        coeffs,
        scores: Some(scores),
        mean_kernel: centred.mean_kernel,
        phi0_coeffs: centred.phi0_coeffs,
        mean_norm_sq: centred.mean_norm_sq,
        total_variance: total,
        variance_mode: opts.variance_mode,
    })
}

/// Eigendecomposition of K̃' returning (Λ̃, U, W).
fn decompose(c: &CenteredNystromMatrices, cutoff: Cutoff) -> Result<(DVector<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let (n, m) = c.kc_nm.shape();
    let eig_mm = sym_eig_desc(&c.kc_mm)?;
    let threshold = cutoff.threshold(eig_mm.largest(), c.kernel_scale);
    if eig_mm.rank_above(threshold) == 0 {
        // No spread in the subset directions (e.g. all points identical).
        return Ok((DVector::zeros(m), DMatrix::zeros(m, m), DMatrix::zeros(n, m)));
    }
    let inv_sqrt = psd_inv_sqrt_from(&eig_mm, threshold)?;
    // B = K'_nm K'_mm^{-1/2}, so K̃' = BᵀB / n and W = B V.
    let b = &c.kc_nm * &inv_sqrt;
    let reduced = b.tr_mul(&b) / n as f64;
    let eig = sym_eig_desc(&reduced)?;
    let mut lambdas = eig.values;
    for v in lambdas.iter_mut() {
        if *v < 0.0 {
            if *v < -NEGATIVE_TOLERANCE {
                return Err(Error::Numerical(format!("explained variance {v:e} is negative")));
            }
            *v = 0.0;
        }
    }
    let coeffs = &inv_sqrt * &eig.vectors;
    let scores = &b * &eig.vectors;
    Ok((lambdas, coeffs, scores))
}

/// w* = Uᵀ κ̃(x*), O(m²) per point after the O(m·p) kernel evaluations.
pub fn nystrom_scores_new(model: &NystromPcaModel, point: &[f64]) -> Result<DVector<f64>> {
    let kt = model.centred_kernel_vector(point)?;
    Ok(model.coeffs.tr_mul(&kt))
}

/// R_n(Ṽ_d) = (1/n) Tr(K') − Σ_{j≤d} λ̃_j.
pub fn nystrom_reconstruction_error(model: &NystromPcaModel, d: usize) -> Result<f64> {
    if d > model.m() {
        return param_err(format!("dimension {d} exceeds subset size {}", model.m()));
    }
    let captured: f64 = model.lambdas.iter().take(d).sum();
    let err = model.total_variance - captured;
    if err < 0.0 {
        if err < -NEGATIVE_TOLERANCE {
            return Err(Error::Numerical(format!(
                "reconstruction error {err:e} is negative; total variance {} is below the captured {captured}",
                model.total_variance
            )));
        }
        return Ok(0.0);
    }
    Ok(err)
}

/// (1/n) Tr(K') for the data, exact or approximated from K_nm.
pub fn total_variance(spec: &KernelSpec, x: &DataMatrix, subset: &[usize], mode: VarianceMode) -> Result<f64> {
    match mode {
        VarianceMode::Exact => exact_total_variance(spec, x),
        VarianceMode::Approximate => {
            let (_, k_nm, _) = nystrom_blocks(spec, x, subset)?;
            total_variance_from_blocks(spec, x, &k_nm, mode)
        }
    }
}

fn total_variance_from_blocks(spec: &KernelSpec, x: &DataMatrix, k_nm: &DMatrix<f64>, mode: VarianceMode) -> Result<f64> {
    match mode {
        VarianceMode::Exact => exact_total_variance(spec, x),
        VarianceMode::Approximate => {
            let n = x.nrows() as f64;
            let diag_mean = kernel_diagonal(spec, x)?.iter().sum::<f64>() / n;
            Ok(diag_mean - k_nm.mean())
        }
    }
}

/// (1/n) Σ k(x_i, x_i) − (1/n²) Σ_{i,l} k(x_i, x_l), streamed row by row.
pub fn exact_total_variance(spec: &KernelSpec, x: &DataMatrix) -> Result<f64> {
    let n = x.nrows();
    let diag = kernel_diagonal(spec, x)?;
    // Row sums are collected in index order so the final sum is deterministic.
    let row_sums: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = x.row(i);
            let mut s = 0.0;
            for j in 0..n {
                s += crate::kernels::eval_kernel(spec, xi, x.row(j)).unwrap_or(f64::NAN);
            }
            s
        })
        .collect();
    let total: f64 = row_sums.iter().sum();
    if !total.is_finite() {
        return Err(Error::DegenerateInput("kernel evaluation failed while streaming the total variance".into()));
    }
    let nf = n as f64;
    Ok(diag.iter().sum::<f64>() / nf - total / (nf * nf))
}

/// Classic (uncentred) Nyström eigenpair approximations
/// λ̃_j = (n/m) λ_j^m and ũ_j = √(m/n) / λ_j^m · K_nm u_j, where (λ_j^m, u_j)
/// are eigenpairs of K_mm. Only components above the cutoff are returned.
///
/// This is a baseline; its vectors are not orthogonal and its values are not
/// variances of the data.
pub fn classic_nystrom_eigs(k_nm: &DMatrix<f64>, k_mm: &DMatrix<f64>, cutoff: Cutoff) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let (n, m) = k_nm.shape();
    if k_mm.shape() != (m, m) {
        return dim_err(format!("K_mm must be {m}x{m}"));
    }
    let eig = sym_eig_desc(k_mm)?;
    let scale = k_mm.diagonal().iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let r = eig.rank_above(cutoff.threshold(eig.largest(), scale));
    if r == 0 {
        return Err(Error::DegenerateInput("K_mm has no eigenvalue above the cutoff".into()));
    }
    let ratio = n as f64 / m as f64;
    let values = DVector::from_iterator(r, eig.values.iter().take(r).map(|&v| ratio * v));
    let mut vectors = k_nm * eig.vectors.columns(0, r);
    for j in 0..r {
        vectors.column_mut(j).scale_mut((1.0 / ratio).sqrt() / eig.values[j]);
    }
    Ok((values, vectors))
}
