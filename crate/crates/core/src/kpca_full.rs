//! Standard kernel PCA on the full n × n kernel matrix, centred in feature
//! space. This is the reference the Nyström method approximates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::eigen::{sym_eig_desc, Cutoff, EigenDecomposition};
use crate::error::{dim_err, param_err, Error, Result};
use crate::kernels::{kernel_matrix, kernel_vector, DataMatrix, KernelSpec};

/// Whether data is centred in feature space before the decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Centering {
    #[default]
    Centred,
    /// Zero-mean assumption: the raw kernel matrix is decomposed. Only used
    /// where a result is stated for uncentred data (the confidence bound).
    Uncentred,
}

/// K' = K − 𝟙K − K𝟙 + 𝟙K𝟙, with 𝟙 the n × n matrix of entries 1/n.
pub fn center_kernel_matrix(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !k.is_square() {
        return dim_err(format!("kernel matrix must be square, got {}x{}", k.nrows(), k.ncols()));
    }
    let n = k.nrows();
    if n == 0 {
        return Ok(k.clone());
    }
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| k.row(i).sum() / nf).collect();
    let col_means: Vec<f64> = (0..n).map(|j| k.column(j).sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    Ok(DMatrix::from_fn(n, n, |i, j| k[(i, j)] - row_means[i] - col_means[j] + grand))
}

/// Flips score column j (and the matching coefficient column) when
/// max + min of the scores is negative, so each column's range is mostly
/// positive. A zero midrange keeps the sign.
pub(crate) fn apply_midrange_signs(scores: &mut DMatrix<f64>, coeffs: &mut DMatrix<f64>) {
    for j in 0..scores.ncols() {
        let col = scores.column(j);
        if col.is_empty() {
            continue;
        }
        let midrange = col.max() + col.min();
        if midrange < 0.0 {
            scores.column_mut(j).neg_mut();
            coeffs.column_mut(j).neg_mut();
        }
    }
}

/// A fitted full kernel PCA.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FullKpcaModel {
    spec: KernelSpec,
    train: DataMatrix,
    centering: Centering,
    /// Full spectrum of K' (not divided by n), descending.
    eigenvalues: DVector<f64>,
    /// Retained eigenvectors Q_r (n × r), sign-adjusted with the scores.
    components: DMatrix<f64>,
    /// S = Q_r Λ_r^{1/2}.
    scores: DMatrix<f64>,
    /// K·1_n: the row means of the uncentred kernel matrix.
    row_means: DVector<f64>,
    /// 1_nᵀ K 1_n: the grand mean of the uncentred kernel matrix.
    grand_mean: f64,
}

impl FullKpcaModel {
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.train.nrows()
    }

    pub fn centering(&self) -> Centering {
        self.centering
    }

    /// Number of eigenvalues above the cutoff.
    pub fn retained_rank(&self) -> usize {
        self.components.ncols()
    }

    /// True when no component survived the cutoff (e.g. all points identical).
    pub fn is_degenerate(&self) -> bool {
        self.retained_rank() == 0
    }

    /// Full descending spectrum of K' (or K when uncentred).
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Λ_r / n for the retained components.
    pub fn explained_variance(&self) -> DVector<f64> {
        self.eigenvalues.rows(0, self.retained_rank()) / self.n() as f64
    }

    /// (1/n) Tr(K'), the total variance in feature space.
    pub fn total_variance(&self) -> f64 {
        self.eigenvalues.iter().map(|&v| v.max(0.0)).sum::<f64>() / self.n() as f64
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }

    pub fn scores(&self) -> &DMatrix<f64> {
        &self.scores
    }

    /// κ'(x*) = κ(x*) − 𝟙κ(x*) − K1_n + 𝟙K1_n (or κ(x*) when uncentred).
    pub fn centred_kernel_vector(&self, point: &[f64]) -> Result<DVector<f64>> {
        let kappa = kernel_vector(&self.spec, &self.train, point)?;
        Ok(match self.centering {
            Centering::Centred => {
                let mean = kappa.mean();
                kappa.map(|v| v - mean) - &self.row_means + DVector::from_element(self.n(), self.grand_mean)
            }
            Centering::Uncentred => kappa,
        })
    }

    /// Scores of a new point: Λ^{-1/2} Qᵀ κ'(x*).
    pub fn scores_new(&self, point: &[f64]) -> Result<DVector<f64>> {
        full_scores_new(self, point)
    }
}

/// Options for [`fit_full_kpca_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FullKpcaOptions {
    pub centering: Centering,
    pub cutoff: Cutoff,
}

pub fn fit_full_kpca(spec: &KernelSpec, x: &DataMatrix) -> Result<FullKpcaModel> {
    fit_full_kpca_with(spec, x, FullKpcaOptions::default())
}

pub fn fit_full_kpca_with(spec: &KernelSpec, x: &DataMatrix, opts: FullKpcaOptions) -> Result<FullKpcaModel> {
    let n = x.nrows();
    if n < 2 {
        return param_err("kernel PCA needs at least two data points");
    }
    let k = kernel_matrix(spec, x, x)?;
    let nf = n as f64;
    let row_means = DVector::from_iterator(n, (0..n).map(|i| k.row(i).sum() / nf));
    let grand_mean = row_means.sum() / nf;
    let scale = k.diagonal().iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let kc = match opts.centering {
        Centering::Centred => center_kernel_matrix(&k)?,
        Centering::Uncentred => k,
    };
    let EigenDecomposition { values, vectors } = sym_eig_desc(&kc)?;
    drop(kc);
    let threshold = opts.cutoff.threshold(values.iter().copied().next().unwrap_or(0.0), scale);
    let r = values.iter().take_while(|&&v| v > threshold).count();

    let mut components = vectors.columns(0, r).clone_owned();
    let mut scores = components.clone();
    for j in 0..r {
        scores.column_mut(j).scale_mut(values[j].sqrt());
    }
    apply_midrange_signs(&mut scores, &mut components);
    Ok(FullKpcaModel {
        spec: *spec,
        train: x.clone(),
        centering: opts.centering,
        eigenvalues: values,
        components,
        scores,
        row_means,
        grand_mean,
    })
}

/// Λ_r^{-1/2} Q_rᵀ κ'(x*) over the retained components.
pub fn full_scores_new(model: &FullKpcaModel, point: &[f64]) -> Result<DVector<f64>> {
    let r = model.retained_rank();
    if r == 0 {
        return Err(Error::DegenerateInput("model has no retained components".into()));
    }
    let kc = model.centred_kernel_vector(point)?;
    let mut w = model.components.tr_mul(&kc);
    for j in 0..r {
        w[j] /= model.eigenvalues[j].sqrt();
    }
    Ok(w)
}
