//! Kernel PCA fitted on the subset alone and evaluated on every data point.
//!
//! With (λ̂_j^m, u_j^m) the eigenpairs of (1/m) K'_mm, the j-th component is
//! φ̂_j = Σ_k u_{j,k} (k(x_k, ·) − φ0) / √(m λ̂_j^m), and the variance of the
//! full data along it is
//!
//! ```text
//! λ̂_j^{m,n} = u_jᵀ K'_mn K'_nm u_j / (n m λ̂_j^m).
//! ```

use nalgebra::{DMatrix, DVector};

use crate::eigen::{sym_eig_desc, Cutoff};
use crate::error::{dim_err, Result};
use crate::nystrom::CenteredNystromMatrices;

#[derive(Debug, Clone)]
pub struct SubsetPcaResult {
    /// λ̂_j^{m,n}, in the order of `subset_eigs`; 0 for components below the cutoff.
    pub variances: DVector<f64>,
    /// λ̂_j^m, eigenvalues of (1/m) K'_mm, descending.
    pub subset_eigs: DVector<f64>,
    /// R_n(V̂_d^m) for d = 0..=m.
    pub recon_error_by_d: DVector<f64>,
    /// Column j is u_j / √(m λ̂_j^m), or zero below the cutoff, so the score
    /// of a point along φ̂_j is the dot product with its centred kernel vector.
    pub coeffs: DMatrix<f64>,
}

impl SubsetPcaResult {
    /// Σ_{j≤d} λ̂_j^{m,n}.
    pub fn captured(&self, d: usize) -> f64 {
        self.variances.iter().take(d).sum()
    }

    /// Scores along the subset components from a centred subset kernel vector
    /// κ̃(x), as returned by `NystromPcaModel::centred_kernel_vector`.
    pub fn scores_from_centred(&self, centred_kernel: &DVector<f64>) -> DVector<f64> {
        self.coeffs.tr_mul(centred_kernel)
    }
}

/// Evaluates subset PCA on all n points from the centred Nyström blocks.
///
/// `total_variance` is (1/n) Tr(K'), typically the model's.
pub fn fit_subset_pca(
    centered: &CenteredNystromMatrices,
    n: usize,
    total_variance: f64,
    cutoff: Cutoff,
) -> Result<SubsetPcaResult> {
    let (rows, m) = centered.kc_nm.shape();
    if rows != n {
        return dim_err(format!("K'_nm has {rows} rows, expected n = {n}"));
    }
    if centered.kc_mm.shape() != (m, m) {
        return dim_err("K'_mm does not match K'_nm");
    }
    let mf = m as f64;
    let eig = sym_eig_desc(&(&centered.kc_mm / mf))?;
    let threshold = cutoff.threshold(eig.largest(), centered.kernel_scale / mf);

    let mut variances = DVector::zeros(m);
    let mut coeffs = DMatrix::zeros(m, m);
    for j in 0..m {
        let lambda = eig.values[j];
        if lambda <= threshold {
            continue;
        }
        let proj = &centered.kc_nm * eig.vectors.column(j);
        variances[j] = proj.norm_squared() / (n as f64 * mf * lambda);
        coeffs.set_column(j, &(eig.vectors.column(j) / (mf * lambda).sqrt()));
    }

    let mut recon = DVector::zeros(m + 1);
    let mut captured = 0.0;
    recon[0] = total_variance;
    for d in 1..=m {
        captured += variances[d - 1];
        recon[d] = total_variance - captured;
    }
    Ok(SubsetPcaResult { variances, subset_eigs: eig.values, recon_error_by_d: recon, coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{DataMatrix, KernelSpec};
    use crate::kpca_full::Centering;
    use crate::nystrom::{fit_nystrom_kpca, nystrom_matrices, VarianceMode};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(n: usize, p: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataMatrix::from_row_major(n, p, (0..n * p).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn run(x: &DataMatrix, spec: &KernelSpec, subset: &[usize]) -> SubsetPcaResult {
        let model = fit_nystrom_kpca(spec, x, subset, VarianceMode::Exact).unwrap();
        let c = nystrom_matrices(spec, x, subset, Centering::Centred, Cutoff::default()).unwrap();
        fit_subset_pca(&c, x.nrows(), model.total_variance(), Cutoff::default()).unwrap()
    }

    #[test]
    fn full_subset_has_zero_error_at_full_dimension() {
        let x = random_data(15, 3, 1);
        let all: Vec<usize> = (0..15).collect();
        let r = run(&x, &KernelSpec::rbf(1.0).unwrap(), &all);
        assert!(r.recon_error_by_d[15].abs() < 1e-8);
    }

    #[test]
    fn identical_points() {
        let x = DataMatrix::from_rows(&vec![vec![1.0, 2.0]; 7]).unwrap();
        let r = run(&x, &KernelSpec::rbf(1.0).unwrap(), &[0, 2, 5]);
        assert!(r.variances.iter().all(|&v| v == 0.0));
        assert!(r.recon_error_by_d.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn linear_kernel_matches_explicit_projections() {
        // With the linear kernel the feature map is the identity, so every
        // quantity can be computed directly in R^p.
        let (n, p) = (30, 10);
        let x = random_data(n, p, 2);
        let subset = [1, 4, 9, 16, 22, 27];
        let spec = KernelSpec::polynomial(0.0, 1).unwrap();
        let r = run(&x, &spec, &subset);

        let xm = x.to_matrix();
        let mean = xm.row_mean();
        let xs = DMatrix::from_fn(subset.len(), p, |k, c| xm[(subset[k], c)]);
        // φ0 = projection of the mean onto span of the subset rows.
        let q = xs.transpose().qr().q();
        let phi0 = &q * (q.transpose() * mean.transpose());
        let centred_subset = DMatrix::from_fn(subset.len(), p, |k, c| xs[(k, c)] - phi0[c]);
        let m = subset.len() as f64;
        let cov = centred_subset.transpose() * &centred_subset / m;
        let e = crate::eigen::sym_eig_desc(&cov).unwrap();
        let z = DMatrix::from_fn(n, p, |i, c| xm[(i, c)] - mean[c]);
        for j in 0..subset.len() {
            let dir = e.vectors.column(j);
            let var = (&z * dir).norm_squared() / n as f64;
            assert_abs_diff_eq!(r.variances[j], var, epsilon = 1e-8);
        }
    }

    #[test]
    fn training_scores_reproduce_variances() {
        let x = random_data(25, 2, 5);
        let spec = KernelSpec::rbf(1.0).unwrap();
        let subset = [0, 6, 12, 18];
        let model = fit_nystrom_kpca(&spec, &x, &subset, VarianceMode::Exact).unwrap();
        let r = run(&x, &spec, &subset);
        let mut sums = DVector::zeros(4);
        for i in 0..25 {
            let s = r.scores_from_centred(&model.centred_kernel_vector(x.row(i)).unwrap());
            sums += s.map(|v| v * v);
        }
        assert!((sums / 25.0 - &r.variances).amax() < 1e-10);
    }

    #[test]
    fn errors_are_nonincreasing() {
        let x = random_data(40, 2, 3);
        let r = run(&x, &KernelSpec::cauchy(0.7).unwrap(), &[0, 5, 10, 15, 20, 25, 30, 35]);
        for w in r.recon_error_by_d.as_slice().windows(2) {
            assert!(w[1] <= w[0] + 1e-10);
        }
        assert!(r.variances.iter().all(|&v| v >= -1e-10));
    }

    #[test]
    fn shape_mismatch() {
        let x = random_data(10, 2, 4);
        let c = nystrom_matrices(&KernelSpec::rbf(1.0).unwrap(), &x, &[0, 1], Centering::Centred, Cutoff::default()).unwrap();
        assert!(fit_subset_pca(&c, 9, 1.0, Cutoff::default()).is_err());
    }
}
