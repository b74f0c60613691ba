//! Centred kernel PCA with the Nyström method.
//!
//! The crate computes principal components, explained variances, scores and
//! reconstruction errors of kernel PCA restricted to the span of a random
//! subset of m data points, at O(nm²) cost. Alongside it:
//!
//! * full centred kernel PCA on the n × n kernel matrix ([`kpca_full`]),
//! * PCA fitted on the subset alone and evaluated on all data ([`subset_pca`]),
//! * a finite-sample confidence bound on the extra reconstruction error of
//!   the Nyström method ([`bound`]),
//! * kernel principal component regression and Nyström kernel ridge
//!   regression ([`regression`]),
//! * CSV loading, preprocessing and seeded sampling ([`pipeline`]),
//! * the experiment drivers behind the `nystrompca` binary ([`experiments`]).
//!
//! ```
//! use nystrompca::{fit_nystrom_kpca, DataMatrix, KernelSpec, VarianceMode};
//!
//! let x = DataMatrix::from_rows(&[
//!     vec![0.0, 1.0], vec![1.0, 0.5], vec![2.0, -1.0],
//!     vec![0.5, 0.5], vec![-1.0, 2.0], vec![1.5, 1.5],
//! ]).unwrap();
//! let order = [4, 0, 2];
//! let model = fit_nystrom_kpca(&KernelSpec::rbf(1.0).unwrap(), &x, &order[..3], VarianceMode::Exact).unwrap();
//! let error = model.reconstruction_error(1).unwrap();
//! assert!(error >= 0.0 && error <= model.total_variance());
//! ```

pub mod error;
pub mod kernels;
pub mod eigen;
pub mod kpca_full;
pub mod nystrom;
pub mod subset_pca;
pub mod bound;
pub mod regression;
pub mod pipeline;
pub mod experiments;

pub use bound::{confidence_bound, covariance_deviation_bound, delta_from_confidence, BoundResult};
pub use eigen::{psd_inv_sqrt, psd_pinv, sym_eig_desc, Cutoff, EigenDecomposition};
pub use error::{Error, Result};
pub use kernels::{eval_kernel, kernel_matrix, kernel_vector, median_bandwidth, DataMatrix, KernelKind, KernelSpec};
pub use kpca_full::{center_kernel_matrix, fit_full_kpca, fit_full_kpca_with, full_scores_new, Centering, FullKpcaModel, FullKpcaOptions};
pub use nystrom::{
    center_nystrom_matrices, classic_nystrom_eigs, fit_nystrom_kpca, fit_nystrom_kpca_with, nystrom_reconstruction_error,
    nystrom_scores_new, total_variance, CenteredNystromMatrices, NystromOptions, NystromPcaModel, VarianceMode,
};
pub use subset_pca::{fit_subset_pca, SubsetPcaResult};
pub use regression::{fit_kpcr, fit_nystrom_kpcr, fit_nystrom_krr, r_squared, RegressionKind, RegressionModel};
pub use pipeline::{load_csv, load_csv_with, preprocess, sample_subset, train_test_split, Dataset, LoadOptions, PreprocessOptions, PreprocessReport};
pub use experiments::{run_experiment, Bandwidth, Command, ExperimentConfig, KernelChoice, KernelFamily};
