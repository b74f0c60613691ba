//! Variance captured by PCA fitted on the subset alone versus Nyström kernel PCA.

use nystrompca::nystrom::nystrom_matrices;
use nystrompca::{fit_nystrom_kpca, fit_subset_pca, sample_subset, Centering, Cutoff, DataMatrix, KernelSpec, VarianceMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> nystrompca::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..500).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let x = DataMatrix::from_rows(&rows)?;
    let spec = KernelSpec::cauchy(1.0)?;
    let m = 25;
    let subset = sample_subset(x.nrows(), m, 3)?;
    let subset = &subset[..m];

    let model = fit_nystrom_kpca(&spec, &x, subset, VarianceMode::Exact)?;
    let blocks = nystrom_matrices(&spec, &x, subset, Centering::Centred, Cutoff::default())?;
    let sub = fit_subset_pca(&blocks, x.nrows(), model.total_variance(), Cutoff::default())?;

    println!("{:>3} {:>10} {:>10}", "d", "subset", "nystrom");
    let total = model.total_variance();
    for d in [1, 2, 3, 5, 10, 25] {
        let captured: f64 = model.lambdas().iter().take(d).sum();
        println!("{d:>3} {:>10.4} {:>10.4}", sub.captured(d) / total, captured / total);
    }
    Ok(())
}
