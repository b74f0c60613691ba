//! Confidence bound on the extra reconstruction error of the Nyström method,
//! checked against the realized difference for one subset draw.

use nystrompca::kpca_full::Centering;
use nystrompca::{
    confidence_bound, delta_from_confidence, fit_full_kpca_with, fit_nystrom_kpca_with, sample_subset, sym_eig_desc,
    DataMatrix, FullKpcaOptions, KernelSpec, NystromOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> nystrompca::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows: Vec<Vec<f64>> = (0..600).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let x = DataMatrix::from_rows(&rows)?;
    let spec = KernelSpec::rbf(1.0)?;
    let (n, m) = (x.nrows(), 40);
    let subset = sample_subset(n, m, 11)?;
    let subset = &subset[..m];

    // The bound is stated for uncentred PCA.
    let nystrom = fit_nystrom_kpca_with(&spec, &x, subset, NystromOptions { centering: Centering::Uncentred, ..Default::default() })?;
    let full = fit_full_kpca_with(&spec, &x, FullKpcaOptions { centering: Centering::Uncentred, ..Default::default() })?;
    let k_mm = nystrompca::kernel_matrix(&spec, &x.select_rows(subset)?, &x.select_rows(subset)?)?;
    let eigs = sym_eig_desc(&(k_mm / m as f64))?.values;

    let delta = delta_from_confidence(0.9)?;
    let full_ev = full.explained_variance();
    println!("{:>3} {:>10} {:>10}", "d", "bound", "realized");
    for d in 1..=8 {
        let b = confidence_bound(eigs.as_slice(), m, n, spec.sup_bound(), delta, d)?;
        let full_err = full.total_variance() - full_ev.iter().take(d).sum::<f64>();
        let realized = nystrom.reconstruction_error(d)? - full_err;
        println!("{d:>3} {:>10.5} {:>10.5}", b.bound, realized);
    }
    Ok(())
}
