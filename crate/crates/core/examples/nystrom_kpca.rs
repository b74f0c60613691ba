//! Nyström kernel PCA against full kernel PCA on the digits data.

use std::path::Path;

use nystrompca::{
    fit_full_kpca, fit_nystrom_kpca, load_csv, median_bandwidth, preprocess, sample_subset, KernelSpec, PreprocessOptions,
    VarianceMode,
};

fn main() -> nystrompca::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/digits.csv");
    let ds = load_csv(path, true, Some("digit"))?.head(800);
    let (x, _, _) = preprocess(&ds, &ds, PreprocessOptions::default())?;

    let m = 80;
    let subset = sample_subset(x.nrows(), m, 1)?;
    let spec = KernelSpec::rbf(median_bandwidth(&x.select_rows(&subset[..m])?)?)?;

    let nystrom = fit_nystrom_kpca(&spec, &x, &subset[..m], VarianceMode::Exact)?;
    let approx = fit_nystrom_kpca(&spec, &x, &subset[..m], VarianceMode::Approximate)?;
    let full = fit_full_kpca(&spec, &x)?;

    println!("n = {}, m = {m}", x.nrows());
    println!("total variance: exact {:.5}, O(nm) estimate {:.5}", nystrom.total_variance(), approx.total_variance());
    println!("{:>3} {:>12} {:>12}", "d", "nystrom R_n", "full R_n");
    let full_ev = full.explained_variance();
    for d in [1, 2, 5, 10, 20, 40] {
        let full_err = full.total_variance() - full_ev.iter().take(d).sum::<f64>();
        println!("{d:>3} {:>12.5} {:>12.5}", nystrom.reconstruction_error(d)?, full_err);
    }
    Ok(())
}
