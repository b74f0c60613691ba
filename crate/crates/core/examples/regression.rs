//! Kernel PCR, Nyström kernel PCR and Nyström kernel ridge regression.

use std::path::Path;

use nystrompca::{
    fit_full_kpca, fit_kpcr, fit_nystrom_kpca, fit_nystrom_kpcr, fit_nystrom_krr, load_csv, median_bandwidth,
    preprocess, r_squared, sample_subset, train_test_split, KernelSpec, PreprocessOptions, VarianceMode,
};

fn main() -> nystrompca::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/diabetes.csv");
    let ds = load_csv(path, true, Some("progression"))?;
    let (tr, te) = train_test_split(ds.nrows(), 0.25, 1)?;
    let (train, test) = (ds.select_rows(&tr)?, ds.select_rows(&te)?);
    let (xtr, xte, _) = preprocess(&train, &test, PreprocessOptions::default())?;
    let (ytr, yte) = (train.target_values()?, test.target_values()?);

    let m = 100;
    let subset = sample_subset(xtr.nrows(), m, 1)?;
    let spec = KernelSpec::rbf(median_bandwidth(&xtr.select_rows(&subset[..m])?)?)?;

    let full = fit_full_kpca(&spec, &xtr)?;
    let nystrom = fit_nystrom_kpca(&spec, &xtr, &subset[..m], VarianceMode::Exact)?;
    for d in [5, 10, 20] {
        let kpcr = fit_kpcr(&full, &ytr, d)?;
        let nkpcr = fit_nystrom_kpcr(&nystrom, &ytr, d)?;
        println!(
            "d = {d:>2}: KPCR test R² {:.3}, Nyström KPCR test R² {:.3}",
            r_squared(&yte, &kpcr.predict_many(&xte)?)?,
            r_squared(&yte, &nkpcr.predict_many(&xte)?)?
        );
    }
    for gamma in [1e-1, 1e-3, 1e-6] {
        let krr = fit_nystrom_krr(&spec, &xtr, &subset[..m], &ytr, gamma)?;
        println!("gamma = {gamma:e}: Nyström KRR test R² {:.3}", r_squared(&yte, &krr.predict_many(&xte)?)?);
    }
    Ok(())
}
