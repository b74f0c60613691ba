//! Scores of held-out points under Nyström and full kernel PCA.

use nystrompca::{fit_full_kpca, fit_nystrom_kpca, sample_subset, DataMatrix, KernelSpec, VarianceMode};

fn curve(t: f64) -> Vec<f64> {
    vec![t.cos(), t.sin(), 0.3 * t]
}

fn main() -> nystrompca::Result<()> {
    let train = DataMatrix::from_rows(&(0..200).map(|i| curve(i as f64 * 0.05)).collect::<Vec<_>>())?;
    let spec = KernelSpec::rbf(1.0)?;
    let subset = sample_subset(train.nrows(), 30, 7)?;
    let nystrom = fit_nystrom_kpca(&spec, &train, &subset[..30], VarianceMode::Exact)?;
    let full = fit_full_kpca(&spec, &train)?;

    for t in [0.52, 3.3, 8.1] {
        let p = curve(t);
        let w = nystrom.scores_new(&p)?;
        let s = full.scores_new(&p)?;
        println!("t = {t:<4}  nystrom ({:+.4}, {:+.4})  full ({:+.4}, {:+.4})", w[0], w[1], s[0], s[1]);
    }
    Ok(())
}
