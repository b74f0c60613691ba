//! Saving a fitted model as JSON and scoring new points after reloading it.

use nystrompca::{fit_nystrom_kpca, sample_subset, DataMatrix, KernelSpec, NystromPcaModel, VarianceMode};

fn main() -> nystrompca::Result<()> {
    let rows: Vec<Vec<f64>> = (0..300).map(|i| {
        let t = i as f64 * 0.02;
        vec![t.sin() + 0.1 * t, (3.0 * t).cos()]
    }).collect();
    let x = DataMatrix::from_rows(&rows)?;
    let subset = sample_subset(x.nrows(), 40, 2)?;
    let model = fit_nystrom_kpca(&KernelSpec::rbf(0.8)?, &x, &subset[..40], VarianceMode::Approximate)?;

    let path = std::env::temp_dir().join("nystrompca_example_model.json");
    model.save(&path)?;
    let bytes = std::fs::metadata(&path)?.len();
    let loaded = NystromPcaModel::load(&path)?;
    println!("saved {} ({bytes} bytes), m = {}, n = {}", path.display(), loaded.m(), loaded.n());

    let point = [0.4, -0.2];
    let a = model.scores_new(&point)?;
    let b = loaded.scores_new(&point)?;
    println!("scores before: {:.6} {:.6}", a[0], a[1]);
    println!("scores after:  {:.6} {:.6}", b[0], b[1]);
    std::fs::remove_file(&path)?;
    Ok(())
}
