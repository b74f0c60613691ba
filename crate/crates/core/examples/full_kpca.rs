//! Full centred kernel PCA on a small point cloud.

use nystrompca::{fit_full_kpca, DataMatrix, KernelSpec};

fn main() -> nystrompca::Result<()> {
    // Two noisy concentric rings.
    let rows: Vec<Vec<f64>> = (0..120)
        .map(|i| {
            let t = i as f64 * 0.31;
            let r = if i % 2 == 0 { 1.0 } else { 3.0 } + 0.05 * (i as f64 * 1.7).sin();
            vec![r * t.cos(), r * t.sin()]
        })
        .collect();
    let x = DataMatrix::from_rows(&rows)?;
    let model = fit_full_kpca(&KernelSpec::rbf(1.5)?, &x)?;

    println!("retained rank {} of {}", model.retained_rank(), model.n());
    println!("total variance {:.4}", model.total_variance());
    let ev = model.explained_variance();
    let mut captured = 0.0;
    for (j, v) in ev.iter().take(6).enumerate() {
        captured += v;
        println!("component {:>2}: variance {v:.4}  cumulative fraction {:.3}", j + 1, captured / model.total_variance());
    }
    let s = model.scores();
    println!("first point scores on components 1-2: ({:.4}, {:.4})", s[(0, 0)], s[(0, 1)]);
    Ok(())
}
