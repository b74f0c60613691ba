//! Kernel evaluation, normalization and the median bandwidth heuristic.

use nystrompca::{eval_kernel, kernel_matrix, median_bandwidth, DataMatrix, KernelSpec};

fn main() -> nystrompca::Result<()> {
    let x = DataMatrix::from_rows(&[
        vec![0.0, 0.0],
        vec![1.0, 0.0],
        vec![0.0, 2.0],
        vec![3.0, 1.0],
    ])?;
    let sigma = median_bandwidth(&x)?;
    println!("median pairwise distance: {sigma:.4}");

    let kernels = [
        KernelSpec::rbf(sigma)?,
        KernelSpec::cauchy(sigma)?,
        KernelSpec::polynomial(1.0, 2)?,
        KernelSpec::polynomial(1.0, 2)?.normalized(),
    ];
    for spec in &kernels {
        let k = eval_kernel(spec, x.row(1), x.row(3))?;
        let label = if spec.normalized { format!("{} (normalized)", spec.family_name()) } else { spec.family_name().into() };
        println!("{label:<24} k(x1, x3) = {k:.5}   B = {}", spec.sup_bound());
    }

    let k = kernel_matrix(&kernels[0], &x, &x)?;
    println!("rbf kernel matrix:{k:.4}");
    Ok(())
}
