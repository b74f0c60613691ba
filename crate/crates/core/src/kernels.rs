//! Kernel functions, kernel matrices and the median bandwidth heuristic.
//!
//! Three families are supported:
//!
//! | family     | k(x, y)                         | sup k(x, x) |
//! |------------|---------------------------------|-------------|
//! | RBF        | exp(-‖x − y‖² / σ²)             | 1           |
//! | polynomial | (⟨x, y⟩ + R)^d                  | ∞           |
//! | Cauchy     | 1 / (1 + ‖x − y‖² / σ²)         | 1           |
//!
//! Any kernel can be normalized to k'(x, y) = k(x, y) / √(k(x, x) k(y, y)),
//! which bounds the diagonal by 1 and makes unbounded kernels usable with the
//! confidence bound.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, param_err, Error, Result};

/// Kernel family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum KernelKind {
    Rbf { sigma: f64 },
    Polynomial { offset: f64, degree: u32 },
    Cauchy { sigma: f64 },
}

/// A validated kernel: family, parameters and the normalization flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub normalized: bool,
}

impl KernelSpec {
    pub fn rbf(sigma: f64) -> Result<Self> {
        Self::new(KernelKind::Rbf { sigma }, false)
    }

    pub fn cauchy(sigma: f64) -> Result<Self> {
        Self::new(KernelKind::Cauchy { sigma }, false)
    }

    pub fn polynomial(offset: f64, degree: u32) -> Result<Self> {
        Self::new(KernelKind::Polynomial { offset, degree }, false)
    }

    pub fn new(kind: KernelKind, normalized: bool) -> Result<Self> {
        match kind {
            KernelKind::Rbf { sigma } | KernelKind::Cauchy { sigma } => {
                if !(sigma.is_finite() && sigma > 0.0) {
                    return param_err(format!("bandwidth must be positive and finite, got {sigma}"));
                }
            }
            KernelKind::Polynomial { offset, degree } => {
                if degree == 0 {
                    return param_err("polynomial degree must be at least 1");
                }
                if !offset.is_finite() {
                    return param_err("polynomial offset must be finite");
                }
            }
        }
        Ok(Self { kind, normalized })
    }

    /// Returns the same kernel with k'(x, y) normalization switched on.
    pub fn normalized(self) -> Self {
        Self { normalized: true, ..self }
    }

    /// B = sup_x k(x, x). Infinite for an unnormalized polynomial kernel.
    pub fn sup_bound(&self) -> f64 {
        match (self.kind, self.normalized) {
            (_, true) | (KernelKind::Rbf { .. }, _) | (KernelKind::Cauchy { .. }, _) => 1.0,
            (KernelKind::Polynomial { .. }, false) => f64::INFINITY,
        }
    }

    /// Whether k(x, x) = 1 for every x without computing it.
    fn unit_diagonal(&self) -> bool {
        matches!(self.kind, KernelKind::Rbf { .. } | KernelKind::Cauchy { .. })
    }

    pub fn family_name(&self) -> &'static str {
        match self.kind {
            KernelKind::Rbf { .. } => "rbf",
            KernelKind::Polynomial { .. } => "polynomial",
            KernelKind::Cauchy { .. } => "cauchy",
        }
    }

    /// The raw (unnormalized) kernel value. Callers guarantee equal lengths.
    fn raw(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Rbf { sigma } => (-sq_dist(x, y) / (sigma * sigma)).exp(),
            KernelKind::Cauchy { sigma } => 1.0 / (1.0 + sq_dist(x, y) / (sigma * sigma)),
            KernelKind::Polynomial { offset, degree } => {
                let base = dot(x, y) + offset;
                let mut acc = base;
                for _ in 1..degree {
                    acc *= base;
                }
                acc
            }
        }
    }

    /// k(x, x) as used by normalization.
    fn self_value(&self, x: &[f64]) -> f64 {
        if self.unit_diagonal() {
            1.0
        } else {
            self.raw(x, x)
        }
    }

    /// Kernel value given precomputed self-values for normalization.
    fn with_self_values(&self, x: &[f64], y: &[f64], kxx: f64, kyy: f64) -> f64 {
        let k = self.raw(x, y);
        if self.normalized && !self.unit_diagonal() {
            k / (kxx * kyy).sqrt()
        } else {
            k
        }
    }

    fn check_self_value(&self, v: f64) -> Result<()> {
        if self.normalized && !self.unit_diagonal() && !(v > 0.0) {
            return Err(Error::DegenerateInput(format!(
                "normalized kernel needs k(x, x) > 0, got {v}"
            )));
        }
        Ok(())
    }
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// An n × p matrix of observations, one data point per row, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMatrix {
    values: Vec<f64>,
    nrows: usize,
    ncols: usize,
}

impl DataMatrix {
    pub fn from_row_major(nrows: usize, ncols: usize, values: Vec<f64>) -> Result<Self> {
        if nrows == 0 || ncols == 0 {
            return dim_err(format!("data matrix must be non-empty, got {nrows}x{ncols}"));
        }
        if values.len() != nrows * ncols {
            return dim_err(format!(
                "expected {} values for a {nrows}x{ncols} matrix, got {}",
                nrows * ncols,
                values.len()
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite entry at row {}, column {}",
                pos / ncols,
                pos % ncols
            )));
        }
        Ok(Self { values, nrows, ncols })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return dim_err("rows have differing lengths");
        }
        Self::from_row_major(rows.len(), ncols, rows.concat())
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let values = (0..m.nrows()).flat_map(|i| m.row(i).iter().copied().collect::<Vec<_>>()).collect();
        Self::from_row_major(m.nrows(), m.ncols(), values)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.ncols)
    }

    /// A new matrix holding the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.ncols);
        for &i in indices {
            if i >= self.nrows {
                return dim_err(format!("row index {i} out of range for {} rows", self.nrows));
            }
            values.extend_from_slice(self.row(i));
        }
        Self::from_row_major(indices.len(), self.ncols, values)
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.nrows, self.ncols, &self.values)
    }
}

/// Evaluates k(x, y), or k'(x, y) when the spec is normalized.
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return dim_err(format!("vectors have lengths {} and {}", x.len(), y.len()));
    }
    let kxx = spec.self_value(x);
    let kyy = spec.self_value(y);
    spec.check_self_value(kxx)?;
    spec.check_self_value(kyy)?;
    Ok(spec.with_self_values(x, y, kxx, kyy))
}

fn self_values(spec: &KernelSpec, x: &DataMatrix) -> Result<Vec<f64>> {
    let v: Vec<f64> = x.rows().map(|r| spec.self_value(r)).collect();
    for &s in &v {
        spec.check_self_value(s)?;
    }
    Ok(v)
}

/// The rows(X) × rows(Y) matrix of kernel evaluations. Rows are filled in
/// parallel; every entry is computed exactly as [`eval_kernel`] would.
pub fn kernel_matrix(spec: &KernelSpec, x: &DataMatrix, y: &DataMatrix) -> Result<DMatrix<f64>> {
    if x.ncols() != y.ncols() {
        return dim_err(format!("column counts differ: {} vs {}", x.ncols(), y.ncols()));
    }
    let sx = self_values(spec, x)?;
    let sy = self_values(spec, y)?;
    let ny = y.nrows();
    let mut buf = vec![0.0; x.nrows() * ny];
    buf.par_chunks_mut(ny).enumerate().for_each(|(i, out)| {
        let xi = x.row(i);
        for (j, o) in out.iter_mut().enumerate() {
            *o = spec.with_self_values(xi, y.row(j), sx[i], sy[j]);
        }
    });
    Ok(DMatrix::from_row_slice(x.nrows(), ny, &buf))
}

/// κ(x*) = (k(x_1, x*), …, k(x_n, x*)) against the rows of `x`.
pub fn kernel_vector(spec: &KernelSpec, x: &DataMatrix, point: &[f64]) -> Result<DVector<f64>> {
    if point.len() != x.ncols() {
        return dim_err(format!("point has {} entries, data has {} columns", point.len(), x.ncols()));
    }
    let sp = spec.self_value(point);
    spec.check_self_value(sp)?;
    let sx = self_values(spec, x)?;
    Ok(DVector::from_iterator(
        x.nrows(),
        x.rows().zip(&sx).map(|(r, &s)| spec.with_self_values(r, point, s, sp)),
    ))
}

/// The diagonal k(x_i, x_i) of the kernel matrix of `x`.
pub fn kernel_diagonal(spec: &KernelSpec, x: &DataMatrix) -> Result<Vec<f64>> {
    let s = self_values(spec, x)?;
    Ok(x.rows().zip(&s).map(|(r, &v)| spec.with_self_values(r, r, v, v)).collect())
}

/// Median of all pairwise Euclidean distances between the rows of `x`.
///
/// For an even number of pairs the two central order statistics are averaged.
pub fn median_bandwidth(x: &DataMatrix) -> Result<f64> {
    let n = x.nrows();
    if n < 2 {
        return param_err("median bandwidth needs at least two points");
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(sq_dist(x.row(i), x.row(j)).sqrt());
        }
    }
    dists.sort_by(f64::total_cmp);
    let mid = dists.len() / 2;
    let median = if dists.len() % 2 == 1 {
        dists[mid]
    } else {
        0.5 * (dists[mid - 1] + dists[mid])
    };
    if !(median > 0.0) {
        // With a zero median more than half the pairs coincide; only fail
        // when there is no spread at all.
        if dists.last().copied().unwrap_or(0.0) == 0.0 {
            return Err(Error::DegenerateInput("all pairwise distances are zero".into()));
        }
        return Err(Error::DegenerateInput("median pairwise distance is zero".into()));
    }
    Ok(median)
}
