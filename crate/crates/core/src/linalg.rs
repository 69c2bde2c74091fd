//! Small dense helpers shared by the geometry modules.

use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::tolerances;
use crate::{Mat, Vector};

/// Bivector `X∧Y` as the operator `Z ↦ ⟨Y,Z⟩X − ⟨X,Z⟩Y`.
pub fn wedge(x: &Vector, y: &Vector, g: &Mat) -> Mat {
    let gy = g * y;
    let gx = g * x;
    x * gy.transpose() - y * gx.transpose()
}

pub fn inner(g: &Mat, x: &Vector, y: &Vector) -> f64 {
    (x.transpose() * g * y)[(0, 0)]
}

pub fn commutator(a: &Mat, b: &Mat) -> Mat {
    a * b - b * a
}

pub fn anticommutator(a: &Mat, b: &Mat) -> Mat {
    a * b + b * a
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_vec(v: &Vector) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Residual of `g A + Aᵀ g = 0`.
pub fn skew_residual(g: &Mat, a: &Mat) -> f64 {
    max_abs(&(g * a + a.transpose() * g))
}

/// Residual of `g A − Aᵀ g = 0`.
pub fn symmetric_residual(g: &Mat, a: &Mat) -> f64 {
    max_abs(&(g * a - a.transpose() * g))
}

pub fn inverse(m: &Mat) -> Result<Mat> {
    m.clone().try_inverse().ok_or_else(|| {
        Error::InvalidArgument(format!("matrix of size {} is not invertible", m.nrows()))
    })
}

/// Numerical rank with the relative singular-value cutoff.
pub fn rank(m: &Mat) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0_f64, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > tolerances::RANK * top).count()
}

/// Orthonormal (Euclidean) basis of the kernel of `m`, as columns.
pub fn null_space(m: &Mat) -> Mat {
    let cols = m.ncols();
    if cols == 0 {
        return Mat::zeros(0, 0);
    }
    // Pad so the SVD returns a full right factor.
    let rows = m.nrows().max(cols);
    let mut padded = Mat::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let top = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| top == 0.0 || svd.singular_values[i] <= tolerances::RANK * top)
        .collect();
    let mut out = Mat::zeros(cols, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &vt.row(i).transpose());
    }
    out
}

/// Orthonormal (Euclidean) basis of the column span of `m`.
pub fn column_span(m: &Mat) -> Mat {
    if m.ncols() == 0 {
        return Mat::zeros(m.nrows(), 0);
    }
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("requested left singular vectors");
    let top = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| top > 0.0 && svd.singular_values[i] > tolerances::RANK * top)
        .collect();
    let mut out = Mat::zeros(m.nrows(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &u.column(i));
    }
    out
}

/// Intersection of the column spans of `a` and `b`.
pub fn intersect(a: &Mat, b: &Mat) -> Mat {
    let a = column_span(a);
    let b = column_span(b);
    if a.ncols() == 0 || b.ncols() == 0 {
        return Mat::zeros(a.nrows(), 0);
    }
    let mut stacked = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    stacked.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(&a);
    stacked
        .view_mut((0, a.ncols()), (a.nrows(), b.ncols()))
        .copy_from(&(-&b));
    let kernel = null_space(&stacked);
    let coeffs = kernel.rows(0, a.ncols()).into_owned();
    column_span(&(a * coeffs))
}

/// Left inverse `(WᵀgW)⁻¹Wᵀg` of a nondegenerate frame `W`: maps ambient
/// vectors to coordinates of their g-orthogonal projection onto span(W).
pub fn g_left_inverse(w: &Mat, g: &Mat) -> Result<Mat> {
    let gram = w.transpose() * g * w;
    Ok(inverse(&gram)? * w.transpose() * g)
}

/// Matrix whose columns are the concatenation of the given blocks.
pub fn hstack(blocks: &[&Mat]) -> Mat {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        out.view_mut((0, at), (rows, b.ncols())).copy_from(*b);
        at += b.ncols();
    }
    out
}

/// Counts of positive and negative eigenvalues of a symmetric matrix.
pub fn signature(sym: &Mat) -> (usize, usize) {
    let eig = nalgebra::SymmetricEigen::new(sym.clone());
    let top = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let cut = tolerances::RANK * top.max(f64::MIN_POSITIVE);
    let pos = eig.eigenvalues.iter().filter(|v| **v > cut).count();
    let neg = eig.eigenvalues.iter().filter(|v| **v < -cut).count();
    (pos, neg)
}
