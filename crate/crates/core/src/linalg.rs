//! Dense complex linear algebra used by the section-level computations.
//!
//! Everything here is a thin layer over `faer`; callers never touch the
//! backend types beyond [`CMat`].

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, MatRef, Side};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

/// Unit roundoff used by the numerical-rank convention `k * sigma_max * 2^-52`.
pub const EPS: f64 = f64::EPSILON;

pub fn zeros(rows: usize, cols: usize) -> CMat {
    Mat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn adjoint(m: MatRef<'_, c64>) -> CMat {
    m.adjoint().to_owned()
}

pub fn frobenius(m: MatRef<'_, c64>) -> f64 {
    m.norm_l2()
}

/// Right singular data of a matrix, padded so that every column of the
/// input has a singular value: for wide matrices the missing values are 0.
#[derive(Clone, Debug)]
pub struct RightSingular {
    /// Ascending, one per column.
    pub values: Vec<f64>,
    /// Columns are the right singular vectors matching `values`.
    pub vectors: CMat,
}

impl RightSingular {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min_vector(&self) -> Vec<c64> {
        column(self.vectors.as_ref(), 0)
    }

    /// Number of singular values at or below `tol`.
    pub fn nullity(&self, tol: f64) -> usize {
        self.values.iter().take_while(|s| **s <= tol).count()
    }

    /// Orthonormal basis (as columns) of the numerical kernel at `tol`.
    pub fn kernel(&self, tol: f64) -> CMat {
        let k = self.nullity(tol);
        let n = self.vectors.nrows();
        Mat::from_fn(n, k, |i, j| self.vectors[(i, j)])
    }
}

pub fn right_singular(m: MatRef<'_, c64>) -> Result<RightSingular> {
    let (rows, cols) = (m.nrows(), m.ncols());
    if cols == 0 {
        return Ok(RightSingular {
            values: Vec::new(),
            vectors: zeros(0, 0),
        });
    }
    if rows == 0 {
        return Ok(RightSingular {
            values: vec![0.0; cols],
            vectors: identity(cols),
        });
    }
    let svd = m
        .svd()
        .map_err(|e| Error::Decomposition(format!("svd: {e:?}")))?;
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let v = svd.V();
    // faer returns nonincreasing values; V is cols x cols.
    let mut values = Vec::with_capacity(cols);
    let mut order = Vec::with_capacity(cols);
    for j in (s.len()..cols).rev() {
        values.push(0.0);
        order.push(j);
    }
    for j in (0..s.len()).rev() {
        values.push(s[j].max(0.0));
        order.push(j);
    }
    let vectors = Mat::from_fn(cols, cols, |i, j| v[(i, order[j])]);
    Ok(RightSingular { values, vectors })
}

/// Singular values in nonincreasing order (`min(rows, cols)` of them).
pub fn singular_values(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    m.singular_values()
        .map_err(|e| Error::Decomposition(format!("svd: {e:?}")))
}

pub fn spectral_norm(m: MatRef<'_, c64>) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Smallest singular value of `m` counting a padded zero for wide matrices,
/// i.e. `min ||m x||` over unit `x`.
pub fn sigma_min(m: MatRef<'_, c64>) -> Result<f64> {
    if m.ncols() > m.nrows() {
        return Ok(0.0);
    }
    Ok(singular_values(m)?.last().copied().unwrap_or(0.0))
}

pub fn vstack(blocks: &[MatRef<'_, c64>]) -> CMat {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r0 = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack: column mismatch");
        for i in 0..b.nrows() {
            for j in 0..cols {
                out[(r0 + i, j)] = b[(i, j)];
            }
        }
        r0 += b.nrows();
    }
    out
}

pub fn block_diag(blocks: &[MatRef<'_, c64>]) -> CMat {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                out[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// `lambda * e - a`.
pub fn pencil_at(e: MatRef<'_, c64>, a: MatRef<'_, c64>, lambda: c64) -> CMat {
    Mat::from_fn(e.nrows(), e.ncols(), |i, j| lambda * e[(i, j)] - a[(i, j)])
}

pub fn hermitian_part(m: MatRef<'_, c64>) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        (m[(i, j)] + m[(j, i)].conj()) * 0.5
    })
}

fn is_diagonal(m: MatRef<'_, c64>) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == c64::new(0.0, 0.0)))
}

/// Eigenvalues of the Hermitian part of `m`, ascending. Exactly diagonal
/// input is read off directly.
pub fn hermitian_eigenvalues(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let h = hermitian_part(m);
    if is_diagonal(h.as_ref()) {
        let mut d: Vec<f64> = (0..h.nrows()).map(|i| h[(i, i)].re).collect();
        d.sort_by(f64::total_cmp);
        return Ok(d);
    }
    h.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("hermitian eigen: {e:?}")))
}

/// Eigen-decomposition of the Hermitian part of `m`: ascending values and
/// matching orthonormal eigenvector columns.
pub fn hermitian_eigen(m: MatRef<'_, c64>) -> Result<(Vec<f64>, CMat)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let h = hermitian_part(m);
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Decomposition(format!("hermitian eigen: {e:?}")))?;
    let values = eig.S().column_vector().iter().map(|z| z.re).collect();
    Ok((values, eig.U().to_owned()))
}

pub fn eigenvalues(m: MatRef<'_, c64>) -> Result<Vec<c64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.eigenvalues()
        .map_err(|e| Error::Decomposition(format!("eigenvalues: {e:?}")))
}

/// Generalized eigenvalues of `a x = lambda b x` as `(alpha, beta)` pairs;
/// `beta == 0` encodes an infinite eigenvalue.
pub fn generalized_eigenvalues(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Result<Vec<(c64, c64)>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let g = a
        .generalized_eigen(b)
        .map_err(|e| Error::Decomposition(format!("generalized eigen: {e:?}")))?;
    Ok(g.S_a()
        .column_vector()
        .iter()
        .zip(g.S_b().column_vector().iter())
        .map(|(x, y)| (*x, *y))
        .collect())
}

pub fn determinant(m: MatRef<'_, c64>) -> c64 {
    if m.nrows() == 0 {
        return c64::new(1.0, 0.0);
    }
    m.determinant()
}

pub fn solve(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    a.partial_piv_lu().solve(b)
}

pub fn column(m: MatRef<'_, c64>, j: usize) -> Vec<c64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

pub fn from_columns(rows: usize, cols: &[Vec<c64>]) -> CMat {
    Mat::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

pub fn mat_vec(m: MatRef<'_, c64>, x: &[c64]) -> Vec<c64> {
    assert_eq!(m.ncols(), x.len(), "mat_vec: dimension mismatch");
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

pub fn vec_norm(x: &[c64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn approx_eq(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let d = Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - b[(i, j)]);
    frobenius(d.as_ref())
}

/// Orthonormal basis of the column span, dropping directions with singular
/// value at or below `tol`.
pub fn orthonormal_span(m: MatRef<'_, c64>, tol: f64) -> Result<CMat> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Ok(zeros(m.nrows(), 0));
    }
    let svd = m
        .svd()
        .map_err(|e| Error::Decomposition(format!("svd: {e:?}")))?;
    let rank = svd
        .S()
        .column_vector()
        .iter()
        .take_while(|s| s.re > tol)
        .count();
    let u = svd.U();
    Ok(Mat::from_fn(m.nrows(), rank, |i, j| u[(i, j)]))
}

/// Largest principal angle between the spans of two orthonormal column
/// sets, computed from `||(I - U U*) V||_2` so that small angles keep their
/// precision. Spans of different dimension are at angle pi/2.
pub fn subspace_angle(u: MatRef<'_, c64>, v: MatRef<'_, c64>) -> Result<f64> {
    if u.ncols() != v.ncols() {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    if u.ncols() == 0 {
        return Ok(0.0);
    }
    let proj = u * (u.adjoint() * v);
    let resid = Mat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] - proj[(i, j)]);
    let s = spectral_norm(resid.as_ref())?;
    Ok(s.min(1.0).asin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> c64 {
        c64::new(re, 0.0)
    }

    #[test]
    fn wide_matrix_has_padded_zero() {
        let m = Mat::from_fn(2, 3, |i, j| c((i * 3 + j) as f64 + 1.0));
        let rs = right_singular(m.as_ref()).unwrap();
        assert_eq!(rs.values.len(), 3);
        assert_eq!(rs.values[0], 0.0);
        let x = rs.min_vector();
        assert!(vec_norm(&mat_vec(m.as_ref(), &x)) < 1e-13);
        assert_eq!(sigma_min(m.as_ref()).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_hermitian_eigenvalues_are_exact() {
        let m = Mat::from_fn(3, 3, |i, j| if i == j { c(1.0) } else { c(0.0) });
        assert_eq!(
            hermitian_eigenvalues(m.as_ref()).unwrap(),
            vec![1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn subspace_angle_of_rotated_line() {
        let t: f64 = 1e-9;
        let u = Mat::from_fn(2, 1, |i, _| if i == 0 { c(1.0) } else { c(0.0) });
        let v = Mat::from_fn(2, 1, |i, _| if i == 0 { c(t.cos()) } else { c(t.sin()) });
        let a = subspace_angle(u.as_ref(), v.as_ref()).unwrap();
        assert!((a - t).abs() < 1e-15);
    }
}
