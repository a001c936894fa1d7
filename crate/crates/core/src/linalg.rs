//! Thin helpers over `faer` dense complex matrices.

use crate::{Error, Result, C64};
use faer::Mat;
use std::sync::Once;

pub type CMat = Mat<C64>;

static SEQUENTIAL: Once = Once::new();

/// Dense kernels run single-threaded; parallelism lives at the task level
/// so that floating-point results never depend on the worker count.
pub fn ensure_sequential() {
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn zeros(r: usize, c: usize) -> CMat {
    Mat::zeros(r, c)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
}

pub fn from_rows(rows: &[&[C64]]) -> CMat {
    let r = rows.len();
    let c = if r == 0 { 0 } else { rows[0].len() };
    Mat::from_fn(r, c, |i, j| rows[i][j])
}

pub fn from_real(r: usize, c: usize, data: &[f64]) -> CMat {
    Mat::from_fn(r, c, |i, j| C64::new(data[i * c + j], 0.0))
}

pub fn diag(d: &[C64]) -> CMat {
    let n = d.len();
    Mat::from_fn(n, n, |i, j| if i == j { d[i] } else { ZERO })
}

pub fn adjoint(a: &CMat) -> CMat {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

pub fn transpose(a: &CMat) -> CMat {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)])
}

pub fn conj(a: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].conj())
}

pub fn scale(a: &CMat, s: C64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

pub fn add(a: &CMat, b: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + b[(i, j)])
}

pub fn sub(a: &CMat, b: &CMat) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - b[(i, j)])
}

/// `a - s·1`
pub fn shift(a: &CMat, s: C64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| if i == j { a[(i, j)] - s } else { a[(i, j)] })
}

pub fn mul(a: &CMat, b: &CMat) -> CMat {
    a * b
}

/// `u · a · u†`
pub fn conjugate_by(u: &CMat, a: &CMat) -> CMat {
    let ua = u * a;
    &ua * u.adjoint()
}

pub fn frobenius(a: &CMat) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// `[[a, b], [c, d]]` from four equally shaped blocks.
pub fn blocks(a: &CMat, b: &CMat, c: &CMat, d: &CMat) -> CMat {
    let (r, k) = (a.nrows(), a.ncols());
    Mat::from_fn(r + c.nrows(), k + b.ncols(), |i, j| match (i < r, j < k) {
        (true, true) => a[(i, j)],
        (true, false) => b[(i, j - k)],
        (false, true) => c[(i - r, j)],
        (false, false) => d[(i - r, j - k)],
    })
}

/// Pauli matrix: 0 = identity, 1 = x, 2 = y, 3 = z.
pub fn pauli(k: usize) -> CMat {
    let (o, z, i) = (ONE, ZERO, I);
    match k {
        0 => from_rows(&[&[o, z], &[z, o]]),
        1 => from_rows(&[&[z, o], &[o, z]]),
        2 => from_rows(&[&[z, -i], &[i, z]]),
        3 => from_rows(&[&[o, z], &[z, -o]]),
        _ => panic!("pauli index {k} out of range"),
    }
}

/// `1_n ⊗ σ_k`, the Pauli matrix acting on the fast (spin) index.
pub fn spin_op(sites: usize, k: usize) -> CMat {
    kron(&identity(sites), &pauli(k))
}

/// `σ_k ⊗ 1_n`, the Pauli matrix acting on the slow (block) index.
pub fn block_op(k: usize, n: usize) -> CMat {
    kron(&pauli(k), &identity(n))
}

/// ‖U†U − 1‖_F
pub fn unitarity_defect(u: &CMat) -> f64 {
    let p = u.adjoint() * u;
    frobenius(&shift(&p, ONE))
}

pub fn is_square(a: &CMat) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    Ok(a.nrows())
}

/// Right eigendecomposition. Returns eigenvalues and eigenvectors as columns.
pub fn eigen(a: &CMat) -> Result<(Vec<C64>, CMat)> {
    ensure_sequential();
    let e = a.eigen().map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))?;
    let s = e.S();
    let vals = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((vals, e.U().to_owned()))
}

/// The matrix as `f64` entries if every imaginary part is exactly zero.
pub fn as_real(a: &CMat) -> Option<Mat<f64>> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if a[(i, j)].im != 0.0 {
                return None;
            }
        }
    }
    Some(Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].re))
}

/// Right eigendecomposition of a real matrix via the real Schur form, so
/// real eigenvalues come out exactly real and complex ones in exact
/// conjugate pairs.
pub fn eigen_real(a: &Mat<f64>) -> Result<(Vec<C64>, CMat)> {
    ensure_sequential();
    let e = a.eigen().map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))?;
    let s = e.S();
    let vals = (0..a.nrows()).map(|i| s[i]).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn eigenvalues_real(a: &Mat<f64>) -> Result<Vec<C64>> {
    ensure_sequential();
    a.eigenvalues().map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))
}

pub fn eigenvalues(a: &CMat) -> Result<Vec<C64>> {
    ensure_sequential();
    a.eigenvalues().map_err(|e| Error::Numerical(format!("eigensolver: {e:?}")))
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    ensure_sequential();
    let e = a
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigensolver: {e:?}")))?;
    let s = e.S();
    let vals = (0..a.nrows()).map(|i| s[i].re).collect();
    Ok((vals, e.U().to_owned()))
}

/// Singular values, descending.
pub fn singular_values(a: &CMat) -> Result<Vec<f64>> {
    ensure_sequential();
    a.singular_values().map_err(|e| Error::Numerical(format!("svd: {e:?}")))
}

/// Solve `a x = b` for a square `a`.
pub fn solve(a: &CMat, b: &CMat) -> CMat {
    use faer::linalg::solvers::Solve;
    ensure_sequential();
    a.partial_piv_lu().solve(b)
}

pub fn column(a: &CMat, j: usize) -> Vec<C64> {
    (0..a.nrows()).map(|i| a[(i, j)]).collect()
}

pub fn matvec(a: &CMat, x: &[C64]) -> Vec<C64> {
    let mut y = vec![ZERO; a.nrows()];
    for j in 0..a.ncols() {
        let xj = x[j];
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a[(i, j)] * xj;
        }
    }
    y
}

pub fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
