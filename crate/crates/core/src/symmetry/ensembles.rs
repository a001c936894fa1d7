//! Reference unitaries for common classes and random members of a class.
//!
//! Spinful classes use the interleaved basis `site·2 + spin`, so `σ` acts on
//! the fast index; chiral blocks use `τ ⊗ 1` on the slow index.

use super::ops::{verify, OpKind, SymmetryOp};
use crate::linalg::{self, CMat};
use crate::{Error, Result, C64};
use faer::Mat;
use rand::Rng;
use rand_distr::StandardNormal;

/// Complex Gaussian matrix with unit-variance entries.
pub fn complex_gaussian<R: Rng + ?Sized>(r: usize, c: usize, rng: &mut R) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Mat::from_fn(r, c, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

pub fn real_gaussian<R: Rng + ?Sized>(r: usize, c: usize, rng: &mut R) -> CMat {
    Mat::from_fn(r, c, |_, _| C64::new(rng.sample(StandardNormal), 0.0))
}

/// Random Hermitian matrix (GUE-like).
pub fn hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = complex_gaussian(n, n, rng);
    linalg::scale(&linalg::add(&g, &linalg::adjoint(&g)), C64::new(0.5, 0.0))
}

/// Alternating ±1 per spin pair, a stand-in sublattice sign.
fn alternating(sites: usize) -> CMat {
    let d: Vec<C64> = (0..sites)
        .flat_map(|s| {
            let v = if s % 2 == 0 { 1.0 } else { -1.0 };
            [C64::new(v, 0.0); 2]
        })
        .collect();
    linalg::diag(&d)
}

/// Defining operations of `class` in dimension `n`, for the classes used by
/// the lattice models and the correspondence checks.
pub fn standard_ops(class: &str, n: usize) -> Result<Vec<SymmetryOp>> {
    let rec = super::classes::lookup(class)?;
    let need_even = |n: usize| {
        if n % 2 == 0 {
            Ok(n / 2)
        } else {
            Err(Error::InvalidInput(format!("class {} needs even dimension, got {n}", rec.name)))
        }
    };
    let id = || linalg::identity(n);
    let ops = match rec.name {
        "A" => vec![],
        "AI" => vec![SymmetryOp::new(OpKind::Trs, id())?],
        "AII" => vec![SymmetryOp::new(OpKind::Trs, linalg::spin_op(need_even(n)?, 2))?],
        "AIII" => vec![SymmetryOp::new(OpKind::Cs, linalg::block_op(3, need_even(n)?))?],
        "AIII†" => vec![SymmetryOp::new(OpKind::Sls, linalg::block_op(3, need_even(n)?))?],
        "D" => vec![SymmetryOp::new(OpKind::Phs, id())?],
        "C" => vec![SymmetryOp::new(OpKind::Phs, linalg::spin_op(need_even(n)?, 2))?],
        "AI†" => vec![SymmetryOp::new(OpKind::TrsDag, id())?],
        "AII†" => vec![SymmetryOp::new(OpKind::TrsDag, linalg::spin_op(need_even(n)?, 2))?],
        "BDI" => vec![
            SymmetryOp::new(OpKind::Trs, id())?,
            SymmetryOp::new(OpKind::Phs, linalg::block_op(3, need_even(n)?))?,
        ],
        "CII†" => {
            let m = need_even(n)?;
            let sy = linalg::spin_op(m, 2);
            vec![
                SymmetryOp::new(OpKind::TrsDag, sy.clone())?,
                SymmetryOp::new(OpKind::PhsDag, &alternating(m) * &sy)?,
            ]
        }
        "DIII" => {
            let m = need_even(n)?;
            vec![
                SymmetryOp::new(OpKind::Trs, linalg::spin_op(m, 2))?,
                SymmetryOp::new(OpKind::Phs, linalg::spin_op(m, 1))?,
            ]
        }
        other => return Err(Error::UnsupportedClass(other.to_string())),
    };
    Ok(ops)
}

/// Project `h` onto the matrices satisfying every relation in `ops` by
/// alternating the involutive averages `(H + ε U X(H) U†)/2`.
pub fn symmetrize(h: &CMat, ops: &[SymmetryOp]) -> CMat {
    let mut m = h.clone();
    for _ in 0..64 {
        for op in ops {
            let img = linalg::scale(&op.image(&m), C64::new(op.kind.parity(), 0.0));
            m = linalg::scale(&linalg::add(&m, &img), C64::new(0.5, 0.0));
        }
        if ops.iter().all(|op| verify(&m, op).map(|r| r < 1e-15).unwrap_or(false)) {
            break;
        }
    }
    m
}

/// Random non-Hermitian member of `class` together with its operations.
pub fn random_in_class<R: Rng + ?Sized>(
    class: &str,
    n: usize,
    rng: &mut R,
) -> Result<(CMat, Vec<SymmetryOp>)> {
    let ops = standard_ops(class, n)?;
    let g = complex_gaussian(n, n, rng);
    Ok((symmetrize(&g, &ops), ops))
}

/// Random real symmetric matrix satisfying `V H V = H*` for `V = diag(1_{n1}, −1_{n−n1})`:
/// real symmetric diagonal blocks and a purely imaginary off-diagonal block.
pub fn hermitian_ai_diagonal<R: Rng + ?Sized>(n: usize, n1: usize, rng: &mut R) -> CMat {
    let g = real_gaussian(n, n, rng);
    Mat::from_fn(n, n, |i, j| {
        let s = (g[(i, j)].re + g[(j, i)].re) / 2.0;
        let a = (g[(i, j)].re - g[(j, i)].re) / 2.0;
        if (i < n1) == (j < n1) {
            C64::new(s, 0.0)
        } else {
            C64::new(0.0, a)
        }
    })
}

/// Random Hermitian `[[h1, h12], [h12†, h2]]` with `σ_x H σ_x = H*`, i.e.
/// `h2 = h1*` and `h12ᵀ = h12`.
pub fn hermitian_ai_swap<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMat {
    let h1 = hermitian(m, rng);
    let g = complex_gaussian(m, m, rng);
    let h12 = linalg::scale(&linalg::add(&g, &linalg::transpose(&g)), C64::new(0.5, 0.0));
    linalg::blocks(&h1, &h12, &linalg::adjoint(&h12), &linalg::conj(&h1))
}

/// Random chiral Hermitian `[[0, h], [h†, 0]]` whose block `h` has a one
/// dimensional kernel on both sides, so the input carries zero modes.
pub fn hermitian_aiii<R: Rng + ?Sized>(m: usize, real: bool, rng: &mut R) -> Result<CMat> {
    let g = if real { real_gaussian(m, m, rng) } else { complex_gaussian(m, m, rng) };
    let h = remove_smallest_singular(&g, real)?;
    let z = linalg::zeros(m, m);
    Ok(linalg::blocks(&z, &h, &linalg::adjoint(&h), &z))
}

/// `g − σ_min u v†`, exactly singular up to rounding. For real input the
/// result stays real.
fn remove_smallest_singular(g: &CMat, real: bool) -> Result<CMat> {
    linalg::ensure_sequential();
    let svd = g.svd().map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let k = g.ncols() - 1;
    let sk = s[k];
    let out = Mat::from_fn(g.nrows(), g.ncols(), |i, j| g[(i, j)] - sk * u[(i, k)] * v[(j, k)].conj());
    Ok(if real { Mat::from_fn(out.nrows(), out.ncols(), |i, j| C64::new(out[(i, j)].re, 0.0)) } else { out })
}
