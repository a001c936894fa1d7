//! Hermitization `H ↦ [[0, H−E], [H†−E*, 0]]` and its zero modes.

use crate::linalg::{self, CMat, ZERO};
use crate::{Error, Result, C64};
use faer::Mat;

#[derive(Clone, Debug)]
pub struct HermitizedPair {
    pub h: CMat,
    pub energy: C64,
    pub tilde: CMat,
}

pub fn hermitize(h: &CMat, e: C64) -> Result<HermitizedPair> {
    let n = linalg::is_square(h)?;
    let tilde = Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, false) => h[(i, j - n)] - if i == j - n { e } else { ZERO },
        (false, true) => h[(j, i - n)].conj() - if i - n == j { e.conj() } else { ZERO },
        _ => ZERO,
    });
    Ok(HermitizedPair { h: h.clone(), energy: e, tilde })
}

/// Smallest singular value of `H − E`.
pub fn smallest_singular_value(h: &CMat, e: C64) -> Result<f64> {
    let s = linalg::singular_values(&linalg::shift(h, e))?;
    Ok(s.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Threshold on the smallest singular value of `H − E` for a zero mode.
pub fn zero_mode_threshold(h: &CMat) -> f64 {
    1e-8 * linalg::frobenius(h)
}

#[derive(Clone, Debug)]
pub struct ZeroModes {
    /// The two eigenvalues of H̃ closest to zero.
    pub values: [f64; 2],
    /// Orthonormal basis (2N × 2) of their span, rotated to τ_z eigenvectors.
    pub basis: CMat,
    /// τ_z expectation of each basis vector, ascending.
    pub chirality: [f64; 2],
}

impl HermitizedPair {
    pub fn dim(&self) -> usize {
        self.tilde.nrows()
    }

    pub fn tau_z(&self) -> Vec<f64> {
        let n = self.dim() / 2;
        (0..2 * n).map(|i| if i < n { 1.0 } else { -1.0 }).collect()
    }

    /// ‖H̃ − H̃†‖_F
    pub fn hermiticity_residual(&self) -> f64 {
        linalg::frobenius(&linalg::sub(&self.tilde, &linalg::adjoint(&self.tilde)))
    }

    /// ‖τ_z H̃ τ_z + H̃‖_F
    pub fn chirality_residual(&self) -> f64 {
        let t = self.tau_z();
        let m = &self.tilde;
        let mut s = 0.0;
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                s += (m[(i, j)] * t[i] * t[j] + m[(i, j)]).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// The two eigenvectors of H̃ nearest zero energy, diagonalized with
    /// respect to τ_z inside their span.
    pub fn zero_modes(&self) -> Result<ZeroModes> {
        let (vals, vecs) = linalg::hermitian_eigen(&self.tilde)?;
        let mut idx: Vec<usize> = (0..vals.len()).collect();
        idx.sort_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs()));
        if idx.len() < 2 {
            return Err(Error::InvalidInput("hermitized matrix is smaller than 2×2".into()));
        }
        let (a, b) = (idx[0], idx[1]);
        let t = self.tau_z();
        let p = Mat::from_fn(self.dim(), 2, |i, k| vecs[(i, if k == 0 { a } else { b })]);
        // 2×2 Hermitian matrix P† τ_z P
        let mut m = [[ZERO; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = (0..self.dim()).map(|i| p[(i, r)].conj() * t[i] * p[(i, c)]).sum();
            }
        }
        let (mean, half) = ((m[0][0].re + m[1][1].re) / 2.0, (m[0][0].re - m[1][1].re) / 2.0);
        let off = m[0][1];
        let rad = (half * half + off.norm_sqr()).sqrt();
        let (lo, hi) = (mean - rad, mean + rad);
        // eigenvector of the 2×2 block for eigenvalue `lo`
        let rot = if off.norm() > 1e-300 {
            let v = [off, C64::new(lo - m[0][0].re, 0.0)];
            let nv = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            [v[0] / nv, v[1] / nv]
        } else if m[0][0].re <= m[1][1].re {
            [C64::new(1.0, 0.0), ZERO]
        } else {
            [ZERO, C64::new(1.0, 0.0)]
        };
        let other = [-rot[1].conj(), rot[0].conj()];
        let basis = Mat::from_fn(self.dim(), 2, |i, k| {
            let w = if k == 0 { rot } else { other };
            p[(i, 0)] * w[0] + p[(i, 1)] * w[1]
        });
        Ok(ZeroModes { values: [vals[a], vals[b]], basis, chirality: [lo, hi] })
    }

    /// ‖H̃ x‖ for a vector in the doubled space.
    pub fn apply_norm(&self, x: &[C64]) -> f64 {
        linalg::vec_norm(&linalg::matvec(&self.tilde, x))
    }
}

/// Left eigenvector of `h` at eigenvalue `e0` (right eigenvector of H† at
/// e0*), by inverse iteration. Unit 2-norm.
pub fn left_eigenvector(h: &CMat, e0: C64) -> Result<Vec<C64>> {
    let n = linalg::is_square(h)?;
    let scale = linalg::frobenius(h).max(1.0);
    let shifted = linalg::shift(&linalg::adjoint(h), e0.conj() + C64::new(1e-13 * scale, 0.0));
    let mut x = Mat::from_fn(n, 1, |i, _| C64::new(1.0 + (i as f64 * 0.618).sin(), 0.3));
    for _ in 0..3 {
        x = linalg::solve(&shifted, &x);
        let nrm = (0..n).map(|i| x[(i, 0)].norm_sqr()).sum::<f64>().sqrt();
        if !nrm.is_finite() || nrm == 0.0 {
            return Err(Error::Numerical("inverse iteration failed".into()));
        }
        for i in 0..n {
            x[(i, 0)] /= nrm;
        }
    }
    Ok(linalg::column(&x, 0))
}
