//! Dense spectra and their statistics.

mod dos;
mod ginibre;
mod splitting;

pub use dos::{dos_hist, write_histogram_csv, Axis, Binning, DosHistogram};
pub use ginibre::{ginibre, Ginibre};
pub use splitting::{ai_two_level, power_law_exponent, splitting_stats, wigner_exponent, SplittingSpec, SplittingStats};

use crate::linalg::{self, CMat};
use crate::models::DENSE_CAP;
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<C64>,
    /// Right eigenvectors as columns, each of unit 2-norm.
    pub vectors: Option<CMat>,
    pub ipr: Option<Vec<f64>>,
    pub source: String,
}

/// Full spectrum of a dense matrix. Entrywise-real input goes through the
/// real Schur path so real eigenvalues are exactly real.
pub fn diagonalize(h: &CMat, want_vectors: bool, cap: usize, source: &str) -> Result<SpectrumResult> {
    let n = linalg::is_square(h)?;
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let real = linalg::as_real(h);
    if !want_vectors {
        let eigenvalues = match &real {
            Some(r) => linalg::eigenvalues_real(r)?,
            None => linalg::eigenvalues(h)?,
        };
        return Ok(SpectrumResult { eigenvalues, vectors: None, ipr: None, source: source.into() });
    }
    let (eigenvalues, mut vectors) = match &real {
        Some(r) => linalg::eigen_real(r)?,
        None => linalg::eigen(h)?,
    };
    let mut iprs = Vec::with_capacity(n);
    for j in 0..n {
        let col = vectors.col_as_slice_mut(j);
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Numerical(format!("zero eigenvector {j}")));
        }
        col.iter_mut().for_each(|z| *z /= norm);
        iprs.push(ipr(col)?);
    }
    Ok(SpectrumResult { eigenvalues, vectors: Some(vectors), ipr: Some(iprs), source: source.into() })
}

pub fn diagonalize_default(h: &CMat, want_vectors: bool) -> Result<SpectrumResult> {
    diagonalize(h, want_vectors, DENSE_CAP, "")
}

/// `Σ|ψ|⁴ / (Σ|ψ|²)²`.
pub fn ipr(psi: &[C64]) -> Result<f64> {
    let s2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if s2 == 0.0 {
        return Err(Error::InvalidInput("IPR of the zero vector".into()));
    }
    let s4: f64 = psi.iter().map(|z| z.norm_sqr().powi(2)).sum();
    Ok(s4 / (s2 * s2))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlayRecord {
    pub re: f64,
    pub im: f64,
    pub inv_ipr: f64,
}

/// One `(Re E, Im E, 1/I)` row per eigenvalue.
pub fn ipr_overlay(spectra: &[SpectrumResult]) -> Result<Vec<OverlayRecord>> {
    let mut out = Vec::new();
    for s in spectra {
        let ipr = s.ipr.as_ref().ok_or_else(|| Error::InvalidInput("spectrum carries no eigenvectors".into()))?;
        for (e, i) in s.eigenvalues.iter().zip(ipr) {
            out.push(OverlayRecord { re: e.re, im: e.im, inv_ipr: 1.0 / i });
        }
    }
    Ok(out)
}

/// `re,im,ipr` rows; `ipr` is empty when the spectrum has no vectors.
pub fn write_spectrum_csv<W: Write>(spectra: &[SpectrumResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["re", "im", "ipr"])?;
    for s in spectra {
        for (k, e) in s.eigenvalues.iter().enumerate() {
            let ipr = s.ipr.as_ref().map(|v| format!("{:?}", v[k])).unwrap_or_default();
            w.write_record([format!("{:?}", e.re), format!("{:?}", e.im), ipr])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Largest mismatch between the spectrum and its complex conjugate, after
/// matching each eigenvalue with its nearest conjugate partner.
pub fn conjugation_mismatch(values: &[C64]) -> f64 {
    let mut used = vec![false; values.len()];
    let mut worst: f64 = 0.0;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].im.abs().total_cmp(&values[b].im.abs()));
    for &i in &order {
        if used[i] {
            continue;
        }
        let target = values[i].conj();
        let j = (0..values.len())
            .filter(|&j| !used[j] && (j != i || values[i].im == 0.0))
            .min_by(|&a, &b| (values[a] - target).norm().total_cmp(&(values[b] - target).norm()));
        match j {
            Some(j) => {
                worst = worst.max((values[j] - target).norm());
                used[i] = true;
                used[j] = true;
            }
            None => worst = f64::INFINITY,
        }
    }
    worst
}

/// Count of eigenvalues with `|Im E| < 1e−10 ×` spectral radius.
pub fn count_real(values: &[C64]) -> usize {
    let radius = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    values.iter().filter(|z| z.im.abs() < 1e-10 * radius).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ipr_limits() {
        let n = 50;
        let uniform = vec![C64::new(1.0, 0.0); n];
        assert!((ipr(&uniform).unwrap() - 1.0 / n as f64).abs() < 1e-15);
        let mut delta = vec![C64::new(0.0, 0.0); n];
        delta[7] = C64::new(0.0, 3.0);
        assert_eq!(ipr(&delta).unwrap(), 1.0);
        assert!(ipr(&vec![C64::new(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn mismatch_of_conjugate_pairs() {
        let v = [C64::new(1.0, 2.0), C64::new(0.5, 0.0), C64::new(1.0, -2.0)];
        assert_eq!(conjugation_mismatch(&v), 0.0);
        let v = [C64::new(1.0, 2.0), C64::new(1.0, 2.0)];
        assert!(conjugation_mismatch(&v) > 1.0);
    }
}
