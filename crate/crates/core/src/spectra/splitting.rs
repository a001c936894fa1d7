use super::diagonalize;
use crate::linalg;
use crate::models::{build_su2, DisorderSpec, LatticeSpec, DENSE_CAP};
use crate::rng;
use crate::symmetry::SymmetryClassTag;
use crate::{Error, Result, C64};
use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// Weakly non-Hermitian class-AII SU(2) model on a closed 2D or 3D lattice:
/// real on-site disorder `w_r` plus `i·diag(w)⊗σ_z` with `w` uniform in
/// `[−strength/2, strength/2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingSpec {
    pub dim: usize,
    pub width: usize,
    pub w_r: f64,
    pub strength: f64,
    pub samples: usize,
    pub seed: u64,
    /// Fraction of smallest splittings used for the exponent fit.
    #[serde(default = "default_fraction")]
    pub fit_fraction: f64,
}

fn default_fraction() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplittingStats {
    /// `|Im E|` of each matched perturbed Kramers pair.
    pub splittings: Vec<f64>,
    /// The same splittings divided by `sqrt(Σᵢ ρᵢ²)` of the unperturbed
    /// doublet (`ρᵢ` its site density), which sets the variance of the three
    /// effective couplings.
    pub scaled: Vec<f64>,
    /// Pairs discarded because they moved more than half a level spacing.
    pub discarded: usize,
    /// Maximum-likelihood `β` of `P(s) ∝ s^β exp(−A s²)` on `scaled`.
    pub beta: f64,
    /// Power-law exponent from the smallest `fit_fraction` of `scaled`.
    pub beta_small: f64,
}

/// Maximum-likelihood exponent of `P(s) ∝ s^β` from the smallest `fraction`
/// of the samples: with threshold `t`, `β̂ + 1 = n / Σ ln(t/sᵢ)`.
pub fn power_law_exponent(samples: &[f64], fraction: f64) -> Result<f64> {
    let mut v: Vec<f64> = samples.iter().copied().filter(|s| *s > 0.0).collect();
    v.sort_by(f64::total_cmp);
    let k = ((v.len() as f64 * fraction) as usize).min(v.len().saturating_sub(1));
    if k < 10 {
        return Err(Error::InvalidInput("too few positive samples for an exponent fit".into()));
    }
    let t = v[k];
    let sum: f64 = v[..k].iter().map(|s| (t / s).ln()).sum();
    Ok(k as f64 / sum - 1.0)
}

/// Maximum-likelihood `(β, A)` of `P(s) = 2A^{(β+1)/2} s^β e^{−As²} / Γ((β+1)/2)`.
/// For fixed `β` the optimum is `A = (β+1) / (2⟨s²⟩)`; `β` maximizes the
/// profile likelihood by golden-section search on `(−0.9, 20)`.
pub fn wigner_exponent(samples: &[f64]) -> Result<(f64, f64)> {
    let v: Vec<f64> = samples.iter().copied().filter(|s| *s > 0.0).collect();
    if v.len() < 10 {
        return Err(Error::InvalidInput("too few positive samples for an exponent fit".into()));
    }
    let n = v.len() as f64;
    let mean_log = v.iter().map(|s| s.ln()).sum::<f64>() / n;
    let mean_sq = v.iter().map(|s| s * s).sum::<f64>() / n;
    let a_of = |b: f64| (b + 1.0) / (2.0 * mean_sq);
    let ll = |b: f64| {
        let h = 0.5 * (b + 1.0);
        h * a_of(b).ln() - ln_gamma(h) + b * mean_log - h
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (-0.9, 20.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (ll(x1), ll(x2));
    while hi - lo > 1e-10 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = ll(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = ll(x1);
        }
    }
    let b = 0.5 * (lo + hi);
    Ok((b, a_of(b)))
}

struct Sample {
    raw: Vec<f64>,
    scaled: Vec<f64>,
    discarded: usize,
}

fn sample_splittings(spec: &SplittingSpec, index: usize) -> Result<Sample> {
    let lattice = LatticeSpec::cube(spec.dim, spec.width);
    let seed = rng::derive(spec.seed, &[index as u64]);
    let model = build_su2(lattice, DisorderSpec::su2(spec.w_r, spec.strength), &SymmetryClassTag::new("AII")?, seed)?;
    let h = model.assemble_full(DENSE_CAP)?;
    // class-AII on-site terms are ω_r ± iω_i, so the Hermitian part is the
    // unperturbed Hamiltonian and the rest is i·diag(ω_i)⊗σ_z
    let h0 = linalg::scale(&linalg::add(&h, &linalg::adjoint(&h)), C64::new(0.5, 0.0));
    let (e0, v0) = linalg::hermitian_eigen(&h0)?;
    let mut e = if spec.strength == 0.0 {
        e0.iter().map(|&x| C64::new(x, 0.0)).collect()
    } else {
        diagonalize(&h, false, DENSE_CAP, "")?.eigenvalues
    };
    e.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let sites = h.nrows() / 2;
    let mut out = Sample { raw: Vec::new(), scaled: Vec::new(), discarded: 0 };
    let pairs = e0.len() / 2;
    for k in 0..pairs {
        let level = 0.5 * (e0[2 * k] + e0[2 * k + 1]);
        let below = if k > 0 { level - 0.5 * (e0[2 * k - 2] + e0[2 * k - 1]) } else { f64::INFINITY };
        let above = if k + 1 < pairs { 0.5 * (e0[2 * k + 2] + e0[2 * k + 3]) - level } else { f64::INFINITY };
        let half_gap = 0.5 * below.min(above);
        let (a, b) = (e[2 * k], e[2 * k + 1]);
        if (a - level).norm() > half_gap || (b - level).norm() > half_gap {
            out.discarded += 1;
            continue;
        }
        let s = 0.5 * (a.im - b.im).abs();
        // site density of the doublet, invariant under rotations within it
        let rho2: f64 = (0..sites)
            .map(|i| {
                let r: f64 = (2 * i..2 * i + 2)
                    .map(|row| 0.5 * (v0[(row, 2 * k)].norm_sqr() + v0[(row, 2 * k + 1)].norm_sqr()))
                    .sum();
                r * r
            })
            .sum();
        out.raw.push(s);
        out.scaled.push(s / rho2.sqrt());
    }
    Ok(out)
}

/// Imaginary displacements of perturbed Kramers pairs, pooled over samples,
/// with the exponent of their distribution.
pub fn splitting_stats(spec: &SplittingSpec) -> Result<SplittingStats> {
    let per: Vec<Sample> =
        (0..spec.samples).into_par_iter().map(|i| sample_splittings(spec, i)).collect::<Result<_>>()?;
    let mut st = SplittingStats { splittings: Vec::new(), scaled: Vec::new(), discarded: 0, beta: f64::NAN, beta_small: f64::NAN };
    for s in per {
        st.splittings.extend(s.raw);
        st.scaled.extend(s.scaled);
        st.discarded += s.discarded;
    }
    if st.splittings.len() < 1000 {
        return Err(Error::InvalidInput(format!("only {} splittings; need at least 1000", st.splittings.len())));
    }
    if st.scaled.iter().any(|s| *s > 0.0) {
        st.beta = wigner_exponent(&st.scaled)?.0;
        st.beta_small = power_law_exponent(&st.scaled, spec.fit_fraction)?;
    }
    Ok(st)
}

/// Eigenvalues of the real two-level model `[[ε₁, −Δ₀], [Δ₀, ε₂]]`; both are
/// real when `|ε₁ − ε₂|/2 ≥ |Δ₀|`.
pub fn ai_two_level(eps1: f64, eps2: f64, delta0: f64) -> Result<[C64; 2]> {
    let h: Mat<f64> = Mat::from_fn(2, 2, |i, j| [[eps1, -delta0], [delta0, eps2]][i][j]);
    let v = linalg::eigenvalues_real(&h)?;
    Ok([v[0], v[1]])
}

