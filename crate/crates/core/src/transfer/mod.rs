//! Lyapunov exponents of quasi-1D transfer-matrix products.
//!
//! The state is a `2N × M` matrix whose upper half holds `ψ_n` and lower half
//! `ψ_{n−1}`. One step applies
//! `T_n = [[F⁻¹(E − H_n), −F⁻¹B_n], [1, 0]]` with `F = H_{n,n+1}` and
//! `B_n = H_{n,n−1}`, both block diagonal over transverse sites. Every
//! `qr_interval` steps the state is re-orthonormalized and `ln R_ii`
//! accumulated. Propagating only the first `M = N` columns gives the same
//! leading `N` exponents as the full run, since column `j` of a QR
//! factorization depends only on columns `≤ j`.
//!
//! Between re-orthonormalizations the columns spread by roughly
//! `exp((γ_max − γ_min) · qr_interval)`; past about `e^30` the weakest columns
//! drown in rounding and the run fails. 3D strips near the AII transition
//! need `qr_interval ≤ 12` in full mode.

mod scan;

pub use scan::{
    find_crossing, lambda_scan, lambda_scan_with, point_seed, read_csv, write_csv, Crossing, ScalingDataset, ScanPoint, ScanSpec, CSV_HEADER,
};

use crate::linalg::{self, CMat};
use crate::models::{Link, ModelInstance, Slice};
use crate::{Error, Result, C64};
use faer::Mat;
use serde::{Deserialize, Serialize};

/// Slice-by-slice view of a quasi-1D system.
pub trait SliceSource: Sync {
    /// Transverse edge `L` used in `Λ = ξ / L`.
    fn width(&self) -> usize;
    /// Orbitals per transverse site; longitudinal bonds are blocks of this size.
    fn orbitals(&self) -> usize;
    fn slice_dim(&self) -> usize;
    fn slice(&self, n: u64) -> Slice;
    /// Bonds between slices `n` and `n+1`.
    fn link(&self, n: u64) -> Link;
}

impl SliceSource for ModelInstance {
    fn width(&self) -> usize {
        self.lattice.width
    }
    fn orbitals(&self) -> usize {
        self.n_orb()
    }
    fn slice_dim(&self) -> usize {
        ModelInstance::slice_dim(self)
    }
    fn slice(&self, n: u64) -> Slice {
        ModelInstance::slice(self, n)
    }
    fn link(&self, n: u64) -> Link {
        ModelInstance::link(self, n)
    }
}

/// Clean chain with unit hopping and zero on-site energy.
#[derive(Clone, Copy, Debug)]
pub struct CleanChain;

impl SliceSource for CleanChain {
    fn width(&self) -> usize {
        1
    }
    fn orbitals(&self) -> usize {
        1
    }
    fn slice_dim(&self) -> usize {
        1
    }
    fn slice(&self, _: u64) -> Slice {
        Slice { onsite: vec![C64::new(0.0, 0.0)], hops: vec![] }
    }
    fn link(&self, _: u64) -> Link {
        let one = C64::new(1.0, 0.0);
        Link { forward: vec![one], backward: vec![one] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Exponents {
    /// All `2N` exponents.
    #[default]
    Full,
    /// The leading `N` exponents only, which include the smallest positive one
    /// whenever the spectrum is split evenly around zero.
    Leading,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    #[serde(with = "complex_pair")]
    pub energy: C64,
    pub qr_interval: usize,
    pub target_rel_error: f64,
    pub max_slices: u64,
    pub block_count: usize,
    pub seed: u64,
    #[serde(default)]
    pub exponents: Exponents,
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self {
            energy: C64::new(0.0, 0.0),
            qr_interval: 8,
            target_rel_error: 1e-3,
            max_slices: 1_000_000,
            block_count: 8,
            seed: 0,
            exponents: Exponents::Full,
        }
    }
}

impl TransferConfig {
    pub fn validate(&self) -> Result<()> {
        if self.qr_interval == 0 {
            return Err(Error::Config("qr_interval must be ≥ 1".into()));
        }
        if !(self.target_rel_error > 0.0 && self.target_rel_error < 1.0) {
            return Err(Error::Config("target_rel_error must lie in (0, 1)".into()));
        }
        if self.block_count < 8 {
            return Err(Error::Config("block_count must be ≥ 8".into()));
        }
        if self.max_slices < (self.block_count * self.qr_interval) as u64 {
            return Err(Error::Config("max_slices must be ≥ block_count × qr_interval".into()));
        }
        if !(self.energy.re.is_finite() && self.energy.im.is_finite()) {
            return Err(Error::Config("energy must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    pub gamma_min: f64,
    pub se_gamma: f64,
    pub xi: f64,
    pub lambda: f64,
    pub slices_used: u64,
    pub converged: bool,
    /// Exponents in QR column order (descending up to noise).
    pub exponents: Vec<f64>,
    pub exponent_se: Vec<f64>,
    pub diagnostic: Option<String>,
}

impl LyapunovResult {
    /// `σ_Λ = Λ · se_γ / γ_min`.
    pub fn sigma_lambda(&self) -> f64 {
        if self.gamma_min > 0.0 {
            self.lambda * self.se_gamma / self.gamma_min
        } else {
            f64::INFINITY
        }
    }
}

/// Dense `T_n` for inspection and tests.
pub fn slice_transfer<S: SliceSource + ?Sized>(src: &S, n: u64, energy: C64) -> Result<CMat> {
    let nd = src.slice_dim();
    let k = src.orbitals();
    let s = src.slice(n);
    let bwd = if n == 0 { entry_back(k, nd) } else { src.link(n - 1).backward };
    let bwd = blocks_to_dense(&bwd, k, nd);
    let mut eh = linalg::diag(&s.onsite.iter().map(|&e| energy - e).collect::<Vec<_>>());
    for &(i, j, v) in &s.hops {
        eh[(i, j)] -= v;
    }
    let finv = blocks_to_dense(&invert_blocks(&src.link(n).forward, k)?, k, nd);
    let top_left = &finv * &eh;
    let top_right = linalg::scale(&(&finv * &bwd), C64::new(-1.0, 0.0));
    Ok(linalg::blocks(&top_left, &top_right, &linalg::identity(nd), &Mat::zeros(nd, nd)))
}

/// Unit backward hopping into slice 0. Any invertible choice leaves the
/// exponents unchanged; zero would make the first step singular.
fn entry_back(k: usize, nd: usize) -> Vec<C64> {
    let one = C64::new(1.0, 0.0);
    let unit: Vec<C64> = if k == 1 { vec![one] } else { vec![one, C64::new(0.0, 0.0), C64::new(0.0, 0.0), one] };
    unit.iter().copied().cycle().take(nd * k).collect()
}

fn blocks_to_dense(b: &[C64], k: usize, n: usize) -> CMat {
    let mut m: CMat = Mat::zeros(n, n);
    for t in 0..n / k {
        for a in 0..k {
            for c in 0..k {
                m[(t * k + a, t * k + c)] = b[t * k * k + a * k + c];
            }
        }
    }
    m
}

fn invert_blocks(b: &[C64], k: usize) -> Result<Vec<C64>> {
    let singular = || Error::Numerical("singular inter-slice hopping".into());
    let mut out = Vec::with_capacity(b.len());
    match k {
        1 => {
            for &f in b {
                if f.norm() == 0.0 {
                    return Err(singular());
                }
                out.push(f.inv());
            }
        }
        2 => {
            for q in b.chunks_exact(4) {
                let det = q[0] * q[3] - q[1] * q[2];
                if det.norm() < 1e-300 {
                    return Err(singular());
                }
                let inv = det.inv();
                out.extend_from_slice(&[q[3] * inv, -q[1] * inv, -q[2] * inv, q[0] * inv]);
            }
        }
        _ => return Err(Error::InvalidInput(format!("orbital blocks of size {k} are not supported"))),
    }
    Ok(out)
}

/// Apply `k × k` row-major blocks to consecutive `k`-chunks of `x`, in place.
#[inline]
fn apply_blocks(blocks: &[C64], k: usize, x: &mut [C64]) {
    if k == 1 {
        for (xi, &b) in x.iter_mut().zip(blocks) {
            *xi *= b;
        }
    } else {
        for (xc, q) in x.chunks_exact_mut(2).zip(blocks.chunks_exact(4)) {
            let (a, b) = (xc[0], xc[1]);
            xc[0] = q[0] * a + q[1] * b;
            xc[1] = q[2] * a + q[3] * b;
        }
    }
}

/// `out −= B · x` with block-diagonal `B`.
#[inline]
fn sub_blocks(blocks: &[C64], k: usize, x: &[C64], out: &mut [C64]) {
    if k == 1 {
        for ((o, &xi), &b) in out.iter_mut().zip(x).zip(blocks) {
            *o -= b * xi;
        }
    } else {
        for ((oc, xc), q) in out.chunks_exact_mut(2).zip(x.chunks_exact(2)).zip(blocks.chunks_exact(4)) {
            oc[0] -= q[0] * xc[0] + q[1] * xc[1];
            oc[1] -= q[2] * xc[0] + q[3] * xc[1];
        }
    }
}

struct Step {
    shift: Vec<C64>,
    hops: Vec<(usize, usize, C64)>,
    finv: Vec<C64>,
    back: Vec<C64>,
}

fn advance(state: &mut CMat, step: &Step, k: usize, scratch: &mut [C64]) {
    let n = step.shift.len();
    for j in 0..state.ncols() {
        let col = state.col_as_slice_mut(j);
        let (top, bot) = col.split_at_mut(n);
        for ((s, &d), &t) in scratch.iter_mut().zip(&step.shift).zip(top.iter()) {
            *s = d * t;
        }
        for &(r, c, v) in &step.hops {
            scratch[r] -= v * top[c];
        }
        sub_blocks(&step.back, k, bot, scratch);
        apply_blocks(&step.finv, k, scratch);
        bot.copy_from_slice(top);
        top.copy_from_slice(scratch);
    }
}

/// Thin QR with positive `R` diagonal; returns `ln R_ii`.
fn reorthonormalize(state: &mut CMat) -> Vec<f64> {
    let qr = state.qr();
    let r = qr.thin_R();
    let m = state.ncols();
    let mut q = qr.compute_thin_Q();
    let mut logs = Vec::with_capacity(m);
    for j in 0..m {
        let d = r[(j, j)];
        let mag = d.norm();
        logs.push(mag.ln());
        if mag > 0.0 {
            let phase = d / mag;
            for x in q.col_as_slice_mut(j) {
                *x *= phase;
            }
        }
    }
    *state = q;
    logs
}

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Smallest column mean that is positive by more than three standard errors.
fn pick_gamma_min(means: &[f64], se: &[f64]) -> Option<usize> {
    (0..means.len())
        .filter(|&i| means[i] > 3.0 * se[i])
        .min_by(|&a, &b| means[a].total_cmp(&means[b]))
}

pub fn propagate<S: SliceSource + ?Sized>(src: &S, cfg: &TransferConfig) -> Result<LyapunovResult> {
    cfg.validate()?;
    linalg::ensure_sequential();
    let n = src.slice_dim();
    let k = src.orbitals();
    let m = match cfg.exponents {
        Exponents::Full => 2 * n,
        Exponents::Leading => n,
    };
    let qi = cfg.qr_interval as u64;
    // chunks are the unit of bookkeeping; blocks are formed from whole chunks
    let target_chunks = (cfg.block_count * 64) as u64;
    let chunk_len = ((cfg.max_slices / target_chunks) / qi).max(1) * qi;
    let max_chunks = (cfg.max_slices / chunk_len) as usize;

    let mut state: CMat = Mat::zeros(2 * n, m);
    for j in 0..m {
        state[(j, j)] = C64::new(1.0, 0.0);
    }
    let mut scratch = vec![C64::new(0.0, 0.0); n];
    let mut back = entry_back(k, n);
    let mut chunks: Vec<Vec<f64>> = Vec::new();
    let mut acc = vec![0.0; m];
    let mut slice_idx: u64 = 0;
    let mut converged = false;
    let mut result_stats: Option<(Vec<f64>, Vec<f64>)> = None;

    while chunks.len() < max_chunks {
        for step_in_chunk in 0..chunk_len {
            let s = src.slice(slice_idx);
            let link = src.link(slice_idx);
            let step = Step {
                shift: s.onsite.iter().map(|&e| cfg.energy - e).collect(),
                hops: s.hops,
                finv: invert_blocks(&link.forward, k)?,
                back: std::mem::take(&mut back),
            };
            advance(&mut state, &step, k, &mut scratch);
            back = link.backward;
            slice_idx += 1;
            let due = (step_in_chunk + 1) % qi == 0;
            if due || state.col_as_slice(0).iter().any(|z| z.norm() > 1e100) {
                for (a, l) in acc.iter_mut().zip(reorthonormalize(&mut state)) {
                    *a += l;
                }
            }
        }
        if acc.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical(format!(
                "columns lost to rounding by slice {slice_idx}; lower qr_interval"
            )));
        }
        chunks.push(acc.iter().map(|a| a / chunk_len as f64).collect());
        acc.iter_mut().for_each(|a| *a = 0.0);

        let nc = chunks.len();
        if nc >= cfg.block_count && (nc % cfg.block_count == 0 || nc == max_chunks) {
            let stats = block_stats(&chunks, cfg.block_count, m);
            if let Some(i) = pick_gamma_min(&stats.0, &stats.1) {
                if stats.1[i] / stats.0[i] < cfg.target_rel_error {
                    converged = true;
                }
            }
            result_stats = Some(stats);
            if converged {
                break;
            }
        }
    }

    let (means, ses) = result_stats.unwrap_or_else(|| block_stats(&chunks, chunks.len().max(2), m));
    let width = src.width() as f64;
    let slices_used = chunks.len() as u64 * chunk_len;
    match pick_gamma_min(&means, &ses) {
        Some(i) => {
            let g = means[i];
            let xi = 1.0 / g;
            Ok(LyapunovResult {
                gamma_min: g,
                se_gamma: ses[i],
                xi,
                lambda: xi / width,
                slices_used,
                converged,
                exponents: means,
                exponent_se: ses,
                diagnostic: None,
            })
        }
        None => Ok(LyapunovResult {
            gamma_min: 0.0,
            se_gamma: 0.0,
            xi: f64::INFINITY,
            lambda: f64::INFINITY,
            slices_used,
            converged: false,
            exponents: means,
            exponent_se: ses,
            diagnostic: Some("no exponent is positive beyond 3 standard errors".into()),
        }),
    }
}

/// Per-column mean over every chunk, and the standard error of the mean of
/// `blocks` contiguous equal blocks (leading remainder chunks left out of the
/// variance estimate).
fn block_stats(chunks: &[Vec<f64>], blocks: usize, m: usize) -> (Vec<f64>, Vec<f64>) {
    let blocks = blocks.min(chunks.len()).max(1);
    let per = chunks.len() / blocks;
    let skip = chunks.len() - per * blocks;
    let mut means = vec![0.0; m];
    let mut ses = vec![f64::INFINITY; m];
    let mut samples = vec![0.0; blocks];
    for col in 0..m {
        means[col] = chunks.iter().map(|c| c[col]).sum::<f64>() / chunks.len() as f64;
        if blocks > 1 {
            for (b, s) in samples.iter_mut().enumerate() {
                let start = skip + b * per;
                *s = chunks[start..start + per].iter().map(|c| c[col]).sum::<f64>() / per as f64;
            }
            ses[col] = mean_and_se(&samples).1;
        }
    }
    (means, ses)
}

pub(crate) mod complex_pair {
    use crate::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_chain_matrix() {
        let e = C64::new(0.7, 0.2);
        let t = slice_transfer(&CleanChain, 3, e).unwrap();
        assert_eq!(t[(0, 0)], e);
        assert_eq!(t[(0, 1)], C64::new(-1.0, 0.0));
        assert_eq!(t[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(t[(1, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn block_inverse() {
        let b = [C64::new(1.0, 1.0), C64::new(2.0, 0.0), C64::new(0.0, -1.0), C64::new(3.0, 0.5)];
        let inv = invert_blocks(&b, 2).unwrap();
        let mut x = vec![C64::new(0.3, -0.2), C64::new(1.1, 0.4)];
        let orig = x.clone();
        apply_blocks(&b, 2, &mut x);
        apply_blocks(&inv, 2, &mut x);
        for (a, b) in x.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn config_checks() {
        let mut c = TransferConfig::default();
        assert!(c.validate().is_ok());
        c.block_count = 4;
        assert!(c.validate().is_err());
        c.block_count = 8;
        c.target_rel_error = 1.0;
        assert!(c.validate().is_err());
    }
}
