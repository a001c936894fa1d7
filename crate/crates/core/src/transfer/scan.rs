use super::{propagate, TransferConfig};
use crate::models::{self, Boundary, LatticeSpec};
use crate::rng::{self, tag};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const CSV_HEADER: &str = "class,dim,E_re,E_im,W,L,lambda,sigma_lambda,slices,converged";

/// A sweep over disorder strengths and strip widths for one model family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub class: String,
    pub dim: usize,
    pub widths: Vec<usize>,
    pub w_grid: Vec<f64>,
    #[serde(default = "periodic")]
    pub transverse_bc: Boundary,
}

fn periodic() -> Boundary {
    Boundary::Periodic
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub class: String,
    pub dim: usize,
    #[serde(rename = "E_re")]
    pub e_re: f64,
    #[serde(rename = "E_im")]
    pub e_im: f64,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub lambda: f64,
    pub sigma_lambda: f64,
    pub slices: u64,
    pub converged: bool,
}

pub type ScalingDataset = Vec<ScanPoint>;

/// Seed of the realization at grid coordinates `(w_index, l_index)`.
pub fn point_seed(master: u64, w_index: usize, l_index: usize) -> u64 {
    rng::derive(master, &[tag::SWEEP, w_index as u64, l_index as u64])
}

pub fn lambda_scan(spec: &ScanSpec, cfg: &TransferConfig) -> Result<ScalingDataset> {
    lambda_scan_with(spec, cfg, &|_| {})
}

/// As [`lambda_scan`], calling `done` as each point finishes (in completion
/// order, which depends on scheduling; the returned rows do not).
pub fn lambda_scan_with(
    spec: &ScanSpec,
    cfg: &TransferConfig,
    done: &(dyn Fn(&ScanPoint) + Sync),
) -> Result<ScalingDataset> {
    if spec.widths.is_empty() || spec.w_grid.is_empty() {
        return Err(Error::Config("scan grids must be nonempty".into()));
    }
    cfg.validate()?;
    let tasks: Vec<(usize, usize)> =
        (0..spec.widths.len()).flat_map(|li| (0..spec.w_grid.len()).map(move |wi| (li, wi))).collect();
    let mut rows = tasks
        .par_iter()
        .map(|&(li, wi)| {
            let l = spec.widths[li];
            let w = spec.w_grid[wi];
            let lattice = LatticeSpec::strip(spec.dim, l).with_bc(spec.transverse_bc);
            let model = models::build_family(&spec.class, lattice, w, point_seed(cfg.seed, wi, li))?;
            let r = propagate(&model, cfg)?;
            let p = ScanPoint {
                class: model.class.name.clone(),
                dim: spec.dim,
                e_re: cfg.energy.re,
                e_im: cfg.energy.im,
                w,
                l,
                lambda: r.lambda,
                sigma_lambda: r.sigma_lambda(),
                slices: r.slices_used,
                converged: r.converged,
            };
            done(&p);
            Ok(((li, wi), p))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        (a.1.l, a.1.w).partial_cmp(&(b.1.l, b.1.w)).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0))
    });
    Ok(rows.into_iter().map(|r| r.1).collect())
}

pub fn write_csv<W: Write>(rows: &[ScanPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<ScalingDataset> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::InvalidInput(format!("unexpected CSV header {:?}", header.join(","))));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// A sign change of `Λ(L_max) − Λ(L_min)` between two adjacent grid points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub lo: f64,
    pub hi: f64,
    /// Linear interpolation of the zero.
    pub estimate: f64,
}

/// All crossings of the smallest and largest width curves, in increasing W.
/// An empty list means no transition was found on the grid.
pub fn find_crossing(data: &[ScanPoint]) -> Result<Vec<Crossing>> {
    let usable: Vec<&ScanPoint> = data.iter().filter(|p| p.lambda.is_finite()).collect();
    let lmin = usable.iter().map(|p| p.l).min();
    let lmax = usable.iter().map(|p| p.l).max();
    let (lmin, lmax) = match (lmin, lmax) {
        (Some(a), Some(b)) if a != b => (a, b),
        _ => return Err(Error::InvalidInput("need at least two distinct L values".into())),
    };
    // mean Λ per W, duplicates averaged
    let curve = |l: usize| -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = usable.iter().filter(|p| p.l == l).map(|p| (p.w, p.lambda)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64, usize)> = Vec::new();
        for (w, lam) in pts {
            match out.last_mut() {
                Some(last) if last.0 == w => {
                    last.1 += lam;
                    last.2 += 1;
                }
                _ => out.push((w, lam, 1)),
            }
        }
        out.into_iter().map(|(w, s, n)| (w, s / n as f64)).collect()
    };
    let small = curve(lmin);
    let diffs: Vec<(f64, f64)> = curve(lmax)
        .into_iter()
        .filter_map(|(w, lam)| small.iter().find(|s| s.0 == w).map(|s| (w, lam - s.1)))
        .collect();
    if diffs.len() < 2 {
        return Err(Error::InvalidInput("the two widths share fewer than two W values".into()));
    }
    let mut out = Vec::new();
    for pair in diffs.windows(2) {
        let ((w0, d0), (w1, d1)) = (pair[0], pair[1]);
        if d0 == 0.0 {
            out.push(Crossing { lo: w0, hi: w0, estimate: w0 });
        } else if d0 * d1 < 0.0 {
            let t = d0 / (d0 - d1);
            out.push(Crossing { lo: w0, hi: w1, estimate: w0 + t * (w1 - w0) });
        }
    }
    if let Some(&(w, d)) = diffs.last() {
        if d == 0.0 {
            out.push(Crossing { lo: w, hi: w, estimate: w });
        }
    }
    Ok(out)
}

