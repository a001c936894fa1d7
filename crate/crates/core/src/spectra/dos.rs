use super::SpectrumResult;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    ImagPart,
    ComplexPlane,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Binning {
    FreedmanDiaconis,
    /// Equal bins over the data range.
    Count(usize),
    /// Explicit edges (per axis for the complex plane: the same edges on both).
    Edges(Vec<f64>),
}

/// Averaged density. `mass[i]` is the mean fraction of a sample's eigenvalues
/// in bin `i`; `density = mass / bin area`. For the complex plane `mass` is
/// row-major over `(re bin, im bin)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DosHistogram {
    pub axis: Axis,
    pub edges: Vec<f64>,
    /// Real-axis edges for the complex plane; empty otherwise.
    pub re_edges: Vec<f64>,
    pub mass: Vec<f64>,
    pub density: Vec<f64>,
    pub samples: usize,
}

impl DosHistogram {
    /// Bin containing `x` on the (imaginary) axis.
    pub fn bin_of(&self, x: f64) -> Option<usize> {
        locate(&self.edges, x)
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }
}

fn locate(edges: &[f64], x: f64) -> Option<usize> {
    let n = edges.len() - 1;
    if x < edges[0] || x > edges[n] {
        return None;
    }
    let i = edges.partition_point(|&e| e <= x);
    Some(i.saturating_sub(1).min(n - 1))
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn make_edges(values: &[f64], binning: &Binning) -> Result<Vec<f64>> {
    if let Binning::Edges(e) = binning {
        if e.len() < 2 || e.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("bin edges must increase".into()));
        }
        return Ok(e.clone());
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let (lo, hi) = (v[0], v[v.len() - 1]);
    if hi - lo <= 0.0 {
        return Ok(vec![lo - 0.5, lo + 0.5]);
    }
    let bins = match binning {
        Binning::Count(n) => (*n).max(1),
        _ => {
            let iqr = quantile(&v, 0.75) - quantile(&v, 0.25);
            if iqr > 0.0 {
                let width = 2.0 * iqr / (v.len() as f64).cbrt();
                (((hi - lo) / width).ceil() as usize).clamp(1, 10_000)
            } else {
                ((v.len() as f64).sqrt().ceil() as usize).max(1)
            }
        }
    };
    let w = (hi - lo) / bins as f64;
    Ok((0..=bins).map(|i| if i == bins { hi } else { lo + w * i as f64 }).collect())
}

/// Histogram of `Im E`, or of `(Re E, Im E)`, averaged over spectra. Each
/// spectrum contributes unit mass; eigenvalues outside explicit edges are
/// dropped from the bins but still count toward the sample's total.
pub fn dos_hist(spectra: &[SpectrumResult], axis: Axis, binning: &Binning) -> Result<DosHistogram> {
    if spectra.is_empty() || spectra.iter().all(|s| s.eigenvalues.is_empty()) {
        return Err(Error::InvalidInput("dos_hist needs at least one nonempty spectrum".into()));
    }
    let spectra: Vec<&SpectrumResult> = spectra.iter().filter(|s| !s.eigenvalues.is_empty()).collect();
    let samples = spectra.len();
    let ims: Vec<f64> = spectra.iter().flat_map(|s| s.eigenvalues.iter().map(|z| z.im)).collect();
    let edges = make_edges(&ims, binning)?;
    match axis {
        Axis::ImagPart => {
            let nb = edges.len() - 1;
            let mut mass = vec![0.0; nb];
            for s in &spectra {
                let unit = 1.0 / (s.eigenvalues.len() * samples) as f64;
                for z in &s.eigenvalues {
                    if let Some(i) = locate(&edges, z.im) {
                        mass[i] += unit;
                    }
                }
            }
            let density = mass.iter().enumerate().map(|(i, m)| m / (edges[i + 1] - edges[i])).collect();
            Ok(DosHistogram { axis, edges, re_edges: vec![], mass, density, samples })
        }
        Axis::ComplexPlane => {
            let res: Vec<f64> = spectra.iter().flat_map(|s| s.eigenvalues.iter().map(|z| z.re)).collect();
            let re_edges = make_edges(&res, binning)?;
            let (nr, ni) = (re_edges.len() - 1, edges.len() - 1);
            let mut mass = vec![0.0; nr * ni];
            for s in &spectra {
                let unit = 1.0 / (s.eigenvalues.len() * samples) as f64;
                for z in &s.eigenvalues {
                    if let (Some(a), Some(b)) = (locate(&re_edges, z.re), locate(&edges, z.im)) {
                        mass[a * ni + b] += unit;
                    }
                }
            }
            let density = mass
                .iter()
                .enumerate()
                .map(|(k, m)| {
                    let (a, b) = (k / ni, k % ni);
                    m / ((re_edges[a + 1] - re_edges[a]) * (edges[b + 1] - edges[b]))
                })
                .collect();
            Ok(DosHistogram { axis, edges, re_edges, mass, density, samples })
        }
    }
}

/// `bin_lo,bin_hi,density` for the imaginary-part histogram;
/// `re_lo,re_hi,im_lo,im_hi,density` for the complex plane.
pub fn write_histogram_csv<W: Write>(h: &DosHistogram, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let f = |x: f64| format!("{x:?}");
    match h.axis {
        Axis::ImagPart => {
            w.write_record(["bin_lo", "bin_hi", "density"])?;
            for (i, d) in h.density.iter().enumerate() {
                w.write_record([f(h.edges[i]), f(h.edges[i + 1]), f(*d)])?;
            }
        }
        Axis::ComplexPlane => {
            w.write_record(["re_lo", "re_hi", "im_lo", "im_hi", "density"])?;
            let ni = h.edges.len() - 1;
            for (k, d) in h.density.iter().enumerate() {
                let (a, b) = (k / ni, k % ni);
                w.write_record([f(h.re_edges[a]), f(h.re_edges[a + 1]), f(h.edges[b]), f(h.edges[b + 1]), f(*d)])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
