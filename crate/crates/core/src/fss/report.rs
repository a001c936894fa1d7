use super::{confidence, fit, DataPoint, ExpansionOrder, FitOptions, FitResult, Interval};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// SHA-256 over the points sorted and printed with round-trip precision.
pub fn digest(data: &[DataPoint]) -> String {
    let mut d = data.to_vec();
    d.sort_by(|a, b| (a.l, a.w, a.lambda, a.sigma).partial_cmp(&(b.l, b.w, b.lambda, b.sigma)).unwrap());
    let mut h = Sha256::new();
    for p in &d {
        h.update(format!("{:?},{:?},{:?},{:?}\n", p.w, p.l, p.lambda, p.sigma).as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub class: String,
    pub e_re: f64,
    pub e_im: f64,
    pub input_digest: String,
    pub version: String,
    pub fit: FitResult,
}

impl FitReport {
    pub fn new(class: &str, e_re: f64, e_im: f64, data: &[DataPoint], fit: FitResult) -> Self {
        Self {
            class: class.to_owned(),
            e_re,
            e_im,
            input_digest: digest(data),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            fit,
        }
    }
}

fn fmt_energy(re: f64, im: f64) -> String {
    let num = |x: f64| format!("{x}");
    match (re == 0.0, im == 0.0) {
        (true, true) => "0".into(),
        (false, true) => num(re),
        (true, false) if im == 1.0 => "i".into(),
        (true, false) => format!("{}i", num(im)),
        (false, false) => format!("{}{}{}i", num(re), if im < 0.0 { "-" } else { "+" }, num(im.abs())),
    }
}

/// Decimals that resolve an interval of this width to about two digits.
fn decimals_for(width: f64) -> usize {
    if !(width > 0.0) || !width.is_finite() {
        return 4;
    }
    ((-width.log10()).ceil() + 1.0).clamp(1.0, 10.0) as usize
}

fn fmt_ci(value: f64, ci: Option<&Interval>) -> String {
    match ci {
        Some(c) => {
            let d = decimals_for(c.hi - c.lo);
            format!("{value:.d$}[{:.d$}, {:.d$}]", c.lo, c.hi)
        }
        None => format!("{value:.4}"),
    }
}

/// `class | E | L-range | (m1,n1,m2,n2) | GOF | W_c[CI] | ν[CI] | y[CI] | Λ_c[CI]`
/// plus warnings about what could not be shown.
pub fn render_row(r: &FitReport) -> Result<(String, Vec<String>)> {
    let f = &r.fit;
    if f.n_d == 0 {
        return Err(Error::InvalidInput("fit report has no data points".into()));
    }
    let mut warnings = f.warnings.clone();
    let ci = f.confidence.as_ref().filter(|c| c.resamples > 0);
    if ci.is_none() {
        warnings.push("no confidence intervals; showing point estimates only".into());
    } else if ci.is_some_and(|c| c.unreliable) {
        warnings.push("more than 5% of Monte-Carlo refits failed; intervals unreliable".into());
    }
    let y = match f.y {
        Some(y) => fmt_ci(y, ci.and_then(|c| c.y.as_ref())),
        None => "-".into(),
    };
    let line = format!(
        "{} | {} | {}-{} | {} | {:.2} | {} | {} | {} | {}",
        r.class,
        fmt_energy(r.e_re, r.e_im),
        f.l_min,
        f.l_max,
        f.order,
        f.gof,
        fmt_ci(f.w_c, ci.map(|c| &c.w_c)),
        fmt_ci(f.nu, ci.map(|c| &c.nu)),
        y,
        fmt_ci(f.lambda_c, ci.map(|c| &c.lambda_c)),
    );
    Ok((line, warnings))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityEntry {
    pub order: ExpansionOrder,
    pub l_min: f64,
    pub fit: FitResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub a: usize,
    pub b: usize,
    pub d_w_c: f64,
    pub d_nu: f64,
    pub overlapping: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub entries: Vec<StabilityEntry>,
    pub drifts: Vec<Drift>,
    pub stable: bool,
}

fn overlap(a: &Interval, b: &Interval) -> bool {
    a.lo <= b.hi && b.lo <= a.hi
}

/// Fit every order on the full data and with the smallest width dropped;
/// stable when the `W_c` and `ν` intervals of every pair overlap.
pub fn order_stability(
    data: &[DataPoint],
    orders: &[ExpansionOrder],
    opts: &FitOptions,
    n_resamples: usize,
    seed: u64,
) -> Result<StabilityReport> {
    if orders.len() < 2 {
        return Err(Error::InvalidInput("order_stability needs at least two orders".into()));
    }
    let mut ls: Vec<f64> = data.iter().map(|d| d.l).collect();
    ls.sort_by(f64::total_cmp);
    ls.dedup();
    let mut windows = vec![ls[0]];
    if ls.len() > 3 {
        windows.push(ls[1]);
    }
    let mut entries = Vec::new();
    for &lmin in &windows {
        let sub: Vec<DataPoint> = data.iter().copied().filter(|d| d.l >= lmin).collect();
        for &order in orders {
            let Ok(mut f) = fit(&sub, order, opts) else { continue };
            f.confidence = Some(confidence(&f, &sub, n_resamples, seed)?);
            entries.push(StabilityEntry { order, l_min: lmin, fit: f });
        }
    }
    let mut drifts = Vec::new();
    for a in 0..entries.len() {
        for b in a + 1..entries.len() {
            let (fa, fb) = (&entries[a].fit, &entries[b].fit);
            let (ca, cb) = (fa.confidence.as_ref().unwrap(), fb.confidence.as_ref().unwrap());
            drifts.push(Drift {
                a,
                b,
                d_w_c: fb.w_c - fa.w_c,
                d_nu: fb.nu - fa.nu,
                overlapping: overlap(&ca.w_c, &cb.w_c) && overlap(&ca.nu, &cb.nu),
            });
        }
    }
    let stable = !entries.is_empty() && drifts.iter().all(|d| d.overlapping);
    Ok(StabilityReport { entries, drifts, stable })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_labels() {
        assert_eq!(fmt_energy(0.0, 0.0), "0");
        assert_eq!(fmt_energy(0.0, 0.5), "0.5i");
        assert_eq!(fmt_energy(0.0, 1.0), "i");
        assert_eq!(fmt_energy(0.3, -0.2), "0.3-0.2i");
    }

    #[test]
    fn interval_formatting() {
        let ci = Interval { lo: 12.834, hi: 12.852 };
        assert_eq!(fmt_ci(12.842, Some(&ci)), "12.842[12.834, 12.852]");
        let ci = Interval { lo: 0.78, hi: 1.10 };
        assert_eq!(fmt_ci(0.94, Some(&ci)), "0.94[0.78, 1.10]");
    }
}
