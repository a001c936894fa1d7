//! Single-parameter finite-size scaling with one irrelevant correction.
//!
//! `Λ(W, L) = f(φ₁, φ₂)`, `φ₁ = u₁(w) L^{1/ν}`, `φ₂ = u₂(w) L^{−y}`,
//! `w = (W − W_c)/W_c`, `u₁ = Σ_{j=1..m₁} b₁ⱼ wʲ`, `u₂ = Σ_{j=0..m₂} b₂ⱼ wʲ`,
//! `f = Σ a_{j₁j₂} φ₁^{j₁} φ₂^{j₂}` with `a₁₀ = a₀₁ = 1`.
//!
//! The optimizer sees `W_c`, `ln ν`, `ln y` and the free coefficients only.

mod lm;
mod report;
mod stats;

pub use lm::{levenberg_marquardt, LmOptions, LmOutcome};
pub use report::{digest, order_stability, render_row, FitReport, StabilityReport};
pub use stats::{gof, percentile};

use crate::rng::{self, tag};
use crate::transfer::ScanPoint;
use crate::{Error, Result};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub lambda: f64,
    pub sigma: f64,
}

impl DataPoint {
    pub fn new(w: f64, l: f64, lambda: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !(l >= 2.0) || !(lambda > 0.0) || !w.is_finite() {
            return Err(Error::InvalidInput(format!("bad data point W={w} L={l} Λ={lambda} σ={sigma}")));
        }
        Ok(Self { w, l, lambda, sigma })
    }

    /// Finite rows of a transfer dataset; rows that missed the error target
    /// are dropped unless `include_unconverged`.
    pub fn from_scan(rows: &[ScanPoint], include_unconverged: bool) -> Result<Vec<DataPoint>> {
        rows.iter()
            .filter(|r| (r.converged || include_unconverged) && r.lambda.is_finite() && r.sigma_lambda.is_finite())
            .map(|r| DataPoint::new(r.w, r.l as f64, r.lambda, r.sigma_lambda))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExpansionOrder {
    pub m1: usize,
    pub n1: usize,
    pub m2: usize,
    pub n2: usize,
}

impl ExpansionOrder {
    pub fn new(m1: usize, n1: usize, m2: usize, n2: usize) -> Result<Self> {
        let o = Self { m1, n1, m2, n2 };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 < 1 || self.m1 < 1 {
            return Err(Error::InvalidInput("orders need m1 ≥ 1 and n1 ≥ 1".into()));
        }
        Ok(())
    }

    pub fn parse(s: &str) -> Result<Self> {
        let v: Vec<usize> = s
            .split(',')
            .map(|x| x.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidInput(format!("orders {s:?} are not four integers")))?;
        match v[..] {
            [m1, n1, m2, n2] => Self::new(m1, n1, m2, n2),
            _ => Err(Error::InvalidInput(format!("orders {s:?} are not four integers"))),
        }
    }

    pub fn has_irrelevant(&self) -> bool {
        self.n2 > 0
    }

    /// Free coefficients `a` in packing order, skipping `a₁₀` and `a₀₁`.
    fn free_a(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for j1 in 0..=self.n1 {
            for j2 in 0..=self.n2 {
                if (j1, j2) != (1, 0) && (j1, j2) != (0, 1) {
                    out.push((j1, j2));
                }
            }
        }
        out
    }

    /// Number of free parameters `N_P`.
    pub fn n_params(&self) -> usize {
        let irr = if self.has_irrelevant() { 1 + self.m2 + 1 } else { 0 };
        2 + self.free_a().len() + self.m1 + irr
    }
}

impl std::fmt::Display for ExpansionOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{},{})", self.m1, self.n1, self.m2, self.n2)
    }
}

/// Model parameters with the fixed coefficients filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub order: ExpansionOrder,
    pub w_c: f64,
    pub nu: f64,
    pub y: Option<f64>,
    /// `a[j1][j2]`, `(n1+1) × (n2+1)`.
    pub a: Vec<Vec<f64>>,
    /// `b1[j]`, `j = 0..=m1`, with `b1[0] = 0`.
    pub b1: Vec<f64>,
    /// `b2[j]`, `j = 0..=m2`; empty without the irrelevant variable.
    pub b2: Vec<f64>,
}

impl Params {
    /// Critical point with all free coefficients zero except `a₀₀`.
    pub fn initial(order: ExpansionOrder, w_c: f64, nu: f64, y: f64, a00: f64) -> Self {
        let mut a = vec![vec![0.0; order.n2 + 1]; order.n1 + 1];
        a[0][0] = a00;
        a[1][0] = 1.0;
        if order.n2 > 0 {
            a[0][1] = 1.0;
        }
        Params {
            order,
            w_c,
            nu,
            y: order.has_irrelevant().then_some(y),
            a,
            b1: vec![0.0; order.m1 + 1],
            b2: if order.has_irrelevant() { vec![0.0; order.m2 + 1] } else { vec![] },
        }
    }

    pub fn pack(&self) -> Vec<f64> {
        let o = self.order;
        let mut v = vec![self.w_c, self.nu.ln()];
        if let Some(y) = self.y {
            v.push(y.ln());
        }
        v.extend(o.free_a().into_iter().map(|(i, j)| self.a[i][j]));
        v.extend_from_slice(&self.b1[1..]);
        v.extend_from_slice(&self.b2);
        v
    }

    pub fn unpack(order: ExpansionOrder, v: &[f64]) -> Self {
        let mut p = Params::initial(order, v[0], v[1].exp(), 1.0, 0.0);
        let mut k = 2;
        if order.has_irrelevant() {
            p.y = Some(v[k].exp());
            k += 1;
        }
        for (i, j) in order.free_a() {
            p.a[i][j] = v[k];
            k += 1;
        }
        for j in 1..=order.m1 {
            p.b1[j] = v[k];
            k += 1;
        }
        for j in 0..p.b2.len() {
            p.b2[j] = v[k];
            k += 1;
        }
        p
    }

    fn u(coeffs: &[f64], w: f64) -> f64 {
        coeffs.iter().rev().fold(0.0, |acc, &c| acc * w + c)
    }

    /// `f(φ₁, φ₂)`.
    pub fn f(&self, phi1: f64, phi2: f64) -> f64 {
        let mut total = 0.0;
        let mut p1 = 1.0;
        for row in &self.a {
            let mut p2 = 1.0;
            for &c in row {
                total += c * p1 * p2;
                p2 *= phi2;
            }
            p1 *= phi1;
        }
        total
    }

    pub fn scaling_variables(&self, w_abs: f64, l: f64) -> (f64, f64) {
        let w = (w_abs - self.w_c) / self.w_c;
        let phi1 = Self::u(&self.b1, w) * l.powf(1.0 / self.nu);
        let phi2 = match self.y {
            Some(y) => Self::u(&self.b2, w) * l.powf(-y),
            None => 0.0,
        };
        (phi1, phi2)
    }

    /// Critical amplitude `f(0, 0) = a₀₀`.
    pub fn lambda_c(&self) -> f64 {
        self.a[0][0]
    }

    /// `f(0, u₂(0) L^{−y})`, the critical value including the irrelevant
    /// correction at width `L`.
    pub fn lambda_c_at(&self, l: f64) -> f64 {
        let (_, phi2) = self.scaling_variables(self.w_c, l);
        self.f(0.0, phi2)
    }
}

pub fn scaling_model(p: &Params, w: f64, l: f64) -> f64 {
    let (phi1, phi2) = p.scaling_variables(w, l);
    p.f(phi1, phi2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Confidence {
    pub w_c: Interval,
    pub nu: Interval,
    pub y: Option<Interval>,
    pub lambda_c: Interval,
    pub lambda_c_lmin: Option<Interval>,
    /// Same shapes as the coefficient sets of [`Params`].
    pub a: Vec<Vec<Interval>>,
    pub b1: Vec<Interval>,
    pub b2: Vec<Interval>,
    pub resamples: usize,
    pub failed: usize,
    pub unreliable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub order: ExpansionOrder,
    pub params: Params,
    pub w_c: f64,
    pub nu: f64,
    pub y: Option<f64>,
    /// `f(0, 0)`.
    pub lambda_c: f64,
    /// `f(0, u₂(0) L_min^{−y})`, only with the irrelevant variable.
    pub lambda_c_lmin: Option<f64>,
    pub l_min: f64,
    pub l_max: f64,
    pub chi2: f64,
    pub gof: f64,
    pub n_d: usize,
    pub n_p: usize,
    pub confidence: Option<Confidence>,
    pub iterations: usize,
    pub converged: bool,
    pub rank_deficient: bool,
    pub starts: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitOptions {
    /// Initial critical disorder; estimated from the data when absent.
    pub w_c_init: Option<f64>,
    /// Points with `|W − W_c|/W_c` above this are dropped (using the initial `W_c`).
    pub window: Option<f64>,
    pub nu_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub lm: LmOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            w_c_init: None,
            window: Some(0.3),
            nu_grid: vec![0.8, 1.0, 1.5, 2.5],
            y_grid: vec![0.5, 1.0, 2.0],
            lm: LmOptions::default(),
        }
    }
}

fn residuals(order: ExpansionOrder, data: &[DataPoint], theta: &[f64], out: &mut [f64]) {
    let p = Params::unpack(order, theta);
    for (r, d) in out.iter_mut().zip(data) {
        *r = (d.lambda - scaling_model(&p, d.w, d.l)) / d.sigma;
    }
}

fn distinct_l(data: &[DataPoint]) -> Vec<f64> {
    let mut ls: Vec<f64> = data.iter().map(|d| d.l).collect();
    ls.sort_by(f64::total_cmp);
    ls.dedup();
    ls
}

/// Rough `W_c` from where the smallest- and largest-width curves cross.
pub fn estimate_w_c(data: &[DataPoint]) -> f64 {
    let rows: Vec<ScanPoint> = data
        .iter()
        .map(|d| ScanPoint {
            class: String::new(),
            dim: 0,
            e_re: 0.0,
            e_im: 0.0,
            w: d.w,
            l: d.l as usize,
            lambda: d.lambda,
            sigma_lambda: d.sigma,
            slices: 0,
            converged: true,
        })
        .collect();
    if let Ok(c) = crate::transfer::find_crossing(&rows) {
        if let Some(first) = c.first() {
            return first.estimate;
        }
    }
    let mut ws: Vec<f64> = data.iter().map(|d| d.w).collect();
    ws.sort_by(f64::total_cmp);
    ws[ws.len() / 2]
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn check_data(data: &[DataPoint], order: ExpansionOrder) -> Result<()> {
    order.validate()?;
    if distinct_l(data).len() < 3 {
        return Err(Error::InvalidInput("fit needs data from at least 3 distinct L".into()));
    }
    if data.len() <= order.n_params() {
        return Err(Error::InvalidInput(format!(
            "N_D = {} must exceed N_P = {}",
            data.len(),
            order.n_params()
        )));
    }
    Ok(())
}

/// Multi-start least-squares fit. Deterministic for given data and options;
/// the result does not depend on the order of `data`.
pub fn fit(data: &[DataPoint], order: ExpansionOrder, opts: &FitOptions) -> Result<FitResult> {
    let mut data = data.to_vec();
    data.sort_by(|a, b| (a.l, a.w, a.lambda, a.sigma).partial_cmp(&(b.l, b.w, b.lambda, b.sigma)).unwrap());
    let w_c0 = opts.w_c_init.unwrap_or_else(|| estimate_w_c(&data));
    if let Some(win) = opts.window {
        data.retain(|d| ((d.w - w_c0) / w_c0).abs() <= win);
    }
    check_data(&data, order)?;
    let near: Vec<f64> = {
        let mut by_dist: Vec<&DataPoint> = data.iter().collect();
        by_dist.sort_by(|a, b| (a.w - w_c0).abs().total_cmp(&(b.w - w_c0).abs()));
        by_dist.iter().take((data.len() / 4).max(1)).map(|d| d.lambda).collect()
    };
    let a00 = median(near);
    let ys: Vec<f64> = if order.has_irrelevant() { opts.y_grid.clone() } else { vec![1.0] };
    let starts: Vec<Vec<f64>> = opts
        .nu_grid
        .iter()
        .flat_map(|&nu| ys.iter().map(move |&y| Params::initial(order, w_c0, nu, y, a00).pack()))
        .collect();
    let outcomes: Vec<LmOutcome> = starts
        .par_iter()
        .map(|theta| {
            levenberg_marquardt(theta, data.len(), &opts.lm, |t, r| residuals(order, &data, t, r))
        })
        .collect();
    let best = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.converged && o.chi2.is_finite())
        .min_by(|a, b| a.1.chi2.total_cmp(&b.1.chi2).then(a.0.cmp(&b.0)))
        .map(|(_, o)| o.clone())
        .ok_or_else(|| Error::Numerical("no start of the scaling fit converged".into()))?;
    Ok(finish(&data, order, best, starts.len()))
}

fn finish(data: &[DataPoint], order: ExpansionOrder, o: LmOutcome, starts: usize) -> FitResult {
    let params = Params::unpack(order, &o.theta);
    let ls = distinct_l(data);
    let n_d = data.len();
    let n_p = order.n_params();
    let gof = gof(o.chi2, n_d - n_p);
    let mut warnings = Vec::new();
    if gof < 0.05 {
        warnings.push(format!("goodness of fit {gof:.3} is below 0.05"));
    }
    if o.rank_deficient {
        warnings.push("Jacobian is rank deficient at the optimum; fit is unstable".into());
    }
    FitResult {
        order,
        w_c: params.w_c,
        nu: params.nu,
        y: params.y,
        lambda_c: params.lambda_c(),
        lambda_c_lmin: params.y.map(|_| params.lambda_c_at(ls[0])),
        l_min: ls[0],
        l_max: *ls.last().unwrap(),
        chi2: o.chi2,
        gof,
        n_d,
        n_p,
        confidence: None,
        iterations: o.iterations,
        converged: o.converged,
        rank_deficient: o.rank_deficient,
        starts,
        warnings,
        params,
    }
}

/// Refit from the optimum of `fit` to `data` with new Λ values.
fn refit(fit: &FitResult, data: &[DataPoint], lm: &LmOptions) -> LmOutcome {
    let theta = fit.params.pack();
    levenberg_marquardt(&theta, data.len(), lm, |t, r| residuals(fit.order, data, t, r))
}

/// Parametric Monte-Carlo 95% intervals: synthetic sets
/// `f_k + N(0, σ_k)` around the fitted curve, refitted and summarized by the
/// 2.5 and 97.5 percentiles.
pub fn confidence(fit: &FitResult, data: &[DataPoint], n_resamples: usize, seed: u64) -> Result<Confidence> {
    if n_resamples < 200 {
        return Err(Error::InvalidInput("confidence needs at least 200 resamples".into()));
    }
    if !fit.converged {
        return Err(Error::InvalidInput("confidence needs a converged fit".into()));
    }
    let data: Vec<DataPoint> = {
        let mut d: Vec<DataPoint> = data
            .iter()
            .copied()
            .filter(|d| d.l >= fit.l_min && d.l <= fit.l_max)
            .collect();
        d.sort_by(|a, b| (a.l, a.w, a.lambda, a.sigma).partial_cmp(&(b.l, b.w, b.lambda, b.sigma)).unwrap());
        d
    };
    let model: Vec<f64> = data.iter().map(|d| scaling_model(&fit.params, d.w, d.l)).collect();
    let lm = LmOptions::default();
    let results: Vec<Option<Params>> = (0..n_resamples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, &[tag::RESAMPLE, i as u64]);
            let synth: Vec<DataPoint> = data
                .iter()
                .zip(&model)
                .map(|(d, &f)| {
                    let z: f64 = StandardNormal.sample(&mut r);
                    DataPoint { lambda: f + d.sigma * z, ..*d }
                })
                .collect();
            let o = refit(fit, &synth, &lm);
            (o.converged && o.chi2.is_finite()).then(|| Params::unpack(fit.order, &o.theta))
        })
        .collect();
    let ok: Vec<&Params> = results.iter().flatten().collect();
    let failed = n_resamples - ok.len();
    if ok.len() < 2 {
        return Err(Error::Numerical("almost every Monte-Carlo refit failed".into()));
    }
    let interval = |f: &dyn Fn(&Params) -> f64| {
        let v: Vec<f64> = ok.iter().map(|p| f(p)).collect();
        Interval { lo: percentile(&v, 2.5), hi: percentile(&v, 97.5) }
    };
    Ok(Confidence {
        w_c: interval(&|p| p.w_c),
        nu: interval(&|p| p.nu),
        y: fit.y.map(|_| interval(&|p| p.y.unwrap())),
        lambda_c: interval(&|p| p.lambda_c()),
        lambda_c_lmin: fit.y.map(|_| interval(&|p| p.lambda_c_at(fit.l_min))),
        a: (0..fit.params.a.len())
            .map(|i| (0..fit.params.a[i].len()).map(|j| interval(&|p| p.a[i][j])).collect())
            .collect(),
        b1: (0..fit.params.b1.len()).map(|j| interval(&|p| p.b1[j])).collect(),
        b2: (0..fit.params.b2.len()).map(|j| interval(&|p| p.b2[j])).collect(),
        resamples: n_resamples,
        failed,
        unreliable: failed as f64 > 0.05 * n_resamples as f64,
    })
}
