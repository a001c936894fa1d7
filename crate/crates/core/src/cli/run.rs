use super::config::{RunConfig, TaskKind};
use super::io::{read_matrix_csv, read_ops_json};
use crate::fss::{self, DataPoint, FitOptions, FitReport};
use crate::models::{self, build_su2, DisorderSpec, LatticeSpec, DENSE_CAP};
use crate::rng::{self, tag};
use crate::spectra::{self, Axis, Binning, SplittingSpec, SpectrumResult};
use crate::symmetry::{self, SymmetryClassTag};
use crate::transfer::{self, ScanSpec};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskStatus {
    pub name: String,
    pub seed: u64,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_digest: String,
    pub version: String,
    pub workers: usize,
    pub tasks: Vec<TaskStatus>,
    pub started: u64,
    pub finished: Option<u64>,
    pub outputs: Vec<OutputFile>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub const MANIFEST: &str = "manifest.json";

struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.manifest.outputs.push(OutputFile { path: name.into(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    fn save_manifest(&self) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.manifest)?;
        fs::write(self.dir.join(MANIFEST), text)?;
        Ok(())
    }

    fn task(&mut self, name: &str, seed: u64) {
        self.manifest.tasks.push(TaskStatus { name: name.into(), seed, status: "running".into() });
    }

    fn finish_task(&mut self, status: &str) {
        if let Some(t) = self.manifest.tasks.last_mut() {
            t.status = status.into();
        }
    }
}

/// Execute `cfg`, writing outputs and `manifest.json` into `out`. The
/// manifest is written before work starts and rewritten at the end, so an
/// interrupted run still leaves a valid partial manifest.
pub fn run(cfg: &RunConfig, out: &Path, workers: usize) -> Result<RunManifest> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let canonical = cfg.canonical()?;
    let mut r = Run {
        dir: out.to_path_buf(),
        manifest: RunManifest {
            config_digest: sha256_hex(canonical.as_bytes()),
            version: env!("CARGO_PKG_VERSION").into(),
            workers,
            tasks: vec![],
            started: now(),
            finished: None,
            outputs: vec![],
        },
    };
    r.save_manifest()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let result = pool.install(|| dispatch(cfg, &mut r));
    match &result {
        Ok(()) => r.finish_task("done"),
        Err(e) => r.finish_task(&format!("failed: {e}")),
    }
    r.manifest.finished = Some(now());
    r.save_manifest()?;
    result.map(|_| r.manifest)
}

fn dispatch(cfg: &RunConfig, r: &mut Run) -> Result<()> {
    match cfg.task {
        TaskKind::LambdaScan => lambda_scan(cfg, r),
        TaskKind::FssFit => {
            let f = cfg.fss.as_ref().unwrap();
            let text = fs::read(f.data.as_ref().unwrap())?;
            let rows = transfer::read_csv(&text[..])?;
            r.task("fss-fit", cfg.seed);
            fit_rows(cfg, &rows, r)
        }
        TaskKind::Spectra => spectra_task(cfg, r),
        TaskKind::Ginibre => ginibre_task(cfg, r),
        TaskKind::Splitting => splitting_task(cfg, r),
        TaskKind::Classify => classify_task(cfg, r),
    }
}

fn lambda_scan(cfg: &RunConfig, r: &mut Run) -> Result<()> {
    let m = cfg.model.as_ref().unwrap();
    let spec = ScanSpec {
        class: m.class.clone(),
        dim: m.dim,
        widths: m.widths.clone(),
        w_grid: m.w_grid.clone(),
        transverse_bc: m.transverse_bc,
    };
    let tc = cfg.transfer_config()?;
    r.task("lambda-scan", cfg.seed);
    let total = spec.widths.len() * spec.w_grid.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let rows = transfer::lambda_scan_with(&spec, &tc, &|p| {
        let k = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
        eprintln!("[{k}/{total}] L={} W={} Λ={:.5}±{:.5}{}", p.l, p.w, p.lambda, p.sigma_lambda,
            if p.converged { "" } else { " (not converged)" });
    })?;
    let mut csv = Vec::new();
    transfer::write_csv(&rows, &mut csv)?;
    r.write("scan.csv", &csv)?;
    let crossings = match transfer::find_crossing(&rows) {
        Ok(c) => serde_json::to_value(c)?,
        Err(e) => serde_json::json!({ "error": e.to_string() }),
    };
    r.write("crossings.json", serde_json::to_string_pretty(&crossings)?.as_bytes())?;
    r.finish_task("done");
    if cfg.fss.is_some() {
        r.task("fss-fit", rng::derive(cfg.seed, &[tag::RESAMPLE]));
        fit_rows(cfg, &rows, r)?;
    }
    Ok(())
}

fn fit_rows(cfg: &RunConfig, rows: &[transfer::ScanPoint], r: &mut Run) -> Result<()> {
    let f = cfg.fss.as_ref().unwrap();
    let mut data = DataPoint::from_scan(rows, f.include_unconverged)?;
    if let Some(lmin) = f.l_min {
        data.retain(|d| d.l >= lmin as f64);
    }
    let (class, e_re, e_im) = rows.first().map(|p| (p.class.clone(), p.e_re, p.e_im)).unwrap_or_default();
    let opts = FitOptions { w_c_init: f.w_c_init, window: Some(f.window), ..Default::default() };
    let seed = rng::derive(cfg.seed, &[tag::RESAMPLE]);
    let mut reports = Vec::new();
    let mut lines = String::new();
    for order in cfg.orders_of(f)? {
        let mut fit = fss::fit(&data, order, &opts)?;
        if f.resamples > 0 {
            fit.confidence = Some(fss::confidence(&fit, &data, f.resamples, seed)?);
        }
        let rep = FitReport::new(&class, e_re, e_im, &data, fit);
        let (line, warnings) = fss::render_row(&rep)?;
        for w in warnings {
            eprintln!("warning ({order}): {w}");
        }
        println!("{line}");
        lines.push_str(&line);
        lines.push('\n');
        reports.push(rep);
    }
    r.write("fit.json", serde_json::to_string_pretty(&reports)?.as_bytes())?;
    r.write("fit_table.txt", lines.as_bytes())?;
    Ok(())
}

fn histogram(spectra: &[SpectrumResult], axis: Axis, bins: Option<usize>) -> Result<Vec<u8>> {
    let binning = bins.map(Binning::Count).unwrap_or(Binning::FreedmanDiaconis);
    let h = spectra::dos_hist(spectra, axis, &binning)?;
    let mut buf = Vec::new();
    spectra::write_histogram_csv(&h, &mut buf)?;
    Ok(buf)
}

fn spectra_task(cfg: &RunConfig, r: &mut Run) -> Result<()> {
    let s = cfg.spectra.as_ref().unwrap();
    r.task("spectra", cfg.seed);
    let lattice = LatticeSpec::cube(s.dim, s.width);
    let results: Vec<SpectrumResult> = (0..s.samples)
        .into_par_iter()
        .map(|i| {
            let seed = rng::derive(cfg.seed, &[tag::SAMPLE, i as u64]);
            let model = match (s.w_r, s.w_i) {
                (None, None) => models::build_family(&s.class, lattice, s.w, seed)?,
                (wr, wi) => build_su2(
                    lattice,
                    DisorderSpec::su2(wr.unwrap_or(0.0), wi.unwrap_or(0.0)),
                    &SymmetryClassTag::new(&s.class)?,
                    seed,
                )?,
            };
            let h = model.assemble_full(DENSE_CAP)?;
            spectra::diagonalize(&h, s.vectors, DENSE_CAP, &format!("{} seed {seed}", s.class))
        })
        .collect::<Result<_>>()?;
    let mut buf = Vec::new();
    spectra::write_spectrum_csv(&results, &mut buf)?;
    r.write("spectra.csv", &buf)?;
    r.write("dos.csv", &histogram(&results, s.axis, s.bins)?)?;
    Ok(())
}

fn ginibre_task(cfg: &RunConfig, r: &mut Run) -> Result<()> {
    let g = cfg.ginibre.as_ref().unwrap();
    r.task("ginibre", cfg.seed);
    let results: Vec<SpectrumResult> = (0..g.samples)
        .into_par_iter()
        .map(|i| {
            let seed = rng::derive(cfg.seed, &[tag::SAMPLE, i as u64]);
            let h = spectra::ginibre(g.ensemble, g.n, seed)?;
            spectra::diagonalize(&h, false, DENSE_CAP, &format!("{:?} seed {seed}", g.ensemble))
        })
        .collect::<Result<_>>()?;
    let real: Vec<usize> = results.iter().map(|s| spectra::count_real(&s.eigenvalues)).collect();
    let mean_real = real.iter().sum::<usize>() as f64 / real.len().max(1) as f64;
    let summary = serde_json::json!({
        "ensemble": g.ensemble,
        "n": g.n,
        "samples": g.samples,
        "real_eigenvalues_per_sample": real,
        "mean_real_eigenvalues": mean_real,
    });
    let mut buf = Vec::new();
    spectra::write_spectrum_csv(&results, &mut buf)?;
    r.write("spectra.csv", &buf)?;
    r.write("dos.csv", &histogram(&results, Axis::ImagPart, g.bins)?)?;
    r.write("summary.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(())
}

fn splitting_task(cfg: &RunConfig, r: &mut Run) -> Result<()> {
    let s = cfg.splitting.as_ref().unwrap();
    r.task("splitting", cfg.seed);
    let spec = SplittingSpec {
        dim: s.dim,
        width: s.width,
        w_r: s.w_r,
        strength: s.strength,
        samples: s.samples,
        seed: cfg.seed,
        fit_fraction: s.fit_fraction,
    };
    let stats = spectra::splitting_stats(&spec)?;
    let mut csv = String::from("s,scaled\n");
    for (x, y) in stats.splittings.iter().zip(&stats.scaled) {
        csv.push_str(&format!("{x:?},{y:?}\n"));
    }
    r.write("splittings.csv", csv.as_bytes())?;
    let summary = serde_json::json!({
        "count": stats.splittings.len(),
        "discarded": stats.discarded,
        "beta": stats.beta,
        "beta_small": stats.beta_small,
    });
    r.write("summary.json", serde_json::to_string_pretty(&summary)?.as_bytes())?;
    Ok(())
}

/// Classification of a matrix file against an ops file, as JSON.
pub fn classify_files(matrix: &Path, ops: &Path, tol: f64) -> Result<serde_json::Value> {
    let h = read_matrix_csv(&fs::read_to_string(matrix)?)?;
    let ops = read_ops_json(&fs::read_to_string(ops)?, h.nrows())?;
    let residuals: Vec<serde_json::Value> = ops
        .iter()
        .map(|op| {
            Ok(serde_json::json!({ "kind": op.kind.label(), "sign": op.sign, "residual": symmetry::verify(&h, op)? }))
        })
        .collect::<Result<_>>()?;
    let tag = symmetry::classify(&h, &ops, tol)?;
    let rec = tag.record()?;
    Ok(serde_json::json!({
        "class": tag.name,
        "conserving_energy": rec.conserving_energy(),
        "hermitian_counterpart": symmetry::counterpart(&tag)?,
        "residuals": residuals,
    }))
}

fn classify_task(cfg: &RunConfig, r: &mut Run) -> Result<()> {
    let c = cfg.classify.as_ref().unwrap();
    r.task("classify", cfg.seed);
    let v = classify_files(Path::new(&c.matrix), Path::new(&c.ops), c.tol)?;
    println!("{}", v["class"].as_str().unwrap_or_default());
    r.write("classify.json", serde_json::to_string_pretty(&v)?.as_bytes())?;
    Ok(())
}
