//! Command-line front end: run configurations, fits, classification and
//! report rendering.

pub mod config;
pub mod io;
pub mod run;

pub use config::{preset, RunConfig, TaskKind, PRESETS};
pub use run::{run, RunManifest};

use crate::fss::{self, DataPoint, ExpansionOrder, FitOptions, FitReport};
use crate::{transfer, Result};
use clap::{Parser, Subcommand};
use std::fs;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "andloc", version, about = "Anderson transitions in non-Hermitian disordered lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Execute a TOML run configuration.
    Run {
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a transfer-matrix dataset (CSV) with the scaling form.
    Fit {
        data: PathBuf,
        /// Expansion order `m1,n1,m2,n2`; repeat for several.
        #[arg(long, required = true)]
        orders: Vec<String>,
        #[arg(long, default_value_t = 200)]
        resamples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        window: f64,
        #[arg(long)]
        w_c: Option<f64>,
        /// Also fit rows that did not reach the error target.
        #[arg(long)]
        include_unconverged: bool,
        /// Write the JSON report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a matrix (CSV of re,im pairs) against candidate symmetries.
    Classify {
        matrix: PathBuf,
        #[arg(long)]
        ops: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Render a fit report JSON as table rows.
    Report { fit: PathBuf },
    /// Print a shipped configuration, or list them without a name.
    Preset { name: Option<String> },
    /// Print the class table as JSON.
    Classes {
        /// Group by Hermitian counterpart.
        #[arg(long)]
        grouped: bool,
    },
}

fn fit_command(
    data: &PathBuf,
    orders: &[String],
    resamples: usize,
    seed: u64,
    window: f64,
    w_c: Option<f64>,
    include_unconverged: bool,
) -> Result<Vec<FitReport>> {
    let rows = transfer::read_csv(fs::File::open(data)?)?;
    let points = DataPoint::from_scan(&rows, include_unconverged)?;
    let (class, e_re, e_im) = rows.first().map(|p| (p.class.clone(), p.e_re, p.e_im)).unwrap_or_default();
    let opts = FitOptions { w_c_init: w_c, window: Some(window), ..Default::default() };
    let mut out = Vec::new();
    for o in orders {
        let order = ExpansionOrder::parse(o)?;
        let mut f = fss::fit(&points, order, &opts)?;
        if resamples > 0 {
            f.confidence = Some(fss::confidence(&f, &points, resamples, seed)?);
        }
        out.push(FitReport::new(&class, e_re, e_im, &points, f));
    }
    Ok(out)
}

fn read_reports(text: &str) -> Result<Vec<FitReport>> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    if v.is_array() {
        Ok(serde_json::from_value(v)?)
    } else {
        Ok(vec![serde_json::from_value(v)?])
    }
}

fn print_rows(reports: &[FitReport]) -> Result<()> {
    println!("class | E | L | (m1,n1,m2,n2) | GOF | W_c | nu | y | Lambda_c");
    for r in reports {
        let (line, warnings) = fss::render_row(r)?;
        for w in warnings {
            eprintln!("warning: {w}");
        }
        println!("{line}");
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, workers, out } => {
            let text = fs::read_to_string(&config)?;
            let cfg = RunConfig::parse(&text)?;
            let workers = workers.or(cfg.workers).unwrap_or_else(|| {
                std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
            });
            let out = out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
            let m = run(&cfg, &out, workers)?;
            eprintln!("wrote {} files to {}", m.outputs.len(), out.display());
            Ok(())
        }
        Command::Fit { data, orders, resamples, seed, window, w_c, include_unconverged, out } => {
            let reports = fit_command(&data, &orders, resamples, seed, window, w_c, include_unconverged)?;
            let json = serde_json::to_string_pretty(&reports)?;
            match out {
                Some(p) => {
                    fs::write(p, json)?;
                    print_rows(&reports)
                }
                None => {
                    println!("{json}");
                    Ok(())
                }
            }
        }
        Command::Classify { matrix, ops, tol } => {
            let v = run::classify_files(&matrix, &ops, tol)?;
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(())
        }
        Command::Report { fit } => print_rows(&read_reports(&fs::read_to_string(fit)?)?),
        Command::Preset { name: None } => {
            for (n, _) in PRESETS {
                println!("{n}");
            }
            Ok(())
        }
        Command::Preset { name: Some(n) } => {
            print!("{}", preset(&n)?);
            Ok(())
        }
        Command::Classes { grouped } => {
            let v = if grouped { crate::symmetry::classes::grouped_json() } else { crate::symmetry::classes::table_json() };
            println!("{}", serde_json::to_string_pretty(&v)?);
            Ok(())
        }
    }
}

/// Parse arguments, run, and map errors to exit codes
/// (0 success, 2 configuration or input error, 3 numerical failure).
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

