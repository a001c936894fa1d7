use crate::fss::ExpansionOrder;
use crate::models::Boundary;
use crate::spectra::{Axis, Ginibre};
use crate::transfer::{Exponents, TransferConfig};
use crate::{Error, Result, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    LambdaScan,
    FssFit,
    Spectra,
    Ginibre,
    Splitting,
    Classify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub class: String,
    pub dim: usize,
    pub widths: Vec<usize>,
    pub w_grid: Vec<f64>,
    /// `[Re E, Im E]`.
    #[serde(default)]
    pub energy: [f64; 2],
    #[serde(default = "periodic")]
    pub transverse_bc: Boundary,
}

fn periodic() -> Boundary {
    Boundary::Periodic
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferBlock {
    #[serde(default = "d_qr")]
    pub qr_interval: usize,
    #[serde(default = "d_target")]
    pub target_rel_error: f64,
    pub max_slices: u64,
    #[serde(default = "d_blocks")]
    pub block_count: usize,
    #[serde(default)]
    pub exponents: Exponents,
}

fn d_qr() -> usize {
    8
}
fn d_target() -> f64 {
    1e-3
}
fn d_blocks() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FssBlock {
    /// Orders as `"m1,n1,m2,n2"`.
    pub orders: Vec<String>,
    #[serde(default = "d_window")]
    pub window: f64,
    /// Smallest width kept in the fit.
    #[serde(default)]
    pub l_min: Option<usize>,
    #[serde(default = "d_resamples")]
    pub resamples: usize,
    /// Input dataset for the `fss-fit` task.
    #[serde(default)]
    pub data: Option<String>,
    #[serde(default)]
    pub w_c_init: Option<f64>,
    /// Fit rows that stopped at `max_slices` before reaching the error target.
    #[serde(default)]
    pub include_unconverged: bool,
}

fn d_window() -> f64 {
    0.3
}
fn d_resamples() -> usize {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectraBlock {
    pub class: String,
    pub dim: usize,
    pub width: usize,
    /// Single strength as in the sweeps; `w_r`/`w_i` override it for SU(2).
    #[serde(default)]
    pub w: f64,
    #[serde(default)]
    pub w_r: Option<f64>,
    #[serde(default)]
    pub w_i: Option<f64>,
    pub samples: usize,
    #[serde(default)]
    pub vectors: bool,
    #[serde(default = "d_axis")]
    pub axis: Axis,
    #[serde(default)]
    pub bins: Option<usize>,
}

fn d_axis() -> Axis {
    Axis::ImagPart
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GinibreBlock {
    pub ensemble: Ginibre,
    pub n: usize,
    pub samples: usize,
    #[serde(default)]
    pub bins: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplittingBlock {
    pub dim: usize,
    pub width: usize,
    pub w_r: f64,
    pub strength: f64,
    pub samples: usize,
    #[serde(default = "d_fraction")]
    pub fit_fraction: f64,
}

fn d_fraction() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyBlock {
    pub matrix: String,
    pub ops: String,
    #[serde(default = "d_tol")]
    pub tol: f64,
}

fn d_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "d_dir")]
    pub dir: String,
}

fn d_dir() -> String {
    "out".into()
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: d_dir() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: TaskKind,
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fss: Option<FssBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectra: Option<SpectraBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ginibre: Option<GinibreBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splitting: Option<SplittingBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifyBlock>,
}

fn missing(block: &str, task: TaskKind) -> Error {
    Error::Config(format!("task {task:?} needs a [{block}] block"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical text: fields in declaration order, defaults filled in.
    pub fn canonical(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.task;
        match t {
            TaskKind::LambdaScan => {
                let m = self.model.as_ref().ok_or_else(|| missing("model", t))?;
                self.transfer.as_ref().ok_or_else(|| missing("transfer", t))?;
                if m.widths.is_empty() || m.w_grid.is_empty() {
                    return Err(Error::Config("model.widths and model.w_grid must be nonempty".into()));
                }
                self.transfer_config()?.validate()?;
                if let Some(f) = &self.fss {
                    self.orders_of(f)?;
                }
            }
            TaskKind::FssFit => {
                let f = self.fss.as_ref().ok_or_else(|| missing("fss", t))?;
                if f.data.is_none() {
                    return Err(Error::Config("fss.data is required for the fss-fit task".into()));
                }
                self.orders_of(f)?;
            }
            TaskKind::Spectra => {
                self.spectra.as_ref().ok_or_else(|| missing("spectra", t))?;
            }
            TaskKind::Ginibre => {
                self.ginibre.as_ref().ok_or_else(|| missing("ginibre", t))?;
            }
            TaskKind::Splitting => {
                self.splitting.as_ref().ok_or_else(|| missing("splitting", t))?;
            }
            TaskKind::Classify => {
                self.classify.as_ref().ok_or_else(|| missing("classify", t))?;
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be ≥ 1".into()));
        }
        Ok(())
    }

    pub fn orders_of(&self, f: &FssBlock) -> Result<Vec<ExpansionOrder>> {
        if f.orders.is_empty() {
            return Err(Error::Config("fss.orders must list at least one order".into()));
        }
        f.orders.iter().map(|s| ExpansionOrder::parse(s).map_err(|e| Error::Config(e.to_string()))).collect()
    }

    pub fn energy(&self) -> C64 {
        self.model.as_ref().map(|m| C64::new(m.energy[0], m.energy[1])).unwrap_or_default()
    }

    pub fn transfer_config(&self) -> Result<TransferConfig> {
        let t = self.transfer.as_ref().ok_or_else(|| missing("transfer", self.task))?;
        Ok(TransferConfig {
            energy: self.energy(),
            qr_interval: t.qr_interval,
            target_rel_error: t.target_rel_error,
            max_slices: t.max_slices,
            block_count: t.block_count,
            seed: self.seed,
            exponents: t.exponents,
        })
    }
}

/// Desk-scale configurations for the rows of the critical-exponent table
/// that the lattice models here realize.
pub const PRESETS: &[(&str, &str)] = &[
    ("table1-desk", include_str!("presets/table1-3d-aii.toml")),
    ("table1-3d-ai", include_str!("presets/table1-3d-ai.toml")),
    ("table1-3d-aii", include_str!("presets/table1-3d-aii.toml")),
    ("table1-3d-aii-dagger", include_str!("presets/table1-3d-aii-dagger.toml")),
    ("table1-2d-aii-complex", include_str!("presets/table1-2d-aii-complex.toml")),
    ("table1-2d-aii-real", include_str!("presets/table1-2d-aii-real.toml")),
    ("table1-2d-aii-dagger", include_str!("presets/table1-2d-aii-dagger.toml")),
    ("table1-2d-cii-dagger", include_str!("presets/table1-2d-cii-dagger.toml")),
    ("table1-2d-diii", include_str!("presets/table1-2d-diii.toml")),
];

pub fn preset(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Config(format!("unknown preset {name:?}")))
}
