//! Run configuration, read from a TOML file.
//!
//! ```toml
//! seeds = [0, 1, 2, 3, 4]
//!
//! [grid]
//! m = [128, 256]
//! # n = [128]          # omitted: square images
//! r = [2, 5]
//! nnz_ratio = [0.01, 0.05]
//! q_ratio = [0.4, 0.6, 0.8]
//! kinds = ["dct2"]
//!
//! [solver]
//! tau = 0.99
//! eta = 0.99
//! tol = 1e-5
//! max_iter = 1000
//! alphas = [0.28]
//! # beta0 = 0.05        # omitted: 0.1·q/‖b‖₁
//! # scale = 1.0         # objective scale in the β rule
//! # bounded_inertia = true   # α < 1/3; set false for sweeps past it
//!
//! [output]
//! # dir = "results"     # omitted: $IPPA_OUTPUT_DIR, then ./results
//! csv = "table.csv"
//! plot = "plot.csv"
//! records = "records.json"
//! ```

use std::path::{Path, PathBuf};

use ippa_core::cpcp::{BetaController, CpcpInstance, CpcpSpec};
use ippa_core::numkit::TransformKind;
use ippa_core::vi_core::{StopRule, INERTIA_LIMIT};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "IPPA_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seeds: Vec<u64>,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub m: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    pub r: Vec<usize>,
    pub nnz_ratio: Vec<f64>,
    pub q_ratio: Vec<f64>,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<TransformKind>,
}

fn default_kinds() -> Vec<TransformKind> {
    vec![TransformKind::Dct2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tau: f64,
    pub eta: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub alphas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Restrict α to `[0, 1/3)`.
    pub bounded_inertia: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tau: 0.99,
            eta: 0.99,
            tol: 1e-5,
            max_iter: 1000,
            alphas: vec![0.28],
            beta0: None,
            scale: None,
            bounded_inertia: true,
        }
    }
}

impl SolverConfig {
    pub fn stop_rule(&self) -> StopRule {
        StopRule {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }

    pub fn controller(&self, inst: &CpcpInstance) -> Result<BetaController> {
        let c = match self.beta0 {
            Some(b) => BetaController::new(b)?,
            None => BetaController::for_instance(inst),
        };
        Ok(match self.scale {
            Some(s) => c.with_scale(s)?,
            None => c,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tau", self.tau), ("eta", self.eta)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(BenchError::config(format!(
                    "{name} must lie in (0, 1], got {v}"
                )));
            }
        }
        if !(self.tol > 0.0) {
            return Err(BenchError::config("tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(BenchError::config("max_iter must be positive"));
        }
        if self.alphas.is_empty() {
            return Err(BenchError::config("alphas is empty"));
        }
        let limit = if self.bounded_inertia {
            INERTIA_LIMIT
        } else {
            1.0
        };
        for &a in &self.alphas {
            if !(0.0..limit).contains(&a) {
                return Err(BenchError::config(format!(
                    "alpha {a} outside [0, {limit:.4})"
                )));
            }
        }
        if matches!(self.beta0, Some(b) if !(b > 0.0)) {
            return Err(BenchError::config("beta0 must be positive"));
        }
        if matches!(self.scale, Some(s) if !(s > 0.0)) {
            return Err(BenchError::config("scale must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    pub csv: PathBuf,
    pub plot: PathBuf,
    pub records: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            csv: "table.csv".into(),
            plot: "plot.csv".into(),
            records: "records.json".into(),
        }
    }
}

impl OutputConfig {
    /// `dir`, else `$IPPA_OUTPUT_DIR`, else `results`.
    pub fn resolved_dir(&self) -> PathBuf {
        self.dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("results"))
    }

    pub fn csv_path(&self) -> PathBuf {
        self.resolved_dir().join(&self.csv)
    }

    pub fn plot_path(&self) -> PathBuf {
        self.resolved_dir().join(&self.plot)
    }

    pub fn records_path(&self) -> PathBuf {
        self.resolved_dir().join(&self.records)
    }
}

/// One problem size of the grid; `seed` is filled in per trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub nnz_ratio: f64,
    pub q_ratio: f64,
    pub kind: TransformKind,
}

impl Cell {
    pub fn spec(&self, seed: u64) -> Result<CpcpSpec> {
        Ok(CpcpSpec::from_ratios(
            self.m,
            self.n,
            self.r,
            self.nnz_ratio,
            self.q_ratio,
            self.kind,
            seed,
        )?)
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|source| BenchError::Parse {
            path: origin.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is representable in TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if self.seeds.is_empty() {
            return Err(BenchError::config("seeds is empty"));
        }
        for (name, empty) in [
            ("grid.m", g.m.is_empty()),
            ("grid.r", g.r.is_empty()),
            ("grid.nnz_ratio", g.nnz_ratio.is_empty()),
            ("grid.q_ratio", g.q_ratio.is_empty()),
            ("grid.kinds", g.kinds.is_empty()),
            ("grid.n", g.n.as_ref().is_some_and(|n| n.is_empty())),
        ] {
            if empty {
                return Err(BenchError::config(format!("{name} is empty")));
            }
        }
        for &v in g.nnz_ratio.iter().chain(&g.q_ratio) {
            if !(v > 0.0 && v <= 1.0) {
                return Err(BenchError::config(format!("ratio {v} outside (0, 1]")));
            }
        }
        if g.m.iter().chain(g.n.iter().flatten()).any(|&d| d == 0) {
            return Err(BenchError::config("image sizes must be positive"));
        }
        self.solver.validate()
    }

    /// The `i`-th grid cell.
    pub fn grid_cell(&self, i: usize) -> Cell {
        self.cells()[i]
    }

    /// Grid cells in a fixed order: `m`, `n`, `r`, nnz ratio, q ratio, transform.
    pub fn cells(&self) -> Vec<Cell> {
        let g = &self.grid;
        let mut out = Vec::new();
        for &m in &g.m {
            let ns = g.n.clone().unwrap_or_else(|| vec![m]);
            for n in ns {
                for &r in &g.r {
                    for &nnz_ratio in &g.nnz_ratio {
                        for &q_ratio in &g.q_ratio {
                            for &kind in &g.kinds {
                                out.push(Cell {
                                    m,
                                    n,
                                    r,
                                    nnz_ratio,
                                    q_ratio,
                                    kind,
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}
