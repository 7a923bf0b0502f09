//! Experiment configuration, runners, and CSV export behind the
//! `qxcomp` CLI. Runs are deterministic: every (N, eps) cell derives
//! its Monte Carlo seed from (seed, cell index), so output is
//! byte-identical across runs and across serial/parallel execution.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coding::LengthMode;
use crate::error::{Error, Result};
use crate::protocol::{
    protocol_report, MassEngine, ProtocolReport, QuantumSource, RunOptions,
};
use crate::rng::cell_seed;
use crate::typicality::{
    check_exact_cap, typical_mass_exact, typical_mass_mc, Distribution, TypicalKind,
    DEFAULT_EXACT_CAP,
};

pub const CSV_SCHEMA_LINE: &str = "# qxcomp-schema v1";

pub const SIMULATE_HEADER: &str = "N,eps,mode,engine,pi_mass,std_error,trials,seed,S_rho,S_sigma,S_cross,log_D_ceil,center,qubits_used,qubits_naive,fidelity,fallback_recommended,status";

pub const TYPICAL_MASS_HEADER: &str = "N,eps,kind,engine,estimate,std_error,trials,seed";

fn default_trials() -> u64 {
    100_000
}

fn default_exact_cap() -> u64 {
    DEFAULT_EXACT_CAP as u64
}

fn default_parallel() -> bool {
    true
}

fn default_mode() -> LengthMode {
    LengthMode::Real
}

/// One experiment: source files, the N grid, and Monte Carlo knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub rho0_path: Option<String>,
    #[serde(default)]
    pub sigma0_path: Option<String>,
    /// Classical distribution for typical-mass runs; defaults to the
    /// eigenvalues of rho0 when absent.
    #[serde(default)]
    pub dist_path: Option<String>,
    pub n_list: Vec<usize>,
    pub eps: f64,
    #[serde(default)]
    pub eps_list: Option<Vec<f64>>,
    #[serde(default = "default_mode")]
    pub mode: LengthMode,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_exact_cap")]
    pub exact_cap: u64,
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

impl ExperimentConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::InvalidInput("n_list must be nonempty".into()));
        }
        if !self.n_list.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput("n_list must be strictly ascending".into()));
        }
        if self.trials < 1 {
            return Err(Error::InvalidInput("trials must be >= 1".into()));
        }
        // NaN must fail too, hence the negated form.
        if self.eps.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidInput("eps must be > 0".into()));
        }
        if let Some(list) = &self.eps_list {
            if list.is_empty() || !list.iter().all(|&e| e > 0.0) {
                return Err(Error::InvalidInput(
                    "eps_list must be nonempty with positive entries".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn load_source(&self, path: &Option<String>, role: &str) -> Result<QuantumSource> {
        let path = path.as_ref().ok_or_else(|| {
            Error::InvalidInput(format!("config is missing {role}_path"))
        })?;
        QuantumSource::from_json_str(&fs::read_to_string(path)?, role)
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.6}")
}

/// Distribution for typical-mass runs: explicit file, or the true
/// source's eigenvalue distribution.
fn typical_mass_distribution(cfg: &ExperimentConfig) -> Result<Distribution> {
    if let Some(path) = &cfg.dist_path {
        return Distribution::from_json_str(&fs::read_to_string(path)?);
    }
    let rho = cfg.load_source(&cfg.rho0_path, "rho0")?;
    let mut probs: Vec<f64> = rho.eigenvalues().to_vec();
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    let last = probs.len() - 1;
    let tail: f64 = probs[..last].iter().sum();
    probs[last] = (1.0 - tail).max(0.0);
    Distribution::new(probs)
}

/// CSV of typical-set mass per N, both strong and weak, exact when the
/// enumeration fits under the cap.
pub fn run_typical_mass(cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    let p = typical_mass_distribution(cfg)?;
    let cap = cfg.exact_cap as u128;
    let cells: Vec<(usize, TypicalKind)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| [(n, TypicalKind::Strong), (n, TypicalKind::Weak)])
        .collect();
    let run_cell = |(idx, &(n, kind)): (usize, &(usize, TypicalKind))| -> Result<String> {
        let seed = cell_seed(cfg.seed, idx as u64);
        let (engine, est) = if check_exact_cap(n, p.len(), cap).is_ok() {
            (MassEngine::Exact, typical_mass_exact(n, &p, cfg.eps, kind, cap)?)
        } else {
            (
                MassEngine::Mc,
                typical_mass_mc(n, &p, cfg.eps, kind, cfg.trials, seed, cfg.parallel)?,
            )
        };
        Ok(format!(
            "{n},{},{kind},{engine},{},{},{},{}",
            fmt_f64(cfg.eps),
            fmt_f64(est.estimate),
            fmt_f64(est.std_error),
            est.trials,
            est.seed
        ))
    };
    let rows: Result<Vec<String>> = if cfg.parallel {
        cells.par_iter().enumerate().map(run_cell).collect()
    } else {
        cells.iter().enumerate().map(run_cell).collect()
    };
    let mut out = format!("{CSV_SCHEMA_LINE}\n{TYPICAL_MASS_HEADER}\n");
    for row in rows? {
        out.push_str(&row);
        out.push('\n');
    }
    Ok(out)
}

/// One simulate/sweep cell: either a full report or a row-level status.
enum CellOutcome {
    Report(ProtocolReport),
    EmptyProjector { n: usize, eps: f64 },
}

fn report_row(outcome: &CellOutcome) -> String {
    match outcome {
        CellOutcome::Report(r) => {
            let fidelity = r.fidelity.map(fmt_f64).unwrap_or_default();
            format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},ok",
                r.n,
                fmt_f64(r.eps),
                r.mode,
                r.engine,
                fmt_f64(r.pi_mass.estimate),
                fmt_f64(r.pi_mass.std_error),
                r.pi_mass.trials,
                r.pi_mass.seed,
                fmt_f64(r.s_rho),
                fmt_f64(r.s_sigma),
                fmt_f64(r.s_cross),
                r.log_d_ceil,
                fmt_f64(r.center),
                r.qubits_used,
                r.qubits_naive,
                fidelity,
                r.fallback_recommended
            )
        }
        CellOutcome::EmptyProjector { n, eps } => {
            format!(
                "{n},{},,,,,,,,,,,,,,,,empty_projector",
                fmt_f64(*eps)
            )
        }
    }
}

fn run_cells(
    cfg: &ExperimentConfig,
    cells: &[(usize, f64)],
) -> Result<Vec<CellOutcome>> {
    let rho0 = cfg.load_source(&cfg.rho0_path, "rho0")?;
    let sigma0 = cfg.load_source(&cfg.sigma0_path, "sigma0")?;
    let run_cell = |(idx, &(n, eps)): (usize, &(usize, f64))| -> Result<CellOutcome> {
        let opts = RunOptions {
            trials: cfg.trials,
            seed: cell_seed(cfg.seed, idx as u64),
            exact_cap: cfg.exact_cap as u128,
            parallel: cfg.parallel,
            fidelity_dim_cap: 64,
        };
        match protocol_report(&rho0, &sigma0, n, eps, cfg.mode, &opts) {
            Ok(r) => Ok(CellOutcome::Report(r)),
            Err(Error::EmptyProjector { .. }) => Ok(CellOutcome::EmptyProjector { n, eps }),
            Err(e) => Err(e),
        }
    };
    if cfg.parallel {
        cells.par_iter().enumerate().map(run_cell).collect()
    } else {
        cells.iter().enumerate().map(run_cell).collect()
    }
}

fn render_csv(outcomes: &[CellOutcome]) -> String {
    let mut out = format!("{CSV_SCHEMA_LINE}\n{SIMULATE_HEADER}\n");
    for o in outcomes {
        out.push_str(&report_row(o));
        out.push('\n');
    }
    out
}

/// gnuplot-ready (N, pi_mass) sidecar.
fn render_sidecar(outcomes: &[CellOutcome]) -> String {
    let mut out = String::from("# N pi_mass\n");
    for o in outcomes {
        if let CellOutcome::Report(r) = o {
            let _ = writeln!(out, "{} {}", r.n, fmt_f64(r.pi_mass.estimate));
        }
    }
    out
}

/// ProtocolReport rows for each N at the config's single eps.
/// Returns (csv, gnuplot sidecar, reports as JSON).
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<(String, String, String)> {
    cfg.validate()?;
    let cells: Vec<(usize, f64)> = cfg.n_list.iter().map(|&n| (n, cfg.eps)).collect();
    let outcomes = run_cells(cfg, &cells)?;
    let reports: Vec<&ProtocolReport> = outcomes
        .iter()
        .filter_map(|o| match o {
            CellOutcome::Report(r) => Some(r),
            _ => None,
        })
        .collect();
    let json = serde_json::to_string_pretty(&reports)?;
    Ok((render_csv(&outcomes), render_sidecar(&outcomes), json))
}

/// Long-format CSV over the N_list × eps_list cross product.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    let eps_list = cfg
        .eps_list
        .clone()
        .unwrap_or_else(|| vec![cfg.eps]);
    let cells: Vec<(usize, f64)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| eps_list.iter().map(move |&e| (n, e)))
        .collect();
    let outcomes = run_cells(cfg, &cells)?;
    Ok(render_csv(&outcomes))
}

/// Parses CSV emitted by this module: skips `#` comment lines, returns
/// the header fields and data rows.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.is_empty());
    let header = lines
        .next()
        .ok_or(Error::InvalidInput("CSV has no header".into()))?
        .split(',')
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for line in lines {
        let row: Vec<String> = line.split(',').map(str::to_string).collect();
        if row.len() != header.len() {
            return Err(Error::InvalidInput(format!(
                "row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}
