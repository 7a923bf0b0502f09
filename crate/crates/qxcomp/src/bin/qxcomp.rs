use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qxcomp::coding::{LengthMode, Rate};
use qxcomp::error::Error;
use qxcomp::experiments::{run_simulate, run_sweep, run_typical_mass, ExperimentConfig};
use qxcomp::protocol::{quantum_cross_entropy, von_neumann_entropy, QuantumSource};

/// Quantum data compression with a mismatched source model.
#[derive(Parser)]
#[command(name = "qxcomp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigOverrides {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Override the config's RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's Monte Carlo trial count
    #[arg(long)]
    trials: Option<u64>,
    /// Override the config's length-window half-width
    #[arg(long)]
    eps: Option<f64>,
    /// Override the config's length mode (real|integer)
    #[arg(long)]
    mode: Option<LengthMode>,
    /// Write CSV here instead of stdout (simulate also writes <out>.dat)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the exact-enumeration cap
    #[arg(long)]
    exact_cap: Option<u64>,
    /// Run Monte Carlo trials and grid cells on one thread
    #[arg(long)]
    serial: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the von Neumann entropy of a density-matrix file
    Entropy { source: PathBuf },
    /// Print entropies, quantum cross entropy, and the fallback rate
    Rates { rho0: PathBuf, sigma0: PathBuf },
    /// Typical-set mass per N (CSV)
    TypicalMass(ConfigOverrides),
    /// Protocol report per N (CSV + gnuplot sidecar + JSON with --out)
    Simulate(ConfigOverrides),
    /// Protocol reports over the N_list x eps_list grid (CSV)
    Sweep(ConfigOverrides),
}

fn load_config(overrides: &ConfigOverrides) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::from_file(&overrides.config)?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = overrides.trials {
        cfg.trials = trials;
    }
    if let Some(eps) = overrides.eps {
        cfg.eps = eps;
    }
    if let Some(mode) = overrides.mode {
        cfg.mode = mode;
    }
    if let Some(out) = &overrides.out {
        cfg.output_path = Some(out.to_string_lossy().into_owned());
    }
    // precedence: command line > config file > environment default
    if let Some(cap) = overrides.exact_cap {
        cfg.exact_cap = cap;
    } else if let Ok(cap) = std::env::var("QXCOMP_EXACT_CAP") {
        if let Ok(cap) = cap.parse() {
            cfg.exact_cap = cap;
        }
    }
    if overrides.serial {
        cfg.parallel = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(cfg: &ExperimentConfig, csv: &str) -> Result<(), Error> {
    match &cfg.output_path {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Entropy { source } => {
            let src = QuantumSource::from_json_str(&fs::read_to_string(source)?, "source")?;
            println!("S = {:.6}", von_neumann_entropy(&src));
            let eigs: Vec<String> =
                src.eigenvalues().iter().map(|l| format!("{l:.6}")).collect();
            println!("eigenvalues = [{}]", eigs.join(", "));
        }
        Command::Rates { rho0, sigma0 } => {
            let rho = QuantumSource::from_json_str(&fs::read_to_string(rho0)?, "rho0")?;
            let sigma = QuantumSource::from_json_str(&fs::read_to_string(sigma0)?, "sigma0")?;
            let s_rho = von_neumann_entropy(&rho);
            let s_cross = quantum_cross_entropy(&rho, &sigma)?;
            let log_d_ceil = (rho.dim() as f64).log2().ceil() as u32;
            println!("S_rho = {s_rho:.6}");
            println!("S_sigma = {:.6}", von_neumann_entropy(&sigma));
            println!("S_cross = {s_cross}");
            println!("log_D_ceil = {log_d_ceil}");
            let fallback = match s_cross {
                Rate::Finite(v) => v >= log_d_ceil as f64,
                Rate::Infinite => true,
            };
            println!("fallback_recommended = {fallback}");
        }
        Command::TypicalMass(overrides) => {
            let cfg = load_config(&overrides)?;
            emit(&cfg, &run_typical_mass(&cfg)?)?;
        }
        Command::Simulate(overrides) => {
            let cfg = load_config(&overrides)?;
            let (csv, sidecar, json) = run_simulate(&cfg)?;
            emit(&cfg, &csv)?;
            if let Some(path) = &cfg.output_path {
                fs::write(format!("{path}.dat"), sidecar)?;
                fs::write(format!("{path}.json"), json)?;
            }
        }
        Command::Sweep(overrides) => {
            let cfg = load_config(&overrides)?;
            emit(&cfg, &run_sweep(&cfg)?)?;
        }
    }
    Ok(())
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NoConvergence { .. }
        | Error::SupportMismatch { .. }
        | Error::DomainError { .. }
        | Error::EmptyProjector { .. }
        | Error::KraftViolated { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
