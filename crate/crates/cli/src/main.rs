//! `emhd`: batch runner for the electron-MHD solver and its diagnostics.
//!
//! Exit codes are exhaustive: 0 success, 1 usage or configuration error,
//! 2 numerical instability (partial artifacts are kept).

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use emhd_core::Error;

#[derive(Parser)]
#[command(name = "emhd", version, about = "Electron-MHD solver and Littlewood-Paley diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured run; writes snapshots, log.csv, budget.csv and a manifest.
    Run {
        config: PathBuf,
        /// Output directory; defaults to the config's `out_dir`, then `emhd_out`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Advance the Coulomb-gauge vector potential instead of the field.
        #[arg(long)]
        potential: bool,
    },
    /// Shell spectrum of a snapshot, plus Besov norms given as `s:p:q`.
    Diagnose {
        snapshot: PathBuf,
        #[arg(long = "besov", value_name = "S:P:Q")]
        besov: Vec<String>,
    },
    /// Truncated helicity and energy fluxes of a snapshot.
    Flux {
        snapshot: PathBuf,
        /// Highest cutoff shell; defaults to the grid's last shell.
        #[arg(long)]
        qmax: Option<i32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Localized helicity identity along a configured run.
    Identity {
        config: PathBuf,
        /// `standard` is (1 + cos x cos y)(1 - t/T)², `constant` is φ ≡ 1.
        #[arg(long, default_value = "standard")]
        testfn: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-energy and Gronwall checks against an ensemble of perturbed runs.
    Uniqueness {
        config: PathBuf,
        /// Perturbation size relative to ‖B₀‖₂.
        #[arg(long, default_value_t = 1e-3)]
        perturb: f64,
        #[arg(long, default_value_t = 1)]
        seeds: usize,
        /// Shell holding the perturbation.
        #[arg(long, default_value_t = 2)]
        shell: i32,
        #[arg(long, default_value_t = 3.0)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long = "c-cap", default_value_t = 1e3)]
        c_cap: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify an exponent triple; prints one line.
    Region {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        r: f64,
    },
}

/// Failure of a subcommand, already mapped to its exit code.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Unstable(_)) { 2 } else { 1 };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run { config, out, potential } => commands::run(&config, out, potential),
        Command::Diagnose { snapshot, besov } => commands::diagnose(&snapshot, &besov),
        Command::Flux { snapshot, qmax, out } => commands::flux(&snapshot, qmax, out),
        Command::Identity { config, testfn, out } => commands::identity(&config, &testfn, out),
        Command::Uniqueness {
            config,
            perturb,
            seeds,
            shell,
            p,
            q,
            r,
            c_cap,
            out,
        } => commands::uniqueness(
            &config,
            commands::Ensemble {
                perturb,
                seeds,
                shell,
                p,
                q,
                r,
                c_cap,
            },
            out,
        ),
        Command::Region { p, q, r } => commands::region(p, q, r),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("emhd: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
