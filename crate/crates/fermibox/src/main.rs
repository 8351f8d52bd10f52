use std::process::ExitCode;

use clap::{Parser, Subcommand as ClapSubcommand};

use fermibox::config::RunConfig;
use fermibox::harness::{run, Subcommand};

/// Desk-scale numerical laboratory for fermionic mean-field semiclassics.
#[derive(Parser)]
#[command(name = "fermibox", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Thomas-Fermi ground state: density CSV and mu/energy JSON
    Tf(RunArgs),
    /// Hartree SCF at the TF chemical potential with diagnostics
    Hartree(RunArgs),
    /// Convergence sweep over particle numbers with rate fits
    Sweep(RunArgs),
    /// Wigner function of the Hartree state
    Wigner(RunArgs),
    /// Eigenvalue counts against the phase-space volume
    WeylLaw(RunArgs),
    /// Spectral window counts around the chemical potential
    Window(RunArgs),
    /// Cutoff norms and tail decay exponents
    Cutoff(RunArgs),
    /// Exact Fock-space verification batteries
    FockVerify(RunArgs),
    /// Number estimates for the exact N-body ground state
    Nbody(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Path to the INI-style run configuration
    #[arg(long)]
    config: std::path::PathBuf,
    /// Output directory override
    #[arg(long)]
    out: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (sub, args) = match &cli.command {
        Command::Tf(a) => (Subcommand::Tf, a),
        Command::Hartree(a) => (Subcommand::Hartree, a),
        Command::Sweep(a) => (Subcommand::Sweep, a),
        Command::Wigner(a) => (Subcommand::Wigner, a),
        Command::WeylLaw(a) => (Subcommand::WeylLaw, a),
        Command::Window(a) => (Subcommand::Window, a),
        Command::Cutoff(a) => (Subcommand::Cutoff, a),
        Command::FockVerify(a) => (Subcommand::FockVerify, a),
        Command::Nbody(a) => (Subcommand::Nbody, a),
    };

    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read config {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match RunConfig::from_text(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }

    match run(sub, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{} failed: {e}", sub.name());
            // diagnostics file for solver failures
            let diag = std::path::Path::new(&cfg.out_dir)
                .join(format!("{}_{}_error.txt", sub.name(), cfg.config_hash));
            let _ = std::fs::create_dir_all(&cfg.out_dir);
            let _ = std::fs::write(&diag, format!("{e}\n"));
            ExitCode::from(1)
        }
    }
}
