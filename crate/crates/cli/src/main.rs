use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use repqed_cli::config::{parse_config, Command, SweepConfig};
use repqed_cli::figures::Figure;
use repqed_cli::output::{config_hash, write_table};
use repqed_cli::sweeps::run_sweep;
use repqed_cli::verify::{run_verify, VerifyProfile};
use repqed_cli::CliError;

#[derive(Parser)]
#[command(name = "repqed", version, about = "Fidelity sweeps for repetitive-code error detection under energy relaxation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Sweep configuration (key = value lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path; standard output if omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed for sampled averages
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Closed-form fidelities against p
    Analytic(Common),
    /// Brute-force scenario fidelities against p
    Nqubit(Common),
    /// Repeated detection cycles with pi-pulses
    Multicycle(Common),
    /// Two-qubit protocol against the error rotation angle
    Protocol(Common),
    /// Ancilla-rotated protocol against storage relaxation
    Storage(Common),
    /// Cross-check every engine; exits 1 on any failure
    Verify(Common),
    /// One of the built-in figure sweeps
    Figure {
        /// fig2, fig3a, fig3b, fig5, fig6 or fig8
        id: String,
        #[command(flatten)]
        common: Common,
    },
}

fn load(path: &Path) -> Result<SweepConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn emit(command: Command, cfg: &SweepConfig, common: &Common) -> Result<(), CliError> {
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    cfg.check_for(command)?;
    let seed = common.seed.unwrap_or(0);
    let table = run_sweep(command, cfg, seed)?;
    let hash = config_hash(&format!("{}seed={seed}\n", cfg.canonical(command)));
    match common.out.as_ref().or(cfg.output_path.as_ref()) {
        Some(path) => {
            let file = fs::File::create(path)?;
            let mut w = BufWriter::new(file);
            write_table(&mut w, &table, &hash)?;
            w.flush()?;
            eprintln!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        None => write_table(io::stdout().lock(), &table, &hash)?,
    }
    Ok(())
}

fn verify(common: &Common) -> Result<(), CliError> {
    let cfg = match &common.config {
        Some(p) => load(p)?,
        None => SweepConfig::default(),
    };
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    cfg.check_for(Command::Verify)?;
    let profile = VerifyProfile::from_config(&cfg, common.seed)?;
    let report = run_verify(&profile);
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let note = if c.note.is_empty() { String::new() } else { format!("  [{}]", c.note) };
        println!("{status}  {:<58} worst {:.3e} (limit {:.1e}){note}", c.name, c.deviation, c.limit);
    }
    match report.worst() {
        None => Ok(()),
        Some(w) => Err(CliError::VerifyFailed(format!("worst deviation {:.3e} in '{}'", w.deviation, w.name))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (command, common, figure) = match cli.command {
        Cmd::Analytic(c) => (Command::Analytic, c, None),
        Cmd::Nqubit(c) => (Command::Nqubit, c, None),
        Cmd::Multicycle(c) => (Command::Multicycle, c, None),
        Cmd::Protocol(c) => (Command::Protocol, c, None),
        Cmd::Storage(c) => (Command::Storage, c, None),
        Cmd::Verify(c) => (Command::Verify, c, None),
        Cmd::Figure { id, common } => {
            let f: Figure = id.parse().map_err(CliError::Usage)?;
            (f.command(), common, Some(f))
        }
    };
    if let Some(n) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?;
    }
    if command == Command::Verify {
        return verify(&common);
    }
    let file_cfg = common.config.as_deref().map(load).transpose()?;
    let cfg = match figure {
        Some(f) => f.config(file_cfg)?,
        None => file_cfg.ok_or_else(|| CliError::Usage(format!("'{command}' needs --config <path>")))?,
    };
    emit(command, &cfg, &common)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
