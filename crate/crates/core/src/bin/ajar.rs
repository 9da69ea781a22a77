use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use ajar_core::lab::{self, parse_center, parse_config_text, parse_list, Command, ExitStatus, ExperimentConfig, Overrides};
use ajar_core::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    VerifyIdentities,
    Table1,
    Hjminus,
    Sweep,
}

/// Almost-Hermitian experiments on the flat 4-torus.
#[derive(Debug, Parser)]
#[command(name = "ajar", version)]
struct Cli {
    command: Cmd,
    /// `key = value` config file with optional [sections]
    #[arg(long)]
    config: Option<PathBuf>,
    /// standard | example | tk | localized | limit
    #[arg(long)]
    structure: Option<String>,
    /// grid sizes, comma separated
    #[arg(long)]
    n: Option<String>,
    /// tk parameters, comma separated
    #[arg(long)]
    k: Option<String>,
    /// number of eigenpairs
    #[arg(long)]
    eigs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    r_inner: Option<f64>,
    #[arg(long)]
    r_outer: Option<f64>,
    /// cutoff center, four comma separated coordinates
    #[arg(long)]
    center: Option<String>,
    /// JSON output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV output path for sweeps
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, hide = true)]
    fault: Option<String>,
}

fn overrides(cli: &Cli) -> ajar_core::Result<Overrides> {
    let command = match cli.command {
        Cmd::VerifyIdentities => Command::VerifyIdentities,
        Cmd::Table1 => Command::Table1,
        Cmd::Hjminus => Command::Hjminus,
        Cmd::Sweep => Command::Sweep,
    };
    Ok(Overrides {
        command: Some(command),
        structure: cli.structure.clone(),
        n: cli.n.as_deref().map(|v| parse_list("n", v)).transpose()?,
        k: cli.k.as_deref().map(|v| parse_list("k", v)).transpose()?,
        eigs: cli.eigs,
        seed: cli.seed,
        r_inner: cli.r_inner,
        r_outer: cli.r_outer,
        center: cli.center.as_deref().map(parse_center).transpose()?,
        out: cli.out.as_ref().map(|p| p.display().to_string()),
        csv: cli.csv.as_ref().map(|p| p.display().to_string()),
        fault: cli.fault.clone(),
        ..Overrides::default()
    })
}

fn resolve(cli: &Cli) -> ajar_core::Result<ExperimentConfig> {
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            parse_config_text(&text)?
        }
        None => Overrides::default(),
    };
    ExperimentConfig::resolve(file.layered(overrides(cli)?))
}

fn configure_threads() -> ajar_core::Result<()> {
    let Ok(v) = std::env::var("AJAR_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::Config(format!("AJAR_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

fn write_file(path: &str, contents: &str) -> ajar_core::Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Config(format!("cannot write {path}: {e}")))
}

fn exit(status: ExitStatus) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match configure_threads().and_then(|_| resolve(&cli)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ajar: {e}");
            return exit(ExitStatus::ConfigError);
        }
    };
    let outcome = match lab::run(&config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("ajar: {e}");
            return exit(ExitStatus::for_error(&e));
        }
    };
    let json = outcome.document.to_json();
    let written = match &config.out {
        Some(path) => write_file(path, &json),
        None => {
            println!("{json}");
            Ok(())
        }
    };
    let written = written.and_then(|_| match (&config.csv, &outcome.csv) {
        (Some(path), Some(csv)) => write_file(path, csv),
        (None, Some(csv)) if config.out.is_some() => {
            print!("{csv}");
            Ok(())
        }
        _ => Ok(()),
    });
    if let Err(e) = written {
        eprintln!("ajar: {e}");
        return exit(ExitStatus::ConfigError);
    }
    for f in &outcome.document.flags {
        eprintln!("ajar: {f}");
    }
    exit(outcome.status)
}
