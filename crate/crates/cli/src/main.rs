//! `fraccomp <command> --spec <file> [--out <path>] [--seed N] [--threads N]`

mod job;
mod output;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use job::Command;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Validation(_) => 2,
            Self::Numerical(_) => 3,
            Self::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fraccomp", version = env!("FRACCOMP_GIT_DESCRIBE"), about = "Fractional kernels, solvers and limit checks")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML job file.
    #[arg(long)]
    spec: PathBuf,
    /// Output path; jobs with several tables insert a suffix before the extension.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed of stochastic jobs.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "FRACCOMP_THREADS")]
    threads: Option<usize>,
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(e) => format!("{stem}-{suffix}.{}", e.to_string_lossy()),
        None => format!("{stem}-{suffix}"),
    };
    path.with_file_name(name)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Io(e.to_string()))?;
    }
    let name = cli.spec.display().to_string();
    let text = std::fs::read_to_string(&cli.spec).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
    let loaded = job::load(cli.command, &name, &text, cli.seed)?;
    let outcome = run::execute(cli.command, &loaded.job)?;
    for a in &outcome.artifacts {
        let body = a.table.render(loaded.format);
        match (&cli.out, a.suffix) {
            (Some(p), Some(s)) => write(&suffixed(p, s), &body)?,
            (Some(p), None) => write(p, &body)?,
            (None, _) => print!("{body}"),
        }
    }
    for line in &outcome.summary {
        if cli.out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
    Ok(())
}

fn write(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
