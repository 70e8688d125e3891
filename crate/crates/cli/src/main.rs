//! `qthermo`: run a thermometry experiment described by a flat config file.
//!
//! Data go to `--out` (CSV or JSON); the JSON summary goes to stdout. Failures print a
//! JSON error to stderr and exit with 2 (config), 3 (computation) or 4 (I/O).

mod config;
mod error;
mod experiments;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use config::Config;
use error::CliError;
use output::{render, write_atomic, Format};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "qthermo", version, about = "Quantum thermometry experiments")]
struct Cli {
    /// Experiment to run.
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(experiments::EXPERIMENTS))]
    experiment: String,
    /// Flat key = value configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output path; overrides the `out` key.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; overrides the `format` key.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Quadrature tolerance; overrides `quad_tol`.
    #[arg(long)]
    tol: Option<f64>,
    /// Allow configs marked `slow = true`.
    #[arg(long)]
    slow: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config(e.kind().to_string() + ": " + e.to_string().lines().next().unwrap_or(""));
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let start = Instant::now();
    let cfg = Config::from_path(&cli.config)?;
    if let Some(name) = cfg.opt_str("experiment")? {
        if name != cli.experiment {
            return Err(CliError::Config(format!(
                "config is for experiment `{name}`, not `{}`",
                cli.experiment
            )));
        }
    }
    if cfg.bool_or("slow", false)? && !cli.slow {
        return Err(CliError::Config("this config is marked slow; pass --slow to run it".into()));
    }
    let out = match (&cli.out, cfg.opt_str("out")?) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => return Err(CliError::Config("no output path: set `out` or pass --out".into())),
    };
    let format = match (cli.format, cfg.opt_str("format")?) {
        (Some(FormatArg::Csv), _) | (None, Some("csv")) | (None, None) => Format::Csv,
        (Some(FormatArg::Json), _) | (None, Some("json")) => Format::Json,
        (None, Some(other)) => return Err(CliError::Config(format!("unknown format `{other}`"))),
    };
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(CliError::Config(format!("--tol must be positive, got {t}")));
        }
    }

    let outcome = experiments::run(&cli.experiment, &cfg, cli.tol)?;
    let report = outcome.report;
    let summary = report.summary(&cli.experiment, cfg.table(), outcome.tolerances, start.elapsed().as_secs_f64());

    let mut files = vec![(out.clone(), render(&report.table, format, &summary)?)];
    for (suffix, table) in &report.extra {
        files.push((sibling(&out, suffix), render(table, format, &summary)?));
    }
    for (path, bytes) in &files {
        write_atomic(path, bytes)?;
    }
    serde_json::to_string(&summary).map_err(|e| CliError::Io(e.to_string()))
}

/// `dir/name.ext` → `dir/name.suffix.ext`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{suffix}"),
    };
    path.with_file_name(name)
}
