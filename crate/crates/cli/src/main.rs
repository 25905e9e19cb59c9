use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qidle::stats::Tail;
use qidle_cli::report::{analyze_archive, load_report, render};
use qidle_cli::run::{run_config_file, RunOptions};
use qidle_cli::{ingest, CliResult};

#[derive(Parser)]
#[command(name = "qidle", version, about = "Idle information leakage campaigns and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the campaign described by a TOML config and write an archive.
    Run {
        config: PathBuf,
        /// Archive directory (default: config file name with `.archive`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace an existing archive.
        #[arg(long)]
        force: bool,
        #[arg(long, short)]
        quiet: bool,
    },
    /// Recompute report.json, fits.csv and histograms from samples.csv.
    Analyze {
        archive: PathBuf,
        #[arg(long = "filter-k")]
        filter_k: Option<f64>,
        #[arg(long, value_enum)]
        tail: Option<TailArg>,
    },
    /// Build an archive from shot-dictionary JSON files.
    Ingest {
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Print the report of an archive.
    Report { archive: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum TailArg {
    Normal,
    StudentT,
}

fn default_out(input: &Path) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "qidle".into());
    input.with_file_name(format!("{stem}.archive"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Run { config, out, force, quiet } => {
            let out = out.unwrap_or_else(|| default_out(&config));
            let summary = run_config_file(&config, &out, &RunOptions { force, progress: !quiet })?;
            eprintln!("wrote {} samples to {}", summary.n_samples, summary.archive.display());
        }
        Command::Analyze { archive, filter_k, tail } => {
            let tail = tail.map(|t| match t {
                TailArg::Normal => Tail::Normal,
                TailArg::StudentT => Tail::StudentT,
            });
            let report = analyze_archive(&archive, filter_k, tail)?;
            print!("{}", render(&report));
        }
        Command::Ingest { dir, out, force } => {
            let out = out.unwrap_or_else(|| {
                let name = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "ingest".into());
                dir.with_file_name(format!("{name}.archive"))
            });
            let s = ingest::ingest(&dir, &out, force)?;
            eprintln!(
                "ingested {} files into {} samples at {} ({} errors, {} unpaired)",
                s.manifest.ingested.len(),
                s.manifest.n_samples,
                s.archive.display(),
                s.manifest.errors.len(),
                s.manifest.unpaired.len()
            );
        }
        Command::Report { archive } => print!("{}", render(&load_report(&archive)?)),
    }
    Ok(())
}
