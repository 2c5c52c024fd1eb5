//! `photon-tails` command line: simulate pulse trains, analyze them and
//! regenerate the published tables.
//!
//! Exit codes: 0 success, 2 validation, 3 data format or I/O, 4 numeric
//! range. Errors go to stderr as one JSON line each.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod analyze;
mod config;
mod reproduce;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use photon_tails::io::{load, save, to_json, TrainFormat};
use photon_tails::{Error, Result};
use serde_json::json;

use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(
    name = "photon-tails",
    version,
    about = "Photon-number statistics of strongly fluctuating light"
)]
struct Cli {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a pulse train from a run config and write it to disk.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `master_seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to the output extension: .pstn/.bin binary, .csv CSV, else NDJSON.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run the config's analyses on a saved train and write an NDJSON report.
    Analyze {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate a published table from the shipped pipelines.
    Reproduce {
        /// table1, table2 or fig8
        table: String,
        #[arg(long)]
        out: PathBuf,
        /// Overrides every row's pulse count (for quick runs).
        #[arg(long)]
        pulses: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Ndjson,
    Binary,
    Csv,
}

impl From<Format> for TrainFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Ndjson => TrainFormat::Ndjson,
            Format::Binary => TrainFormat::Binary,
            Format::Csv => TrainFormat::Csv,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Format(_) | Error::Io(_) => 3,
        Error::Range(_) | Error::Resolution { .. } => 4,
        _ => 2,
    }
}

fn report_error(kind: &str, message: &str, code: u8) -> ExitCode {
    let line = json!({ "error": kind, "message": message, "exit_code": code });
    eprintln!("{line}");
    ExitCode::from(code)
}

fn simulate(config: &Path, out: &Path, seed: Option<u64>, format: Option<Format>) -> Result<()> {
    let config = RunConfig::load(config, seed)?;
    let train = config.run()?;
    let format = format
        .map(TrainFormat::from)
        .unwrap_or_else(|| TrainFormat::from_path(out));
    let tmp = tmp_path(out);
    if let Err(e) = save(&train, &tmp, format).and_then(|()| Ok(std::fs::rename(&tmp, out)?)) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e);
    }
    println!("{}", to_json(&train.summary())?);
    Ok(())
}

fn tmp_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".tmp");
    PathBuf::from(s)
}

fn analyze(train: &Path, config: &Path, out: &Path) -> Result<()> {
    let config = RunConfig::load(config, None)?;
    let train = load(train)?;
    let report = analyze::build_report(&train, &config)?;
    analyze::write_report(&report, out)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            format,
        } => simulate(&config, &out, seed, format),
        Command::Analyze { train, config, out } => analyze(&train, &config, &out),
        Command::Reproduce { table, out, pulses } => {
            print!("{}", reproduce::reproduce(&table, &out, pulses)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            return report_error("usage", message.trim(), 2);
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::invalid("threads", "must be >= 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid("threads", e.to_string()))
            .and_then(|pool| pool.install(|| run(cli))),
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report_error(e.kind(), &e.to_string(), exit_code(&e)),
    }
}
