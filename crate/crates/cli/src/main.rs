//! `srt`: secrecy-reliability tradeoff calculator and experiment runner.
//!
//! Exit status is 0 on success, 1 on a configuration or domain error (one
//! JSON line on stderr) and 2 when `verify` finds a failing check.

mod commands;
mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use srt_core::experiments::output::{write_table, OutputFormat, TableRow};

use config::{OneOrMany, Settings};

/// Environment variable naming the directory for relative `--out` paths.
pub const OUT_DIR_ENV: &str = "SRT_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "srt",
    version,
    about = "Security-reliability tradeoff of direct transmission and relay selection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Direct transmission: intercept/outage pair or one given the other.
    DtSrt(Flags),
    /// Relay selection by exact subset enumeration (up to 20 relays).
    OrsExact(Flags),
    /// Relay selection with i.i.d. links, closed forms.
    OrsIid(Flags),
    /// Solve for one probability given a constraint on the other (i.i.d. links).
    Solve(Flags),
    /// Monte Carlo estimate with confidence intervals.
    Mc(Flags),
    /// Parameter sweep producing figure data and trend checks.
    Sweep(Flags),
    /// Cross-engine verification suite.
    Verify(Flags),
}

#[derive(Debug, Clone, Default, Args)]
struct Flags {
    /// Flat JSON configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Data rate in bit/s/Hz.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Main-to-eavesdropper ratio (linear).
    #[arg(long)]
    mer: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mer_db: Option<f64>,
    /// Relay count, or a comma-separated list where several are accepted.
    #[arg(long, value_delimiter = ',')]
    n_relays: Option<Vec<usize>>,
    /// JSON file with sigma_sd2, sigma_se2, sigma_si2, sigma_id2, sigma_ie2.
    #[arg(long)]
    gains_file: Option<PathBuf>,
    /// Two-slot decoding threshold; replaces the rate/SNR route.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    p_int: Option<f64>,
    #[arg(long)]
    p_out: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    grid_min: Option<f64>,
    #[arg(long)]
    grid_max: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    /// Sweep kind: srt-curve, outage-vs-n or intercept-vs-n.
    #[arg(long)]
    kind: Option<String>,
    /// Comma-separated sweep engines: analytic_general, analytic_iid, asymptotic, mc.
    #[arg(long, value_delimiter = ',')]
    engines: Option<Vec<String>>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Relative perturbation of one gain on the second route of each check.
    #[arg(long)]
    inject_fault: Option<f64>,
}

impl Flags {
    fn settings(&self) -> Settings {
        Settings {
            rate: self.rate,
            snr: self.snr,
            snr_db: self.snr_db,
            mer: self.mer,
            mer_db: self.mer_db,
            n_relays: self.n_relays.clone().map(OneOrMany::Many),
            gains_file: self.gains_file.clone(),
            delta: self.delta,
            p_int: self.p_int,
            p_out: self.p_out,
            trials: self.trials,
            seed: self.seed,
            workers: self.workers,
            grid_min: self.grid_min,
            grid_max: self.grid_max,
            grid_points: self.grid_points,
            kind: self.kind.clone(),
            engines: self.engines.clone(),
            out: self.out.clone(),
            format: self.format.clone(),
            inject_fault: self.inject_fault,
            ..Settings::default()
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("missing required keys: {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("{0}")]
    Core(#[from] srt_core::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Missing(_) => "missing",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e {
                srt_core::Error::Domain(_) => "domain",
                srt_core::Error::Capacity { .. } => "capacity",
                srt_core::Error::Infeasible(_) => "infeasible",
                srt_core::Error::Numerical(_) => "numerical",
                srt_core::Error::Output(_) => "output",
            },
        }
    }

    fn line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            message: String,
        }
        serde_json::to_string(&Line {
            error: self.kind(),
            message: self.to_string(),
        })
        .expect("error line serializes")
    }
}

/// Where and how the artifact is written.
pub struct Sink {
    path: Option<PathBuf>,
    format: OutputFormat,
}

impl Sink {
    fn from_settings(s: &Settings) -> Result<Sink, CliError> {
        let path = s.out.as_ref().map(|p| match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if p.is_relative() => PathBuf::from(dir).join(p),
            _ => p.clone(),
        });
        let format = match (&s.format, &path) {
            (Some(f), _) => f.parse()?,
            (None, Some(p)) if p.extension().is_some_and(|e| e == "json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        };
        Ok(Sink { path, format })
    }

    fn is_file(&self) -> bool {
        self.path.is_some()
    }

    fn write<R: TableRow>(&self, rows: &[R]) -> Result<(), CliError> {
        match &self.path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)
                        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                }
                let f =
                    File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                write_table(rows, self.format, BufWriter::new(f))?;
                eprintln!("wrote {} rows to {}", rows.len(), p.display());
            }
            None => write_table(rows, self.format, io::stdout().lock())?,
        }
        Ok(())
    }

    /// Companion artifact next to the main one (`<stem>.<suffix>.<ext>`), or
    /// standard error when writing to standard output.
    fn write_companion<R: TableRow>(&self, suffix: &str, rows: &[R]) -> Result<(), CliError> {
        match &self.path {
            Some(p) => {
                let ext = match self.format {
                    OutputFormat::Csv => "csv",
                    OutputFormat::Json => "json",
                };
                let stem = p.file_stem().unwrap_or_default().to_string_lossy();
                let side = Sink {
                    path: Some(p.with_file_name(format!("{stem}.{suffix}.{ext}"))),
                    format: self.format,
                };
                side.write(rows)
            }
            None => {
                let mut err = io::stderr().lock();
                write_table(rows, self.format, &mut err)?;
                err.flush().map_err(|e| CliError::Io(e.to_string()))
            }
        }
    }
}

fn run(command: Command) -> Result<bool, CliError> {
    let (name, flags) = match &command {
        Command::DtSrt(f) => ("dt-srt", f),
        Command::OrsExact(f) => ("ors-exact", f),
        Command::OrsIid(f) => ("ors-iid", f),
        Command::Solve(f) => ("solve", f),
        Command::Mc(f) => ("mc", f),
        Command::Sweep(f) => ("sweep", f),
        Command::Verify(f) => ("verify", f),
    };
    let file = match &flags.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    file.check_exclusive()?;
    let flag_settings = flags.settings();
    flag_settings.check_exclusive()?;
    let settings = file.overridden_by(flag_settings).with_gains_file()?;
    let sink = Sink::from_settings(&settings)?;
    commands::dispatch(name, &settings, &sink)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            let err = CliError::Config(first.trim_start_matches("error: ").to_string());
            eprintln!("{}", err.line());
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(1)
        }
    }
}
