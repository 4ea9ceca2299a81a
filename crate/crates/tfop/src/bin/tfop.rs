//! Command-line runner for the verification suite and the numerical experiments.
//!
//! Exit codes: 0 all checks pass, 1 configuration error, 2 numerical failure
//! (non-finite values, degenerate phase, unfit discretization), 3 at least one
//! failed check.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tfop::harness::{
    emit_report, exit_code, report_exit_code, run_experiment, to_csv, to_json, Experiment, ExperimentConfig, Format, Report,
    EXIT_CONFIG,
};

#[derive(Parser)]
#[command(name = "tfop", version, about = "Time-frequency operator verification and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration; defaults apply to omitted fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for report files; without it the report goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report format; overrides the configured formats.
    #[arg(long, global = true, value_enum)]
    format: Option<CliFormat>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run every identity and property check.
    Verify,
    /// Operator-norm bound report.
    Bound,
    /// Singular spectra and Schatten norms of a shrinking amplitude family.
    Schatten,
    /// Modulation, amplitude, smoothness and weight norm audits.
    Norms,
    /// Run whichever experiment the configuration names.
    Report,
}

#[derive(ValueEnum, Clone, Copy)]
enum CliFormat {
    Json,
    Csv,
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("TFOP_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().map_err(|_| format!("TFOP_THREADS: expected a positive integer, got {raw:?}"))?;
    if n == 0 {
        return Err("TFOP_THREADS: must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| format!("TFOP_THREADS: {e}"))
}

fn load_config(cli: &Cli) -> tfop::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    match cli.command {
        Command::Verify => cfg.experiment = Experiment::IdentitySuite,
        Command::Bound => cfg.experiment = Experiment::Bound,
        Command::Schatten => cfg.experiment = Experiment::SchattenDecay,
        Command::Norms => cfg.experiment = Experiment::NormAudits,
        Command::Report => {}
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(f) = cli.format {
        cfg.output.formats = vec![match f {
            CliFormat::Json => Format::Json,
            CliFormat::Csv => Format::Csv,
        }];
    }
    Ok(cfg)
}

fn summarize(report: &Report, sink: &mut dyn Write) {
    for r in &report.records {
        let _ = writeln!(
            sink,
            "{} {}: value {:.3e}, tolerance {:.1e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.value,
            r.tolerance
        );
    }
    let failed = report.failures().len();
    let _ = writeln!(sink, "{} checks, {} failed", report.records.len(), failed);
}

fn run(cli: &Cli) -> tfop::Result<i32> {
    let cfg = load_config(cli)?;
    let report = run_experiment(&cfg)?;
    let dir = cli.out.clone().or_else(|| cfg.output.directory.clone());
    match dir {
        Some(dir) => {
            for path in emit_report(&report, &dir, &cfg.output.formats)? {
                eprintln!("wrote {}", path.display());
            }
            summarize(&report, &mut std::io::stdout());
        }
        None => {
            let mut out = std::io::stdout();
            for f in &cfg.output.formats {
                let body = match f {
                    Format::Json => to_json(&report)?,
                    Format::Csv => to_csv(&report)?,
                };
                out.write_all(body.as_bytes())?;
            }
            summarize(&report, &mut std::io::stderr());
        }
    }
    Ok(report_exit_code(&report))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    let code = run(&cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    });
    ExitCode::from(code as u8)
}
