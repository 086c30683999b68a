use clap::Parser;
use filtrationlab::runner::{run, OutputFormat, RunConfig, Suite, EXIT_IO};
use std::path::PathBuf;

/// Batch verifier for finite filtered spaces: Doob-Meyer decompositions of
/// the survival process, invariance-measure verdicts, and reduced BSDE
/// transfer, all against declared expectations.
#[derive(Parser)]
#[command(name = "filtrationlab", version)]
struct Cli {
    /// JSON file with an array of scenario descriptors.
    #[arg(long)]
    scenarios: PathBuf,

    /// Which check sections to run: azema, invariance, bsde, or all.
    #[arg(long, default_value = "all", value_parser = parse_suite)]
    suite: Suite,

    /// Residual tolerance; defaults to FILTRATIONLAB_TOL or 1e-9.
    #[arg(long)]
    tol: Option<f64>,

    /// Offset mixed into every scenario seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output directory for reports and the summary table.
    #[arg(long, default_value = "reports")]
    out: PathBuf,

    /// Report format: json (one file per scenario) or csv (tables).
    #[arg(long, default_value = "json", value_parser = parse_format)]
    format: OutputFormat,

    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::parse(s).ok_or_else(|| format!("unknown suite {s:?}; use azema|invariance|bsde|all"))
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    OutputFormat::parse(s).ok_or_else(|| format!("unknown format {s:?}; use json|csv"))
}

fn resolve_tol(flag: Option<f64>) -> Result<f64, String> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var("FILTRATIONLAB_TOL") {
        Ok(text) => text
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("FILTRATIONLAB_TOL={text:?} is not a number")),
        Err(_) => Ok(filtrationlab::TOL_MARTINGALE),
    }
}

fn main() {
    let cli = Cli::parse();
    let tol = match resolve_tol(cli.tol) {
        Ok(t) if t > 0.0 => t,
        Ok(t) => {
            eprintln!("error: tolerance must be positive, got {t}");
            std::process::exit(EXIT_IO);
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(EXIT_IO);
        }
    };
    let config = RunConfig {
        scenarios: cli.scenarios,
        suite: cli.suite,
        tol,
        seed: cli.seed,
        out: cli.out,
        format: cli.format,
        jobs: cli.jobs,
    };
    std::process::exit(run(&config));
}
