//! Batch execution over a descriptor file: evaluate every scenario on a
//! small worker pool, write one report per scenario plus a summary table,
//! and fold the results into a process exit code.

use crate::error::{Error, Result};
use crate::report::{evaluate, Outcome, Sections};
use crate::scenarios::{generate_with_seed, load_descriptors};
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
/// A verdict disagreed with its prediction or a residual exceeded the
/// tolerance.
pub const EXIT_MISMATCH: i32 = 1;
/// Unreadable input, malformed descriptors, or output that could not be
/// written.
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Azema,
    Invariance,
    Bsde,
    All,
}

impl Suite {
    pub fn sections(self) -> Sections {
        match self {
            Suite::Azema => Sections { azema: true, invariance: false, bsde: false },
            Suite::Invariance => Sections { azema: false, invariance: true, bsde: false },
            Suite::Bsde => Sections { azema: false, invariance: false, bsde: true },
            Suite::All => Sections { azema: true, invariance: true, bsde: true },
        }
    }

    pub fn parse(name: &str) -> Option<Suite> {
        match name {
            "azema" => Some(Suite::Azema),
            "invariance" => Some(Suite::Invariance),
            "bsde" => Some(Suite::Bsde),
            "all" => Some(Suite::All),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn parse(name: &str) -> Option<OutputFormat> {
        match name {
            "json" => Some(OutputFormat::Json),
            "csv" => Some(OutputFormat::Csv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenarios: PathBuf,
    pub suite: Suite,
    pub tol: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub jobs: usize,
}

#[derive(Debug, serde::Serialize)]
struct SummaryRow {
    scenario_id: String,
    verdict: String,
    expected: String,
    max_residual: f64,
    wall_ms: u128,
}

fn sanitize_id(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' || c == '_' { c } else { '_' })
        .collect()
}

/// Flattens the scalar leaves of a report into sorted `key,value` rows;
/// per-(t, atom) arrays go to their own tables instead.
fn scalar_rows(value: &serde_json::Value, prefix: &str, rows: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                scalar_rows(v, &key, rows);
            }
        }
        serde_json::Value::Array(_) => {}
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn write_csv_report(dir: &std::path::Path, stem: &str, outcome: &Outcome) -> Result<()> {
    let report = &outcome.report;
    if let Some(az) = &report.azema {
        let mut w = csv::Writer::from_path(dir.join(format!("{stem}_azema.csv")))?;
        w.write_record([
            "t", "atom", "s", "s_pred", "mart", "comp", "hit_dual", "intensity", "mart_factor",
        ])?;
        for t in 0..az.s.len() {
            for a in 0..az.s[t].len() {
                w.write_record([
                    t.to_string(),
                    a.to_string(),
                    az.s[t][a].to_string(),
                    az.s_pred[t][a].to_string(),
                    az.mart[t][a].to_string(),
                    az.comp[t][a].to_string(),
                    az.hit_dual[t][a].to_string(),
                    az.intensity[t][a].to_string(),
                    az.mart_factor[t][a].to_string(),
                ])?;
            }
        }
        w.flush()?;
    }
    let mut rows = Vec::new();
    scalar_rows(&serde_json::to_value(report)?, "", &mut rows);
    let mut w = csv::Writer::from_path(dir.join(format!("{stem}_scalars.csv")))?;
    w.write_record(["field", "value"])?;
    for (k, v) in rows {
        w.write_record([k, v])?;
    }
    w.flush()?;
    Ok(())
}

fn write_outputs(config: &RunConfig, outcomes: &[(Outcome, u128)]) -> Result<(usize, usize)> {
    std::fs::create_dir_all(&config.out)?;
    let mut summary = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(config.out.join("summary.csv"))?;
    summary.write_record(["scenario_id", "verdict", "expected", "max_residual", "wall_ms"])?;
    let mut mismatches = 0usize;
    let mut over_tol = 0usize;
    for (outcome, wall_ms) in outcomes {
        let report = &outcome.report;
        let stem = sanitize_id(&report.scenario_id);
        match config.format {
            OutputFormat::Json => {
                let mut text = serde_json::to_string_pretty(report)?;
                text.push('\n');
                let mut f = std::fs::File::create(config.out.join(format!("{stem}.json")))?;
                f.write_all(text.as_bytes())?;
            }
            OutputFormat::Csv => write_csv_report(&config.out, &stem, outcome)?,
        }
        if let Some(table) = &outcome.bsde_table {
            let mut w = csv::Writer::from_path(config.out.join(format!("{stem}_bsde.csv")))?;
            for row in table {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        if report.verdict != report.expected {
            eprintln!(
                "verdict mismatch: scenario {} produced {:?}, predicted {:?}",
                report.scenario_id, report.verdict, report.expected
            );
            mismatches += 1;
        }
        if report.max_residual > config.tol {
            eprintln!(
                "residual over tolerance: scenario {} max residual {:.3e} > {:.3e}",
                report.scenario_id, report.max_residual, config.tol
            );
            over_tol += 1;
        }
        summary.serialize(SummaryRow {
            scenario_id: report.scenario_id.clone(),
            verdict: report.verdict.clone(),
            expected: report.expected.clone(),
            max_residual: report.max_residual,
            wall_ms: *wall_ms,
        })?;
    }
    summary.flush()?;
    Ok((mismatches, over_tol))
}

fn run_inner(config: &RunConfig) -> Result<i32> {
    let descriptors = load_descriptors(&config.scenarios)?;
    let jobs = config.jobs.max(1).min(descriptors.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<(Outcome, u128)>>>> =
        Mutex::new((0..descriptors.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= descriptors.len() {
                    break;
                }
                let started = Instant::now();
                let result = generate_with_seed(&descriptors[i], config.seed).and_then(|sc| {
                    evaluate(&sc, config.suite.sections(), config.tol)
                        .map(|out| (out, started.elapsed().as_millis()))
                });
                slots.lock().unwrap()[i] = Some(result);
            });
        }
    });

    let mut outcomes = Vec::with_capacity(descriptors.len());
    for (descriptor, slot) in descriptors.iter().zip(slots.into_inner().unwrap()) {
        match slot.expect("worker filled every slot") {
            Ok(pair) => outcomes.push(pair),
            Err(e) => {
                return Err(Error::InvalidParameter(format!(
                    "scenario {}: {e}",
                    descriptor.id
                )))
            }
        }
    }

    let (mismatches, over_tol) = write_outputs(config, &outcomes)?;
    if mismatches > 0 || over_tol > 0 {
        Ok(EXIT_MISMATCH)
    } else {
        Ok(EXIT_OK)
    }
}

/// Runs a whole descriptor file and maps every failure mode to the
/// documented exit codes.
pub fn run(config: &RunConfig) -> i32 {
    match run_inner(config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_IO
        }
    }
}
