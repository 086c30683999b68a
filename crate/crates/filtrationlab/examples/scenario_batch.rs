//! Runs the bundled scenario corpus through the batch runner exactly as the
//! command-line binary would, then prints the summary table it wrote.

use filtrationlab::runner::{run, OutputFormat, RunConfig, Suite};
use std::path::PathBuf;

fn main() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let out = std::env::temp_dir().join("filtrationlab_batch_demo");
    let config = RunConfig {
        scenarios: root.join("scenarios/reference.json"),
        suite: Suite::All,
        tol: filtrationlab::TOL_MARTINGALE,
        seed: 0,
        out: out.clone(),
        format: OutputFormat::Json,
        jobs: 2,
    };
    let code = run(&config);
    println!("exit code {code}");
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    print!("{summary}");
}
