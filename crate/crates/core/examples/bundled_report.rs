//! Runs the full pipeline on the bundled tables and writes every artifact.
//!
//! `cargo run -p formsense-core --example bundled_report -- [out_dir]`

use std::path::PathBuf;

use formsense_core::pipeline::{run_pipeline, write_artifacts, PipelineInputs, PipelineOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "report".into()));
    let (report, artifacts) = run_pipeline(&PipelineInputs::bundled(), &PipelineOptions::default())?;
    write_artifacts(&dir, &artifacts)?;
    println!("{}", report.to_json());
    Ok(())
}
