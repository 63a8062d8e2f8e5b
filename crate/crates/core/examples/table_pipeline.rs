//! End-to-end run of a config through simulation, fitting and the summary
//! table, as the `pipeline` command does.
//!
//! cargo run --release --example table_pipeline -- [config.toml] [out_dir]

use std::path::PathBuf;

use plasmon_decoherence::cli::{render_table, run_pipeline, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let config_path: PathBuf = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/reference.toml").into());
    let out: PathBuf = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("plasmon-run"));

    let config = ExperimentConfig::load(&config_path)?;
    let record = run_pipeline(&config, None, &out)?;
    let summaries: Vec<_> = [&record.classical, &record.quantum].into_iter().flatten().map(|r| r.summary).collect();
    print!("{}", render_table(&summaries));
    for r in [&record.classical, &record.quantum].into_iter().flatten() {
        let slope = r.slope_per_um();
        println!(
            "{}: L = {:.3} um  slope = {:.4} +/- {:.4} 1/um  intercept = {:.3}",
            r.regime,
            r.decay.propagation_length.value * 1e6,
            slope.value,
            slope.std,
            r.line.intercept
        );
    }
    println!("overlap = {:.5}  g2 = {:.4}", record.dispersion.overlap, record.g2.g2);
    println!("report written to {}", out.display());
    Ok(())
}
