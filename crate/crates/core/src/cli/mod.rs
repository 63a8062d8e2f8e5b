//! Command-line front end.
//!
//! ```text
//! plasmon-decoherence simulate --config exp.toml --kind all --out run/
//! plasmon-decoherence fit      --config exp.toml --out run/
//! plasmon-decoherence pipeline --config exp.toml --seed 7 --regime quantum
//! plasmon-decoherence report   run/report.json
//! ```
//!
//! Exit codes: 0 success, 1 a pipeline check failed, 2 invalid config or
//! arguments, 3 fit failure, 4 I/O or parse error.

mod commands;
mod config;
pub mod json;
mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    analyze_regime, dispersion_check, output_dir, run_fit, run_pipeline, run_simulate, Check, FitResults, G2Result,
    Manifest, ManifestEntry, RegimeResult, ReportRecord, ScanKind, WaveguideResult, G2_FILE, MANIFEST_FILE,
    REPORT_FILE, RESULTS_FILE,
};
pub use config::{
    DispersionConfig, Expectations, ExperimentConfig, G2Config, OutputConfig, RegimeConfig, StageConfig,
};
pub use report::{load_summaries, render_table, run_report, ROWS};

use crate::error::Result;
use crate::simkit::Regime;

#[derive(Debug, Parser)]
#[command(name = "plasmon-decoherence", version, about = "Simulate and analyze plasmonic decoherence experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Restrict to one regime.
    #[arg(long)]
    pub regime: Option<Regime>,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if self.seed.is_some() {
            config.seed = self.seed;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write simulated scans and a manifest.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        kind: ScanKind,
    },
    /// Fit the scans listed in the output directory's manifest.
    Fit {
        #[command(flatten)]
        common: Common,
    },
    /// Simulate, fit and check against the configured expectations.
    Pipeline {
        #[command(flatten)]
        common: Common,
    },
    /// Print the summary table of one or more result files.
    Report {
        files: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

/// What a command printed and whether its checks passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub pass: bool,
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Simulate { common, kind } => {
            let config = common.load()?;
            let out = output_dir(&config, common.out.as_deref());
            let manifest = run_simulate(&config, kind, common.regime, &out)?;
            Ok(Outcome { stdout: json::to_string(&manifest), pass: true })
        }
        Command::Fit { common } => {
            let config = common.load()?;
            let out = output_dir(&config, common.out.as_deref());
            let results = run_fit(&config, common.regime, &out)?;
            let stdout = if common.json {
                json::to_string(&results)
            } else {
                let summaries: Vec<_> = [&results.classical, &results.quantum]
                    .into_iter()
                    .flatten()
                    .map(|r| r.summary)
                    .collect();
                render_table(&summaries)
            };
            Ok(Outcome { stdout, pass: true })
        }
        Command::Pipeline { common } => {
            let config = common.load()?;
            let out = output_dir(&config, common.out.as_deref());
            let record = run_pipeline(&config, common.regime, &out)?;
            let stdout = if common.json {
                json::to_string(&record)
            } else {
                let summaries: Vec<_> = [&record.classical, &record.quantum]
                    .into_iter()
                    .flatten()
                    .map(|r| r.summary)
                    .collect();
                let mut text = render_table(&summaries);
                for c in &record.checks {
                    let regime = c.regime.map(|r| format!(" [{r}]")).unwrap_or_default();
                    text.push_str(&format!(
                        "{} {}{}: {:.4e} (target {:.4e}, tolerance {:.2e})\n",
                        if c.pass { "PASS" } else { "FAIL" },
                        c.name,
                        regime,
                        c.value,
                        c.target,
                        c.tolerance
                    ));
                }
                text
            };
            Ok(Outcome { stdout, pass: record.pass })
        }
        Command::Report { files, json: as_json } => {
            let stdout = if as_json {
                json::to_string(&load_summaries(&files)?)
            } else {
                run_report(&files)?
            };
            Ok(Outcome { stdout, pass: true })
        }
    }
}
