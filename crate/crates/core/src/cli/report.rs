//! Plain-text summary table.
//!
//! Layout: one row per quantity in the order Γ₁, Γ₂*, Γ₂, T₁, T₂*, T₂, one
//! column per regime (classical first). The label column is 14 characters
//! wide and each regime column 26, right-aligned, formatted as
//! `value +/- std` in scientific notation. An infinite `T₂*` prints as `inf`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::commands::RegimeResult;
use super::json;
use crate::error::{Error, Result};
use crate::estimate::{DecoherenceSummary, Measured};
use crate::simkit::Regime;

pub const ROWS: [&str; 6] = ["Gamma1 (1/s)", "Gamma2* (1/s)", "Gamma2 (1/s)", "T1 (s)", "T2* (s)", "T2 (s)"];

const LABEL_WIDTH: usize = 14;
const COLUMN_WIDTH: usize = 26;

/// The regime sections shared by `results.json` and `report.json`.
#[derive(Debug, Deserialize)]
struct RegimeSections {
    classical: Option<RegimeResult>,
    quantum: Option<RegimeResult>,
}

/// Reads result files; a regime appearing in several files takes the last one.
pub fn load_summaries(paths: &[impl AsRef<Path>]) -> Result<Vec<DecoherenceSummary>> {
    let mut classical = None;
    let mut quantum = None;
    for path in paths {
        let sections: RegimeSections = json::read_file(path.as_ref())?;
        if sections.classical.is_none() && sections.quantum.is_none() {
            return Err(Error::Parse {
                path: path.as_ref().into(),
                line: 0,
                message: "no `classical` or `quantum` results".into(),
            });
        }
        classical = sections.classical.map(|r| r.summary).or(classical);
        quantum = sections.quantum.map(|r| r.summary).or(quantum);
    }
    Ok(classical.into_iter().chain(quantum).collect())
}

fn cell(m: Measured) -> String {
    if m.value.is_infinite() {
        "inf".into()
    } else {
        format!("{:.3e} +/- {:.1e}", m.value, m.std)
    }
}

pub fn render_table(summaries: &[DecoherenceSummary]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<LABEL_WIDTH$}", "quantity");
    for s in summaries {
        let name = s.regime.as_ref().map(Regime::as_str).unwrap_or("-");
        let _ = write!(out, "{name:>COLUMN_WIDTH$}");
    }
    out.push('\n');
    for (i, label) in ROWS.iter().enumerate() {
        let _ = write!(out, "{label:<LABEL_WIDTH$}");
        for s in summaries {
            let m = [s.gamma1, s.gamma2_star, s.gamma2, s.t1, s.t2_star, s.t2][i];
            let _ = write!(out, "{:>COLUMN_WIDTH$}", cell(m));
        }
        out.push('\n');
    }
    out
}

pub fn run_report(paths: &[impl AsRef<Path>]) -> Result<String> {
    if paths.is_empty() {
        return Err(Error::validation("files", "report needs at least one result file"));
    }
    Ok(render_table(&load_summaries(paths)?))
}
