//! The simulate, fit and pipeline commands and the records they write.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, RegimeConfig};
use super::json;
use crate::dispersion::{angular_frequency, dispersion_overlap, gvd_coefficient, DispersionCheck, DispersionTable};
use crate::error::{Error, Result};
use crate::estimate::{
    fit_exponential_decay, fit_fringe, fit_fringe_windows, fit_gamma_eff_line, monte_carlo_fringe,
    monte_carlo_slope_std, summarize, DecayFit, DecoherenceSummary, FringeFit, LineFit, LinePoint, Measured,
};
use crate::simkit::{
    estimate_g2, simulate_decay_scan, simulate_fringe_scan, simulate_g2_counts, stage_positions, stream_id,
    DecayPoint, DecayScan, FringeKnowns, FringePoint, FringeScan, G2Counts, Regime, WaveguideSpec,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESULTS_FILE: &str = "results.json";
pub const REPORT_FILE: &str = "report.json";
pub const G2_FILE: &str = "g2.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScanKind {
    Decay,
    Fringe,
    G2,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub kind: ScanKind,
    pub regime: Option<Regime>,
    pub length_um: Option<f64>,
}

/// Record of the files a simulation produced and the config that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    fn entries(&self, kind: ScanKind, regime: Option<Regime>) -> impl Iterator<Item = &ManifestEntry> {
        self.files
            .iter()
            .filter(move |e| e.kind == kind && (regime.is_none() || e.regime == regime))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Replaces the placeholder source name in CSV errors with the file path.
fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { path: p, line, message } if p.to_string_lossy().starts_with('<') => {
            Error::Parse { path: path.into(), line, message }
        }
        Error::Io { .. } | Error::Parse { .. } => e,
        other => Error::Parse { path: path.into(), line: 0, message: other.to_string() },
    }
}

fn positions_for(config: &ExperimentConfig) -> Result<Vec<f64>> {
    let geometry = config.stage.geometry()?;
    Ok(stage_positions(&geometry, config.stage.span_periods, config.stage.points))
}

/// Mean fringe counts `fringe_mean_counts` set the input amplitude per waveguide.
fn fringe_amplitude(rc: &RegimeConfig, wg: &WaveguideSpec) -> Result<f64> {
    let (_, model) = rc.fringe_truth()?.model_for(wg)?;
    let base = model.terms()?.base;
    if base <= 0.0 {
        return Err(Error::DegenerateModel(format!("{}: both arms fully damped", wg.label)));
    }
    Ok(rc.fringe_mean_counts / base)
}

fn simulate_regime(
    config: &ExperimentConfig,
    regime: Regime,
    rc: &RegimeConfig,
    kind: ScanKind,
    out: &Path,
) -> Result<Vec<ManifestEntry>> {
    let seed = config.seed();
    let waveguides = rc.waveguides()?;
    let mut entries = Vec::new();
    if matches!(kind, ScanKind::Decay | ScanKind::All) {
        let scan = simulate_decay_scan(
            &rc.channel()?,
            &rc.lengths(),
            rc.decay_rate_cps,
            rc.decay_integration_s,
            regime,
            rc.noise,
            seed,
            stream_id("decay", regime, 0),
        )
        .map_err(|e| e.in_stage(format!("simulate {regime} decay")))?;
        for (wg, point) in waveguides.iter().zip(&scan.points) {
            let name = format!("{regime}_decay_{}.csv", wg.label);
            let path = out.join(&name);
            DecayScan::new(regime, vec![*point])?.write_csv(create(&path)?).map_err(|e| in_file(&path, e))?;
            entries.push(ManifestEntry { path: name, kind: ScanKind::Decay, regime: Some(regime), length_um: Some(wg.length * 1e6) });
        }
    }
    if matches!(kind, ScanKind::Fringe | ScanKind::All) {
        let truth = rc.fringe_truth()?;
        let geometry = config.stage.geometry()?;
        let positions = positions_for(config)?;
        for (i, wg) in waveguides.iter().enumerate() {
            let scan = simulate_fringe_scan(
                &truth,
                wg,
                &positions,
                &geometry,
                fringe_amplitude(rc, wg)?,
                regime,
                rc.noise,
                seed,
                stream_id("fringe", regime, i),
            )
            .map_err(|e| e.in_stage(format!("simulate {regime} fringe {}", wg.label)))?;
            let name = format!("{regime}_fringe_{}.csv", wg.label);
            let path = out.join(&name);
            scan.write_csv(create(&path)?).map_err(|e| in_file(&path, e))?;
            entries.push(ManifestEntry { path: name, kind: ScanKind::Fringe, regime: Some(regime), length_um: Some(wg.length * 1e6) });
        }
    }
    Ok(entries)
}

/// Writes the requested scans into `out` and returns the updated manifest,
/// which is also written to `out/manifest.json`. Entries of other kinds from an
/// earlier run with the same config are kept.
pub fn run_simulate(config: &ExperimentConfig, kind: ScanKind, only: Option<Regime>, out: &Path) -> Result<Manifest> {
    config.validate()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let hash = config.hash();
    let manifest_path = out.join(MANIFEST_FILE);
    let mut files = match json::read_file::<Manifest>(&manifest_path) {
        Ok(m) if m.config_hash == hash => m.files,
        _ => Vec::new(),
    };
    let replaced = |e: &ManifestEntry| {
        (kind == ScanKind::All || e.kind == kind)
            && (e.kind == ScanKind::G2 || only.is_none() || e.regime == only)
    };
    files.retain(|e| !replaced(e));

    for (regime, rc) in config.regimes(only) {
        files.extend(simulate_regime(config, regime, rc, kind, out)?);
    }
    if matches!(kind, ScanKind::G2 | ScanKind::All) {
        let counts = simulate_g2(config)?;
        let path = out.join(G2_FILE);
        counts.write_csv(create(&path)?).map_err(|e| in_file(&path, e))?;
        files.push(ManifestEntry { path: G2_FILE.into(), kind: ScanKind::G2, regime: None, length_um: None });
    }

    let manifest = Manifest { config_hash: hash, seed: config.seed(), files };
    json::write_file(&manifest_path, &manifest)?;
    Ok(manifest)
}

fn simulate_g2(config: &ExperimentConfig) -> Result<G2Counts> {
    simulate_g2_counts(
        &config.g2.source(),
        config.g2.duration_s,
        config.seed(),
        stream_id("g2", Regime::Quantum, 0),
    )
    .map_err(|e| e.in_stage("simulate g2"))
}

fn sample_std(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    Some((values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt())
}

/// Γ_eff of one waveguide with its error estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideResult {
    pub label: String,
    pub length_um: f64,
    /// Fit to the recorded scan.
    pub fit: FringeFit,
    /// Error bar carried into the line fit: MC std, or the fit covariance std
    /// when fewer than two MC instances succeed.
    pub gamma_eff_std: f64,
    pub mc_mean: f64,
    pub mc_std: Option<f64>,
    pub mc_failures: usize,
    /// Spread of Γ_eff over single-period windows, for scans longer than two periods.
    pub window_std: Option<f64>,
}

/// Everything extracted for one regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeResult {
    pub regime: Regime,
    pub decay: DecayFit,
    pub waveguides: Vec<WaveguideResult>,
    /// Slope per metre, intercept dimensionless.
    pub line: LineFit,
    /// Slope spread over paired MC instances, per metre.
    pub slope_mc_std: Option<f64>,
    /// A negative fitted slope was replaced by zero.
    pub slope_clipped: bool,
    pub summary: DecoherenceSummary,
}

impl RegimeResult {
    pub fn slope_per_um(&self) -> Measured {
        Measured::new(self.line.slope * 1e-6, self.line.slope_std * 1e-6)
    }
}

/// Output of the `fit` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResults {
    pub config_hash: String,
    pub seed: u64,
    pub classical: Option<RegimeResult>,
    pub quantum: Option<RegimeResult>,
}

impl FitResults {
    pub fn regime(&self, regime: Regime) -> Option<&RegimeResult> {
        match regime {
            Regime::Classical => self.classical.as_ref(),
            Regime::Quantum => self.quantum.as_ref(),
        }
    }
}

fn read_decay(out: &Path, manifest: &Manifest, regime: Regime) -> Result<DecayScan> {
    let mut points: Vec<DecayPoint> = Vec::new();
    for e in manifest.entries(ScanKind::Decay, Some(regime)) {
        let path = out.join(&e.path);
        let scan = DecayScan::read_csv(open(&path)?, regime).map_err(|err| in_file(&path, err))?;
        points.extend(scan.points);
    }
    DecayScan::new(regime, points)
}

fn read_fringes(out: &Path, manifest: &Manifest, regime: Regime) -> Result<Vec<(WaveguideSpec, Vec<FringePoint>)>> {
    manifest
        .entries(ScanKind::Fringe, Some(regime))
        .map(|e| {
            let path = out.join(&e.path);
            let length_um = e
                .length_um
                .ok_or_else(|| Error::Parse { path: out.join(MANIFEST_FILE), line: 0, message: format!("{} has no length_um", e.path) })?;
            let points = FringeScan::read_points(open(&path)?).map_err(|err| in_file(&path, err))?;
            Ok((WaveguideSpec::from_length(length_um * 1e-6)?, points))
        })
        .collect()
}

/// Decay fit, fringe fits with MC errors, line fit and summary for one regime.
pub fn analyze_regime(
    config: &ExperimentConfig,
    regime: Regime,
    decay: &DecayScan,
    fringes: &[(WaveguideSpec, Vec<FringePoint>)],
) -> Result<RegimeResult> {
    let rc = config
        .regime(regime)
        .ok_or_else(|| Error::validation(regime.as_str(), "section missing from config"))?;
    let stage = |s: &str| format!("fit {regime} {s}");
    let decay_fit = fit_exponential_decay(decay, rc.group_velocity_m_s).map_err(|e| e.in_stage(stage("decay")))?;
    let propagation_length = decay_fit.propagation_length.value;
    let geometry = config.stage.nominal_geometry()?;
    let seed = config.seed();

    let mut waveguides = Vec::with_capacity(fringes.len());
    let mut instances = Vec::with_capacity(fringes.len());
    for (i, (wg, points)) in fringes.iter().enumerate() {
        let label = stage(&wg.label);
        let known = FringeKnowns::balanced(rc.reflectance, rc.transmittance, rc.g2p, wg.length / propagation_length)
            .map_err(|e| e.in_stage(label.clone()))?;
        let scan = FringeScan::new(wg.clone(), regime, geometry, points.clone(), known).map_err(|e| e.in_stage(label.clone()))?;
        let fit = fit_fringe(&scan).map_err(|e| e.in_stage(label.clone()))?;
        let mc = monte_carlo_fringe(&scan, rc.mc_instances, seed, stream_id("mc", regime, i))
            .map_err(|e| e.in_stage(label.clone()))?;
        let window_std = if scan.span_periods() > 2.0 + 1e-9 {
            let windows = fit_fringe_windows(&scan).map_err(|e| e.in_stage(label.clone()))?;
            let values: Vec<f64> = windows.iter().map(|w| w.gamma_eff).collect();
            sample_std(&values)
        } else {
            None
        };
        let gamma_eff_std = match mc.std {
            Some(s) if s > 0.0 => s,
            _ if fit.gamma_eff_std > 0.0 => fit.gamma_eff_std,
            _ => {
                return Err(Error::DegenerateModel(format!("{}: Γ_eff has no usable error estimate", wg.label))
                    .in_stage(label))
            }
        };
        waveguides.push(WaveguideResult {
            label: wg.label.clone(),
            length_um: wg.length * 1e6,
            fit,
            gamma_eff_std,
            mc_mean: mc.mean,
            mc_std: mc.std,
            mc_failures: mc.failures,
            window_std,
        });
        instances.push(mc.instances);
    }

    let lengths: Vec<f64> = fringes.iter().map(|(wg, _)| wg.length).collect();
    let stds: Vec<f64> = waveguides.iter().map(|w| w.gamma_eff_std).collect();
    let points: Vec<LinePoint> = waveguides
        .iter()
        .zip(&lengths)
        .map(|(w, &length)| LinePoint { length, gamma_eff: w.fit.gamma_eff, std: w.gamma_eff_std })
        .collect();
    let line = fit_gamma_eff_line(&points).map_err(|e| e.in_stage(stage("line")))?;
    let views: Vec<&[Option<f64>]> = instances.iter().map(Vec::as_slice).collect();
    let slope_mc_std = monte_carlo_slope_std(&lengths, &views, &stds);
    let slope_clipped = line.slope < 0.0;
    let slope = Measured::new(line.slope.max(0.0), line.slope_std);
    let summary = summarize(decay_fit.gamma1, slope, rc.group_velocity_m_s)
        .map_err(|e| e.in_stage(stage("summary")))?
        .with_regime(regime);
    Ok(RegimeResult { regime, decay: decay_fit, waveguides, line, slope_mc_std, slope_clipped, summary })
}

/// Reads the scans listed in `dir/manifest.json` and analyzes every regime found.
pub fn run_fit(config: &ExperimentConfig, only: Option<Regime>, dir: &Path) -> Result<FitResults> {
    config.validate()?;
    let manifest: Manifest = json::read_file(&dir.join(MANIFEST_FILE))?;
    if manifest.config_hash != config.hash() {
        return Err(Error::validation(
            "config_hash",
            format!("{} was produced by a different config or seed", dir.join(MANIFEST_FILE).display()),
        ));
    }
    let mut results = FitResults { config_hash: manifest.config_hash.clone(), seed: manifest.seed, classical: None, quantum: None };
    for (regime, _) in config.regimes(only) {
        let decay = read_decay(dir, &manifest, regime)?;
        let fringes = read_fringes(dir, &manifest, regime)?;
        if decay.points.is_empty() && fringes.is_empty() {
            continue;
        }
        let result = analyze_regime(config, regime, &decay, &fringes)?;
        match regime {
            Regime::Classical => results.classical = Some(result),
            Regime::Quantum => results.quantum = Some(result),
        }
    }
    if results.classical.is_none() && results.quantum.is_none() {
        return Err(Error::InsufficientData(format!("{} lists no decay or fringe scans", dir.join(MANIFEST_FILE).display())));
    }
    json::write_file(&dir.join(RESULTS_FILE), &results)?;
    Ok(results)
}

/// One pass/fail comparison against a configured expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub regime: Option<Regime>,
    pub value: f64,
    pub target: f64,
    /// Allowed absolute deviation.
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn within(name: &str, regime: Option<Regime>, value: f64, target: f64, tolerance: f64) -> Self {
        Self { name: name.into(), regime, value, target, tolerance, pass: (value - target).abs() <= tolerance }
    }

    fn at_most(name: &str, regime: Option<Regime>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), regime, value, target: bound, tolerance: 0.0, pass: value <= bound }
    }

    fn at_least(name: &str, regime: Option<Regime>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), regime, value, target: bound, tolerance: 0.0, pass: value >= bound }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2Result {
    pub counts: G2Counts,
    pub g2: f64,
}

/// Output of the `pipeline` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub config_hash: String,
    pub seed: u64,
    pub classical: Option<RegimeResult>,
    pub quantum: Option<RegimeResult>,
    pub dispersion: DispersionCheck,
    pub g2: G2Result,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// GVD from the configured table when present, else the configured coefficient.
pub fn dispersion_check(config: &ExperimentConfig) -> Result<DispersionCheck> {
    let d = &config.dispersion;
    let gvd = match &d.table {
        Some(table) => {
            let path = config.resolve(table);
            let table = DispersionTable::from_path(&path, angular_frequency(d.center_nm * 1e-9))?;
            gvd_coefficient(&table).map_err(|e| e.in_stage(format!("dispersion {}", path.display())))?
        }
        None => d.gvd_s_per_m_hz,
    };
    dispersion_overlap(d.fwhm_nm * 1e-9, d.center_nm * 1e-9, d.length_um * 1e-6, gvd).map_err(|e| e.in_stage("dispersion"))
}

fn regime_checks(rc: &RegimeConfig, r: &RegimeResult) -> Vec<Check> {
    let e = &rc.expect;
    let reg = Some(r.regime);
    let mut checks = Vec::new();
    if let (Some(target), Some(tol)) = (e.l_um, e.l_rel_tol) {
        checks.push(Check::within("propagation_length_um", reg, r.decay.propagation_length.value * 1e6, target, tol * target));
    }
    if let (Some(target), Some(tol)) = (e.t1_s, e.t1_rel_tol) {
        checks.push(Check::within("t1_s", reg, r.summary.t1.value, target, tol * target));
    }
    if let (Some(target), Some(k)) = (e.slope_per_um, e.slope_within_std) {
        let slope = r.slope_per_um();
        checks.push(Check::within("slope_per_um", reg, slope.value, target, k * slope.std));
    }
    if let (Some(target), Some(tol)) = (e.t2_s, e.t2_rel_tol) {
        checks.push(Check::within("t2_s", reg, r.summary.t2.value, target, tol * target));
    }
    if let Some(want) = e.t2_at_bound {
        let at = r.summary.at_t2_bound();
        checks.push(Check {
            name: "t2_at_bound".into(),
            regime: reg,
            value: r.summary.t2.value,
            target: 2.0 * r.summary.t1.value,
            tolerance: 0.0,
            pass: at == want,
        });
    }
    checks
}

/// Simulates every scan into `out`, fits them, runs the dispersion and g² checks
/// and writes `out/report.json`. The record's `pass` is false if any check fails.
pub fn run_pipeline(config: &ExperimentConfig, only: Option<Regime>, out: &Path) -> Result<ReportRecord> {
    run_simulate(config, ScanKind::All, only, out)?;
    let fit = run_fit(config, only, out)?;

    let mut checks = Vec::new();
    for regime in [Regime::Classical, Regime::Quantum] {
        if let (Some(rc), Some(r)) = (config.regime(regime), fit.regime(regime)) {
            checks.extend(regime_checks(rc, r));
        }
    }

    let dispersion = dispersion_check(config)?;
    checks.push(Check::at_least("dispersion_overlap", None, dispersion.overlap, config.dispersion.min_overlap));

    let g2_path = out.join(G2_FILE);
    let counts = G2Counts::read_csv(open(&g2_path)?).map_err(|e| in_file(&g2_path, e))?;
    let g2 = estimate_g2(&counts).map_err(|e| e.in_stage("g2"))?;
    checks.push(Check::at_most("g2_max", None, g2, config.g2.max_g2));
    if let Some(target) = config.g2.target {
        checks.push(Check::within("g2", None, g2, target, config.g2.target_tol));
    }

    let pass = checks.iter().all(|c| c.pass);
    let record = ReportRecord {
        config_hash: fit.config_hash,
        seed: fit.seed,
        classical: fit.classical,
        quantum: fit.quantum,
        dispersion,
        g2: G2Result { counts, g2 },
        checks,
        pass,
    };
    json::write_file(&out.join(REPORT_FILE), &record)?;
    Ok(record)
}

/// Output directory: the `--out` flag, else the config's `[output] dir`
/// resolved against the config file's directory.
pub fn output_dir(config: &ExperimentConfig, flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => config.resolve(&config.output.dir),
    }
}
