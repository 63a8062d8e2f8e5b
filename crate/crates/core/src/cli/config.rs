//! Experiment configuration.
//!
//! TOML with nested sections; every dimensional key carries its unit in the
//! name (`length_um`, `rate_cps`, `gamma1_per_s`). Unknown keys are rejected.
//!
//! ```toml
//! seed = 42
//!
//! [stage]
//! wavelength_nm = 810.0
//!
//! [quantum]
//! gamma1_per_s = 5.27e13
//! gamma2_star_per_s = 0.89e13
//! gamma_int = 0.893
//! lengths_um = [7.47, 12.47, 17.47, 22.47]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channels::ChannelParams;
use crate::error::{Error, Result};
use crate::mzi::StageGeometry;
use crate::simkit::{FringeTruth, NoiseMode, Regime, SourceModel, WaveguideSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Required; there is no wall-clock default.
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub stage: StageConfig,
    #[serde(default)]
    pub dispersion: DispersionConfig,
    #[serde(default)]
    pub g2: G2Config,
    pub classical: Option<RegimeConfig>,
    pub quantum: Option<RegimeConfig>,
    /// Directory relative paths are resolved against; set by [`ExperimentConfig::load`].
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StageConfig {
    pub wavelength_nm: f64,
    /// Actual stage geometry factor used when simulating.
    pub scale: f64,
    /// Starting value for the fitted geometry factor.
    pub nominal_scale: f64,
    pub points: usize,
    pub span_periods: f64,
}

impl Default for StageConfig {
    fn default() -> Self {
        Self { wavelength_nm: 810.0, scale: 1.0, nominal_scale: 1.0, points: 41, span_periods: 2.0 }
    }
}

impl StageConfig {
    pub fn geometry(&self) -> Result<StageGeometry> {
        StageGeometry::new(self.scale, self.wavelength_nm * 1e-9)
    }

    pub fn nominal_geometry(&self) -> Result<StageGeometry> {
        StageGeometry::new(self.nominal_scale, self.wavelength_nm * 1e-9)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersionConfig {
    /// CSV table `omega_rad_s,vg_m_s`; when absent `gvd_s_per_m_hz` is used directly.
    pub table: Option<PathBuf>,
    pub gvd_s_per_m_hz: f64,
    pub fwhm_nm: f64,
    pub center_nm: f64,
    pub length_um: f64,
    pub min_overlap: f64,
}

impl Default for DispersionConfig {
    fn default() -> Self {
        Self {
            table: None,
            gvd_s_per_m_hz: 5.81e-25,
            fwhm_nm: 40.0,
            center_nm: 810.0,
            length_um: 90.0,
            min_overlap: 0.99,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct G2Config {
    pub herald_rate_cps: f64,
    pub transmission: f64,
    pub multi_pair_prob: f64,
    pub dark_rate_cps: f64,
    pub window_ns: f64,
    pub duration_s: f64,
    /// Upper bound certifying single excitations.
    pub max_g2: f64,
    pub target: Option<f64>,
    pub target_tol: f64,
}

impl Default for G2Config {
    fn default() -> Self {
        Self {
            herald_rate_cps: 2.0e5,
            transmission: 0.05,
            multi_pair_prob: 0.179439,
            dark_rate_cps: 100.0,
            window_ns: 8.0,
            duration_s: 600.0,
            max_g2: 0.5,
            target: None,
            target_tol: 0.01,
        }
    }
}

impl G2Config {
    pub fn source(&self) -> SourceModel {
        SourceModel {
            herald_rate: self.herald_rate_cps,
            transmission: self.transmission,
            multi_pair_prob: self.multi_pair_prob,
            dark_rate: self.dark_rate_cps,
            coincidence_window: self.window_ns * 1e-9,
        }
    }
}

/// Ground truth, shot budget and acceptance targets for one regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeConfig {
    pub gamma1_per_s: f64,
    pub gamma2_star_per_s: f64,
    pub gamma_int: f64,
    #[serde(default = "default_group_velocity")]
    pub group_velocity_m_s: f64,
    pub lengths_um: Vec<f64>,
    #[serde(default = "default_length_range")]
    pub length_range_um: [f64; 2],
    pub decay_rate_cps: f64,
    pub decay_integration_s: f64,
    /// Mean counts per fringe point; sets `I_in` per waveguide.
    pub fringe_mean_counts: f64,
    #[serde(default = "half")]
    pub reflectance: f64,
    #[serde(default = "half")]
    pub transmittance: f64,
    #[serde(default)]
    pub g2p: f64,
    #[serde(default = "default_k_spp")]
    pub k_spp_rad_per_um: f64,
    #[serde(default = "default_mc_instances")]
    pub mc_instances: usize,
    #[serde(default)]
    pub noise: NoiseMode,
    #[serde(default)]
    pub expect: Expectations,
}

fn default_group_velocity() -> f64 {
    2.958e8
}

fn default_length_range() -> [f64; 2] {
    [7.32, 32.47]
}

fn half() -> f64 {
    0.5
}

fn default_k_spp() -> f64 {
    // roughly 1.05 × the free-space wavenumber at 810 nm
    8.15
}

fn default_mc_instances() -> usize {
    200
}

/// Optional pass/fail targets checked by the pipeline.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    pub l_um: Option<f64>,
    pub l_rel_tol: Option<f64>,
    pub t1_s: Option<f64>,
    pub t1_rel_tol: Option<f64>,
    pub slope_per_um: Option<f64>,
    /// Allowed deviation of the slope in units of its reported std.
    pub slope_within_std: Option<f64>,
    pub t2_s: Option<f64>,
    pub t2_rel_tol: Option<f64>,
    /// Require `T₂ = 2T₁` (no detectable pure dephasing).
    pub t2_at_bound: Option<bool>,
}

impl RegimeConfig {
    pub fn channel(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.gamma1_per_s, self.gamma2_star_per_s, self.group_velocity_m_s)
    }

    pub fn fringe_truth(&self) -> Result<FringeTruth> {
        Ok(FringeTruth {
            channel: self.channel()?,
            gamma_int: self.gamma_int,
            reflectance: self.reflectance,
            transmittance: self.transmittance,
            g2p: self.g2p,
            wavenumber: self.k_spp_rad_per_um * 1e6,
        })
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.lengths_um.iter().map(|l| l * 1e-6).collect()
    }

    pub fn waveguides(&self) -> Result<Vec<WaveguideSpec>> {
        self.lengths().into_iter().map(WaveguideSpec::from_length).collect()
    }

    fn validate(&self, prefix: &str) -> Result<()> {
        let field = |name: &str| format!("{prefix}.{name}");
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(field(name), format!("must be > 0, got {v}")))
            }
        };
        let non_negative = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(field(name), format!("must be >= 0, got {v}")))
            }
        };
        positive("gamma1_per_s", self.gamma1_per_s)?;
        non_negative("gamma2_star_per_s", self.gamma2_star_per_s)?;
        non_negative("gamma_int", self.gamma_int)?;
        positive("group_velocity_m_s", self.group_velocity_m_s)?;
        positive("decay_rate_cps", self.decay_rate_cps)?;
        positive("decay_integration_s", self.decay_integration_s)?;
        positive("fringe_mean_counts", self.fringe_mean_counts)?;
        non_negative("reflectance", self.reflectance)?;
        non_negative("transmittance", self.transmittance)?;
        if self.reflectance + self.transmittance > 1.0 + 1e-12 {
            return Err(Error::validation(field("transmittance"), "reflectance + transmittance must be <= 1"));
        }
        non_negative("g2p", self.g2p)?;
        if !self.k_spp_rad_per_um.is_finite() {
            return Err(Error::validation(field("k_spp_rad_per_um"), "must be finite"));
        }
        if self.mc_instances == 0 {
            return Err(Error::validation(field("mc_instances"), "must be >= 1"));
        }
        if self.lengths_um.len() < 3 {
            return Err(Error::validation(field("lengths_um"), "at least 3 waveguide lengths are needed"));
        }
        let [lo, hi] = self.length_range_um;
        for (i, &l) in self.lengths_um.iter().enumerate() {
            if !(l >= lo && l <= hi) {
                return Err(Error::validation(
                    format!("{prefix}.lengths_um[{i}]"),
                    format!("{l} um outside configured range [{lo}, {hi}]"),
                ));
            }
            if self.lengths_um[..i].contains(&l) {
                return Err(Error::validation(format!("{prefix}.lengths_um[{i}]"), "duplicate length"));
            }
        }
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let mut config: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::Parse { path: origin.into(), line, message: e.message().to_string() }
        })?;
        config.base_dir = origin.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seed.is_none() {
            return Err(Error::validation("seed", "missing; set `seed = <u64>` or pass --seed"));
        }
        self.stage
            .geometry()
            .map_err(|e| Error::validation("stage", e.to_string()))?;
        self.stage
            .nominal_geometry()
            .map_err(|e| Error::validation("stage.nominal_scale", e.to_string()))?;
        if self.stage.points < 8 {
            return Err(Error::validation("stage.points", "at least 8 stage positions are needed"));
        }
        if !(self.stage.span_periods >= 1.0) {
            return Err(Error::validation("stage.span_periods", "scan must cover at least one period"));
        }
        self.g2
            .source()
            .validate()
            .map_err(|e| match e {
                Error::Validation { field, message } => Error::validation(format!("g2.{field}"), message),
                other => other,
            })?;
        if !(self.g2.duration_s > 0.0) {
            return Err(Error::validation("g2.duration_s", "must be > 0"));
        }
        let d = &self.dispersion;
        for (name, v) in [("fwhm_nm", d.fwhm_nm), ("center_nm", d.center_nm)] {
            if !(v > 0.0) {
                return Err(Error::validation(format!("dispersion.{name}"), "must be > 0"));
            }
        }
        if !(d.length_um >= 0.0) {
            return Err(Error::validation("dispersion.length_um", "must be >= 0"));
        }
        if self.classical.is_none() && self.quantum.is_none() {
            return Err(Error::validation("quantum", "at least one of [classical] or [quantum] is required"));
        }
        if let Some(c) = &self.classical {
            c.validate("classical")?;
        }
        if let Some(q) = &self.quantum {
            q.validate("quantum")?;
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or_default()
    }

    pub fn regime(&self, regime: Regime) -> Option<&RegimeConfig> {
        match regime {
            Regime::Classical => self.classical.as_ref(),
            Regime::Quantum => self.quantum.as_ref(),
        }
    }

    /// Regimes present in the config, optionally restricted to one.
    pub fn regimes(&self, only: Option<Regime>) -> Vec<(Regime, &RegimeConfig)> {
        [Regime::Classical, Regime::Quantum]
            .into_iter()
            .filter(|r| only.is_none_or(|o| o == *r))
            .filter_map(|r| self.regime(r).map(|c| (r, c)))
            .collect()
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// SHA-256 of the canonical serialization (seed overrides included).
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(self).unwrap_or_default();
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7

[quantum]
gamma1_per_s = 5.27e13
gamma2_star_per_s = 0.89e13
gamma_int = 0.893
lengths_um = [7.47, 12.47, 17.47, 22.47]
decay_rate_cps = 2000.0
decay_integration_s = 24.0
fringe_mean_counts = 1000.0
"#;

    #[test]
    fn minimal_config_validates() {
        let c = ExperimentConfig::from_toml_str(MINIMAL, Path::new("x.toml")).unwrap();
        c.validate().unwrap();
        assert_eq!(c.seed(), 7);
        assert_eq!(c.regimes(None).len(), 1);
        assert!(c.regimes(Some(Regime::Classical)).is_empty());
    }

    #[test]
    fn missing_seed_names_the_field() {
        let text = MINIMAL.replace("seed = 7", "");
        let c = ExperimentConfig::from_toml_str(&text, Path::new("x.toml")).unwrap();
        match c.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "seed"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_values_name_their_path() {
        let text = MINIMAL.replace("gamma_int = 0.893", "gamma_int = -1.0");
        let c = ExperimentConfig::from_toml_str(&text, Path::new("x.toml")).unwrap();
        match c.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "quantum.gamma_int"),
            other => panic!("{other:?}"),
        }
        let text = MINIMAL.replace("7.47, 12.47", "1.0, 12.47");
        let c = ExperimentConfig::from_toml_str(&text, Path::new("x.toml")).unwrap();
        match c.validate() {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "quantum.lengths_um[0]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let text = MINIMAL.replace("gamma_int = 0.893", "gamma_int = 0.893\nlength_m = 3.0");
        match ExperimentConfig::from_toml_str(&text, Path::new("x.toml")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_tracks_seed() {
        let a = ExperimentConfig::from_toml_str(MINIMAL, Path::new("x.toml")).unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = Some(8);
        assert_ne!(a.hash(), b.hash());
    }
}
