//! Synthetic counting experiments.
//!
//! Every random draw comes from a ChaCha stream keyed by `(seed, stream, index)`,
//! so a scan is reproducible bit-for-bit no matter how points are scheduled.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{dimensionless_damping, ChannelParams};
use crate::error::{Error, Result};
use crate::mzi::{balance_free_arm, phase_from_stage, wrap_phase, MziModel, StageGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Classical,
    Quantum,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Classical => "classical",
            Regime::Quantum => "quantum",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(Regime::Classical),
            "quantum" => Ok(Regime::Quantum),
            other => Err(Error::validation("regime", format!("expected classical|quantum, got `{other}`"))),
        }
    }
}

/// How expected counts become recorded counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Poisson shot noise.
    #[default]
    Poisson,
    /// The exact expected value, unrounded.
    Mean,
    /// The expected value rounded to the nearest integer.
    RoundedMean,
}

/// Mixes `(seed, stream, index)` into an independent ChaCha stream.
pub fn stream_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let mut key = [0u8; 32];
    let mut state = splitmix(seed) ^ splitmix(stream.rotate_left(17)) ^ splitmix(index.rotate_left(41));
    for chunk in key.chunks_mut(8) {
        state = splitmix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Stable stream identifier for a named scan.
pub fn stream_id(kind: &str, regime: Regime, index: usize) -> u64 {
    // FNV-1a over the label keeps ids independent of enum layout
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in kind.bytes().chain(regime.as_str().bytes()).chain((index as u64).to_le_bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

pub(crate) fn poisson_draw<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Poisson::new(mean).map(|d| d.sample(rng)).unwrap_or(mean.round())
}

fn record(noise: NoiseMode, mean: f64, rng: &mut ChaCha8Rng) -> f64 {
    match noise {
        NoiseMode::Poisson => poisson_draw(rng, mean),
        NoiseMode::Mean => mean,
        NoiseMode::RoundedMean => mean.round(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideSpec {
    /// Metres.
    pub length: f64,
    pub label: String,
}

impl WaveguideSpec {
    pub fn new(length: f64, label: impl Into<String>) -> Result<Self> {
        if !(length >= 0.0) || !length.is_finite() {
            return Err(Error::domain(format!("waveguide length must be >= 0, got {length}")));
        }
        Ok(Self { length, label: label.into() })
    }

    /// Label derived from the length, e.g. `wg_7.47um`.
    pub fn from_length(length: f64) -> Result<Self> {
        Self::new(length, format!("wg_{}um", round_sig(length * 1e6, 6)))
    }

    pub fn check_range(&self, min: f64, max: f64) -> Result<()> {
        if self.length < min || self.length > max {
            return Err(Error::domain(format!(
                "waveguide `{}` length {:e} m outside [{min:e}, {max:e}]",
                self.label, self.length
            )));
        }
        Ok(())
    }
}

fn round_sig(v: f64, digits: i32) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let scale = 10f64.powi(digits - 1 - v.abs().log10().floor() as i32);
    (v * scale).round() / scale
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    #[serde(rename = "length_um", with = "micrometres")]
    pub length: f64,
    pub counts: f64,
    #[serde(rename = "integration_s")]
    pub integration_time: f64,
}

/// Counts transmitted through waveguides of several lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayScan {
    pub regime: Regime,
    pub points: Vec<DecayPoint>,
}

impl DecayScan {
    pub fn new(regime: Regime, points: Vec<DecayPoint>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !(p.counts >= 0.0) {
                return Err(Error::domain(format!("point {i}: counts must be >= 0")));
            }
            if !(p.integration_time > 0.0) {
                return Err(Error::domain(format!("point {i}: integration time must be > 0")));
            }
            if points[..i].iter().any(|q| q.length == p.length) {
                return Err(Error::domain(format!("point {i}: duplicate length {:e}", p.length)));
            }
        }
        Ok(Self { regime, points })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_rows(w, &self.points)
    }

    pub fn read_csv<R: Read>(r: R, regime: Regime) -> Result<Self> {
        Self::new(regime, read_rows(r)?)
    }
}

/// Expected decay counts `rate · t · e^{-ℓΓ₁/v_g}` at each length, then recorded per `noise`.
pub fn simulate_decay_scan(
    truth: &ChannelParams,
    lengths: &[f64],
    base_rate: f64,
    integration_time: f64,
    regime: Regime,
    noise: NoiseMode,
    seed: u64,
    stream: u64,
) -> Result<DecayScan> {
    truth.validate()?;
    if lengths.is_empty() {
        return Err(Error::domain("decay scan needs at least one length"));
    }
    if !(base_rate > 0.0) {
        return Err(Error::domain(format!("base rate must be > 0, got {base_rate}")));
    }
    if !(integration_time > 0.0) {
        return Err(Error::domain(format!("integration time must be > 0, got {integration_time}")));
    }
    let points = lengths
        .par_iter()
        .enumerate()
        .map(|(i, &length)| {
            let damping = dimensionless_damping(truth.gamma1, length, truth.group_velocity)?;
            let mean = base_rate * integration_time * (-damping).exp();
            let mut rng = stream_rng(seed, stream, i as u64);
            Ok(DecayPoint { length, counts: record(noise, mean, &mut rng), integration_time })
        })
        .collect::<Result<Vec<_>>>()?;
    DecayScan::new(regime, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    /// Total stage delay, metres.
    #[serde(rename = "x_nm", with = "nanometres")]
    pub position: f64,
    pub counts: f64,
    pub sigma: f64,
}

/// Parameters of the fringe model that are measured independently of the fringe itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeKnowns {
    pub reflectance: f64,
    pub transmittance: f64,
    pub g1p: f64,
    pub g2p: f64,
    pub gt1: f64,
}

impl FringeKnowns {
    pub fn model(&self, delta: f64, gamma_eff: f64) -> MziModel {
        MziModel::Full {
            delta,
            reflectance: self.reflectance,
            transmittance: self.transmittance,
            g1p: self.g1p,
            g2p: self.g2p,
            gt1: self.gt1,
            gamma_eff,
        }
    }

    /// Free arm balanced against the waveguide arm for the given `gt1`.
    pub fn balanced(reflectance: f64, transmittance: f64, g2p: f64, gt1: f64) -> Result<Self> {
        Ok(Self { reflectance, transmittance, g1p: balance_free_arm(gt1, g2p)?, g2p, gt1 })
    }
}

/// Counts at the interferometer output versus stage delay for one waveguide.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan {
    pub waveguide: WaveguideSpec,
    pub regime: Regime,
    /// Nominal stage geometry; the scale is refit as a nuisance parameter.
    pub geometry: StageGeometry,
    pub points: Vec<FringePoint>,
    pub known: FringeKnowns,
}

impl FringeScan {
    pub fn new(
        waveguide: WaveguideSpec,
        regime: Regime,
        geometry: StageGeometry,
        points: Vec<FringePoint>,
        known: FringeKnowns,
    ) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !(p.counts >= 0.0) {
                return Err(Error::domain(format!("point {i}: counts must be >= 0")));
            }
            if !(p.sigma >= 0.0) {
                return Err(Error::domain(format!("point {i}: sigma must be >= 0")));
            }
        }
        if points.windows(2).any(|w| !(w[1].position > w[0].position)) {
            return Err(Error::domain("stage positions must be strictly increasing"));
        }
        known.model(0.0, 0.0).validate(crate::mzi::Validation::Rate)?;
        Ok(Self { waveguide, regime, geometry, points, known })
    }

    /// Number of fringe periods covered at the nominal stage scale.
    pub fn span_periods(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => (b.position - a.position) / self.geometry.period(),
            _ => 0.0,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_rows(w, &self.points)
    }

    pub fn read_points<R: Read>(r: R) -> Result<Vec<FringePoint>> {
        read_rows(r)
    }

    /// Same scan with different counts; sigmas follow as `√counts`.
    pub fn with_counts(&self, counts: &[f64]) -> Self {
        let points = self
            .points
            .iter()
            .zip(counts)
            .map(|(p, &c)| FringePoint { position: p.position, counts: c, sigma: c.sqrt() })
            .collect();
        Self { points, ..self.clone() }
    }
}

/// Ground truth for a fringe simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeTruth {
    pub channel: ChannelParams,
    /// Mode-mismatch dephasing at the recombining beamsplitter.
    pub gamma_int: f64,
    pub reflectance: f64,
    pub transmittance: f64,
    /// Plasmonic-arm polarization damping; the free arm is balanced against it.
    pub g2p: f64,
    /// `k_spp`, rad/m; sets `δ = k_spp ℓ`.
    pub wavenumber: f64,
}

impl FringeTruth {
    /// Knowns and the full model the simulator uses for a waveguide.
    pub fn model_for(&self, waveguide: &WaveguideSpec) -> Result<(FringeKnowns, MziModel)> {
        let ch = &self.channel;
        ch.validate()?;
        if !(self.gamma_int >= 0.0) {
            return Err(Error::domain(format!("gamma_int must be >= 0, got {}", self.gamma_int)));
        }
        let gt1 = dimensionless_damping(ch.gamma1, waveguide.length, ch.group_velocity)?;
        let gt2s = dimensionless_damping(ch.gamma2_star, waveguide.length, ch.group_velocity)?;
        let known = FringeKnowns::balanced(self.reflectance, self.transmittance, self.g2p, gt1)?;
        let delta = wrap_phase(self.wavenumber * waveguide.length);
        let model = known.model(delta, gt2s + self.gamma_int);
        model.validate(crate::mzi::Validation::Rate)?;
        Ok((known, model))
    }
}

/// Evenly spaced stage positions covering `periods` fringe periods with `n` points.
pub fn stage_positions(geometry: &StageGeometry, periods: f64, n: usize) -> Vec<f64> {
    let span = periods * geometry.period();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n).map(|i| span * i as f64 / (n - 1) as f64).collect()
}

/// Counts `I_in · p(φ(x))` from the full interferometer model.
pub fn simulate_fringe_scan(
    truth: &FringeTruth,
    waveguide: &WaveguideSpec,
    positions: &[f64],
    geometry: &StageGeometry,
    amplitude: f64,
    regime: Regime,
    noise: NoiseMode,
    seed: u64,
    stream: u64,
) -> Result<FringeScan> {
    if positions.is_empty() {
        return Err(Error::domain("fringe scan needs at least one stage position"));
    }
    if !(amplitude >= 0.0) {
        return Err(Error::domain(format!("input amplitude must be >= 0, got {amplitude}")));
    }
    let (known, model) = truth.model_for(waveguide)?;
    let terms = model.terms()?;
    let points = positions
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let mean = amplitude * terms.at(phase_from_stage(x, geometry)).max(0.0);
            let mut rng = stream_rng(seed, stream, i as u64);
            let counts = record(noise, mean, &mut rng);
            FringePoint { position: x, counts, sigma: counts.sqrt() }
        })
        .collect();
    FringeScan::new(waveguide.clone(), regime, *geometry, points, known)
}

/// Heralded coincidence totals over a common acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Counts {
    pub n_herald: u64,
    pub n_ab: u64,
    pub n_ac: u64,
    pub n_abc: u64,
    /// Coincidence window, nanoseconds.
    #[serde(rename = "window_ns")]
    pub window_ns: f64,
}

impl G2Counts {
    pub fn validate(&self) -> Result<()> {
        if self.n_abc > self.n_ab.min(self.n_ac) || self.n_ab.max(self.n_ac) > self.n_herald {
            return Err(Error::domain(format!(
                "coincidence counts must satisfy n_abc <= min(n_ab, n_ac) and n_ab, n_ac <= n_herald, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_rows(w, std::slice::from_ref(self))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let rows: Vec<Self> = read_rows(r)?;
        match rows.as_slice() {
            [one] => {
                one.validate()?;
                Ok(*one)
            }
            _ => Err(Error::Parse {
                path: "<g2 csv>".into(),
                line: 2,
                message: format!("expected exactly one data row, got {}", rows.len()),
            }),
        }
    }
}

/// Heralded single-photon source feeding a 50:50 Hanbury Brown–Twiss pair of detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub herald_rate: f64,
    /// Probability that a signal photon reaches the splitter.
    pub transmission: f64,
    /// Probability that a herald comes with two signal photons.
    pub multi_pair_prob: f64,
    pub dark_rate: f64,
    /// Seconds.
    pub coincidence_window: f64,
}

/// Click pattern probabilities `(none, b_only, c_only, both)` for `k` photons.
fn click_pattern(k: i32, eta: f64, dark: f64) -> [f64; 4] {
    let quiet = 1.0 - dark;
    let none = (1.0 - eta).powi(k) * quiet * quiet;
    let no_b = (1.0 - 0.5 * eta).powi(k) * quiet;
    let no_c = no_b;
    let both = (1.0 - no_b - no_c + none).max(0.0);
    [none, (no_c - none).max(0.0), (no_b - none).max(0.0), both]
}

impl SourceModel {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("transmission", self.transmission), ("multi_pair_prob", self.multi_pair_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::validation(name, format!("probability must be in [0, 1], got {p}")));
            }
        }
        for (name, r) in [
            ("herald_rate", self.herald_rate),
            ("dark_rate", self.dark_rate),
            ("coincidence_window", self.coincidence_window),
        ] {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::validation(name, format!("must be finite and >= 0, got {r}")));
            }
        }
        Ok(())
    }

    /// Probability of at least one dark click in a window, per detector.
    pub fn dark_probability(&self) -> f64 {
        -(-self.dark_rate * self.coincidence_window).exp_m1()
    }

    fn patterns(&self) -> ([f64; 4], [f64; 4]) {
        let d = self.dark_probability();
        (click_pattern(1, self.transmission, d), click_pattern(2, self.transmission, d))
    }

    /// Large-sample limit of the heralded estimator for this source.
    pub fn expected_g2(&self) -> f64 {
        let (one, two) = self.patterns();
        let m = self.multi_pair_prob;
        let mix = |k: usize| (1.0 - m) * one[k] + m * two[k];
        let p_b = mix(1) + mix(3);
        let p_c = mix(2) + mix(3);
        mix(3) / (p_b * p_c)
    }
}

/// Draws heralds, splits them into one- and two-photon events and each of those
/// into click patterns, all with exact multinomial draws.
pub fn simulate_g2_counts(source: &SourceModel, duration: f64, seed: u64, stream: u64) -> Result<G2Counts> {
    source.validate()?;
    if !(duration > 0.0) {
        return Err(Error::domain(format!("duration must be > 0, got {duration}")));
    }
    let mut rng = stream_rng(seed, stream, 0);
    let n_herald = poisson_draw(&mut rng, source.herald_rate * duration) as u64;
    let n_two = binomial(&mut rng, n_herald, source.multi_pair_prob);
    let n_one = n_herald - n_two;
    let (one, two) = source.patterns();
    let a = multinomial(&mut rng, n_one, &one);
    let b = multinomial(&mut rng, n_two, &two);
    let counts = G2Counts {
        n_herald,
        n_ab: a[1] + a[3] + b[1] + b[3],
        n_ac: a[2] + a[3] + b[2] + b[3],
        n_abc: a[3] + b[3],
        window_ns: source.coincidence_window * 1e9,
    };
    counts.validate()?;
    Ok(counts)
}

fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).map(|d| d.sample(rng)).unwrap_or(0)
}

fn multinomial<R: Rng + ?Sized>(rng: &mut R, n: u64, probs: &[f64; 4]) -> [u64; 4] {
    let mut out = [0u64; 4];
    let mut left = n;
    let mut mass = 1.0;
    for k in 0..3 {
        let p = if mass > 0.0 { (probs[k] / mass).clamp(0.0, 1.0) } else { 0.0 };
        out[k] = binomial(rng, left, p);
        left -= out[k];
        mass -= probs[k];
    }
    out[3] = left;
    out
}

/// Heralded estimator `g²(0) = n_abc · n_herald / (n_ab · n_ac)`.
pub fn estimate_g2(counts: &G2Counts) -> Result<f64> {
    if counts.n_ab == 0 || counts.n_ac == 0 {
        return Err(Error::InsufficientData(
            "g2 estimate needs non-zero two-fold coincidences".into(),
        ));
    }
    Ok(counts.n_abc as f64 * counts.n_herald as f64 / (counts.n_ab as f64 * counts.n_ac as f64))
}

fn write_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    for row in rows {
        writer.serialize(row).map_err(csv_write_error)?;
    }
    writer.flush().map_err(|e| Error::io("<csv>", e))
}

fn csv_write_error(e: csv::Error) -> Error {
    Error::io("<csv>", std::io::Error::other(e))
}

fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(r: R) -> Result<Vec<T>> {
    let mut reader = csv::Reader::from_reader(r);
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::Parse {
                path: "<csv>".into(),
                line: e.position().map(|p| p.line() as usize).unwrap_or(i + 2),
                message: e.to_string(),
            })
        })
        .collect()
}

mod micrometres {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(super::round_sig(v * 1e6, 12))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(f64::deserialize(d)? * 1e-6)
    }
}

mod nanometres {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(super::round_sig(v * 1e9, 12))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(f64::deserialize(d)? * 1e-9)
    }
}
