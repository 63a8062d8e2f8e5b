//! Group-velocity dispersion and its effect on single-plasmon wavepackets.
//!
//! A tabulated dispersion relation `v_g(ω)` gives the GVD coefficient
//! `D = d(1/v_g)/dω` at the carrier. A Gaussian wavepacket of temporal width
//! `σ_t0` broadens over a length `ℓ` as
//! `σ_t = √(σ_t0² + (ℓD / 2σ_t0)²)`, and the overlap of the dispersed spectral
//! amplitude with the undispersed one measures how much interference visibility
//! dispersion alone could remove.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light used throughout, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Angular frequency for a free-space wavelength.
pub fn angular_frequency(wavelength: f64) -> f64 {
    std::f64::consts::TAU * SPEED_OF_LIGHT / wavelength
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample {
    #[serde(rename = "omega_rad_s")]
    pub omega: f64,
    #[serde(rename = "vg_m_s")]
    pub group_velocity: f64,
}

/// `v_g(ω)` sampled on a strictly increasing frequency grid, with the carrier `ω₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTable {
    samples: Vec<DispersionSample>,
    omega0: f64,
}

impl DispersionTable {
    pub fn new(samples: Vec<DispersionSample>, omega0: f64) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::InsufficientData(format!(
                "dispersion table needs at least 3 samples, got {}",
                samples.len()
            )));
        }
        for w in samples.windows(2) {
            if !(w[1].omega > w[0].omega) {
                return Err(Error::domain(format!(
                    "dispersion table frequencies must be strictly increasing ({} then {})",
                    w[0].omega, w[1].omega
                )));
            }
        }
        if let Some(bad) = samples.iter().find(|s| !(s.group_velocity > 0.0)) {
            return Err(Error::domain(format!(
                "group velocity must be > 0, got {} at omega {}",
                bad.group_velocity, bad.omega
            )));
        }
        let (lo, hi) = (samples[0].omega, samples[samples.len() - 1].omega);
        if !(omega0 >= lo && omega0 <= hi) {
            return Err(Error::Range(format!(
                "carrier frequency {omega0:e} outside table range [{lo:e}, {hi:e}]"
            )));
        }
        Ok(Self { samples, omega0 })
    }

    pub fn samples(&self) -> &[DispersionSample] {
        &self.samples
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// Reads the `omega_rad_s,vg_m_s` CSV format.
    pub fn read_csv<R: Read>(reader: R, omega0: f64) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut samples = Vec::new();
        for (i, row) in rdr.deserialize::<DispersionSample>().enumerate() {
            let sample = row.map_err(|e| Error::Parse {
                path: "<dispersion table>".into(),
                line: e.position().map(|p| p.line() as usize).unwrap_or(i + 2),
                message: e.to_string(),
            })?;
            samples.push(sample);
        }
        Self::new(samples, omega0)
    }

    pub fn from_path(path: impl AsRef<Path>, omega0: f64) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, omega0).map_err(|e| match e {
            Error::Parse { line, message, .. } => Error::Parse { path: path.into(), line, message },
            other => other,
        })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for s in &self.samples {
            w.serialize(s)
                .map_err(|e| Error::io("<dispersion table>", std::io::Error::other(e)))?;
        }
        w.flush().map_err(|e| Error::io("<dispersion table>", e))
    }

    /// Index `i` such that samples `i-1, i, i+1` form the stencil closest to `omega`.
    fn stencil(&self, omega: f64) -> usize {
        let n = self.samples.len();
        let nearest = self
            .samples
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1.omega - omega)
                    .abs()
                    .total_cmp(&(b.1.omega - omega).abs())
            })
            .map(|(i, _)| i)
            .unwrap_or(1);
        nearest.clamp(1, n - 2)
    }

    /// Linearly interpolated group velocity.
    pub fn group_velocity_at(&self, omega: f64) -> Result<f64> {
        let s = &self.samples;
        if omega < s[0].omega || omega > s[s.len() - 1].omega {
            return Err(Error::Range(format!("omega {omega:e} outside dispersion table")));
        }
        let j = s.partition_point(|p| p.omega <= omega).clamp(1, s.len() - 1);
        let (a, b) = (s[j - 1], s[j]);
        let w = (omega - a.omega) / (b.omega - a.omega);
        Ok(a.group_velocity + w * (b.group_velocity - a.group_velocity))
    }
}

/// `D = d(1/v_g)/dω` at `ω₀`, in s/(m·Hz).
///
/// Differentiates the parabola through the three samples centred nearest `ω₀`;
/// on a uniform grid with `ω₀` at a node this is the central difference.
pub fn gvd_coefficient(table: &DispersionTable) -> Result<f64> {
    let s = table.samples();
    if s.len() < 3 {
        return Err(Error::InsufficientData("need at least 3 samples".into()));
    }
    let w0 = table.omega0();
    if w0 < s[0].omega || w0 > s[s.len() - 1].omega {
        return Err(Error::Range(format!("carrier {w0:e} outside table")));
    }
    let i = table.stencil(w0);
    let (x0, x1, x2) = (s[i - 1].omega, s[i].omega, s[i + 1].omega);
    let (y0, y1, y2) = (
        1.0 / s[i - 1].group_velocity,
        1.0 / s[i].group_velocity,
        1.0 / s[i + 1].group_velocity,
    );
    // derivative of the Lagrange interpolant, evaluated relative to x1 for conditioning
    let (a, b, c) = (x0 - x1, 0.0, x2 - x1);
    let t = w0 - x1;
    let l0 = (2.0 * t - b - c) / ((a - b) * (a - c));
    let l1 = (2.0 * t - a - c) / ((b - a) * (b - c));
    let l2 = (2.0 * t - a - b) / ((c - a) * (c - b));
    Ok(y0 * l0 + y1 * l1 + y2 * l2)
}

/// Spectral standard deviation `σ_ω` for a Gaussian with wavelength FWHM `delta_lambda`.
pub fn sigma_omega_from_fwhm(delta_lambda: f64, lambda0: f64) -> Result<f64> {
    if !(delta_lambda > 0.0) || !(lambda0 > 0.0) {
        return Err(Error::domain(format!(
            "FWHM and centre wavelength must be > 0, got ({delta_lambda}, {lambda0})"
        )));
    }
    let fwhm_omega = std::f64::consts::TAU * SPEED_OF_LIGHT * delta_lambda / (lambda0 * lambda0);
    Ok(fwhm_omega / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt()))
}

/// Transform-limited Gaussian wavepacket, `σ_t0 σ_ω = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketSpec {
    pub sigma_omega: f64,
    pub sigma_t0: f64,
    pub lambda0: f64,
}

impl WavepacketSpec {
    pub fn from_sigma_omega(sigma_omega: f64, lambda0: f64) -> Result<Self> {
        if !(sigma_omega > 0.0) || !(lambda0 > 0.0) {
            return Err(Error::domain("spectral width and wavelength must be > 0"));
        }
        Ok(Self { sigma_omega, sigma_t0: 0.5 / sigma_omega, lambda0 })
    }

    pub fn from_fwhm(delta_lambda: f64, lambda0: f64) -> Result<Self> {
        Self::from_sigma_omega(sigma_omega_from_fwhm(delta_lambda, lambda0)?, lambda0)
    }

    /// Spectral width after propagating `length` with GVD coefficient `gvd`.
    pub fn dispersed_sigma_omega(&self, length: f64, gvd: f64) -> Result<f64> {
        Ok(0.5 / temporal_spread(self.sigma_t0, length, gvd)?)
    }
}

/// Temporal width after propagation, `√(σ_t0² + (ℓD/2σ_t0)²)`.
pub fn temporal_spread(sigma_t0: f64, length: f64, gvd: f64) -> Result<f64> {
    if !(sigma_t0 > 0.0) {
        return Err(Error::domain(format!("sigma_t0 must be > 0, got {sigma_t0}")));
    }
    if !(length >= 0.0) {
        return Err(Error::domain(format!("length must be >= 0, got {length}")));
    }
    let chirp = length * gvd / (2.0 * sigma_t0);
    Ok(sigma_t0.hypot(chirp))
}

/// Overlap `∫ξ_a ξ_b dω` of two co-centred normalized Gaussian spectral amplitudes.
pub fn mode_overlap(sigma_omega_a: f64, sigma_omega_b: f64) -> Result<f64> {
    if !(sigma_omega_a > 0.0) || !(sigma_omega_b > 0.0) {
        return Err(Error::domain(format!(
            "spectral widths must be > 0, got ({sigma_omega_a}, {sigma_omega_b})"
        )));
    }
    // ratio form avoids overflow of σ² at optical frequencies
    let r = sigma_omega_b / sigma_omega_a;
    Ok((2.0 * r / (1.0 + r * r)).sqrt())
}

/// Result of comparing a dispersed waveguide wavepacket against the free-space one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionCheck {
    pub sigma_omega: f64,
    pub sigma_t0: f64,
    pub sigma_t: f64,
    pub gvd: f64,
    pub overlap: f64,
}

/// Full chain: FWHM → `σ_ω` → broadening over `length` → spectral overlap.
pub fn dispersion_overlap(
    delta_lambda: f64,
    lambda0: f64,
    length: f64,
    gvd: f64,
) -> Result<DispersionCheck> {
    let packet = WavepacketSpec::from_fwhm(delta_lambda, lambda0)?;
    let sigma_t = temporal_spread(packet.sigma_t0, length, gvd)?;
    let overlap = mode_overlap(packet.sigma_omega, 0.5 / sigma_t)?;
    Ok(DispersionCheck {
        sigma_omega: packet.sigma_omega,
        sigma_t0: packet.sigma_t0,
        sigma_t,
        gvd,
        overlap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_from(f: impl Fn(f64) -> f64, omegas: &[f64], omega0: f64) -> DispersionTable {
        let samples = omegas
            .iter()
            .map(|&w| DispersionSample { omega: w, group_velocity: 1.0 / f(w) })
            .collect();
        DispersionTable::new(samples, omega0).unwrap()
    }

    #[test]
    fn constant_velocity_has_no_gvd() {
        let omegas: Vec<f64> = (0..7).map(|i| 2.0e15 + i as f64 * 1e13).collect();
        let t = table_from(|_| 1.0 / 2.958e8, &omegas, 2.03e15);
        assert_eq!(gvd_coefficient(&t).unwrap(), 0.0);
    }

    #[test]
    fn linear_inverse_velocity_is_exact_on_any_grid() {
        let (a, b) = (3.3e-9, 5.81e-25);
        let w0 = 2.3e15;
        let omegas = [2.21e15, 2.26e15, 2.2913e15, 2.305e15, 2.37e15, 2.4e15];
        let t = table_from(|w| a + b * (w - w0), &omegas, w0);
        let d = gvd_coefficient(&t).unwrap();
        assert!((d - b).abs() / b < 1e-6, "{d}");
    }

    #[test]
    fn gvd_is_second_order_in_grid_spacing() {
        // 1/v_g = a + b Δ + c Δ³ has derivative b at ω₀; the stencil error is c h² scaled
        let (a, b, c) = (3.3e-9, 5.81e-25, 4.0e-55);
        let w0 = 2.3e15;
        let err = |h: f64| {
            let omegas: Vec<f64> = (-3..=3).map(|k| w0 + 0.3 * h + k as f64 * h).collect();
            let t = table_from(|w| a + b * (w - w0) + c * (w - w0).powi(3), &omegas, w0);
            (gvd_coefficient(&t).unwrap() - b).abs()
        };
        let (e1, e2) = (err(4e13), err(2e13));
        let ratio = e1 / e2;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn table_validation() {
        let s = |w: f64| DispersionSample { omega: w, group_velocity: 1.0 };
        assert!(matches!(
            DispersionTable::new(vec![s(1.0), s(2.0)], 1.5),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            DispersionTable::new(vec![s(1.0), s(2.0), s(3.0)], 5.0),
            Err(Error::Range(_))
        ));
        assert!(DispersionTable::new(vec![s(1.0), s(3.0), s(2.0)], 2.0).is_err());
    }

    #[test]
    fn fwhm_conversion() {
        let sw = sigma_omega_from_fwhm(40e-9, 810e-9).unwrap();
        assert!((sw - 4.88e13).abs() < 0.005e13, "{sw:e}");
        let tiny = sigma_omega_from_fwhm(1e-18, 810e-9).unwrap();
        assert!(tiny < 1e5);
        let double = sigma_omega_from_fwhm(80e-9, 810e-9).unwrap();
        assert!((double / sw - 2.0).abs() < 1e-14);
        assert!(sigma_omega_from_fwhm(0.0, 810e-9).is_err());
    }

    #[test]
    fn spread_examples() {
        assert_eq!(temporal_spread(1e-14, 90e-6, 0.0).unwrap(), 1e-14);
        assert_eq!(temporal_spread(1e-14, 0.0, 5.81e-25).unwrap(), 1e-14);
        let st = temporal_spread(1.025e-14, 90e-6, 5.81e-25).unwrap();
        assert!((st - 1.056e-14).abs() < 0.0005e-14, "{st:e}");
        assert!(temporal_spread(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn overlap_examples() {
        assert_eq!(mode_overlap(3e13, 3e13).unwrap(), 1.0);
        let o = mode_overlap(1.0, 2.0).unwrap();
        assert!((o - 0.8f64.sqrt()).abs() < 1e-15);
        assert!(mode_overlap(0.0, 1.0).is_err());
    }

    #[test]
    fn wavepacket_is_transform_limited() {
        let p = WavepacketSpec::from_fwhm(40e-9, 810e-9).unwrap();
        assert!((p.sigma_t0 * p.sigma_omega - 0.5).abs() < 1e-12);
        assert!((p.sigma_t0 - 1.025e-14).abs() < 0.001e-14);
    }

    #[test]
    fn csv_round_trip() {
        let omegas: Vec<f64> = (0..5).map(|i| 2.0e15 + i as f64 * 1e13).collect();
        let t = table_from(|w| 3.3e-9 + 1e-25 * (w - 2.02e15), &omegas, 2.02e15);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("omega_rad_s,vg_m_s\n"));
        let back = DispersionTable::read_csv(&buf[..], 2.02e15).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn malformed_csv_reports_line() {
        let text = "omega_rad_s,vg_m_s\n1.0,2.0\n2.0,oops\n3.0,2.0\n";
        match DispersionTable::read_csv(text.as_bytes(), 2.0) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
