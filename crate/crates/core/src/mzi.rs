//! Detection-probability models for the plasmonic Mach-Zehnder interferometer.
//!
//! A single photon enters the interferometer, one arm of which contains the
//! plasmonic waveguide (accumulated phase `δ = k_spp ℓ`) and the other a
//! free-space path whose length is scanned by a translation stage (phase `φ`).
//! The variants below add, in turn, waveguide damping, a neutral-density filter
//! on the free arm, polarization-controlled splitting, and an asymmetric output
//! beamsplitter. All dampings are dimensionless (already multiplied by the
//! transit time).
//!
//! [`MziModel::Full`] is a relative count-rate model: its prefactors are not
//! normalized, and the absolute scale is absorbed into the input amplitude
//! `I_in` when fitting. [`Validation::StrictProbability`] checks the extra
//! conditions under which it is also a probability.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Output amplitudes of the lossless interferometer for a photon injected into mode 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputAmplitudes {
    /// Coefficient of `|0⟩₁″|1⟩₂″`.
    pub photon_in_mode2: Complex64,
    /// Coefficient of `|1⟩₁″|0⟩₂″`.
    pub photon_in_mode1: Complex64,
}

/// Lossless propagation through both beamsplitters.
pub fn propagate_pure(phi: f64, delta: f64) -> OutputAmplitudes {
    let rot = Complex64::from_polar(1.0, phi - delta);
    let one = Complex64::new(1.0, 0.0);
    OutputAmplitudes {
        photon_in_mode2: 0.5 * (one - rot),
        photon_in_mode1: Complex64::new(0.0, 0.5) * (one + rot),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Validation {
    /// Non-negative parameters and `R + T ≤ 1`.
    #[default]
    Rate,
    /// Additionally `e^{-Γ₁′} + e^{-Γ₂′} ≤ 1`, so every variant is a probability.
    StrictProbability,
}

/// The interferometer variants, from lossless to the full experimental setup.
///
/// Field naming: `gt1`/`gt2s` are the waveguide dampings `Γ₁ℓ/v_g` and
/// `Γ₂*ℓ/v_g`; `g1p`/`g2p` the polarization-controlled dampings on the free
/// and plasmonic arms; `gamma_free` the ND-filter damping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MziModel {
    Ideal {
        delta: f64,
    },
    Damped {
        delta: f64,
        gt1: f64,
        gt2s: f64,
    },
    NdBalanced {
        delta: f64,
        gamma_free: f64,
        gt1: f64,
        gt2s: f64,
    },
    PolarizationSplit {
        delta: f64,
        g1p: f64,
        g2p: f64,
        gt1: f64,
        gt2s: f64,
    },
    Full {
        delta: f64,
        reflectance: f64,
        transmittance: f64,
        g1p: f64,
        g2p: f64,
        gt1: f64,
        gamma_eff: f64,
    },
}

/// `p(φ) = base + amplitude · cos(φ − δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeTerms {
    pub base: f64,
    pub amplitude: f64,
    pub delta: f64,
}

impl FringeTerms {
    pub fn at(&self, phi: f64) -> f64 {
        self.base + self.amplitude * (phi - self.delta).cos()
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite and >= 0, got {v}")))
    }
}

impl MziModel {
    pub fn delta(&self) -> f64 {
        match *self {
            MziModel::Ideal { delta }
            | MziModel::Damped { delta, .. }
            | MziModel::NdBalanced { delta, .. }
            | MziModel::PolarizationSplit { delta, .. }
            | MziModel::Full { delta, .. } => delta,
        }
    }

    pub fn validate(&self, mode: Validation) -> Result<()> {
        if !self.delta().is_finite() {
            return Err(Error::domain("delta must be finite"));
        }
        match *self {
            MziModel::Ideal { .. } => {}
            MziModel::Damped { gt1, gt2s, .. } => {
                non_negative("gt1", gt1)?;
                non_negative("gt2s", gt2s)?;
            }
            MziModel::NdBalanced { gamma_free, gt1, gt2s, .. } => {
                non_negative("gamma_free", gamma_free)?;
                non_negative("gt1", gt1)?;
                non_negative("gt2s", gt2s)?;
            }
            MziModel::PolarizationSplit { g1p, g2p, gt1, gt2s, .. } => {
                non_negative("g1p", g1p)?;
                non_negative("g2p", g2p)?;
                non_negative("gt1", gt1)?;
                non_negative("gt2s", gt2s)?;
                if mode == Validation::StrictProbability {
                    check_split(g1p, g2p)?;
                }
            }
            MziModel::Full { reflectance, transmittance, g1p, g2p, gt1, gamma_eff, .. } => {
                non_negative("reflectance", reflectance)?;
                non_negative("transmittance", transmittance)?;
                if reflectance + transmittance > 1.0 + 1e-12 {
                    return Err(Error::domain(format!(
                        "R + T must be <= 1, got {}",
                        reflectance + transmittance
                    )));
                }
                non_negative("g1p", g1p)?;
                non_negative("g2p", g2p)?;
                non_negative("gt1", gt1)?;
                non_negative("gamma_eff", gamma_eff)?;
                if mode == Validation::StrictProbability {
                    check_split(g1p, g2p)?;
                }
            }
        }
        Ok(())
    }

    /// Constant and oscillating parts of the detection curve.
    pub fn terms(&self) -> Result<FringeTerms> {
        self.validate(Validation::Rate)?;
        let delta = self.delta();
        let (base, amplitude) = match *self {
            MziModel::Ideal { .. } => (0.5, 0.5),
            MziModel::Damped { gt1, gt2s, .. } => (
                0.25 * (1.0 + (-gt1).exp()),
                0.5 * (-0.5 * gt1 - gt2s).exp(),
            ),
            MziModel::NdBalanced { gamma_free, gt1, gt2s, .. } => (
                0.25 * ((-gamma_free).exp() + (-gt1).exp()),
                0.5 * (-0.5 * (gamma_free + gt1) - gt2s).exp(),
            ),
            MziModel::PolarizationSplit { g1p, g2p, gt1, gt2s, .. } => (
                0.5 * ((-g1p).exp() + (-(gt1 + g2p)).exp()),
                (-0.5 * (g1p + g2p + gt1) - gt2s).exp(),
            ),
            MziModel::Full { reflectance, transmittance, g1p, g2p, gt1, gamma_eff, .. } => (
                reflectance * (-g1p).exp() + transmittance * (-(gt1 + g2p)).exp(),
                2.0 * (reflectance * transmittance).sqrt()
                    * (-0.5 * (g1p + g2p + gt1) - gamma_eff).exp(),
            ),
        };
        Ok(FringeTerms { base, amplitude, delta })
    }

    /// Detection probability (or relative rate for [`MziModel::Full`]) at stage phase `phi`.
    pub fn fringe_probability(&self, phi: f64) -> Result<f64> {
        Ok(self.terms()?.at(phi))
    }

    /// `(p_max − p_min)/(p_max + p_min)`.
    pub fn visibility(&self) -> Result<f64> {
        let terms = self.terms()?;
        if terms.base <= 0.0 {
            return Err(Error::DegenerateModel(
                "both interferometer arms are fully damped".into(),
            ));
        }
        Ok(terms.amplitude / terms.base)
    }
}

fn check_split(g1p: f64, g2p: f64) -> Result<()> {
    let total = (-g1p).exp() + (-g2p).exp();
    if total > 1.0 + 1e-12 {
        return Err(Error::domain(format!(
            "strict probability mode requires exp(-g1p) + exp(-g2p) <= 1, got {total}"
        )));
    }
    Ok(())
}

/// Free-arm damping that equalizes the two non-oscillating terms: `Γ₁′ = Γ̃₁ + Γ₂′`.
pub fn balance_free_arm(gt1: f64, g2p: f64) -> Result<f64> {
    non_negative("gt1", gt1)?;
    non_negative("g2p", g2p)?;
    Ok(gt1 + g2p)
}

/// Translation-stage geometry mapping total delay to interferometer phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageGeometry {
    pub scale: f64,
    /// Free-space wavelength `λ₀`, metres.
    pub wavelength: f64,
}

impl StageGeometry {
    pub fn new(scale: f64, wavelength: f64) -> Result<Self> {
        if !(scale > 0.0) || !(wavelength > 0.0) {
            return Err(Error::domain(format!(
                "stage scale and wavelength must be > 0, got ({scale}, {wavelength})"
            )));
        }
        Ok(Self { scale, wavelength })
    }

    /// Delay over which the phase advances by `2π`.
    pub fn period(&self) -> f64 {
        self.wavelength / self.scale
    }
}

/// `φ = 2π s x / λ₀` for total delay `x`.
pub fn phase_from_stage(x: f64, geom: &StageGeometry) -> f64 {
    TAU * geom.scale * x / geom.wavelength
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlasmonicPhase {
    /// `k_spp`, rad/m.
    pub wavenumber: f64,
    pub length: f64,
}

/// `δ = k_spp ℓ`, optionally reduced into `[0, 2π)`.
pub fn delta_from_waveguide(p: &PlasmonicPhase, reduce: bool) -> Result<f64> {
    non_negative("waveguide length", p.length)?;
    let delta = p.wavenumber * p.length;
    Ok(if reduce { wrap_phase(delta) } else { delta })
}

/// Reduce an angle into `[0, 2π)`.
pub fn wrap_phase(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r >= TAU { 0.0 } else { r }
}

/// Reduce an angle into `(−π, π]`.
pub fn wrap_phase_signed(angle: f64) -> f64 {
    let r = wrap_phase(angle);
    if r > PI { r - TAU } else { r }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn pure_propagation_extremes() {
        let a = propagate_pure(0.7, 0.7);
        assert!(a.photon_in_mode2.norm() < 1e-15);
        assert!(close(a.photon_in_mode1.im, 1.0, 1e-15));
        let b = propagate_pure(0.7 + PI, 0.7);
        assert!(close(b.photon_in_mode2.norm(), 1.0, 1e-15));
        let c = propagate_pure(0.7 + PI / 2.0, 0.7);
        assert!(close(c.photon_in_mode1.norm_sqr(), 0.5, 1e-15));
        assert!(close(c.photon_in_mode2.norm_sqr(), 0.5, 1e-15));
    }

    #[test]
    fn pure_propagation_matches_ideal_fringe() {
        for k in 0..50 {
            let phi = k as f64 * 0.37;
            let a = propagate_pure(phi, 1.1);
            assert!(close(a.photon_in_mode1.norm_sqr() + a.photon_in_mode2.norm_sqr(), 1.0, 1e-14));
            let p = MziModel::Ideal { delta: 1.1 }.fringe_probability(phi).unwrap();
            assert!(close(a.photon_in_mode1.norm_sqr(), p, 1e-14));
        }
    }

    #[test]
    fn ideal_extremes() {
        let m = MziModel::Ideal { delta: 0.4 };
        assert!(close(m.fringe_probability(0.4).unwrap(), 1.0, 1e-15));
        assert!(close(m.fringe_probability(0.4 + PI).unwrap(), 0.0, 1e-15));
        assert_eq!(m.visibility().unwrap(), 1.0);
    }

    #[test]
    fn nd_balanced_example() {
        let ln2 = 2f64.ln();
        let m = MziModel::NdBalanced { delta: 0.0, gamma_free: ln2, gt1: ln2, gt2s: 0.0 };
        assert!(close(m.fringe_probability(0.0).unwrap(), 0.5, 1e-15));
    }

    #[test]
    fn full_model_is_unnormalized() {
        let m = MziModel::Full {
            delta: 0.0,
            reflectance: 0.5,
            transmittance: 0.5,
            g1p: 0.0,
            g2p: 0.0,
            gt1: 0.0,
            gamma_eff: 0.0,
        };
        assert!(close(m.fringe_probability(0.0).unwrap(), 2.0, 1e-15));
        assert!(m.validate(Validation::Rate).is_ok());
        assert!(m.validate(Validation::StrictProbability).is_err());
    }

    #[test]
    fn balanced_visibility_is_exp_gamma_eff() {
        let gt1 = 1.33;
        let g2p = 0.2;
        let m = MziModel::Full {
            delta: 0.3,
            reflectance: 0.5,
            transmittance: 0.5,
            g1p: balance_free_arm(gt1, g2p).unwrap(),
            g2p,
            gt1,
            gamma_eff: 0.893,
        };
        let v = m.visibility().unwrap();
        assert!(close(v, (-0.893f64).exp(), 1e-14));
        assert!(close(v, 0.409, 5e-4));
    }

    #[test]
    fn single_arm_has_zero_visibility() {
        let m = MziModel::Full {
            delta: 0.0,
            reflectance: 0.0,
            transmittance: 0.9,
            g1p: 0.1,
            g2p: 0.1,
            gt1: 1.0,
            gamma_eff: 0.2,
        };
        assert_eq!(m.visibility().unwrap(), 0.0);
    }

    #[test]
    fn fully_damped_model_is_degenerate() {
        let m = MziModel::Full {
            delta: 0.0,
            reflectance: 0.0,
            transmittance: 0.0,
            g1p: 0.0,
            g2p: 0.0,
            gt1: 0.0,
            gamma_eff: 0.0,
        };
        assert!(matches!(m.visibility(), Err(Error::DegenerateModel(_))));
    }

    #[test]
    fn balance_free_arm_examples() {
        assert!(close(balance_free_arm(1.33, 0.2).unwrap(), 1.53, 1e-15));
        assert_eq!(balance_free_arm(0.0, 0.0).unwrap(), 0.0);
        assert!(balance_free_arm(-0.1, 0.0).is_err());

        let (gt1, g2p) = (1.33, 0.2);
        let g1p = balance_free_arm(gt1, g2p).unwrap();
        let r = 0.5;
        assert!(close(r * (-g1p).exp(), r * (-(gt1 + g2p)).exp(), 1e-15));
    }

    #[test]
    fn invariant_violations_are_rejected() {
        let bad = MziModel::Full {
            delta: 0.0,
            reflectance: 0.7,
            transmittance: 0.7,
            g1p: 0.0,
            g2p: 0.0,
            gt1: 0.0,
            gamma_eff: 0.0,
        };
        assert!(bad.fringe_probability(0.0).is_err());
        let neg = MziModel::Damped { delta: 0.0, gt1: -1.0, gt2s: 0.0 };
        assert!(neg.fringe_probability(0.0).is_err());
    }

    #[test]
    fn stage_phase_examples() {
        let g = StageGeometry::new(1.0, 810e-9).unwrap();
        assert!(close(phase_from_stage(810e-9, &g), TAU, 1e-12));
        let half = StageGeometry::new(0.5, 810e-9).unwrap();
        assert!(close(phase_from_stage(810e-9, &half), PI, 1e-12));
        assert_eq!(phase_from_stage(0.0, &g), 0.0);
        assert!(StageGeometry::new(0.0, 1.0).is_err());
    }

    #[test]
    fn waveguide_phase_examples() {
        let lambda = 780e-9;
        let p = PlasmonicPhase { wavenumber: TAU / lambda, length: lambda };
        assert!(close(delta_from_waveguide(&p, false).unwrap(), TAU, 1e-12));
        let p0 = PlasmonicPhase { wavenumber: 3.0e7, length: 0.0 };
        assert_eq!(delta_from_waveguide(&p0, false).unwrap(), 0.0);
        let p1 = PlasmonicPhase { wavenumber: 1e7, length: 10e-6 };
        assert!(close(delta_from_waveguide(&p1, false).unwrap(), 100.0, 1e-10));
        let reduced = delta_from_waveguide(&p1, true).unwrap();
        assert!((0.0..TAU).contains(&reduced));
        assert!(close(reduced, 100.0 - 15.0 * TAU, 1e-10));
    }
}
