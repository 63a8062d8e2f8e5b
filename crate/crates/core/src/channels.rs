//! Single-excitation density matrices and the damping channels acting on them.
//!
//! The plasmon state lives in the `{|0⟩, |1⟩}` number basis. Amplitude damping
//! (rate `Γ₁`) moves population from `|1⟩` to `|0⟩` and shrinks the coherence
//! by `e^{-Γ₁t/2}`; pure phase damping (rate `Γ₂*`) shrinks only the coherence,
//! by `e^{-Γ₂*t}`. On this basis the two maps commute, so propagation through a
//! waveguide of length `ℓ` is their composition at `t = ℓ / v_g`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute tolerance used for density-matrix invariant checks.
pub const STATE_TOLERANCE: f64 = 1e-12;

/// A 2×2 Hermitian, unit-trace, positive semidefinite matrix in the number basis.
///
/// `ρ₁₀` is the conjugate of `ρ₀₁` and is not stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    rho00: f64,
    rho11: f64,
    rho01: Complex64,
}

impl DensityMatrix2 {
    pub fn new(rho00: f64, rho11: f64, rho01: Complex64) -> Result<Self> {
        if !(rho00.is_finite() && rho11.is_finite() && rho01.re.is_finite() && rho01.im.is_finite())
        {
            return Err(Error::domain("density matrix entries must be finite"));
        }
        if rho00 < -STATE_TOLERANCE || rho11 < -STATE_TOLERANCE {
            return Err(Error::domain(format!(
                "populations must be non-negative, got ({rho00}, {rho11})"
            )));
        }
        if (rho00 + rho11 - 1.0).abs() > STATE_TOLERANCE {
            return Err(Error::domain(format!(
                "trace must be 1, got {}",
                rho00 + rho11
            )));
        }
        if rho01.norm_sqr() > rho00 * rho11 + STATE_TOLERANCE {
            return Err(Error::domain(format!(
                "|rho01|^2 = {} exceeds rho00*rho11 = {}",
                rho01.norm_sqr(),
                rho00 * rho11
            )));
        }
        Ok(Self { rho00, rho11, rho01 })
    }

    /// Real coherence shorthand.
    pub fn real(rho00: f64, rho11: f64, rho01: f64) -> Result<Self> {
        Self::new(rho00, rho11, Complex64::new(rho01, 0.0))
    }

    pub fn ground() -> Self {
        Self { rho00: 1.0, rho11: 0.0, rho01: Complex64::new(0.0, 0.0) }
    }

    pub fn excited() -> Self {
        Self { rho00: 0.0, rho11: 1.0, rho01: Complex64::new(0.0, 0.0) }
    }

    /// The pure state `cos θ |0⟩ + e^{iφ} sin θ |1⟩`.
    pub fn pure(theta: f64, phase: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            rho00: c * c,
            rho11: s * s,
            rho01: Complex64::from_polar(c * s, -phase),
        }
    }

    pub fn rho00(&self) -> f64 {
        self.rho00
    }

    pub fn rho11(&self) -> f64 {
        self.rho11
    }

    pub fn rho01(&self) -> Complex64 {
        self.rho01
    }

    pub fn rho10(&self) -> Complex64 {
        self.rho01.conj()
    }

    pub fn trace(&self) -> f64 {
        self.rho00 + self.rho11
    }

    /// `ρ₀₀ρ₁₁ − |ρ₀₁|²`, the determinant; non-negative for a valid state.
    pub fn positivity_margin(&self) -> f64 {
        self.rho00 * self.rho11 - self.rho01.norm_sqr()
    }
}

/// Ground-truth damping rates of a waveguide mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// `Γ₁`, s⁻¹.
    pub gamma1: f64,
    /// `Γ₂*`, s⁻¹.
    pub gamma2_star: f64,
    /// `v_g`, m/s.
    pub group_velocity: f64,
}

impl ChannelParams {
    pub fn new(gamma1: f64, gamma2_star: f64, group_velocity: f64) -> Result<Self> {
        let p = Self { gamma1, gamma2_star, group_velocity };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma1 >= 0.0 && self.gamma1.is_finite()) {
            return Err(Error::domain(format!("gamma1 must be >= 0, got {}", self.gamma1)));
        }
        if !(self.gamma2_star >= 0.0 && self.gamma2_star.is_finite()) {
            return Err(Error::domain(format!(
                "gamma2_star must be >= 0, got {}",
                self.gamma2_star
            )));
        }
        if !(self.group_velocity > 0.0 && self.group_velocity.is_finite()) {
            return Err(Error::domain(format!(
                "group velocity must be > 0, got {}",
                self.group_velocity
            )));
        }
        Ok(())
    }

    /// Propagation time over `length` metres.
    pub fn transit_time(&self, length: f64) -> f64 {
        length / self.group_velocity
    }

    /// Propagation length `L = v_g / Γ₁`.
    pub fn propagation_length(&self) -> f64 {
        self.group_velocity / self.gamma1
    }
}

/// `T₁`, `T₂*`, `T₂` in seconds. `t2_star` is infinite when there is no pure dephasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingTimes {
    pub t1: f64,
    pub t2_star: f64,
    pub t2: f64,
}

impl DampingTimes {
    pub fn from_t1_t2_star(t1: f64, t2_star: f64) -> Result<Self> {
        Ok(Self { t1, t2_star, t2: t2_from(t1, t2_star)? })
    }

    pub fn from_params(params: &ChannelParams) -> Result<Self> {
        params.validate()?;
        if params.gamma1 == 0.0 {
            return Err(Error::domain("T1 is undefined for gamma1 = 0"));
        }
        let t2_star = if params.gamma2_star == 0.0 {
            f64::INFINITY
        } else {
            1.0 / params.gamma2_star
        };
        Self::from_t1_t2_star(1.0 / params.gamma1, t2_star)
    }
}

fn check_rate_time(rate: f64, t: f64, name: &str) -> Result<()> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::domain(format!("{name} must be >= 0, got {rate}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time must be >= 0, got {t}")));
    }
    Ok(())
}

/// Amplitude damping for a time `t` at rate `gamma1`.
pub fn apply_amplitude_damping(rho: &DensityMatrix2, gamma1: f64, t: f64) -> Result<DensityMatrix2> {
    check_rate_time(gamma1, t, "gamma1")?;
    let survive = (-gamma1 * t).exp();
    Ok(DensityMatrix2 {
        rho00: rho.rho00 + (1.0 - survive) * rho.rho11,
        rho11: survive * rho.rho11,
        rho01: rho.rho01 * (-0.5 * gamma1 * t).exp(),
    })
}

/// Pure phase damping for a time `t` at rate `gamma2_star`.
pub fn apply_phase_damping(rho: &DensityMatrix2, gamma2_star: f64, t: f64) -> Result<DensityMatrix2> {
    check_rate_time(gamma2_star, t, "gamma2_star")?;
    Ok(DensityMatrix2 {
        rho01: rho.rho01 * (-gamma2_star * t).exp(),
        ..*rho
    })
}

/// Both channels over a waveguide of the given length, `t = length / v_g`.
///
/// The coherence picks up `e^{-Γ₂*t} e^{-Γ₁t/2}`.
pub fn apply_waveguide_channel(
    rho: &DensityMatrix2,
    params: &ChannelParams,
    length: f64,
) -> Result<DensityMatrix2> {
    params.validate()?;
    if !(length >= 0.0) || !length.is_finite() {
        return Err(Error::domain(format!("length must be >= 0, got {length}")));
    }
    let t = params.transit_time(length);
    let damped = apply_amplitude_damping(rho, params.gamma1, t)?;
    apply_phase_damping(&damped, params.gamma2_star, t)
}

/// `Γ₁ = v_g / L`.
pub fn gamma1_from_propagation(propagation_length: f64, group_velocity: f64) -> Result<f64> {
    if !(propagation_length > 0.0) || !(group_velocity > 0.0) {
        return Err(Error::domain(format!(
            "propagation length and group velocity must be > 0, got ({propagation_length}, {group_velocity})"
        )));
    }
    Ok(group_velocity / propagation_length)
}

/// `Γℓ / v_g`, the damping accumulated over `length`.
pub fn dimensionless_damping(gamma: f64, length: f64, group_velocity: f64) -> Result<f64> {
    if !(length >= 0.0) {
        return Err(Error::domain(format!("length must be >= 0, got {length}")));
    }
    if !(gamma >= 0.0) {
        return Err(Error::domain(format!("rate must be >= 0, got {gamma}")));
    }
    if !(group_velocity > 0.0) {
        return Err(Error::domain(format!("group velocity must be > 0, got {group_velocity}")));
    }
    Ok(gamma * length / group_velocity)
}

/// `T₂ = (1/(2T₁) + 1/T₂*)⁻¹`. Accepts `t2_star = ∞`, giving `T₂ = 2T₁`.
pub fn t2_from(t1: f64, t2_star: f64) -> Result<f64> {
    if !(t1 > 0.0) || !t1.is_finite() || !(t2_star > 0.0) {
        return Err(Error::domain(format!(
            "T1 and T2* must be > 0, got ({t1}, {t2_star})"
        )));
    }
    Ok(1.0 / (0.5 / t1 + 1.0 / t2_star))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn amplitude_damping_of_excited_state() {
        let out = apply_amplitude_damping(&DensityMatrix2::excited(), 1.0, 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert!(close(out.rho00(), 1.0 - e, 1e-15));
        assert!(close(out.rho11(), e, 1e-15));
        assert_eq!(out.rho01(), Complex64::new(0.0, 0.0));
        assert!(close(out.rho00(), 0.6321, 1e-4));
    }

    #[test]
    fn ground_state_is_fixed() {
        for gt in [0.0, 0.3, 5.0, 100.0] {
            let out = apply_amplitude_damping(&DensityMatrix2::ground(), gt, 1.0).unwrap();
            assert_eq!(out, DensityMatrix2::ground());
        }
    }

    #[test]
    fn amplitude_damping_coherence_factor() {
        let rho = DensityMatrix2::real(0.5, 0.5, 0.5).unwrap();
        let out = apply_amplitude_damping(&rho, 4f64.ln(), 1.0).unwrap();
        assert!(close(out.rho01().re, 0.25, 1e-15));
    }

    #[test]
    fn phase_damping_examples() {
        let rho = DensityMatrix2::real(0.5, 0.5, 0.5).unwrap();
        let out = apply_phase_damping(&rho, 2f64.ln(), 1.0).unwrap();
        assert!(close(out.rho01().re, 0.25, 1e-15));
        assert_eq!(out.rho00(), 0.5);
        assert_eq!(out.rho11(), 0.5);

        let zero_t = apply_phase_damping(&rho, 3.0, 0.0).unwrap();
        assert_eq!(zero_t, rho);

        let incoherent = DensityMatrix2::real(0.3, 0.7, 0.0).unwrap();
        assert_eq!(apply_phase_damping(&incoherent, 7.0, 2.0).unwrap(), incoherent);
    }

    #[test]
    fn waveguide_channel_multiplies_factors() {
        let vg = 2.0e8;
        let length = 1.0e-5;
        let t = length / vg;
        let params = ChannelParams::new(4f64.ln() / t, 2f64.ln() / t, vg).unwrap();
        let rho = DensityMatrix2::real(0.5, 0.5, 0.5).unwrap();
        let out = apply_waveguide_channel(&rho, &params, length).unwrap();
        assert!(close(out.rho01().re, 0.125, 1e-14));
        assert_eq!(apply_waveguide_channel(&rho, &params, 0.0).unwrap(), rho);
    }

    #[test]
    fn negative_inputs_are_rejected() {
        let rho = DensityMatrix2::ground();
        assert!(matches!(apply_amplitude_damping(&rho, -1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(apply_amplitude_damping(&rho, 1.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(apply_phase_damping(&rho, -1.0, 1.0), Err(Error::Domain(_))));
        let params = ChannelParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(apply_waveguide_channel(&rho, &params, -1e-6).is_err());
        assert!(ChannelParams::new(1.0, 1.0, 0.0).is_err());
        assert!(gamma1_from_propagation(0.0, 1.0).is_err());
        assert!(gamma1_from_propagation(1.0, -1.0).is_err());
        assert!(dimensionless_damping(1.0, -1.0, 1.0).is_err());
        assert!(t2_from(0.0, 1.0).is_err());
        assert!(t2_from(1.0, 0.0).is_err());
    }

    #[test]
    fn invalid_states_are_rejected() {
        assert!(DensityMatrix2::real(0.6, 0.6, 0.0).is_err());
        assert!(DensityMatrix2::real(-0.1, 1.1, 0.0).is_err());
        assert!(DensityMatrix2::real(0.5, 0.5, 0.6).is_err());
        assert!(DensityMatrix2::real(0.5, 0.5, 0.5).is_ok());
    }

    #[test]
    fn propagation_length_conversion() {
        let vg = 2.958e8;
        let g = gamma1_from_propagation(5.85e-6, vg).unwrap();
        assert!(close(g, 5.06e13, 0.005e13));
        let g = gamma1_from_propagation(5.61e-6, vg).unwrap();
        assert!(close(g, 5.27e13, 0.005e13));
        assert!(close(gamma1_from_propagation(vg, vg).unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn dimensionless_damping_examples() {
        let vg = 2.958e8;
        assert!(close(dimensionless_damping(5.27e13, 5.61e-6, vg).unwrap(), 0.9995, 1e-4));
        assert!(close(dimensionless_damping(5.27e13, 7.47e-6, vg).unwrap(), 1.331, 1e-3));
        assert_eq!(dimensionless_damping(3.0e13, 0.0, vg).unwrap(), 0.0);
    }

    #[test]
    fn t2_examples() {
        let t2 = t2_from(1.98e-14, 8.03e-14).unwrap();
        assert!(close(t2, 2.65e-14, 0.005e-14));
        assert!(close(t2_from(3.0e-14, f64::INFINITY).unwrap(), 6.0e-14, 1e-28));
        let times = DampingTimes::from_params(&ChannelParams::new(5.0e13, 0.0, 1.0).unwrap()).unwrap();
        assert!(times.t2_star.is_infinite());
        assert!(close(times.t2, 2.0 * times.t1, 1e-28));
    }
}
