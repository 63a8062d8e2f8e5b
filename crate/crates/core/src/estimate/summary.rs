use serde::{Deserialize, Serialize};

use super::Measured;
use crate::channels::t2_from;
use crate::error::{Error, Result};
use crate::simkit::Regime;

/// Rates and times of both damping processes with first-order uncertainties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceSummary {
    pub regime: Option<Regime>,
    pub gamma1: Measured,
    pub gamma2_star: Measured,
    pub gamma2: Measured,
    pub t1: Measured,
    /// Infinite when the pure-dephasing slope is zero.
    pub t2_star: Measured,
    pub t2: Measured,
}

impl DecoherenceSummary {
    pub fn with_regime(self, regime: Regime) -> Self {
        Self { regime: Some(regime), ..self }
    }

    /// `T₂` has reached its amplitude-damping limit `2T₁`.
    pub fn at_t2_bound(&self) -> bool {
        self.t2_star.value.is_infinite()
    }
}

/// Combines `Γ₁` and the dephasing slope `Γ₂*/v_g` (per metre) into the full set
/// of rates and times. A zero slope gives `T₂* = ∞` and `T₂ = 2T₁`.
pub fn summarize(gamma1: Measured, slope: Measured, group_velocity: f64) -> Result<DecoherenceSummary> {
    if !(gamma1.value > 0.0) {
        return Err(Error::domain(format!("gamma1 must be > 0, got {}", gamma1.value)));
    }
    if !(slope.value >= 0.0) {
        return Err(Error::domain(format!("dephasing slope must be >= 0, got {}", slope.value)));
    }
    if !(group_velocity > 0.0) {
        return Err(Error::domain(format!("group velocity must be > 0, got {group_velocity}")));
    }
    let g2s = Measured::new(slope.value * group_velocity, slope.std * group_velocity);
    let t1 = Measured::new(1.0 / gamma1.value, gamma1.std / (gamma1.value * gamma1.value));
    let t2_star = if g2s.value > 0.0 {
        Measured::new(1.0 / g2s.value, g2s.std / (g2s.value * g2s.value))
    } else {
        Measured::new(f64::INFINITY, f64::INFINITY)
    };
    let t2_value = t2_from(t1.value, t2_star.value)?;
    let g2_value = 1.0 / t2_value;
    let g2_std = (0.25 * gamma1.std * gamma1.std + g2s.std * g2s.std).sqrt();
    Ok(DecoherenceSummary {
        regime: None,
        gamma1,
        gamma2_star: g2s,
        gamma2: Measured::new(g2_value, g2_std),
        t1,
        t2_star,
        t2: Measured::new(t2_value, g2_std / (g2_value * g2_value)),
    })
}
