//! Parameter extraction: decay fit for `L` and `Γ₁`, fringe fits with
//! Monte-Carlo errors for `Γ_eff(ℓ)`, a weighted line through `Γ_eff(ℓ)` for
//! `Γ₂*/v_g` and `Γ_int`, and the combined summary of rates and times.

mod decay;
mod fringe;
mod line;
pub(crate) mod lm;
mod summary;

use serde::{Deserialize, Deserializer, Serialize};

pub use decay::{fit_exponential_decay, DecayFit};
pub use fringe::{empirical_visibility, fit_fringe, fit_fringe_windows, monte_carlo_fringe, FringeFit, MonteCarloSummary};
pub use line::{fit_gamma_eff_line, monte_carlo_slope_std, LineFit, LinePoint};
pub use summary::{summarize, DecoherenceSummary};

/// A value with its standard deviation.
/// Non-finite values serialize as JSON `null` and read back as `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    #[serde(deserialize_with = "null_as_infinity")]
    pub value: f64,
    #[serde(deserialize_with = "null_as_infinity")]
    pub std: f64,
}

impl Measured {
    pub fn new(value: f64, std: f64) -> Self {
        Self { value, std }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, std: 0.0 }
    }
}

pub(crate) fn null_as_infinity<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}
