use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::lm::{self, Problem};
use super::Measured;
use crate::channels::gamma1_from_propagation;
use crate::error::{Error, Result};
use crate::simkit::DecayScan;

/// Exponential decay `counts = C₀ e^{-ℓ/L}` fitted to a length scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Propagation length, metres.
    pub propagation_length: Measured,
    /// Counts extrapolated to zero length at the first point's integration time.
    pub amplitude: Measured,
    pub gamma1: Measured,
    pub t1: Measured,
    pub cost: f64,
    pub iterations: usize,
}

struct DecayProblem {
    /// Lengths in micrometres, for conditioning.
    lengths_um: Vec<f64>,
    exposure: Vec<f64>,
    counts: Vec<f64>,
    sigma: Vec<f64>,
}

impl Problem for DecayProblem {
    fn n_params(&self) -> usize {
        2
    }

    fn n_residuals(&self) -> usize {
        self.counts.len()
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        for i in 0..out.len() {
            let model = p[0] * self.exposure[i] * (-self.lengths_um[i] / p[1]).exp();
            out[i] = (self.counts[i] - model) / self.sigma[i];
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut DMatrix<f64>) {
        for i in 0..self.counts.len() {
            let e = self.exposure[i] * (-self.lengths_um[i] / p[1]).exp();
            out[(i, 0)] = -e / self.sigma[i];
            out[(i, 1)] = -p[0] * e * self.lengths_um[i] / (p[1] * p[1]) / self.sigma[i];
        }
    }

    fn project(&self, p: &mut [f64]) -> bool {
        if p[1] < 1e-9 {
            p[1] = 1e-9;
            return true;
        }
        false
    }
}

/// Weighted least squares with Poisson weights `1/max(counts, 1)`.
///
/// Seeded by a log-linear fit over the non-zero points.
pub fn fit_exponential_decay(scan: &DecayScan, group_velocity: f64) -> Result<DecayFit> {
    let pts = &scan.points;
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "decay fit needs at least 3 lengths, got {}",
            pts.len()
        )));
    }
    if !(group_velocity > 0.0) {
        return Err(Error::domain("group velocity must be > 0"));
    }
    let t_ref = pts[0].integration_time;
    let problem = DecayProblem {
        lengths_um: pts.iter().map(|p| p.length * 1e6).collect(),
        exposure: pts.iter().map(|p| p.integration_time / t_ref).collect(),
        counts: pts.iter().map(|p| p.counts).collect(),
        sigma: pts.iter().map(|p| p.counts.max(1.0).sqrt()).collect(),
    };

    // log-domain seed, weights ∝ counts
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut positive = 0;
    for i in 0..pts.len() {
        if problem.counts[i] <= 0.0 {
            continue;
        }
        positive += 1;
        let w = problem.counts[i];
        let x = problem.lengths_um[i];
        let y = (problem.counts[i] / problem.exposure[i]).ln();
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    if positive < 2 {
        return Err(Error::InsufficientData("decay fit needs at least 2 non-zero points".into()));
    }
    let denom = sw * sxx - sx * sx;
    let slope = if denom > 0.0 { (sw * sxy - sx * sy) / denom } else { 0.0 };
    let intercept = (sy - slope * sx) / sw;
    let l0 = if slope < 0.0 { -1.0 / slope } else { 10.0 * problem.lengths_um.iter().cloned().fold(1.0, f64::max) };
    let start = [intercept.exp(), l0];

    let sol = lm::minimize(&problem, &start, lm::Settings::default())?;
    let cov = sol.covariance.ok_or_else(|| Error::FitFailure {
        reason: "singular decay-fit normal matrix".into(),
        iterations: sol.iterations,
        cost: sol.cost,
    })?;
    let l = Measured::new(sol.params[1] * 1e-6, cov[(1, 1)].max(0.0).sqrt() * 1e-6);
    let amplitude = Measured::new(sol.params[0], cov[(0, 0)].max(0.0).sqrt());
    let g1 = gamma1_from_propagation(l.value, group_velocity)?;
    let g1_std = group_velocity * l.std / (l.value * l.value);
    Ok(DecayFit {
        propagation_length: l,
        amplitude,
        gamma1: Measured::new(g1, g1_std),
        t1: Measured::new(l.value / group_velocity, l.std / group_velocity),
        cost: sol.cost,
        iterations: sol.iterations,
    })
}
