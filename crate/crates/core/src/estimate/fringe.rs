//! Fringe fitting: the effective dephasing `Γ_eff` of one waveguide from its
//! interferometer scan, with Monte-Carlo error bars.
//!
//! Free parameters are `Γ_eff`, the waveguide phase `δ`, the stage scale `s`
//! and the input amplitude `I_in`; the arm dampings and beamsplitter ratios come
//! from [`FringeKnowns`].

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lm::{self, Problem};
use crate::error::{Error, Result};
use crate::mzi::wrap_phase;
use crate::simkit::{poisson_draw, stream_rng, FringeKnowns, FringeScan};

/// Parameters below this are reported as sitting on the `Γ_eff ≥ 0` bound.
const BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    pub gamma_eff: f64,
    /// Standard error from the fit covariance.
    pub gamma_eff_std: f64,
    pub delta: f64,
    pub scale: f64,
    pub amplitude: f64,
    /// Sum of squared weighted residuals.
    pub goodness: f64,
    /// `Γ_eff` ended on its lower bound.
    pub clipped: bool,
}

/// Arm terms of the full model: `p = base + osc·e^{-Γ_eff}·cos(φ − δ)`.
#[derive(Debug, Clone, Copy)]
struct ArmTerms {
    base: f64,
    osc: f64,
}

impl ArmTerms {
    fn from_known(k: &FringeKnowns) -> Result<Self> {
        let t = k.model(0.0, 0.0).terms()?;
        if t.base <= 0.0 {
            return Err(Error::DegenerateModel("both interferometer arms are fully damped".into()));
        }
        Ok(Self { base: t.base, osc: t.amplitude })
    }
}

struct FringeProblem<'a> {
    x: &'a [f64],
    y: Vec<f64>,
    sigma: Vec<f64>,
    arms: ArmTerms,
    wavelength: f64,
}

impl FringeProblem<'_> {
    fn phase(&self, i: usize, scale: f64) -> f64 {
        TAU * scale * self.x[i] / self.wavelength
    }
}

// params: [gamma_eff, delta, scale, amplitude]
impl Problem for FringeProblem<'_> {
    fn n_params(&self) -> usize {
        4
    }

    fn n_residuals(&self) -> usize {
        self.y.len()
    }

    fn residuals(&self, p: &[f64], out: &mut [f64]) {
        let osc = self.arms.osc * (-p[0]).exp();
        for i in 0..out.len() {
            let model = p[3] * (self.arms.base + osc * (self.phase(i, p[2]) - p[1]).cos());
            out[i] = (self.y[i] - model) / self.sigma[i];
        }
    }

    fn jacobian(&self, p: &[f64], out: &mut DMatrix<f64>) {
        let osc = self.arms.osc * (-p[0]).exp();
        for i in 0..self.y.len() {
            let theta = self.phase(i, p[2]) - p[1];
            let (s, c) = theta.sin_cos();
            let w = -1.0 / self.sigma[i];
            out[(i, 0)] = w * (-p[3] * osc * c);
            out[(i, 1)] = w * (p[3] * osc * s);
            out[(i, 2)] = w * (-p[3] * osc * s * TAU * self.x[i] / self.wavelength);
            out[(i, 3)] = w * (self.arms.base + osc * c);
        }
    }

    fn project(&self, p: &mut [f64]) -> bool {
        let mut clipped = false;
        if p[0] < 0.0 {
            p[0] = 0.0;
            clipped = true;
        }
        if p[2] < 1e-6 {
            p[2] = 1e-6;
            clipped = true;
        }
        clipped
    }
}

/// Weighted sinusoid `a + b cos φ + c sin φ` through the counts at a fixed stage scale.
fn harmonic_fit(scan: &FringeScan, sigma: &[f64], scale: f64) -> Option<(f64, f64, f64)> {
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for (p, s) in scan.points.iter().zip(sigma) {
        let phi = TAU * scale * p.position / scan.geometry.wavelength;
        let row = Vector3::new(1.0, phi.cos(), phi.sin());
        let w = 1.0 / (s * s);
        ata += w * row * row.transpose();
        aty += w * p.counts * row;
    }
    let sol = ata.try_inverse()? * aty;
    Some((sol[0], sol[1], sol[2]))
}

fn point_sigmas(scan: &FringeScan) -> Vec<f64> {
    scan.points
        .iter()
        .map(|p| if p.sigma > 0.0 { p.sigma.max(1.0) } else { p.counts.max(1.0).sqrt() })
        .collect()
}

/// Visibility of the best-fitting sinusoid at stage scale `scale`.
///
/// Model-free apart from the fringe period; under balanced arms and `R = T`
/// it estimates `e^{-Γ_eff}`.
pub fn empirical_visibility(scan: &FringeScan, scale: f64) -> Result<f64> {
    let sigma = point_sigmas(scan);
    let (a, b, c) = harmonic_fit(scan, &sigma, scale)
        .ok_or_else(|| Error::InsufficientData("fringe scan does not determine a sinusoid".into()))?;
    if a <= 0.0 {
        return Err(Error::DegenerateModel("fringe mean is not positive".into()));
    }
    Ok(b.hypot(c) / a)
}

fn check_scan(scan: &FringeScan, min_periods: f64) -> Result<()> {
    if scan.points.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "fringe fit needs at least 8 points, got {}",
            scan.points.len()
        )));
    }
    let span = scan.span_periods();
    if span < min_periods - 1e-9 {
        return Err(Error::InsufficientData(format!(
            "fringe scan spans {span:.3} periods, need {min_periods}"
        )));
    }
    Ok(())
}

/// Fits one scan, trying each of the starting phases `0, π/2, π, 3π/2`.
pub fn fit_fringe(scan: &FringeScan) -> Result<FringeFit> {
    check_scan(scan, 1.0)?;
    fit_checked(scan)
}

fn fit_checked(scan: &FringeScan) -> Result<FringeFit> {
    let arms = ArmTerms::from_known(&scan.known)?;
    let sigma = point_sigmas(scan);
    let x: Vec<f64> = scan.points.iter().map(|p| p.position).collect();
    let problem = FringeProblem {
        x: &x,
        y: scan.points.iter().map(|p| p.counts).collect(),
        sigma: sigma.clone(),
        arms,
        wavelength: scan.geometry.wavelength,
    };

    let s0 = scan.geometry.scale;
    let (a, b, c) = harmonic_fit(scan, &sigma, s0).unwrap_or((1.0, 0.0, 0.0));
    let amp0 = if a > 0.0 { a / arms.base } else { 1.0 };
    let v0 = if a > 0.0 { b.hypot(c) / a } else { 0.0 };
    let max_v = arms.osc / arms.base;
    let g0 = if v0 > 0.0 && max_v > 0.0 { (max_v / v0).ln().max(0.0) } else { 1.0 };
    let g0 = g0.min(20.0);

    let mut best: Option<lm::Solution> = None;
    let mut last_err = None;
    for delta0 in [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2] {
        match lm::minimize(&problem, &[g0, delta0, s0, amp0], lm::Settings::default()) {
            Ok(sol) if sol.params.iter().all(|v| v.is_finite()) => {
                if best.as_ref().is_none_or(|b| sol.cost < b.cost) {
                    best = Some(sol);
                }
            }
            Ok(sol) => {
                last_err = Some(Error::FitFailure {
                    reason: "non-finite parameters".into(),
                    iterations: sol.iterations,
                    cost: sol.cost,
                })
            }
            Err(e) => last_err = Some(e),
        }
    }
    let sol = best.ok_or_else(|| {
        last_err.unwrap_or_else(|| Error::FitFailure {
            reason: "all starting points failed".into(),
            iterations: 0,
            cost: f64::NAN,
        })
    })?;

    let mut gamma_eff = sol.params[0];
    let clipped = gamma_eff <= BOUND_TOLERANCE;
    if clipped {
        gamma_eff = 0.0;
    }
    let gamma_eff_std = sol
        .covariance
        .as_ref()
        .map(|c| c[(0, 0)].max(0.0).sqrt())
        .unwrap_or(f64::NAN);
    Ok(FringeFit {
        gamma_eff,
        gamma_eff_std,
        delta: wrap_phase(sol.params[1]),
        scale: sol.params[2],
        amplitude: sol.params[3],
        goodness: sol.cost,
        clipped,
    })
}

/// Independent fits to disjoint windows of one period or more.
///
/// Returns an empty list unless the scan spans more than two periods.
pub fn fit_fringe_windows(scan: &FringeScan) -> Result<Vec<FringeFit>> {
    check_scan(scan, 1.0)?;
    let span = scan.span_periods();
    if span <= 2.0 + 1e-9 {
        return Ok(Vec::new());
    }
    let n_windows = span.floor() as usize;
    let x0 = scan.points[0].position;
    let width = (scan.points[scan.points.len() - 1].position - x0) / n_windows as f64;
    let mut groups = vec![Vec::new(); n_windows];
    for p in &scan.points {
        let k = (((p.position - x0) / width) as usize).min(n_windows - 1);
        groups[k].push(*p);
    }
    groups
        .into_iter()
        .map(|points| {
            let window = FringeScan { points, ..scan.clone() };
            if window.points.len() < 8 {
                return Err(Error::InsufficientData(
                    "fringe window has fewer than 8 points".into(),
                ));
            }
            fit_checked(&window)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub mean: f64,
    /// Sample standard deviation; absent with fewer than two successful instances.
    pub std: Option<f64>,
    /// Fitted `Γ_eff` per instance, `None` where the fit failed.
    pub instances: Vec<Option<f64>>,
    pub failures: usize,
}

/// Refits `n_instances` copies of the scan whose counts are redrawn around the
/// measured ones: Poisson when the recorded sigma is `√counts`, Gaussian with the
/// recorded sigma otherwise. Instance `k` draws from `stream_rng(seed, stream, k)`.
pub fn monte_carlo_fringe(scan: &FringeScan, n_instances: usize, seed: u64, stream: u64) -> Result<MonteCarloSummary> {
    if n_instances == 0 {
        return Err(Error::domain("Monte-Carlo needs at least one instance"));
    }
    check_scan(scan, 1.0)?;
    let outcomes: Vec<Option<f64>> = (0..n_instances)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, stream, k as u64);
            let points = scan
                .points
                .iter()
                .map(|p| {
                    let poissonian = (p.sigma - p.counts.sqrt()).abs() <= 1e-9 * p.sigma.max(1.0);
                    let counts = if poissonian {
                        poisson_draw(&mut rng, p.counts)
                    } else {
                        Normal::new(p.counts, p.sigma)
                            .map(|d| d.sample(&mut rng).max(0.0))
                            .unwrap_or(p.counts)
                    };
                    crate::simkit::FringePoint { counts, ..*p }
                })
                .collect();
            let instance = FringeScan { points, ..scan.clone() };
            fit_checked(&instance).ok().map(|f| f.gamma_eff)
        })
        .collect();

    let ok: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let failures = n_instances - ok.len();
    if failures * 10 > n_instances {
        return Err(Error::FitFailure {
            reason: format!("{failures} of {n_instances} Monte-Carlo instances failed"),
            iterations: 0,
            cost: f64::NAN,
        });
    }
    let (mean, std) = mean_std(&ok);
    Ok(MonteCarloSummary { mean, std, instances: outcomes, failures })
}

pub(crate) fn mean_std(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Some(var.sqrt()))
}
