use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePoint {
    /// Metres.
    pub length: f64,
    pub gamma_eff: f64,
    pub std: f64,
}

/// `Γ_eff(ℓ) = slope·ℓ + intercept`; the slope is `Γ₂*/v_g`, the intercept `Γ_int`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    /// Per metre.
    pub slope: f64,
    pub slope_std: f64,
    pub intercept: f64,
    pub intercept_std: f64,
    /// Covariance of `(slope, intercept)`.
    pub covariance: [[f64; 2]; 2],
    pub chi2: f64,
}

/// Weighted linear least squares with weights `1/std²`, solved by QR of the
/// whitened design matrix.
pub fn fit_gamma_eff_line(points: &[LinePoint]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(Error::domain(format!("line fit needs at least 2 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.std > 0.0) || !p.std.is_finite()) {
        return Err(Error::domain(format!("point at {:e} m has non-positive std {}", p.length, p.std)));
    }
    let first = points[0].length;
    if points.iter().all(|p| p.length == first) {
        return Err(Error::domain("line fit needs at least 2 distinct lengths"));
    }

    // centre and scale lengths so the columns are comparable
    let centre = points.iter().map(|p| p.length).sum::<f64>() / points.len() as f64;
    let scale = points.iter().map(|p| (p.length - centre).abs()).fold(0.0, f64::max);
    let n = points.len();
    let mut design = DMatrix::zeros(n, 2);
    let mut rhs = DVector::zeros(n);
    for (i, p) in points.iter().enumerate() {
        design[(i, 0)] = (p.length - centre) / scale / p.std;
        design[(i, 1)] = 1.0 / p.std;
        rhs[i] = p.gamma_eff / p.std;
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * &rhs;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::domain("degenerate line-fit design"))?;
    let r_inv = r
        .try_inverse()
        .ok_or_else(|| Error::domain("degenerate line-fit design"))?;
    let cov_scaled = &r_inv * r_inv.transpose();

    // undo the centring: slope = b0/scale, intercept = b1 − b0·centre/scale
    let jac = nalgebra::Matrix2::new(1.0 / scale, 0.0, -centre / scale, 1.0);
    let cov_s = nalgebra::Matrix2::new(
        cov_scaled[(0, 0)],
        cov_scaled[(0, 1)],
        cov_scaled[(1, 0)],
        cov_scaled[(1, 1)],
    );
    let cov = jac * cov_s * jac.transpose();
    let slope = beta[0] / scale;
    let intercept = beta[1] - beta[0] * centre / scale;
    let chi2 = (&design * &beta - &rhs).norm_squared();
    Ok(LineFit {
        slope,
        slope_std: cov[(0, 0)].max(0.0).sqrt(),
        intercept,
        intercept_std: cov[(1, 1)].max(0.0).sqrt(),
        covariance: [[cov[(0, 0)], cov[(0, 1)]], [cov[(1, 0)], cov[(1, 1)]]],
        chi2,
    })
}

/// Spread of slopes obtained by fitting the line to each Monte-Carlo instance,
/// pairing instance `k` across lengths. Instances missing at any length are skipped.
pub fn monte_carlo_slope_std(lengths: &[f64], instances: &[&[Option<f64>]], stds: &[f64]) -> Option<f64> {
    let n = instances.iter().map(|v| v.len()).min()?;
    let slopes: Vec<f64> = (0..n)
        .filter_map(|k| {
            let pts: Option<Vec<LinePoint>> = lengths
                .iter()
                .zip(instances)
                .zip(stds)
                .map(|((&length, inst), &std)| inst[k].map(|g| LinePoint { length, gamma_eff: g, std }))
                .collect();
            fit_gamma_eff_line(&pts?).ok().map(|f| f.slope)
        })
        .collect();
    super::fringe::mean_std(&slopes).1
}
