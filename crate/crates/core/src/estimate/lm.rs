//! Small dense Levenberg-Marquardt solver for weighted least squares.
//!
//! Residuals are expected pre-weighted, `r_i = (y_i − m_i) / σ_i`, so the
//! inverse of `JᵀJ` at the solution is the parameter covariance.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) trait Problem {
    fn n_params(&self) -> usize;
    fn n_residuals(&self) -> usize;
    fn residuals(&self, params: &[f64], out: &mut [f64]);
    /// Row-major `n_residuals × n_params` Jacobian of the residuals.
    fn jacobian(&self, params: &[f64], out: &mut DMatrix<f64>);
    /// Map parameters back into the feasible set; returns true if anything was clipped.
    fn project(&self, _params: &mut [f64]) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub max_iterations: usize,
    pub step_tolerance: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self { max_iterations: 200, step_tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub params: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub covariance: Option<DMatrix<f64>>,
}

fn cost_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Minimizes `Σ r_i²` from `start`. Accepted steps always decrease the cost.
pub(crate) fn minimize<P: Problem>(problem: &P, start: &[f64], settings: Settings) -> Result<Solution> {
    let n = problem.n_params();
    let m = problem.n_residuals();
    if m < n {
        return Err(Error::InsufficientData(format!(
            "{m} residuals cannot determine {n} parameters"
        )));
    }
    let mut params = start.to_vec();
    problem.project(&mut params);
    let mut r = vec![0.0; m];
    problem.residuals(&params, &mut r);
    let mut cost = cost_of(&r);
    if !cost.is_finite() {
        return Err(Error::FitFailure { reason: "non-finite cost at start".into(), iterations: 0, cost });
    }

    let mut jac = DMatrix::zeros(m, n);
    let mut trial = vec![0.0; n];
    let mut r_trial = vec![0.0; m];
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        iterations += 1;
        problem.jacobian(&params, &mut jac);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * DVector::from_column_slice(&r);
        if grad.amax() == 0.0 {
            converged = true;
            break;
        }

        let mut accepted = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for i in 0..n {
                let d = jtj[(i, i)];
                a[(i, i)] += lambda * if d > 0.0 { d } else { 1.0 };
            }
            let Some(chol) = a.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&grad));
            for i in 0..n {
                trial[i] = params[i] + step[i];
            }
            problem.project(&mut trial);
            problem.residuals(&trial, &mut r_trial);
            let trial_cost = cost_of(&r_trial);
            if trial_cost.is_finite() && trial_cost <= cost {
                let rel_step = trial
                    .iter()
                    .zip(&params)
                    .map(|(t, p)| (t - p).abs() / p.abs().max(1e-12))
                    .fold(0.0, f64::max);
                let improvement = cost - trial_cost;
                let trusted = lambda <= 1e4;
                params.copy_from_slice(&trial);
                std::mem::swap(&mut r, &mut r_trial);
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if (trusted && rel_step < settings.step_tolerance) || improvement <= 1e-12 * cost {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        // no decreasing step at any damping: stationary to machine precision
        if !accepted || converged {
            converged = true;
            break;
        }
    }

    if !converged {
        return Err(Error::FitFailure {
            reason: format!("no convergence within {} iterations", settings.max_iterations),
            iterations,
            cost,
        });
    }

    problem.jacobian(&params, &mut jac);
    let covariance = (jac.transpose() * &jac).try_inverse();
    Ok(Solution { params, cost, iterations, covariance })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Exponential {
        x: Vec<f64>,
        y: Vec<f64>,
    }

    impl Problem for Exponential {
        fn n_params(&self) -> usize {
            2
        }
        fn n_residuals(&self) -> usize {
            self.x.len()
        }
        fn residuals(&self, p: &[f64], out: &mut [f64]) {
            for ((o, x), y) in out.iter_mut().zip(&self.x).zip(&self.y) {
                *o = y - p[0] * (-p[1] * x).exp();
            }
        }
        fn jacobian(&self, p: &[f64], out: &mut DMatrix<f64>) {
            for (i, x) in self.x.iter().enumerate() {
                let e = (-p[1] * x).exp();
                out[(i, 0)] = -e;
                out[(i, 1)] = p[0] * x * e;
            }
        }
    }

    #[test]
    fn recovers_exponential() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y = x.iter().map(|x| 3.0 * (-0.7 * x).exp()).collect();
        let sol = minimize(&Exponential { x, y }, &[1.0, 0.1], Settings::default()).unwrap();
        assert!((sol.params[0] - 3.0).abs() < 1e-9);
        assert!((sol.params[1] - 0.7).abs() < 1e-9);
        assert!(sol.cost < 1e-18);
    }

    #[test]
    fn underdetermined_is_rejected() {
        let p = Exponential { x: vec![1.0], y: vec![1.0] };
        assert!(matches!(minimize(&p, &[1.0, 1.0], Settings::default()), Err(Error::InsufficientData(_))));
    }
}
