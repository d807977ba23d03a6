//! Bounded nonlinear least squares for a handful of parameters.
//!
//! Levenberg-style damped Gauss-Newton on a central-difference Jacobian.
//! Bounds are enforced by projecting every trial point onto the box.

use crate::error::{Error, Result};

pub const MAX_PARAMETERS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Converged once the scaled gradient norm is `≤ gradient_tol · (1 + S)`.
    pub gradient_tol: f64,
    /// Converged once a step changes the scaled parameters by `≤ step_tol`.
    pub step_tol: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iterations: 200, gradient_tol: 1e-6, step_tol: 1e-10, fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub parameters: Vec<f64>,
    /// Objective `Σ rᵢ²` at `parameters`.
    pub residual_sum_sq: f64,
    pub iterations: usize,
    /// `at_bound[i]` is true when parameter `i` finished on one of its bounds.
    pub at_bound: Vec<bool>,
}

impl FitResult {
    /// True when the optimum sits on the boundary of the feasible box.
    pub fn is_boundary_solution(&self) -> bool {
        self.at_bound.iter().any(|&b| b)
    }
}

pub fn fit_least_squares<F>(objective: F, initial: &[f64], bounds: &[(f64, f64)]) -> Result<FitResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    fit_least_squares_with(objective, initial, bounds, FitOptions::default())
}

pub fn fit_least_squares_with<F>(
    objective: F,
    initial: &[f64],
    bounds: &[(f64, f64)],
    opts: FitOptions,
) -> Result<FitResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = initial.len();
    if n == 0 || n > MAX_PARAMETERS {
        return Err(Error::invalid("initial", format!("expected 1 to {MAX_PARAMETERS} parameters, got {n}")));
    }
    if bounds.len() != n {
        return Err(Error::invalid("bounds", "one (lo, hi) interval per parameter required"));
    }
    for &(lo, hi) in bounds {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::invalid("bounds", format!("empty interval [{lo}, {hi}]")));
        }
    }
    if initial.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial parameters"));
    }

    let project = |p: &mut [f64]| {
        for (v, &(lo, hi)) in p.iter_mut().zip(bounds) {
            *v = v.clamp(lo, hi);
        }
    };
    let sum_sq = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();
    let eval = |p: &[f64]| -> Result<Vec<f64>> {
        let r = objective(p)?;
        if r.is_empty() || r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("objective residuals"));
        }
        Ok(r)
    };

    let mut p = initial.to_vec();
    project(&mut p);
    // per-parameter scales, fixed from the starting point
    let scale: Vec<f64> = p
        .iter()
        .zip(bounds)
        .map(|(&v, &(lo, hi))| {
            if v != 0.0 {
                v.abs()
            } else if (hi - lo).is_finite() && hi > lo {
                hi - lo
            } else {
                1.0
            }
        })
        .collect();

    let mut r = eval(&p)?;
    let m = r.len();
    let mut s = sum_sq(&r);
    let mut lambda = 1e-3;
    let mut iterations = 0;

    loop {
        if s == 0.0 {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::FitNotConverged { iterations });
        }
        iterations += 1;

        // Jacobian in scaled coordinates: column j is ∂r/∂(p_j/scale_j)
        let mut jac = vec![vec![0.0; n]; m];
        for j in 0..n {
            let h = opts.fd_step * scale[j];
            let (lo, hi) = bounds[j];
            let plus = (p[j] + h).min(hi);
            let minus = (p[j] - h).max(lo);
            if plus == minus {
                continue;
            }
            let mut pp = p.clone();
            pp[j] = plus;
            let rp = eval(&pp)?;
            pp[j] = minus;
            let rm = eval(&pp)?;
            if rp.len() != m || rm.len() != m {
                return Err(Error::invalid("objective", "residual length changed between evaluations"));
            }
            let denom = (plus - minus) / scale[j];
            for i in 0..m {
                jac[i][j] = (rp[i] - rm[i]) / denom;
            }
        }

        let mut grad = vec![0.0; n];
        let mut jtj = vec![vec![0.0; n]; n];
        for i in 0..m {
            for a in 0..n {
                grad[a] += jac[i][a] * r[i];
                for b in 0..n {
                    jtj[a][b] += jac[i][a] * jac[i][b];
                }
            }
        }
        // projected gradient: ignore components pushing through an active bound
        let proj_grad_norm = (0..n)
            .map(|j| {
                let (lo, hi) = bounds[j];
                let g = 2.0 * grad[j];
                if (p[j] <= lo && g > 0.0) || (p[j] >= hi && g < 0.0) {
                    0.0
                } else {
                    g * g
                }
            })
            .sum::<f64>()
            .sqrt();
        if proj_grad_norm <= opts.gradient_tol * (1.0 + s) {
            break;
        }

        let max_diag = (0..n).map(|j| jtj[j][j]).fold(0.0, f64::max);
        if max_diag == 0.0 {
            break;
        }
        let mut improved = false;
        let mut small_step = false;
        while lambda < 1e16 {
            let mut a = jtj.clone();
            for j in 0..n {
                a[j][j] += lambda * jtj[j][j].max(1e-12 * max_diag);
            }
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            let Some(delta) = solve(a, rhs) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = p.iter().zip(&delta).zip(&scale).map(|((v, d), s)| v + d * s).collect();
            project(&mut trial);
            let rt = eval(&trial)?;
            let st = sum_sq(&rt);
            if st < s {
                let step = trial
                    .iter()
                    .zip(&p)
                    .zip(&scale)
                    .map(|((a, b), s)| ((a - b) / s).powi(2))
                    .sum::<f64>()
                    .sqrt();
                p = trial;
                r = rt;
                s = st;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                small_step = step <= opts.step_tol;
                break;
            }
            lambda *= 10.0;
        }
        if !improved || small_step {
            break;
        }
    }

    let at_bound = p
        .iter()
        .zip(bounds)
        .map(|(&v, &(lo, hi))| v <= lo || v >= hi)
        .collect();
    Ok(FitResult { parameters: p, residual_sum_sq: s, iterations, at_bound })
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}
