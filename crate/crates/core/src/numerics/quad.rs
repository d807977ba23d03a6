//! Adaptive quadrature over 1–3 dimensional regions.
//!
//! Finite axes use adaptive Simpson; infinite axes are mapped with
//! `x = scale·tan(u)` onto `(−π/2, π/2)`. Axes that declare a Gaussian
//! weight use 40-point Gauss-Hermite instead. Multi-dimensional regions are
//! tensor products: the inner axes are integrated to completion for each
//! outer abscissa.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_DEPTH: usize = 40;
pub const GAUSS_HERMITE_NODES: usize = 40;
const INITIAL_PANELS: usize = 8;
/// Inner axes are integrated this much tighter per nesting level, so their
/// rounding noise stays below the outer refinement threshold.
const INNER_TIGHTENING: f64 = 0.1;

/// One integration axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    /// Plain integral over `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
    /// Integral over ℝ; `scale` sets where the tangent map is densest.
    Infinite { scale: f64 },
    /// Expectation over a normal distribution: `∫ f(x) N(x; mean, sigma) dx`.
    /// The density is supplied by the rule and must not appear in `f`.
    Gaussian { mean: f64, sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub max_depth: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { rel_tol: DEFAULT_REL_TOL, max_depth: DEFAULT_MAX_DEPTH }
    }
}

/// Result of [`integrate_with`]; `converged == false` carries the best estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    /// Estimated relative error of `value`.
    pub achieved_tol: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Integrates `f` over the product region `axes` to relative tolerance
/// `rel_tol`, failing with the best estimate if refinement hits the depth cap.
pub fn integrate<F>(f: F, axes: &[Axis], rel_tol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let est = integrate_with(f, axes, QuadOptions { rel_tol, ..Default::default() })?;
    if est.converged {
        Ok(est.value)
    } else {
        Err(Error::QuadratureNotConverged { estimate: est.value, achieved: est.achieved_tol })
    }
}

pub fn integrate_with<F>(f: F, axes: &[Axis], opts: QuadOptions) -> Result<QuadEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    if axes.is_empty() || axes.len() > 3 {
        return Err(Error::invalid("axes", format!("expected 1 to 3 axes, got {}", axes.len())));
    }
    if !(opts.rel_tol > 1e-12 && opts.rel_tol < 1e-2) {
        return Err(Error::invalid("rel_tol", format!("must lie in (1e-12, 1e-2), got {}", opts.rel_tol)));
    }
    for axis in axes {
        match *axis {
            Axis::Interval { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::NonFinite("interval bounds"));
                }
            }
            Axis::Infinite { scale } => {
                if !(scale.is_finite() && scale > 0.0) {
                    return Err(Error::invalid("scale", "must be finite and > 0"));
                }
            }
            Axis::Gaussian { mean, sigma } => {
                if !mean.is_finite() || !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::invalid("sigma", "Gaussian axis needs finite mean and sigma > 0"));
                }
            }
        }
    }
    let mut ctx = Nested { f: &f, axes, opts, evaluations: 0, converged: true, error_sum: 0.0 };
    let mut point = [0.0; 3];
    let value = ctx.axis(0, &mut point);
    if !value.is_finite() {
        return Err(Error::NonFinite("integrand"));
    }
    let achieved = if value != 0.0 { ctx.error_sum / value.abs() } else { ctx.error_sum };
    Ok(QuadEstimate { value, achieved_tol: achieved, evaluations: ctx.evaluations, converged: ctx.converged })
}

struct Nested<'a, F> {
    f: &'a F,
    axes: &'a [Axis],
    opts: QuadOptions,
    evaluations: usize,
    converged: bool,
    /// accumulated error estimate of the outermost axis only
    error_sum: f64,
}

impl<F: Fn(&[f64]) -> f64> Nested<'_, F> {
    fn axis(&mut self, dim: usize, point: &mut [f64; 3]) -> f64 {
        if dim == self.axes.len() {
            self.evaluations += 1;
            return (self.f)(&point[..self.axes.len()]);
        }
        match self.axes[dim] {
            Axis::Gaussian { mean, sigma } => {
                let (nodes, weights) = gauss_hermite();
                let mut sum = 0.0;
                for (t, w) in nodes.iter().zip(weights) {
                    point[dim] = mean + std::f64::consts::SQRT_2 * sigma * t;
                    sum += w * self.axis(dim + 1, point);
                }
                sum / PI.sqrt()
            }
            Axis::Interval { lo, hi } => self.simpson(dim, point, lo, hi, |x| (x, 1.0)),
            Axis::Infinite { scale } => self.simpson(dim, point, -FRAC_PI_2, FRAC_PI_2, move |u| {
                let c = u.cos();
                (scale * u.tan(), scale / (c * c))
            }),
        }
    }

    /// Adaptive Simpson in the variable `u`, with `map(u) = (x, dx/du)`.
    fn simpson(
        &mut self,
        dim: usize,
        point: &mut [f64; 3],
        lo: f64,
        hi: f64,
        map: impl Fn(f64) -> (f64, f64) + Copy,
    ) -> f64 {
        if lo == hi {
            return 0.0;
        }
        let infinite = matches!(self.axes[dim], Axis::Infinite { .. });
        let mut eval = |this: &mut Self, u: f64| -> f64 {
            if infinite && (FRAC_PI_2 - u.abs()) < 1e-12 {
                return 0.0;
            }
            let (x, jac) = map(u);
            point[dim] = x;
            let v = this.axis(dim + 1, point) * jac;
            if v.is_finite() { v } else { 0.0 }
        };

        // coarse pass for an absolute error scale
        let panels = INITIAL_PANELS;
        let h = (hi - lo) / panels as f64;
        let mut fs = Vec::with_capacity(2 * panels + 1);
        for i in 0..=2 * panels {
            let u = lo + 0.5 * h * i as f64;
            fs.push(eval(self, u));
        }
        let mut coarse_abs = 0.0;
        for p in 0..panels {
            coarse_abs += h / 6.0 * (fs[2 * p].abs() + 4.0 * fs[2 * p + 1].abs() + fs[2 * p + 2].abs());
        }
        // nothing on the coarse grid: any mass is in features narrower than a
        // panel, so the minimum-depth estimate is taken as is
        let tol = if coarse_abs > 0.0 { self.opts.rel_tol * INNER_TIGHTENING.powi(dim as i32) * coarse_abs } else { f64::INFINITY };

        let mut total = 0.0;
        let mut err = 0.0;
        for p in 0..panels {
            let a = lo + h * p as f64;
            let b = a + h;
            let (fa, fm, fb) = (fs[2 * p], fs[2 * p + 1], fs[2 * p + 2]);
            let whole = h / 6.0 * (fa + 4.0 * fm + fb);
            let (v, e) = self.refine(&mut eval, a, b, fa, fm, fb, whole, tol / panels as f64, 0);
            total += v;
            err += e;
        }
        if dim == 0 {
            self.error_sum += err;
        }
        total
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        eval: &mut impl FnMut(&mut Self, f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = eval(self, lm);
        let frm = eval(self, rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        // two levels minimum so that a lucky first estimate cannot stop refinement
        if depth >= 2 && delta.abs() <= 15.0 * tol {
            return (left + right + delta / 15.0, delta.abs() / 15.0);
        }
        if depth >= self.opts.max_depth {
            self.converged = false;
            return (left + right + delta / 15.0, delta.abs() / 15.0);
        }
        let (l, el) = self.refine(eval, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1);
        let (r, er) = self.refine(eval, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
        (l + r, el + er)
    }
}

/// Nodes and weights of the physicists' Gauss-Hermite rule (weight `e^{−t²}`).
pub fn gauss_hermite() -> (&'static [f64], &'static [f64]) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (x, w) = RULE.get_or_init(|| hermite_rule(GAUSS_HERMITE_NODES));
    (x, w)
}

/// Newton iteration on the orthonormal Hermite recurrence, seeded with the
/// usual asymptotic root estimates.
fn hermite_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z: f64 = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    // ascending nodes
    x.reverse();
    w.reverse();
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal(x: f64, mu: f64, s: f64) -> f64 {
        (-(x - mu).powi(2) / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt())
    }

    #[test]
    fn constant_on_unit_interval() {
        let v = integrate(|_| 1.0, &[Axis::Interval { lo: 0.0, hi: 1.0 }], 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normal_over_real_line() {
        let v = integrate(|x| normal(x[0], 0.0, 1.0), &[Axis::Infinite { scale: 1.0 }], 1e-11).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
        let v = integrate(|_| 1.0, &[Axis::Gaussian { mean: 0.3, sigma: 2.0 }], 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
    }

    #[test]
    fn hermite_weights_sum_to_sqrt_pi() {
        let (x, w) = gauss_hermite();
        assert_eq!(x.len(), GAUSS_HERMITE_NODES);
        let s: f64 = w.iter().sum();
        assert!((s - PI.sqrt()).abs() < 1e-13);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        // second moment of e^{-t²}/√π is 1/2
        let m2: f64 = x.iter().zip(w).map(|(t, w)| t * t * w).sum::<f64>() / PI.sqrt();
        assert!((m2 - 0.5).abs() < 1e-13);
    }

    #[test]
    fn cos_squared_under_gaussian() {
        let k = 2.0 * PI / 780.2e-9;
        let sigma = 65e-9;
        let closed = 0.5 * (1.0 + (-2.0 * k * k * sigma * sigma).exp());
        let v = integrate(|x| (k * x[0]).cos().powi(2), &[Axis::Gaussian { mean: 0.0, sigma }], 1e-9).unwrap();
        assert!((v - closed).abs() < 1e-6);
        assert!((v - 0.7892).abs() < 2e-4);
    }

    #[test]
    fn three_dimensional_box() {
        let axes = [
            Axis::Interval { lo: 0.0, hi: 1.0 },
            Axis::Interval { lo: 0.0, hi: 2.0 },
            Axis::Interval { lo: -1.0, hi: 1.0 },
        ];
        let v = integrate(|p| p[0] * p[1] + p[2] * p[2], &axes, 1e-9).unwrap();
        // ∫xy = 1/2·2·2 = 2 ; ∫z² = 1·2·2/3
        assert!((v - (2.0 + 4.0 / 3.0)).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_tolerance_and_reports_non_convergence() {
        assert!(integrate(|_| 1.0, &[Axis::Interval { lo: 0.0, hi: 1.0 }], 0.1).is_err());
        let est = integrate_with(
            |x| (1.0 / x[0].abs().max(1e-300)).sqrt().sin() * 1e3,
            &[Axis::Interval { lo: -1.0, hi: 1.0 }],
            QuadOptions { rel_tol: 1e-11, max_depth: 6 },
        )
        .unwrap();
        assert!(!est.converged);
        assert!(est.achieved_tol > 0.0);
    }
}
