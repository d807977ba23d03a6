//! Local-maximum detection on sampled curves.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Refined position (parabolic vertex through the three samples around the maximum).
    pub x: f64,
    pub y: f64,
    /// Index of the sampled maximum.
    pub index: usize,
    /// Topographic prominence in units of `y`.
    pub prominence: f64,
}

/// Finds local maxima of `ys(xs)` whose prominence exceeds
/// `min_prominence · (max(ys) − min(ys))`.
///
/// Using a fraction of the data range keeps the result unchanged when `ys`
/// is multiplied by a positive constant.
pub fn find_peaks(xs: &[f64], ys: &[f64], min_prominence: f64) -> Result<Vec<Peak>> {
    if xs.len() != ys.len() {
        return Err(Error::invalid("ys", format!("length {} does not match xs length {}", ys.len(), xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("peak-finder samples"));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("xs", "must be strictly ascending"));
    }
    let n = ys.len();
    if n < 3 {
        return Ok(Vec::new());
    }
    let (lo, hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    let range = hi - lo;
    if range <= 0.0 {
        return Ok(Vec::new());
    }
    let threshold = min_prominence * range;

    let mut peaks = Vec::new();
    let mut i = 1;
    while i < n - 1 {
        if ys[i - 1] < ys[i] {
            // walk across a flat top
            let mut j = i;
            while j + 1 < n && ys[j + 1] == ys[i] {
                j += 1;
            }
            if j + 1 < n && ys[j + 1] < ys[i] {
                let prominence = prominence(ys, i, j);
                if prominence > threshold {
                    let (x, y) = if i == j {
                        vertex(xs[i - 1], xs[i], xs[i + 1], ys[i - 1], ys[i], ys[i + 1])
                    } else {
                        (0.5 * (xs[i] + xs[j]), ys[i])
                    };
                    peaks.push(Peak { x, y, index: (i + j) / 2, prominence });
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    Ok(peaks)
}

fn prominence(ys: &[f64], first: usize, last: usize) -> f64 {
    let h = ys[first];
    let mut left_min = h;
    for k in (0..first).rev() {
        if ys[k] > h {
            break;
        }
        left_min = left_min.min(ys[k]);
    }
    let mut right_min = h;
    for &y in &ys[last + 1..] {
        if y > h {
            break;
        }
        right_min = right_min.min(y);
    }
    h - left_min.max(right_min)
}

fn vertex(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> (f64, f64) {
    let d10 = x1 - x0;
    let d12 = x1 - x2;
    let num = d10 * d10 * (y1 - y2) - d12 * d12 * (y1 - y0);
    let den = d10 * (y1 - y2) - d12 * (y1 - y0);
    if den == 0.0 {
        return (x1, y1);
    }
    let xv = x1 - 0.5 * num / den;
    // Lagrange form of the interpolating parabola
    let l0 = (xv - x1) * (xv - x2) / ((x0 - x1) * (x0 - x2));
    let l1 = (xv - x0) * (xv - x2) / ((x1 - x0) * (x1 - x2));
    let l2 = (xv - x0) * (xv - x1) / ((x2 - x0) * (x2 - x1));
    (xv, y0 * l0 + y1 * l1 + y2 * l2)
}
