//! Uniform radial grids `r_k = k·dr`, `k = 0..=intervals`, and the
//! quadrature/difference stencils shared by every module.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    dr: f64,
    intervals: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, intervals: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Parameter(format!(
                "r_max must be positive, got {r_max}"
            )));
        }
        if intervals < 4 {
            return Err(Error::Parameter(format!(
                "need at least 4 intervals, got {intervals}"
            )));
        }
        Ok(Self {
            dr: r_max / intervals as f64,
            intervals,
        })
    }

    /// Grid with step as close to `dr` as possible while ending exactly at `r_max`.
    pub fn with_step(dr: f64, r_max: f64) -> Result<Self> {
        if !(dr.is_finite() && dr > 0.0) {
            return Err(Error::Parameter(format!("dr must be positive, got {dr}")));
        }
        Self::new(r_max, (r_max / dr).round().max(4.0) as usize)
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of sample points, `intervals + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn r_max(&self) -> f64 {
        self.dr * self.intervals as f64
    }

    pub fn r(&self, k: usize) -> f64 {
        self.dr * k as f64
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.r(k))
    }

    /// Same radius, `factor` times as many intervals.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            dr: self.dr / factor as f64,
            intervals: self.intervals * factor,
        }
    }
}

/// Composite Simpson rule on uniform samples; an odd interval count closes
/// with the 3/8 rule on the last three intervals.
pub(crate) fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (f[0] + f[1]),
        3 => h / 3.0 * (f[0] + 4.0 * f[1] + f[2]),
        4 => 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]),
        _ => {
            let intervals = n - 1;
            let even_end = if intervals.is_multiple_of(2) { n - 1 } else { n - 4 };
            let mut s = f[0] + f[even_end];
            for (k, v) in f.iter().enumerate().take(even_end).skip(1) {
                s += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            let mut total = s * h / 3.0;
            if even_end != n - 1 {
                let t = &f[even_end..];
                total += 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3]);
            }
            total
        }
    }
}

/// Simpson weights matching [`simpson`], so that `Σ w_k f_k == simpson(f, h)`.
pub(crate) fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        2 => vec![0.5 * h; 2],
        3 => vec![h / 3.0, 4.0 * h / 3.0, h / 3.0],
        4 => vec![3.0 * h / 8.0, 9.0 * h / 8.0, 9.0 * h / 8.0, 3.0 * h / 8.0],
        _ => {
            let mut w = vec![0.0; n];
            let intervals = n - 1;
            let even_end = if intervals.is_multiple_of(2) { n - 1 } else { n - 4 };
            for (k, wk) in w.iter_mut().enumerate().take(even_end + 1) {
                *wk = if k == 0 || k == even_end {
                    h / 3.0
                } else if k % 2 == 1 {
                    4.0 * h / 3.0
                } else {
                    2.0 * h / 3.0
                };
            }
            if even_end != n - 1 {
                let c = 3.0 * h / 8.0;
                w[even_end] += c;
                w[even_end + 1] += 3.0 * c;
                w[even_end + 2] += 3.0 * c;
                w[even_end + 3] += c;
            }
            w
        }
    }
}

/// Fourth-order centered first derivative of a radially even function.
/// The two points next to the origin use the mirror values `u(-r) = u(r)`;
/// the two outermost points use one-sided fourth-order stencils.
pub(crate) fn radial_derivative(u: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = u.len();
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    if n < 5 {
        for k in 1..n.saturating_sub(1) {
            d[k] = (u[k + 1] - u[k - 1]) / (2.0 * h);
        }
        if n >= 2 {
            d[n - 1] = (u[n - 1] - u[n - 2]) / h;
        }
        return d;
    }
    let at = |k: isize| -> Complex64 { u[k.unsigned_abs()] };
    let c = 1.0 / (12.0 * h);
    for k in 0..n - 2 {
        let k = k as isize;
        d[k as usize] = (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) * c;
    }
    let m = n - 1;
    d[m - 1] = (3.0 * u[m] + 10.0 * u[m - 1] - 18.0 * u[m - 2] + 6.0 * u[m - 3] - u[m - 4]) * c;
    d[m] = (25.0 * u[m] - 48.0 * u[m - 1] + 36.0 * u[m - 2] - 16.0 * u[m - 3] + 3.0 * u[m - 4]) * c;
    d
}
