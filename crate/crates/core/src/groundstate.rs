//! Radial ground state `Q'' + (2/r)Q' − Q + Q³ = 0`, `Q'(0) = 0`, by
//! shooting on `Q(0)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{simpson, RadialGrid};
use crate::quantities::{hhalf_sq_of, QNorms, RadialField};

/// RK4 substeps per grid interval.
const SUBSTEPS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub grid: RadialGrid,
    pub samples: Vec<f64>,
    pub derivative: Vec<f64>,
    /// Converged `Q(0)`.
    pub peak: f64,
    /// `Q(r) ≈ tail_coefficient · e^{−r}/r` for `r ≥ tail_start`.
    pub tail_coefficient: f64,
    pub tail_start: f64,
    pub mass_sq: f64,
    pub grad_sq: f64,
    pub l4_fourth: f64,
    pub var: f64,
    pub hhalf_sq: f64,
    pub energy: f64,
}

impl GroundState {
    pub fn norms(&self) -> QNorms {
        QNorms {
            mass_sq: self.mass_sq,
            grad_sq: self.grad_sq,
            energy: self.energy,
        }
    }

    /// `Q(r)` for any `r ≥ 0`: cubic Hermite between samples, asymptotic tail beyond the grid.
    pub fn eval(&self, r: f64) -> f64 {
        let h = self.grid.dr();
        let x = r / h;
        let k = x.floor() as usize;
        if k + 1 >= self.samples.len() {
            return self.tail_coefficient * (-r).exp() / r;
        }
        let t = x - k as f64;
        let (y0, y1) = (self.samples[k], self.samples[k + 1]);
        let (m0, m1) = (self.derivative[k] * h, self.derivative[k + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1
    }

    pub fn field(&self) -> RadialField {
        RadialField {
            grid: self.grid,
            values: self
                .samples
                .iter()
                .map(|&q| Complex64::new(q, 0.0))
                .collect(),
        }
    }

    /// Pohozhaev residuals `(|grad/mass − 3|, |l4/mass − 4|)`.
    pub fn pohozhaev_residuals(&self) -> (f64, f64) {
        (
            (self.grad_sq / self.mass_sq - 3.0).abs(),
            (self.l4_fourth / self.mass_sq - 4.0).abs(),
        )
    }
}

/// Standard grid: `Δr = 1/400` on `[0, 25]`.
pub fn default_grid() -> RadialGrid {
    RadialGrid::with_step(1.0 / 400.0, 25.0).expect("valid default grid")
}

pub const DEFAULT_TOL: f64 = 1e-9;

pub fn solve_default() -> Result<GroundState> {
    solve_ground_state(default_grid(), DEFAULT_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shot {
    /// Crossed zero: `Q(0)` too large.
    Over,
    /// Turned upward while positive: `Q(0)` too small.
    Under,
    Neither,
}

struct Trajectory {
    q: Vec<f64>,
    dq: Vec<f64>,
    outcome: Shot,
}

fn rhs(r: f64, q: f64, p: f64) -> (f64, f64) {
    (p, -2.0 * p / r + q - q * q * q)
}

/// Integrate outward from `Q(0) = a` until the trajectory crosses zero or
/// turns upward; samples after that point are left as NaN.
fn shoot(a: f64, grid: &RadialGrid) -> Trajectory {
    let n = grid.len();
    let h = grid.dr();
    let mut q = vec![f64::NAN; n];
    let mut dq = vec![f64::NAN; n];
    q[0] = a;
    dq[0] = 0.0;
    // series start: Q = a + c2 r² + c4 r⁴
    let c2 = (a - a * a * a) / 6.0;
    let c4 = (1.0 - 3.0 * a * a) * c2 / 20.0;
    q[1] = a + c2 * h * h + c4 * h.powi(4);
    dq[1] = 2.0 * c2 * h + 4.0 * c4 * h.powi(3);

    let hs = h / SUBSTEPS as f64;
    let (mut y, mut p) = (q[1], dq[1]);
    for k in 1..n - 1 {
        let mut r = grid.r(k);
        for _ in 0..SUBSTEPS {
            let (k1q, k1p) = rhs(r, y, p);
            let (k2q, k2p) = rhs(r + hs / 2.0, y + hs / 2.0 * k1q, p + hs / 2.0 * k1p);
            let (k3q, k3p) = rhs(r + hs / 2.0, y + hs / 2.0 * k2q, p + hs / 2.0 * k2p);
            let (k4q, k4p) = rhs(r + hs, y + hs * k3q, p + hs * k3p);
            y += hs / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            p += hs / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            r += hs;
        }
        if y <= 0.0 {
            return Trajectory {
                q,
                dq,
                outcome: Shot::Over,
            };
        }
        if p > 0.0 {
            return Trajectory {
                q,
                dq,
                outcome: Shot::Under,
            };
        }
        q[k + 1] = y;
        dq[k + 1] = p;
    }
    Trajectory {
        q,
        dq,
        outcome: Shot::Neither,
    }
}

/// Shooting with bisection on `Q(0)`. `tol` sets both the bisection width
/// (`0.01·tol²` relative) and the agreement required between the two
/// bracketing trajectories before the asymptotic tail takes over.
pub fn solve_ground_state(grid: RadialGrid, tol: f64) -> Result<GroundState> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Parameter(format!("tol must be positive, got {tol}")));
    }
    let (mut lo, mut hi) = (1.5, 10.0);
    if shoot(lo, &grid).outcome != Shot::Under || shoot(hi, &grid).outcome != Shot::Over {
        return Err(Error::NonConvergence(format!(
            "no sign change of the shooting functional on [{lo}, {hi}]"
        )));
    }
    let width = (0.01 * tol * tol).max(4.0 * f64::EPSILON);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= width * mid {
            break;
        }
        match shoot(mid, &grid).outcome {
            Shot::Over => hi = mid,
            Shot::Under => lo = mid,
            Shot::Neither => {
                lo = mid;
                hi = mid;
            }
        }
    }
    let below = shoot(lo, &grid);
    let above = shoot(hi, &grid);

    // last index where both branches exist and agree to `tol` relative
    let n = grid.len();
    let mut last = 1;
    for k in 1..n {
        let (a, b) = (below.q[k], above.q[k]);
        if !(a.is_finite() && b.is_finite()) {
            break;
        }
        let mid = 0.5 * (a + b);
        if (a - b).abs() > tol * mid {
            break;
        }
        last = k;
    }
    if last < 2 {
        return Err(Error::NonConvergence(
            "bracketing trajectories never agree".into(),
        ));
    }

    let mut q: Vec<f64> = (0..n).map(|k| 0.5 * (below.q[k] + above.q[k])).collect();
    let mut dq: Vec<f64> = (0..n).map(|k| 0.5 * (below.dq[k] + above.dq[k])).collect();

    let fit = |k: usize| q[k] * grid.r(k) * grid.r(k).exp();
    let c = 0.5 * (fit(last - 1) + fit(last));
    for k in last + 1..n {
        let r = grid.r(k);
        q[k] = c * (-r).exp() / r;
        dq[k] = -c * (-r).exp() * (r + 1.0) / (r * r);
    }
    let r_max = grid.r_max();
    let tail = c * (-r_max).exp() / r_max;
    if tail > tol {
        return Err(Error::GridTooSmall { r_max, tail, tol });
    }

    let h = grid.dr();
    let weighted = |f: &dyn Fn(usize) -> f64| -> f64 {
        let g: Vec<f64> = (0..n).map(|k| f(k) * grid.r(k) * grid.r(k)).collect();
        4.0 * PI * simpson(&g, h)
    };
    // contributions beyond r_max from the asymptotic form, to leading order
    let e2 = (-2.0 * r_max).exp();
    let mass_sq = weighted(&|k| q[k] * q[k]) + 2.0 * PI * c * c * e2;
    let grad_sq = weighted(&|k| dq[k] * dq[k]) + 2.0 * PI * c * c * e2;
    let l4_fourth = weighted(&|k| q[k].powi(4));
    let var = weighted(&|k| q[k] * q[k] * grid.r(k) * grid.r(k))
        + 2.0 * PI * c * c * e2 * (r_max * r_max + r_max + 0.5);

    let mut ground = GroundState {
        grid,
        samples: q,
        derivative: dq,
        peak: 0.5 * (lo + hi),
        tail_coefficient: c,
        tail_start: grid.r(last),
        mass_sq,
        grad_sq,
        l4_fourth,
        var,
        hhalf_sq: f64::NAN,
        energy: 0.5 * grad_sq - 0.25 * l4_fourth,
    };
    ground.hhalf_sq = hhalf_sq_of(&ground.field())?;
    Ok(ground)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_is_positive_and_decreasing() {
        let g = solve_default().unwrap();
        assert!(g.samples.iter().all(|&q| q > 0.0));
        assert!(g.samples.windows(2).all(|w| w[1] < w[0]));
        assert!(g.samples.last().unwrap() < &1e-10);
    }

    #[test]
    fn pohozhaev_identities() {
        let g = solve_default().unwrap();
        let (r1, r2) = g.pohozhaev_residuals();
        assert!(
            r1 < 10.0 * DEFAULT_TOL && r2 < 10.0 * DEFAULT_TOL,
            "{r1} {r2}"
        );
        assert!((g.energy / (0.5 * g.mass_sq) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn hermite_eval_reproduces_samples() {
        let g = solve_default().unwrap();
        for k in [0usize, 17, 400, 3000] {
            assert!((g.eval(g.grid.r(k)) - g.samples[k]).abs() < 1e-14);
        }
        let r = 30.0;
        assert!((g.eval(r) - g.tail_coefficient * (-r).exp() / r).abs() < 1e-20);
    }

    #[test]
    fn short_grid_is_rejected() {
        let grid = RadialGrid::with_step(1.0 / 400.0, 8.0).unwrap();
        assert!(matches!(
            solve_ground_state(grid, 1e-9),
            Err(Error::GridTooSmall { .. })
        ));
    }
}
