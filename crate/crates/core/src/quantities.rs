//! Conserved and scale-invariant diagnostics of radial fields: mass, energy,
//! variance and its rate, η, localized variance, the radial Fourier
//! transform and the Ḣ½ norm.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{radial_derivative, simpson, simpson_weights, RadialGrid};
use crate::groundstate::GroundState;

/// Default tail floor, relative to the field's peak modulus.
pub const TAIL_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialField {
    pub grid: RadialGrid,
    pub values: Vec<Complex64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Parameter(format!(
                "field has {} samples but grid has {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.radii().map(f).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    /// L²-preserving rescaling `λ^{3/2} u(λ r)` sampled on `grid`, with
    /// linear interpolation between the original samples.
    pub fn rescaled(&self, lambda: f64, grid: RadialGrid) -> Self {
        let amp = lambda.powf(1.5);
        Self::from_fn(grid, |r| amp * self.interpolate(lambda * r))
    }

    fn interpolate(&self, r: f64) -> Complex64 {
        let x = r / self.grid.dr();
        let k = x.floor() as usize;
        if k + 1 >= self.values.len() {
            return Complex64::new(0.0, 0.0);
        }
        let t = x - k as f64;
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }

    /// Largest imaginary part; zero for real data.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn tail_decayed(&self, floor: f64) -> bool {
        let last = self.values.last().map_or(0.0, |v| v.norm());
        last <= floor * self.amplitude().max(f64::MIN_POSITIVE)
    }

    /// `4π ∫ f(r, u) r² dr`.
    pub(crate) fn integrate(&self, f: impl Fn(f64, Complex64) -> f64) -> f64 {
        let g: Vec<f64> = self
            .grid
            .radii()
            .zip(&self.values)
            .map(|(r, &u)| f(r, u) * r * r)
            .collect();
        4.0 * PI * simpson(&g, self.grid.dr())
    }
}

/// The three ground-state norms every scale-invariant ratio refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QNorms {
    pub mass_sq: f64,
    pub grad_sq: f64,
    pub energy: f64,
}

/// Quadrature moments of a field; everything [`Diagnostics`] needs except Ḣ½.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mass: f64,
    pub grad_sq: f64,
    pub l4_fourth: f64,
    pub variance: f64,
    pub variance_rate: f64,
}

/// Energy split for data of the form `f(r) e^{iγr²}` with real `f`:
/// `E = E⁰ + E^γ`, where `E⁰` is the energy of `f` and `E^γ = 2γ²V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSplit {
    pub gamma: f64,
    pub e0: f64,
    pub e_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub mass: f64,
    pub energy: f64,
    /// Always zero for radial data.
    pub momentum: f64,
    pub grad_sq: f64,
    pub l4_fourth: f64,
    pub variance: f64,
    pub variance_rate: f64,
    pub eta: f64,
    pub me_ratio: f64,
    pub hhalf_sq: Option<f64>,
    pub phase: Option<PhaseSplit>,
    pub trusted: bool,
    /// Set when `hhalf_sq` came from sampled quadrature rather than a formula.
    pub hhalf_from_quadrature: bool,
}

impl Diagnostics {
    pub fn from_moments(m: &Moments, q: &QNorms) -> Self {
        let energy = 0.5 * m.grad_sq - 0.25 * m.l4_fourth;
        Self {
            mass: m.mass,
            energy,
            momentum: 0.0,
            grad_sq: m.grad_sq,
            l4_fourth: m.l4_fourth,
            variance: m.variance,
            variance_rate: m.variance_rate,
            eta: ((m.mass * m.grad_sq) / (q.mass_sq * q.grad_sq)).sqrt(),
            me_ratio: m.mass * energy / (q.mass_sq * q.energy),
            hhalf_sq: None,
            phase: None,
            trusted: true,
            hhalf_from_quadrature: false,
        }
    }

    /// Mass-energy product `M·E`, in absolute units.
    pub fn me(&self) -> f64 {
        self.mass * self.energy
    }
}

pub fn moments(field: &RadialField) -> Moments {
    let h = field.grid.dr();
    let du = radial_derivative(&field.values, h);
    let n = field.values.len();
    let mut mass = vec![0.0; n];
    let mut grad = vec![0.0; n];
    let mut l4 = vec![0.0; n];
    let mut var = vec![0.0; n];
    let mut rate = vec![0.0; n];
    for k in 0..n {
        let r = field.grid.r(k);
        let r2 = r * r;
        let u = field.values[k];
        let a = u.norm_sqr();
        mass[k] = a * r2;
        grad[k] = du[k].norm_sqr() * r2;
        l4[k] = a * a * r2;
        var[k] = a * r2 * r2;
        rate[k] = (du[k] * u.conj()).im * r2 * r;
    }
    let w = 4.0 * PI;
    Moments {
        mass: w * simpson(&mass, h),
        grad_sq: w * simpson(&grad, h),
        l4_fourth: w * simpson(&l4, h),
        variance: w * simpson(&var, h),
        variance_rate: 4.0 * w * simpson(&rate, h),
    }
}

/// All diagnostics by quadrature, including the Ḣ½ norm. Fields whose tail
/// exceeds [`TAIL_FLOOR`] are returned flagged untrusted.
pub fn compute_diagnostics(field: &RadialField, ground: &GroundState) -> Diagnostics {
    let mut d = Diagnostics::from_moments(&moments(field), &ground.norms());
    d.trusted = field.tail_decayed(TAIL_FLOOR);
    match hhalf_sq_of(field) {
        Ok(h) => d.hhalf_sq = Some(h),
        Err(_) => d.trusted = false,
    }
    d.hhalf_from_quadrature = true;
    d
}

/// Uniform frequency grid `R_j = j·dk`, `j = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub dk: f64,
    pub count: usize,
}

impl FrequencyGrid {
    pub fn k_max(&self) -> f64 {
        self.dk * (self.count.saturating_sub(1)) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
    pub truncated: bool,
}

/// Relative size of the last integrand sample above which a spectrum is truncated.
const BANDWIDTH_TOL: f64 = 1e-10;

/// `û(R) = 2R⁻¹ ∫ u(r) sin(2πRr) r dr`, with `û(0) = 4π ∫ u r² dr`.
pub fn radial_fourier(field: &RadialField, grid: FrequencyGrid) -> Spectrum {
    let h = field.grid.dr();
    let w = simpson_weights(field.values.len(), h);
    let weighted: Vec<Complex64> = field
        .values
        .iter()
        .zip(&w)
        .enumerate()
        .map(|(k, (&u, &wk))| u * (wk * field.grid.r(k)))
        .collect();

    let mut values = Vec::with_capacity(grid.count);
    for j in 0..grid.count {
        let big_r = j as f64 * grid.dk;
        if j == 0 {
            let s: Complex64 = weighted
                .iter()
                .enumerate()
                .map(|(k, &x)| x * field.grid.r(k))
                .sum();
            values.push(4.0 * PI * s);
            continue;
        }
        let theta = 2.0 * PI * big_r * h;
        let step = Complex64::from_polar(1.0, theta);
        let mut z = Complex64::new(1.0, 0.0);
        let mut s = Complex64::new(0.0, 0.0);
        for (k, &x) in weighted.iter().enumerate() {
            if k % 256 == 0 {
                z = Complex64::from_polar(1.0, theta * k as f64);
            }
            s += x * z.im;
            z *= step;
        }
        values.push(2.0 * s / big_r);
    }

    let integrand = |j: usize| {
        let r = j as f64 * grid.dk;
        values[j].norm_sqr() * r * r * r
    };
    let peak = (0..values.len()).map(integrand).fold(0.0, f64::max);
    let truncated = match values.len() {
        0 => true,
        n => integrand(n - 1) > BANDWIDTH_TOL * peak,
    };
    Spectrum {
        grid,
        values,
        truncated,
    }
}

/// `8π² ∫ R³ |û|² dR`, closing the integral with a Gaussian tail fitted on
/// the last tenth of the grid.
pub fn hhalf_norm_sq(spectrum: &Spectrum) -> Result<f64> {
    if spectrum.truncated {
        return Err(Error::Truncated);
    }
    Ok(8.0 * PI * PI * weighted_power(spectrum, 3))
}

/// `4π ∫ R² |û|² dR`; equals the mass by Plancherel.
pub fn plancherel_mass(spectrum: &Spectrum) -> f64 {
    4.0 * PI * weighted_power(spectrum, 2)
}

fn weighted_power(spectrum: &Spectrum, power: i32) -> f64 {
    let dk = spectrum.grid.dk;
    let f: Vec<f64> = spectrum
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| v.norm_sqr() * (j as f64 * dk).powi(power))
        .collect();
    simpson(&f, dk) + gaussian_tail(spectrum, power)
}

/// `∫_{R_b}^∞ R^p A e^{−cR²} dR` for `|û|² ≈ A e^{−cR²}` fitted between the
/// start and end of the last tenth of the grid.
fn gaussian_tail(spectrum: &Spectrum, power: i32) -> f64 {
    let n = spectrum.values.len();
    if n < 20 {
        return 0.0;
    }
    let ia = n - 1 - n / 10;
    let ib = n - 1;
    let (ra, rb) = (ia as f64 * spectrum.grid.dk, ib as f64 * spectrum.grid.dk);
    let (pa, pb) = (
        spectrum.values[ia].norm_sqr(),
        spectrum.values[ib].norm_sqr(),
    );
    if pa <= 0.0 || pb <= 0.0 {
        return 0.0;
    }
    let c = (pa / pb).ln() / (rb * rb - ra * ra);
    if !(c.is_finite() && c > 0.0) {
        return 0.0;
    }
    let x = c * rb * rb;
    match power {
        3 => pb * (x + 1.0) / (2.0 * c * c),
        // leading-order asymptotic for R² weight
        _ => pb * rb.powi(power - 1) / (2.0 * c),
    }
}

/// Ḣ½ norm with the frequency grid chosen from the field itself, widening
/// the bandwidth until the spectrum is resolved.
pub fn hhalf_sq_of(field: &RadialField) -> Result<f64> {
    hhalf_norm_sq(&auto_spectrum(field))
}

pub fn auto_spectrum(field: &RadialField) -> Spectrum {
    let peak = field.amplitude();
    if peak == 0.0 {
        return Spectrum {
            grid: FrequencyGrid { dk: 1.0, count: 21 },
            values: vec![Complex64::new(0.0, 0.0); 21],
            truncated: false,
        };
    }
    let extent = field
        .values
        .iter()
        .rposition(|v| v.norm() > 1e-10 * peak)
        .map_or(field.grid.r_max(), |k| field.grid.r(k + 1))
        .max(4.0 * field.grid.dr());
    let dk = 1.0 / (64.0 * extent);
    let m = moments(field);
    let nyquist = 0.5 / field.grid.dr();
    let mut k_max = (2.0 + 4.0 * (m.grad_sq / m.mass).sqrt() / (2.0 * PI)).min(nyquist);
    loop {
        let count = 2 * ((k_max / dk / 2.0).ceil() as usize) + 1;
        let spec = radial_fourier(field, FrequencyGrid { dk, count });
        if !spec.truncated || k_max >= nyquist {
            return spec;
        }
        k_max = (2.0 * k_max).min(nyquist);
    }
}

/// Localized weight: `s²` on `[0,1]`, the constant 2 beyond `s = 2`, and the
/// C² quintic `1 + 2t + t² − 5t³ + 4t⁴ − t⁵` (`t = s − 1`) in between.
pub fn psi(s: f64) -> f64 {
    if s <= 1.0 {
        s * s
    } else if s >= 2.0 {
        2.0
    } else {
        let t = s - 1.0;
        1.0 + t * (2.0 + t * (1.0 + t * (-5.0 + t * (4.0 - t))))
    }
}

pub fn psi_prime(s: f64) -> f64 {
    if s <= 1.0 {
        2.0 * s
    } else if s >= 2.0 {
        0.0
    } else {
        let t = s - 1.0;
        2.0 + t * (2.0 + t * (-15.0 + t * (16.0 - 5.0 * t)))
    }
}

/// `(V_R, (V_R)_t)` with `V_R = ∫ R² ψ(|x|/R) |u|²`.
pub fn localized_variance(field: &RadialField, radius: f64) -> Result<(f64, f64)> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Parameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let h = field.grid.dr();
    let du = radial_derivative(&field.values, h);
    let vr = field.integrate(|r, u| radius * radius * psi(r / radius) * u.norm_sqr());
    let rate: Vec<f64> = field
        .grid
        .radii()
        .zip(field.values.iter().zip(&du))
        .map(|(r, (u, d))| psi_prime(r / radius) * (d * u.conj()).im * r * r)
        .collect();
    Ok((vr, 2.0 * radius * 4.0 * PI * simpson(&rate, h)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(p: f64, alpha: f64, gamma: f64, grid: RadialGrid) -> RadialField {
        RadialField::from_fn(grid, |r| {
            Complex64::from_polar(p * (-alpha * r * r / 2.0).exp(), gamma * r * r)
        })
    }

    fn grid() -> RadialGrid {
        RadialGrid::with_step(1.0 / 400.0, 12.0).unwrap()
    }

    #[test]
    fn gaussian_mass_matches_formula() {
        let m = moments(&gaussian(1.0, 1.0, 0.0, grid()));
        assert!((m.mass - PI.powf(1.5)).abs() < 1e-10);
    }

    #[test]
    fn zero_field_has_zero_moments() {
        let m = moments(&RadialField::zeros(grid()));
        assert_eq!(m.mass, 0.0);
        assert_eq!(m.grad_sq, 0.0);
        assert_eq!(m.variance_rate, 0.0);
        let s = radial_fourier(
            &RadialField::zeros(grid()),
            FrequencyGrid { dk: 0.1, count: 11 },
        );
        assert!(s.values.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn variance_rate_of_quadratic_phase() {
        let gamma = 0.5;
        let m = moments(&gaussian(1.0, 1.0, gamma, grid()));
        // F = ∫ r⁴ e^{-r²} dr = 3√π/8
        let f = 3.0 * PI.sqrt() / 8.0;
        assert!((m.variance_rate - 32.0 * PI * gamma * f).abs() < 1e-8);
        assert!((m.variance - 4.0 * PI * f).abs() < 1e-10);
    }

    #[test]
    fn gaussian_spectrum_matches_closed_form() {
        let s = radial_fourier(
            &gaussian(1.0, 1.0, 0.0, grid()),
            FrequencyGrid {
                dk: 0.01,
                count: 101,
            },
        );
        for (j, v) in s.values.iter().enumerate() {
            let r = j as f64 * 0.01;
            let exact = (2.0 * PI).powf(1.5) * (-2.0 * PI * PI * r * r).exp();
            assert!((v.re - exact).abs() < 1e-9 && v.im.abs() < 1e-12, "R={r}");
        }
    }

    #[test]
    fn gaussian_hhalf() {
        let h = hhalf_sq_of(&gaussian(1.0, 1.0, 0.0, grid())).unwrap();
        assert!((h / (2.0 * PI) - 1.0).abs() < 1e-7, "{h}");
        // p=1, α=2, γ=1/2: (2π/α)(1 + 4γ²/α²)^{1/2}
        let h = hhalf_sq_of(&gaussian(1.0, 2.0, 0.5, grid())).unwrap();
        let exact = PI * 1.25f64.sqrt();
        assert!((h / exact - 1.0).abs() < 1e-7, "{h} vs {exact}");
    }

    #[test]
    fn plancherel_on_gaussian() {
        let f = gaussian(1.3, 0.7, -0.4, grid());
        let s = auto_spectrum(&f);
        assert!(!s.truncated);
        let m = moments(&f).mass;
        assert!((plancherel_mass(&s) / m - 1.0).abs() < 1e-8);
    }

    #[test]
    fn psi_is_c2_and_monotone() {
        for s in [1.0, 2.0] {
            let e = 1e-6;
            assert!((psi(s - e) - psi(s + e)).abs() < 1e-5);
            assert!((psi_prime(s - e) - psi_prime(s + e)).abs() < 1e-5);
        }
        let mut last = 0.0;
        for i in 0..=3000 {
            let s = i as f64 * 1e-3;
            assert!(psi(s) >= last);
            assert!(psi_prime(s) >= 0.0);
            last = psi(s);
        }
    }

    #[test]
    fn localized_variance_equals_variance_for_compact_support() {
        let g = grid();
        let f = RadialField::from_fn(g, |r| {
            Complex64::new(if r < 1.0 { (1.0 - r * r).powi(3) } else { 0.0 }, 0.0)
        });
        let (vr, _) = localized_variance(&f, 1.5).unwrap();
        assert!((vr - moments(&f).variance).abs() < 1e-14);
    }

    #[test]
    fn localized_variance_counts_far_tail_at_plateau() {
        let g = grid();
        let radius = 2.0;
        let f = RadialField::from_fn(g, |r| {
            Complex64::new(if (5.0..=10.0).contains(&r) { 1.0 } else { 0.0 }, 0.0)
        });
        let tail_mass = f.integrate(|_, u| u.norm_sqr());
        let (vr, rate) = localized_variance(&f, radius).unwrap();
        assert!((vr - 2.0 * radius * radius * tail_mass).abs() < 1e-12 * vr);
        assert_eq!(rate, 0.0);
    }

    #[test]
    fn gaussian_localized_variance_converges() {
        let f = gaussian(1.0, 1.0, 0.3, grid());
        let m = moments(&f);
        let (vr, rate) = localized_variance(&f, 10.0).unwrap();
        assert!((vr / m.variance - 1.0).abs() < 1e-8);
        assert!((rate / m.variance_rate - 1.0).abs() < 1e-8);
    }
}
