//! Analytic blow-up and scattering criteria evaluated on [`Diagnostics`],
//! plus the two sharp inequalities behind them.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::simpson;
use crate::quantities::{localized_variance, moments, Diagnostics, RadialField};

/// Sharp constant of the variance/L⁴ interpolation inequality,
/// `(2²·7⁵·π²/(3⁵·5²))^{1/14}`.
pub fn sharp_constant() -> f64 {
    (4.0 * 7f64.powi(5) * PI * PI / (243.0 * 25.0)).powf(1.0 / 14.0)
}

/// Constant of the localized criterion, `(2¹¹π²/3²)^{1/14}`.
pub fn localized_constant() -> f64 {
    (2f64.powi(11) * PI * PI / 9.0).powf(1.0 / 14.0)
}

/// `c = 1/(4C^{14/3})` of the real-data adapted condition `V < c M^{7/3}/E^{2/3}`.
pub fn adapted_real_constant() -> f64 {
    0.25 / sharp_constant().powf(14.0 / 3.0)
}

/// `M·E` (absolute units) above which the Lushnikov condition for real data
/// implies the adapted one: `7⁵π²/450`.
pub fn regime_boundary_me() -> f64 {
    7f64.powi(5) * PI * PI / 450.0
}

pub const DEFAULT_DELTA: f64 = 0.01;
pub const MAX_DELTA: f64 = 0.1;
/// Implicit constant in `R² ≥ κ_ψ M²/δ` for the fixed localizing weight.
pub const DEFAULT_KAPPA_PSI: f64 = 64.0;

/// `±√(2/√ω + ω − 3)`, positive for `ω ≤ 1` and negative beyond.
pub fn g(omega: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain {
            what: "g",
            value: omega,
        });
    }
    let root = (2.0 / omega.sqrt() + omega - 3.0).max(0.0).sqrt();
    Ok(if omega <= 1.0 { root } else { -root })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CriterionId {
    Dhr,
    NegativeEnergy,
    Lushnikov,
    Adapted,
    RadialLocalized,
    MassConcentration,
}

impl fmt::Display for CriterionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CriterionId::Dhr => "dhr",
            CriterionId::NegativeEnergy => "negative_energy",
            CriterionId::Lushnikov => "lushnikov",
            CriterionId::Adapted => "adapted",
            CriterionId::RadialLocalized => "radial_localized",
            CriterionId::MassConcentration => "mass_concentration",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    BlowUp,
    Scatter,
    NoConclusion,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::BlowUp => "blowup",
            Verdict::Scatter => "scatter",
            Verdict::NoConclusion => "no_conclusion",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub criterion: CriterionId,
    pub verdict: Verdict,
    pub witnesses: BTreeMap<String, f64>,
    /// Name of the failed precondition, if any.
    pub note: Option<String>,
}

impl CriterionVerdict {
    fn new(criterion: CriterionId) -> Self {
        Self {
            criterion,
            verdict: Verdict::NoConclusion,
            witnesses: BTreeMap::new(),
            note: None,
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.witnesses.insert(key.to_string(), value);
        self
    }

    fn conclude(mut self, verdict: Verdict) -> Self {
        self.verdict = verdict;
        self
    }

    fn refuse(mut self, why: &str) -> Self {
        self.verdict = Verdict::NoConclusion;
        self.note = Some(why.to_string());
        self
    }

    pub fn fires(&self) -> bool {
        self.verdict == Verdict::BlowUp
    }

    pub fn witness(&self, key: &str) -> Option<f64> {
        self.witnesses.get(key).copied()
    }
}

/// Mass-energy / mass-gradient dichotomy, with negative energy as blow-up.
pub fn classify_dhr(d: &Diagnostics) -> CriterionVerdict {
    let v = CriterionVerdict::new(CriterionId::Dhr)
        .with("eta", d.eta)
        .with("me_ratio", d.me_ratio)
        .with("energy", d.energy)
        .with("variance", d.variance);
    if !d.trusted {
        return v.refuse("diagnostics untrusted");
    }
    if d.energy < 0.0 && d.variance.is_finite() {
        return v.conclude(Verdict::BlowUp);
    }
    if d.me_ratio < 1.0 && d.eta < 1.0 {
        v.conclude(Verdict::Scatter)
    } else if d.me_ratio < 1.0 && d.eta > 1.0 {
        v.conclude(Verdict::BlowUp)
    } else {
        v
    }
}

/// Glassey-type test alone: `E < 0` with finite variance.
pub fn negative_energy(d: &Diagnostics) -> CriterionVerdict {
    let v = CriterionVerdict::new(CriterionId::NegativeEnergy)
        .with("energy", d.energy)
        .with("variance", d.variance);
    if d.energy < 0.0 && d.variance.is_finite() {
        v.conclude(Verdict::BlowUp)
    } else {
        v
    }
}

/// `ω = 8EV/(3M²)`.
pub fn omega(d: &Diagnostics) -> f64 {
    8.0 * d.energy * d.variance / (3.0 * d.mass * d.mass)
}

/// `κ = 4C^{14/3} E^{2/3} V / M^{7/3}`.
pub fn kappa(d: &Diagnostics) -> f64 {
    4.0 * sharp_constant().powf(14.0 / 3.0) * d.energy.powf(2.0 / 3.0) * d.variance
        / d.mass.powf(7.0 / 3.0)
}

/// `√(3/2)M/√(EV) + (8/3)E⁰V/M² − 3`; positive means the phase-data
/// Lushnikov condition holds for `V_t > 0`.
pub fn lushnikov_simple(mass: f64, energy: f64, e0: f64, variance: f64) -> f64 {
    (1.5f64).sqrt() * mass / (energy * variance).sqrt() + 8.0 / 3.0 * e0 * variance / (mass * mass)
        - 3.0
}

/// `M^{3/2}/(C⁷V^{1/2}) + 4E⁰V/M² − 3(ME/C¹⁴)^{1/3}`.
pub fn adapted_simple(mass: f64, energy: f64, e0: f64, variance: f64) -> f64 {
    let c = sharp_constant();
    mass.powf(1.5) / (c.powi(7) * variance.sqrt()) + 4.0 * e0 * variance / (mass * mass)
        - 3.0 * (mass * energy / c.powi(14)).cbrt()
}

/// Decision from a sign-split simplified form: `V_t > 0` needs the region
/// parameter `≤ 1` and a positive form, `V_t < 0` fires on the whole region
/// `≤ 1` and beyond it when the form is negative.
fn simplified_decision(rate: f64, region: f64, form: f64) -> bool {
    if rate > 0.0 {
        region <= 1.0 && form > 0.0
    } else if rate < 0.0 {
        region <= 1.0 || form < 0.0
    } else {
        region < 1.0
    }
}

fn positive_energy_gate(mut v: CriterionVerdict, d: &Diagnostics) -> Option<CriterionVerdict> {
    if !(d.energy > 0.0) {
        v.note = Some("energy not positive".into());
        return Some(v);
    }
    if !d.variance.is_finite() || d.variance <= 0.0 {
        v.note = Some("variance not finite".into());
        return Some(v);
    }
    None
}

/// `V_t/M < 2√3·g(ω)`.
pub fn lushnikov(d: &Diagnostics) -> CriterionVerdict {
    let v = CriterionVerdict::new(CriterionId::Lushnikov)
        .with("mass", d.mass)
        .with("energy", d.energy)
        .with("variance", d.variance)
        .with("variance_rate", d.variance_rate);
    if let Some(v) = positive_energy_gate(v.clone(), d) {
        return v;
    }
    let w = omega(d);
    let gw = g(w).expect("omega positive for positive energy and variance");
    let lhs = d.variance_rate / d.mass;
    let rhs = 2.0 * 3f64.sqrt() * gw;
    let mut v = v
        .with("omega", w)
        .with("g", gw)
        .with("lhs", lhs)
        .with("threshold", rhs);
    if d.variance_rate == 0.0 {
        v = v.with("variance_bound", 3.0 / 8.0 * d.mass * d.mass / d.energy);
    }
    let fires = lhs < rhs;
    if let Some(split) = d.phase {
        let form = lushnikov_simple(d.mass, d.energy, split.e0, d.variance);
        let agrees = simplified_decision(d.variance_rate, w, form) == fires;
        v = v
            .with("simplified", form)
            .with("simplified_agrees", f64::from(u8::from(agrees)));
    }
    v.conclude(if fires {
        Verdict::BlowUp
    } else {
        Verdict::NoConclusion
    })
}

/// `V_t/M < (2√2(ME)^{1/6}/C^{7/3})·g(κ)`.
pub fn adapted(d: &Diagnostics) -> CriterionVerdict {
    let v = CriterionVerdict::new(CriterionId::Adapted)
        .with("mass", d.mass)
        .with("energy", d.energy)
        .with("variance", d.variance)
        .with("variance_rate", d.variance_rate);
    if let Some(v) = positive_energy_gate(v.clone(), d) {
        return v;
    }
    let c = sharp_constant();
    let k = kappa(d);
    let gk = g(k).expect("kappa positive for positive energy and variance");
    let lhs = d.variance_rate / d.mass;
    let rhs = 2.0 * 2f64.sqrt() * d.me().powf(1.0 / 6.0) / c.powf(7.0 / 3.0) * gk;
    let mut v = v
        .with("kappa", k)
        .with("g", gk)
        .with("lhs", lhs)
        .with("threshold", rhs);
    if d.variance_rate == 0.0 {
        v = v.with(
            "variance_bound",
            adapted_real_constant() * d.mass.powf(7.0 / 3.0) / d.energy.powf(2.0 / 3.0),
        );
    }
    let fires = lhs < rhs;
    if let Some(split) = d.phase {
        let form = adapted_simple(d.mass, d.energy, split.e0, d.variance);
        let agrees = simplified_decision(d.variance_rate, k, form) == fires;
        v = v
            .with("simplified", form)
            .with("simplified_agrees", f64::from(u8::from(agrees)));
    }
    v.conclude(if fires {
        Verdict::BlowUp
    } else {
        Verdict::NoConclusion
    })
}

/// The adapted threshold rewritten against the Lushnikov variable:
/// `2√3·μ·g(ω/μ²)` with `μ = √2(ME)^{1/6}/(√3 C^{7/3})`.
pub fn adapted_threshold_via_omega(d: &Diagnostics) -> Result<f64> {
    let mu =
        2f64.sqrt() * d.me().powf(1.0 / 6.0) / (3f64.sqrt() * sharp_constant().powf(7.0 / 3.0));
    Ok(2.0 * 3f64.sqrt() * mu * g(omega(d) / (mu * mu))?)
}

/// Localized variance data entering the infinite-variance criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizedInput {
    pub mass: f64,
    pub energy: f64,
    pub radius: f64,
    pub localized_variance: f64,
    pub localized_rate: f64,
}

impl LocalizedInput {
    pub fn from_field(field: &RadialField, radius: f64) -> Result<Self> {
        let m = moments(field);
        let (v, rate) = localized_variance(field, radius)?;
        Ok(Self {
            mass: m.mass,
            energy: 0.5 * m.grad_sq - 0.25 * m.l4_fourth,
            radius,
            localized_variance: v,
            localized_rate: rate,
        })
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 && delta <= MAX_DELTA {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "delta must lie in (0, {MAX_DELTA}], got {delta}"
        )))
    }
}

/// Localized-variance criterion for radial data of possibly infinite variance.
pub fn radial_localized(
    input: &LocalizedInput,
    delta: f64,
    kappa_psi: f64,
) -> Result<CriterionVerdict> {
    check_delta(delta)?;
    let LocalizedInput {
        mass: m,
        energy: e,
        radius: r,
        localized_variance: vr,
        localized_rate: vr_t,
    } = *input;
    let me = m * e;
    let v = CriterionVerdict::new(CriterionId::RadialLocalized)
        .with("mass", m)
        .with("energy", e)
        .with("me", me)
        .with("radius", r)
        .with("localized_variance", vr)
        .with("localized_rate", vr_t)
        .with("delta", delta)
        .with("kappa_psi", kappa_psi)
        .with("radius_floor", (kappa_psi * m * m / delta).sqrt());
    // taken literally in absolute units
    if !(me > 1.0) {
        return Ok(v.refuse("ME > 1 fails"));
    }
    if vr / m > r * r / 2.0 {
        return Ok(v.refuse("V_R/M <= R^2/2 fails"));
    }
    if r * r < kappa_psi * m * m / delta {
        return Ok(v.refuse("R^2 >= kappa_psi M^2/delta fails"));
    }
    let cinf = localized_constant();
    let arg = (8.0 + delta).powf(2.0 / 3.0)
        * (1.0 - delta).powf(-2.0 / 3.0)
        * cinf.powf(14.0 / 3.0)
        * e.powf(2.0 / 3.0)
        * vr
        / m.powf(7.0 / 3.0);
    let ga = g(arg)?;
    let coeff =
        6f64.sqrt() * (8.0 + delta).powf(1.0 / 6.0) * (1.0 - delta).cbrt() * me.powf(1.0 / 6.0)
            / cinf.powf(7.0 / 3.0);
    let lhs = vr_t / m;
    let rhs = coeff * ga;
    let v = v
        .with("kappa_r", arg)
        .with("g", ga)
        .with("lhs", lhs)
        .with("threshold", rhs);
    Ok(v.conclude(if lhs < rhs {
        Verdict::BlowUp
    } else {
        Verdict::NoConclusion
    }))
}

/// Mass fraction of `field` at radius `≥ rho`, with linear interpolation
/// of the integrand inside the cell containing `rho`.
pub fn mass_outside(field: &RadialField, rho: f64) -> f64 {
    let grid = field.grid;
    let h = grid.dr();
    let dens: Vec<f64> = grid
        .radii()
        .zip(&field.values)
        .map(|(r, u)| 4.0 * PI * u.norm_sqr() * r * r)
        .collect();
    if rho <= 0.0 {
        return simpson(&dens, h);
    }
    if rho >= grid.r_max() {
        return 0.0;
    }
    let k = (rho / h).floor() as usize;
    let t = rho / h - k as f64;
    let at_rho = dens[k] + t * (dens[k + 1] - dens[k]);
    let partial = 0.5 * (at_rho + dens[k + 1]) * (1.0 - t) * h;
    partial + simpson(&dens[k + 1..], h)
}

/// Mass-concentration corollary for real radial data.
pub fn mass_concentration(field: &RadialField, delta: f64) -> Result<CriterionVerdict> {
    check_delta(delta)?;
    if field.max_imag() > 1e-12 * field.amplitude().max(f64::MIN_POSITIVE) {
        return Err(Error::Inapplicable(
            "mass concentration needs real-valued data".into(),
        ));
    }
    let mom = moments(field);
    let m = mom.mass;
    let e = 0.5 * mom.grad_sq - 0.25 * mom.l4_fourth;
    let me = m * e;
    let v = CriterionVerdict::new(CriterionId::MassConcentration)
        .with("mass", m)
        .with("energy", e)
        .with("me", me)
        .with("delta", delta);
    if !(me > 1.0) {
        return Ok(v.refuse("ME > 1 fails"));
    }
    let rho = delta.sqrt() * m * me.powf(-1.0 / 3.0);
    let fraction = mass_outside(field, rho) / m;
    let bound = delta * delta * me.powf(-2.0 / 3.0);
    let v = v
        .with("radius", rho)
        .with("outside_fraction", fraction)
        .with("bound", bound);
    Ok(v.conclude(if fraction <= bound {
        Verdict::BlowUp
    } else {
        Verdict::NoConclusion
    }))
}

/// Every diagnostics-based criterion in one pass.
pub fn evaluate_all(d: &Diagnostics) -> Vec<CriterionVerdict> {
    vec![
        classify_dhr(d),
        negative_energy(d),
        lushnikov(d),
        adapted(d),
    ]
}

/// Residuals of the uncertainty and interpolation inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    /// `(4/9)V‖∇u‖² − M² − (4/9)|Im∫(x·∇u)ū|²`.
    pub uncertainty_residual: f64,
    /// `C·V^{3/14}‖u‖₄^{4/7} − M^{1/2}`.
    pub interpolation_residual: f64,
    /// `V^{3/14}‖u‖₄^{4/7}/M^{1/2}`, bounded below by `1/C`.
    pub lagrangian: f64,
    pub lagrangian_floor: f64,
    /// `C·L(u) − 1`; zero exactly on extremizers.
    pub extremality_gap: f64,
}

pub fn verify_inequalities(field: &RadialField) -> InequalityReport {
    inequality_report(&moments(field))
}

pub fn inequality_report(m: &crate::quantities::Moments) -> InequalityReport {
    let c = sharp_constant();
    let momentum = m.variance_rate / 4.0;
    let scale = m.variance.powf(3.0 / 14.0) * m.l4_fourth.powf(1.0 / 7.0);
    let lagrangian = scale / m.mass.sqrt();
    InequalityReport {
        uncertainty_residual: 4.0 / 9.0 * m.variance * m.grad_sq
            - m.mass * m.mass
            - 4.0 / 9.0 * momentum * momentum,
        interpolation_residual: c * scale - m.mass.sqrt(),
        lagrangian,
        lagrangian_floor: 1.0 / c,
        extremality_gap: c * lagrangian - 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundstate::solve_default;
    use crate::profiles::{closed_form_core, Profile};
    use crate::RadialGrid;
    use num_complex::Complex64;

    #[test]
    fn constants() {
        assert!(
            (sharp_constant() - 1.3983).abs() < 5e-5,
            "{}",
            sharp_constant()
        );
        let alt = (2f64.powf(5.5) * PI / 3.0).powf(1.0 / 7.0);
        assert!((localized_constant() - alt).abs() < 1e-14);
    }

    #[test]
    fn g_values() {
        assert_eq!(g(1.0).unwrap(), 0.0);
        assert!((g(4.0).unwrap() + 2f64.sqrt()).abs() < 1e-14);
        assert!((g(0.25).unwrap() - 1.25f64.sqrt()).abs() < 1e-14);
        assert!(g(0.0).is_err());
        assert!(g(-1.0).is_err());
    }

    #[test]
    fn dhr_on_rescaled_ground_state() {
        let q = solve_default().unwrap();
        let at = |lambda| {
            classify_dhr(&closed_form_core(&Profile::Q { lambda, gamma: 0.0 }, &q).unwrap()).verdict
        };
        assert_eq!(at(0.9), Verdict::Scatter);
        assert_eq!(at(1.1), Verdict::BlowUp);
        assert_eq!(at(1.0), Verdict::NoConclusion);
        let neg = closed_form_core(
            &Profile::Gaussian {
                p: 3.0,
                alpha: 1.0,
                gamma: 0.0,
            },
            &q,
        )
        .unwrap();
        assert!(neg.energy < 0.0);
        assert_eq!(classify_dhr(&neg).verdict, Verdict::BlowUp);
    }

    #[test]
    fn lushnikov_and_adapted_on_gaussians() {
        let q = solve_default().unwrap();
        let d = |p| {
            closed_form_core(
                &Profile::Gaussian {
                    p,
                    alpha: 1.0,
                    gamma: 0.0,
                },
                &q,
            )
            .unwrap()
        };
        assert!(lushnikov(&d(2.39)).fires() && !lushnikov(&d(2.37)).fires());
        assert!(adapted(&d(2.46)).fires() && !adapted(&d(2.44)).fires());
        let qd = |gamma| closed_form_core(&Profile::Q { lambda: 1.0, gamma }, &q).unwrap();
        assert!(lushnikov(&qd(-0.18)).fires() && !lushnikov(&qd(-0.17)).fires());
        assert!(adapted(&qd(-0.281)).fires() && !adapted(&qd(-0.279)).fires());
    }

    #[test]
    fn boundary_omega_one_is_no_conclusion() {
        let q = solve_default().unwrap();
        let mut d = closed_form_core(
            &Profile::Gaussian {
                p: 2.0,
                alpha: 1.0,
                gamma: 0.0,
            },
            &q,
        )
        .unwrap();
        d.variance = 3.0 * d.mass * d.mass / (8.0 * d.energy);
        d.phase = None;
        assert!((omega(&d) - 1.0).abs() < 1e-14);
        let v = lushnikov(&d);
        assert!(v.witness("g").unwrap().abs() < 1e-6);
        assert_eq!(v.verdict, Verdict::NoConclusion);
    }

    #[test]
    fn comparison_form_matches() {
        let q = solve_default().unwrap();
        for (p, gamma) in [(1.5, 0.3), (2.2, -0.5), (2.6, 0.0), (1.0, 1.0)] {
            let d = closed_form_core(
                &Profile::Gaussian {
                    p,
                    alpha: 1.0,
                    gamma,
                },
                &q,
            )
            .unwrap();
            let direct = adapted(&d).witness("threshold").unwrap();
            let via = adapted_threshold_via_omega(&d).unwrap();
            assert!(
                (direct - via).abs() < 1e-12 * direct.abs().max(1.0),
                "{direct} {via}"
            );
        }
    }

    #[test]
    fn localized_preconditions() {
        let input = LocalizedInput {
            mass: 0.5,
            energy: 1.0,
            radius: 100.0,
            localized_variance: 1.0,
            localized_rate: 0.0,
        };
        let v = radial_localized(&input, 0.01, DEFAULT_KAPPA_PSI).unwrap();
        assert_eq!(v.verdict, Verdict::NoConclusion);
        assert!(v.note.unwrap().contains("ME"));
        assert!(radial_localized(&input, 0.2, DEFAULT_KAPPA_PSI).is_err());
        assert!(radial_localized(&input, 0.0, DEFAULT_KAPPA_PSI).is_err());
    }

    #[test]
    fn localized_small_delta_limit() {
        let input = LocalizedInput {
            mass: 40.0,
            energy: 2.0,
            radius: 1e9,
            localized_variance: 50.0,
            localized_rate: -1.0,
        };
        let at = |delta| {
            radial_localized(&input, delta, DEFAULT_KAPPA_PSI)
                .unwrap()
                .witness("threshold")
                .unwrap()
        };
        let cinf = localized_constant();
        let me: f64 = 80.0;
        let arg = 4.0 * cinf.powf(14.0 / 3.0) * 2f64.powf(2.0 / 3.0) * 50.0 / 40f64.powf(7.0 / 3.0);
        let limit = 6f64.sqrt() * 8f64.powf(1.0 / 6.0) * me.powf(1.0 / 6.0) / cinf.powf(7.0 / 3.0)
            * g(arg).unwrap();
        assert!((at(1e-9) - limit).abs() < 1e-6 * limit.abs());
    }

    #[test]
    fn mass_concentration_cases() {
        let grid = RadialGrid::with_step(1e-3, 4.0).unwrap();
        let complex = RadialField::from_fn(grid, |r| Complex64::new(0.0, (-r * r).exp()));
        assert!(matches!(
            mass_concentration(&complex, 0.01),
            Err(Error::Inapplicable(_))
        ));
        let spread =
            RadialField::from_fn(grid, |r| Complex64::new(2.5 * (-r * r / 2.0).exp(), 0.0));
        let v = mass_concentration(&spread, 0.01).unwrap();
        assert_eq!(v.verdict, Verdict::NoConclusion);
        assert!(v.witness("outside_fraction").unwrap() > v.witness("bound").unwrap());
    }

    #[test]
    fn mass_outside_partial_cell() {
        let grid = RadialGrid::with_step(1e-3, 2.0).unwrap();
        let field = RadialField::from_fn(grid, |r| {
            Complex64::new(if r <= 1.0 { 1.0 } else { 0.0 }, 0.0)
        });
        let exact = 4.0 * PI / 3.0 * (1.0 - 0.5f64.powi(3));
        assert!((mass_outside(&field, 0.5) - exact).abs() < 1e-2);
        assert_eq!(mass_outside(&field, 5.0), 0.0);
    }

    #[test]
    fn gaussian_saturates_uncertainty() {
        let grid = RadialGrid::with_step(1e-3, 10.0).unwrap();
        let field = RadialField::from_fn(grid, |r| Complex64::new((-0.7 * r * r).exp(), 0.0));
        let rep = verify_inequalities(&field);
        let m = moments(&field);
        assert!(
            rep.uncertainty_residual.abs() < 1e-8 * m.mass * m.mass,
            "{}",
            rep.uncertainty_residual
        );
        assert!(rep.interpolation_residual > 0.0);
    }

    #[test]
    fn extremizer_attains_the_constant() {
        let grid = RadialGrid::new(1.0, 20000).unwrap();
        let field =
            RadialField::from_fn(grid, |r| Complex64::new((1.0 - r * r).max(0.0).sqrt(), 0.0));
        let m = moments(&field);
        assert!((m.mass / (8.0 * PI / 15.0) - 1.0).abs() < 1e-10);
        assert!((m.l4_fourth / (32.0 * PI / 105.0) - 1.0).abs() < 1e-10);
        assert!((m.variance / (8.0 * PI / 35.0) - 1.0).abs() < 1e-10);
        let rep = verify_inequalities(&field);
        let target = 243.0 * 25.0 / (4.0 * 7f64.powi(5) * PI * PI);
        assert!((rep.lagrangian.powi(14) / target - 1.0).abs() < 1e-8);
        assert!(rep.extremality_gap.abs() < 1e-9);
    }
}
