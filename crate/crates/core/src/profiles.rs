//! The five radial initial-data families and their closed-form diagnostics.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::groundstate::GroundState;
use crate::quantities::{hhalf_sq_of, Diagnostics, Moments, PhaseSplit, RadialField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Profile {
    /// `λ^{3/2} Q(λr) e^{iγr²}`; mass equals `M[Q]` for every `λ`.
    Q { lambda: f64, gamma: f64 },
    /// `p e^{−αr²/2} e^{iγr²}`.
    Gaussian { p: f64, alpha: f64, gamma: f64 },
    /// `p e^{−αr⁴/2} e^{iγr²}`.
    SuperGaussian { p: f64, alpha: f64, gamma: f64 },
    /// `p r² e^{−αr²} e^{iγr²}`.
    OffCentered { p: f64, alpha: f64, gamma: f64 },
    /// `p cos(βr) e^{−r²} e^{iγr²}`.
    Oscillatory { p: f64, beta: f64, gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Q,
    Gaussian,
    SuperGaussian,
    OffCentered,
    Oscillatory,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Q => "q",
            Family::Gaussian => "gaussian",
            Family::SuperGaussian => "supergaussian",
            Family::OffCentered => "offcentered",
            Family::Oscillatory => "oscillatory",
        }
    }

    pub fn parameter_names(&self) -> &'static [&'static str] {
        match self {
            Family::Q => &["lambda", "gamma"],
            Family::Gaussian | Family::SuperGaussian | Family::OffCentered => {
                &["p", "alpha", "gamma"]
            }
            Family::Oscillatory => &["p", "beta", "gamma"],
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "q" | "qprofile" | "sech" => Ok(Family::Q),
            "gaussian" => Ok(Family::Gaussian),
            "supergaussian" | "super-gaussian" => Ok(Family::SuperGaussian),
            "offcentered" | "off-centered" => Ok(Family::OffCentered),
            "oscillatory" => Ok(Family::Oscillatory),
            other => Err(Error::Parse(format!("unknown family `{other}`"))),
        }
    }
}

impl Profile {
    pub fn family(&self) -> Family {
        match self {
            Profile::Q { .. } => Family::Q,
            Profile::Gaussian { .. } => Family::Gaussian,
            Profile::SuperGaussian { .. } => Family::SuperGaussian,
            Profile::OffCentered { .. } => Family::OffCentered,
            Profile::Oscillatory { .. } => Family::Oscillatory,
        }
    }

    /// Family default: unit amplitude and width, no phase.
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::Q => Profile::Q {
                lambda: 1.0,
                gamma: 0.0,
            },
            Family::Gaussian => Profile::Gaussian {
                p: 1.0,
                alpha: 1.0,
                gamma: 0.0,
            },
            Family::SuperGaussian => Profile::SuperGaussian {
                p: 1.0,
                alpha: 1.0,
                gamma: 0.0,
            },
            Family::OffCentered => Profile::OffCentered {
                p: 1.0,
                alpha: 1.0,
                gamma: 0.0,
            },
            Family::Oscillatory => Profile::Oscillatory {
                p: 1.0,
                beta: 0.0,
                gamma: 0.0,
            },
        }
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            Profile::Q { gamma, .. }
            | Profile::Gaussian { gamma, .. }
            | Profile::SuperGaussian { gamma, .. }
            | Profile::OffCentered { gamma, .. }
            | Profile::Oscillatory { gamma, .. } => gamma,
        }
    }

    pub fn param(&self, name: &str) -> Result<f64> {
        let v = match (*self, name) {
            (Profile::Q { lambda, .. }, "lambda") => lambda,
            (Profile::Gaussian { p, .. }, "p")
            | (Profile::SuperGaussian { p, .. }, "p")
            | (Profile::OffCentered { p, .. }, "p")
            | (Profile::Oscillatory { p, .. }, "p") => p,
            (Profile::Gaussian { alpha, .. }, "alpha")
            | (Profile::SuperGaussian { alpha, .. }, "alpha")
            | (Profile::OffCentered { alpha, .. }, "alpha") => alpha,
            (Profile::Oscillatory { beta, .. }, "beta") => beta,
            (_, "gamma") => self.gamma(),
            (_, other) => {
                return Err(Error::Parameter(format!(
                    "family {} has no parameter `{other}`",
                    self.family().name()
                )))
            }
        };
        Ok(v)
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Result<Self> {
        self.param(name)?;
        match (&mut self, name) {
            (Profile::Q { lambda, .. }, "lambda") => *lambda = value,
            (Profile::Gaussian { p, .. }, "p")
            | (Profile::SuperGaussian { p, .. }, "p")
            | (Profile::OffCentered { p, .. }, "p")
            | (Profile::Oscillatory { p, .. }, "p") => *p = value,
            (Profile::Gaussian { alpha, .. }, "alpha")
            | (Profile::SuperGaussian { alpha, .. }, "alpha")
            | (Profile::OffCentered { alpha, .. }, "alpha") => *alpha = value,
            (Profile::Oscillatory { beta, .. }, "beta") => *beta = value,
            (Profile::Q { gamma, .. }, "gamma")
            | (Profile::Gaussian { gamma, .. }, "gamma")
            | (Profile::SuperGaussian { gamma, .. }, "gamma")
            | (Profile::OffCentered { gamma, .. }, "gamma")
            | (Profile::Oscillatory { gamma, .. }, "gamma") => *gamma = value,
            _ => unreachable!("parameter name checked above"),
        }
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Parameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        if !self.gamma().is_finite() {
            return Err(Error::Parameter("gamma must be finite".into()));
        }
        match *self {
            Profile::Q { lambda, .. } => positive("lambda", lambda),
            Profile::Gaussian { p, alpha, .. }
            | Profile::SuperGaussian { p, alpha, .. }
            | Profile::OffCentered { p, alpha, .. } => {
                positive("p", p)?;
                positive("alpha", alpha)
            }
            Profile::Oscillatory { p, beta, .. } => {
                positive("p", p)?;
                if beta.is_finite() && beta >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!(
                        "beta must be nonnegative, got {beta}"
                    )))
                }
            }
        }
    }

    /// Length scale of the profile's core.
    pub fn core_width(&self) -> f64 {
        match *self {
            Profile::Q { lambda, .. } => 1.0 / lambda,
            Profile::Gaussian { alpha, .. } | Profile::OffCentered { alpha, .. } => {
                alpha.powf(-0.5)
            }
            Profile::SuperGaussian { alpha, .. } => alpha.powf(-0.25),
            Profile::Oscillatory { .. } => 1.0 / SQRT_2,
        }
    }

    /// Radius beyond which the profile is below about `1e-10` of its peak.
    pub fn extent(&self) -> f64 {
        match *self {
            Profile::Q { lambda, .. } => 22.0 / lambda,
            Profile::Gaussian { alpha, .. } => (80.0 / alpha).sqrt(),
            Profile::SuperGaussian { alpha, .. } => (80.0 / alpha).powf(0.25),
            Profile::OffCentered { alpha, .. } => (50.0 / alpha).sqrt(),
            Profile::Oscillatory { .. } => 40f64.sqrt(),
        }
    }

    /// Largest admissible grid step: `min(1/(10β), core/20)`.
    pub fn max_step(&self) -> f64 {
        let core = self.core_width() / 20.0;
        match *self {
            Profile::Oscillatory { beta, .. } if beta > 0.0 => core.min(0.1 / beta),
            _ => core,
        }
    }

    /// Grid used when a closed form is missing and quadrature fills in.
    pub fn quadrature_grid(&self) -> RadialGrid {
        let mut dr = self.core_width() / 400.0;
        if let Profile::Oscillatory { beta, .. } = *self {
            if beta > 0.0 {
                dr = dr.min(0.02 / beta);
            }
        }
        RadialGrid::with_step(dr, self.extent()).expect("positive step and extent")
    }

    /// Real envelope `f(r)` without the quadratic phase.
    fn envelope(&self, ground: &GroundState, r: f64) -> f64 {
        match *self {
            Profile::Q { lambda, .. } => lambda.powf(1.5) * ground.eval(lambda * r),
            Profile::Gaussian { p, alpha, .. } => p * (-0.5 * alpha * r * r).exp(),
            Profile::SuperGaussian { p, alpha, .. } => p * (-0.5 * alpha * r.powi(4)).exp(),
            Profile::OffCentered { p, alpha, .. } => p * r * r * (-alpha * r * r).exp(),
            Profile::Oscillatory { p, beta, .. } => p * (beta * r).cos() * (-r * r).exp(),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = self.family();
        write!(f, "family={}", family.name())?;
        for name in family.parameter_names() {
            let v = self.param(name).map_err(|_| fmt::Error)?;
            write!(f, " {name}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for Profile {
    type Err = Error;

    /// Parses the flat `family=gaussian p=2.07 alpha=1 gamma=0` format;
    /// omitted parameters take the family defaults.
    fn from_str(s: &str) -> Result<Self> {
        let pairs = parse_pairs(s)?;
        let family = pairs
            .iter()
            .find(|(k, _)| k == "family")
            .ok_or_else(|| Error::Parse("missing `family=`".into()))?
            .1
            .parse::<Family>()?;
        let mut profile = Profile::default_for(family);
        for (k, v) in pairs.iter().filter(|(k, _)| k != "family") {
            let value: f64 = v
                .parse()
                .map_err(|_| Error::Parse(format!("`{k}={v}` is not a number")))?;
            profile = profile
                .with_param(k, value)
                .map_err(|e| Error::Parse(e.to_string()))?;
        }
        profile.validate()?;
        Ok(profile)
    }
}

/// Splits whitespace-separated `key=value` tokens.
pub fn parse_pairs(s: &str) -> Result<Vec<(String, String)>> {
    s.split_whitespace()
        .map(|tok| {
            tok.split_once('=')
                .map(|(k, v)| (k.trim().to_ascii_lowercase(), v.trim().to_string()))
                .filter(|(k, v)| !k.is_empty() && !v.is_empty())
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{tok}`")))
        })
        .collect()
}

/// `m, a, b, v` of the oscillatory family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatoryHelpers {
    pub m: f64,
    pub a: f64,
    pub b: f64,
    pub v: f64,
}

impl OscillatoryHelpers {
    pub fn new(beta: f64, gamma: f64) -> Self {
        let b2 = beta * beta;
        let g2 = gamma * gamma;
        let e2 = (-b2 / 2.0).exp();
        Self {
            m: 1.0 + (1.0 - b2) * e2,
            a: 3.0 * (1.0 + g2)
                + b2
                + (3.0 * (1.0 + g2) - b2 * (1.0 + 6.0 * g2) + b2 * b2 * g2) * e2,
            b: (3.0 + (1.0 - 2.0 * b2) * (-b2).exp() + 2.0 * (2.0 - b2) * (-b2 / 4.0).exp())
                / (16.0 * SQRT_2),
            v: 3.0 + (3.0 - 6.0 * b2 + b2 * b2) * e2,
        }
    }
}

/// `γ̃² = (4/3) γ² ‖yQ‖²/‖Q‖²`.
pub fn gamma_tilde_sq(gamma: f64, ground: &GroundState) -> f64 {
    4.0 / 3.0 * gamma * gamma * ground.var / ground.mass_sq
}

pub fn sample(profile: &Profile, ground: &GroundState, grid: RadialGrid) -> Result<RadialField> {
    profile.validate()?;
    let limit = profile.max_step();
    if grid.dr() > limit * (1.0 + 1e-12) {
        return Err(Error::Resolution {
            dr: grid.dr(),
            limit,
        });
    }
    let gamma = profile.gamma();
    Ok(RadialField::from_fn(grid, |r| {
        Complex64::from_polar(1.0, gamma * r * r) * profile.envelope(ground, r)
    }))
}

/// Exact-formula diagnostics. The Ḣ½ norm falls back to quadrature (and is
/// flagged) where no closed form is available.
pub fn closed_form_diagnostics(profile: &Profile, ground: &GroundState) -> Result<Diagnostics> {
    closed_form(profile, ground, true)
}

fn closed_form(
    profile: &Profile,
    ground: &GroundState,
    include_hhalf: bool,
) -> Result<Diagnostics> {
    profile.validate()?;
    let pi32 = PI.powf(1.5);
    let gamma = profile.gamma();
    let g2 = gamma * gamma;
    // (mass, phase-free gradient, l4, variance, closed Ḣ½)
    let (mass, grad0, l4, var, hhalf) = match *profile {
        Profile::Q { lambda, .. } => (
            ground.mass_sq,
            lambda * lambda * ground.grad_sq,
            lambda.powi(3) * ground.l4_fourth,
            ground.var / (lambda * lambda),
            (gamma == 0.0).then_some(lambda * ground.hhalf_sq),
        ),
        Profile::Gaussian { p, alpha, .. } => {
            let p2 = p * p;
            (
                pi32 * p2 / alpha.powf(1.5),
                3.0 * pi32 * p2 / (2.0 * alpha.sqrt()),
                pi32 * p2 * p2 / (2.0 * SQRT_2 * alpha.powf(1.5)),
                3.0 * pi32 * p2 / (2.0 * alpha.powf(2.5)),
                Some(2.0 * PI * p2 / alpha * (1.0 + 4.0 * g2 / (alpha * alpha)).sqrt()),
            )
        }
        Profile::SuperGaussian { p, alpha, .. } => {
            let p2 = p * p;
            let g34 = gamma_fn(0.75);
            (
                PI * p2 * g34 / alpha.powf(0.75),
                5.0 * PI * PI * p2 / (2.0 * SQRT_2 * alpha.powf(0.25) * g34),
                PI * g34 * p2 * p2 / (2f64.powf(0.75) * alpha.powf(0.75)),
                PI * PI * p2 / (2.0 * SQRT_2 * alpha.powf(1.25) * g34),
                None,
            )
        }
        Profile::OffCentered { p, alpha, .. } => {
            let p2 = p * p;
            let ratio = g2 / (alpha * alpha);
            (
                15.0 * pi32 * p2 / (32.0 * SQRT_2 * alpha.powf(3.5)),
                33.0 * pi32 * p2 / (32.0 * SQRT_2 * alpha.powf(2.5)),
                945.0 * pi32 * p2 * p2 / (32768.0 * alpha.powf(5.5)),
                105.0 * pi32 * p2 / (128.0 * SQRT_2 * alpha.powf(4.5)),
                Some(
                    3.0 * PI * p2 / (4.0 * alpha.powi(3)) * (1.0 + 2.0 * ratio)
                        / (1.0 + ratio).sqrt(),
                ),
            )
        }
        Profile::Oscillatory { p, beta, .. } => {
            let h = OscillatoryHelpers::new(beta, 0.0);
            let k = pi32 / (4.0 * SQRT_2);
            let p2 = p * p;
            (
                k * p2 * h.m,
                k * p2 * h.a,
                2.0 * k * p2 * p2 * h.b,
                k * p2 * h.v / 4.0,
                None,
            )
        }
    };
    let e_gamma = 2.0 * g2 * var;
    let moments = Moments {
        mass,
        grad_sq: grad0 + 4.0 * g2 * var,
        l4_fourth: l4,
        variance: var,
        variance_rate: 8.0 * gamma * var,
    };
    let mut d = Diagnostics::from_moments(&moments, &ground.norms());
    d.phase = Some(PhaseSplit {
        gamma,
        e0: 0.5 * grad0 - 0.25 * l4,
        e_gamma,
    });
    match hhalf {
        _ if !include_hhalf => d.hhalf_sq = None,
        Some(h) => d.hhalf_sq = Some(h),
        None => {
            let field = sample(profile, ground, profile.quadrature_grid())?;
            d.hhalf_sq = Some(hhalf_sq_of(&field)?);
            d.hhalf_from_quadrature = true;
        }
    }
    Ok(d)
}

/// Closed-form diagnostics without the Ḣ½ norm; cheap enough for root-finding.
pub fn closed_form_core(profile: &Profile, ground: &GroundState) -> Result<Diagnostics> {
    closed_form(profile, ground, false)
}
