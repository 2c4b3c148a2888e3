//! Blow-up/scattering thresholds in one profile parameter, located by
//! bisection over simulated classifications, plus independent sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{self, CriterionVerdict, Verdict};
use crate::error::{Error, Result};
use crate::groundstate::GroundState;
use crate::profiles::{closed_form_core, closed_form_diagnostics, sample, Profile};
use crate::quantities::{compute_diagnostics, Diagnostics};
use crate::solver::{simulate_profile, Classification, EvolveParams};

/// Environment variable capping the number of sweep workers.
pub const THREADS_ENV: &str = "NLS_COLLAPSE_THREADS";

pub const DEFAULT_TOL: f64 = 0.01;

/// One simulated point, without its time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub value: f64,
    pub classification: Classification,
    pub final_time: f64,
    pub steps: usize,
    pub mass_drift: f64,
    pub energy_drift: f64,
    /// Set when the first attempt was undetermined and the point was rerun
    /// with a doubled horizon and halved step.
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub template: Profile,
    pub vary: String,
    pub p_scatter: f64,
    pub p_blowup: f64,
    pub width: f64,
    /// Bisection stopped early on a persistently undetermined midpoint.
    pub inconclusive: bool,
    pub scatter_run: RunSummary,
    pub blowup_run: RunSummary,
    pub scatter_criteria: Vec<CriterionVerdict>,
    pub blowup_criteria: Vec<CriterionVerdict>,
    /// Every simulated point, in the order it was run.
    pub runs: Vec<RunSummary>,
}

/// Simulate `template` with `vary` set to `value`. An undetermined outcome
/// (or an unreliable run) is retried once at doubled `t_max` and halved
/// radial step.
pub fn classify_point(
    template: &Profile,
    vary: &str,
    value: f64,
    params: &EvolveParams,
    ground: &GroundState,
) -> Result<RunSummary> {
    let profile = template.with_param(vary, value)?;
    profile.validate()?;
    let base = params.resolved_for(&profile);
    let summarize = |p: &EvolveParams, refined: bool| -> Result<RunSummary> {
        let out = simulate_profile(&profile, ground, p)?;
        Ok(RunSummary {
            value,
            classification: out.classification,
            final_time: out.final_time(),
            steps: out.steps,
            mass_drift: out.mass_drift,
            energy_drift: out.energy_drift,
            refined,
        })
    };
    let first = summarize(&base, false);
    let retry = match &first {
        Ok(s) => matches!(s.classification, Classification::Undetermined { .. }),
        Err(Error::Unreliable { .. }) => true,
        Err(_) => false,
    };
    if !retry {
        return first;
    }
    let refined = EvolveParams {
        t_max: 2.0 * base.t_max,
        intervals: 2 * base.intervals,
        ..base
    };
    summarize(&refined, true)
}

/// Diagnostics for criteria: closed forms when available, else quadrature of
/// the sampled profile.
pub fn initial_diagnostics(profile: &Profile, ground: &GroundState) -> Result<Diagnostics> {
    match closed_form_core(profile, ground) {
        Ok(d) => Ok(d),
        Err(_) => Ok(compute_diagnostics(
            &sample(profile, ground, profile.quadrature_grid())?,
            ground,
        )),
    }
}

/// Bisect on the classification between a verified Scattered `bracket.0` and
/// a verified BlowUp `bracket.1` until the width is at most `tol`.
pub fn find_threshold(
    template: &Profile,
    vary: &str,
    bracket: (f64, f64),
    tol: f64,
    params: &EvolveParams,
    ground: &GroundState,
) -> Result<ThresholdResult> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Bracket(format!("need low < high, got ({lo}, {hi})")));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tol must be positive, got {tol}")));
    }
    params.validate()?;
    let mut runs = Vec::new();
    let low = classify_point(template, vary, lo, params, ground)?;
    runs.push(low.clone());
    if !low.classification.is_scattered() {
        return Err(Error::Bracket(format!(
            "{vary} = {lo} classifies {}, expected scattered",
            low.classification.label()
        )));
    }
    let high = classify_point(template, vary, hi, params, ground)?;
    runs.push(high.clone());
    if !high.classification.is_blowup() {
        return Err(Error::Bracket(format!(
            "{vary} = {hi} classifies {}, expected blow-up",
            high.classification.label()
        )));
    }
    let (mut scatter_run, mut blowup_run) = (low, high);
    let mut inconclusive = false;
    while blowup_run.value - scatter_run.value > tol {
        let mid = 0.5 * (scatter_run.value + blowup_run.value);
        let run = classify_point(template, vary, mid, params, ground)?;
        runs.push(run.clone());
        match run.classification {
            Classification::Scattered { .. } => scatter_run = run,
            Classification::BlowUp { .. } => blowup_run = run,
            Classification::Undetermined { .. } => {
                inconclusive = true;
                break;
            }
        }
    }
    let verdicts = |value: f64| -> Result<Vec<CriterionVerdict>> {
        let profile = template.with_param(vary, value)?;
        Ok(criteria::evaluate_all(&initial_diagnostics(
            &profile, ground,
        )?))
    };
    Ok(ThresholdResult {
        template: *template,
        vary: vary.to_string(),
        p_scatter: scatter_run.value,
        p_blowup: blowup_run.value,
        width: blowup_run.value - scatter_run.value,
        inconclusive,
        scatter_criteria: verdicts(scatter_run.value)?,
        blowup_criteria: verdicts(blowup_run.value)?,
        scatter_run,
        blowup_run,
        runs,
    })
}

/// Where the analytic criteria switch on or off along `vary`, from closed
/// forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionCurves {
    /// End of the initial stretch where the mass-energy dichotomy gives Scatter.
    pub p_dhr_scatter: Option<f64>,
    /// First value where the Lushnikov criterion fires.
    pub p_lushnikov: Option<f64>,
    /// First value where the adapted criterion fires.
    pub p_adapted: Option<f64>,
    /// First value where the Ḣ½ norm reaches that of the ground state.
    pub p_hhalf: Option<f64>,
    /// First value where the energy is negative.
    pub p_negative_energy: Option<f64>,
}

const CURVE_SAMPLES: usize = 400;

/// First point of `[lo, hi]` where `pred` differs from `pred(lo)`, refined by
/// bisection; `None` when the sampled predicate never changes.
pub fn first_transition(
    mut pred: impl FnMut(f64) -> bool,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Option<f64> {
    let start = pred(lo);
    let step = (hi - lo) / samples as f64;
    let mut prev = lo;
    for i in 1..=samples {
        let x = lo + i as f64 * step;
        if pred(x) != start {
            let (mut a, mut b) = (prev, x);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if pred(m) == start {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Some(0.5 * (a + b));
        }
        prev = x;
    }
    None
}

/// Criterion curves over `range` for the parameter `vary` of `template`.
pub fn criterion_curves(
    template: &Profile,
    vary: &str,
    range: (f64, f64),
    ground: &GroundState,
) -> Result<CriterionCurves> {
    template.param(vary)?;
    let (lo, hi) = range;
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::Parameter(format!(
            "curve range must satisfy 0 < lo < hi, got ({lo}, {hi})"
        )));
    }
    let diag = |x: f64| {
        template
            .with_param(vary, x)
            .and_then(|p| closed_form_core(&p, ground))
            .ok()
    };
    let check = |x: f64, f: &dyn Fn(&Diagnostics) -> bool| diag(x).is_some_and(|d| f(&d));
    let dhr_scatter = |d: &Diagnostics| criteria::classify_dhr(d).verdict == Verdict::Scatter;
    let p_dhr_scatter = if check(lo, &dhr_scatter) {
        first_transition(|x| check(x, &dhr_scatter), lo, hi, CURVE_SAMPLES)
    } else {
        None
    };
    let first_true = |f: &dyn Fn(&Diagnostics) -> bool| {
        if check(lo, f) {
            Some(lo)
        } else {
            first_transition(|x| check(x, f), lo, hi, CURVE_SAMPLES)
        }
    };
    let p_lushnikov = first_true(&|d| criteria::lushnikov(d).fires());
    let p_adapted = first_true(&|d| criteria::adapted(d).fires());
    let p_negative_energy = first_true(&|d| d.energy < 0.0);
    let q = ground.hhalf_sq;
    let p_hhalf = if vary == "p" {
        // the Ḣ½ norm scales as p²
        let at = |p: f64| -> Result<f64> {
            let d = closed_form_diagnostics(&template.with_param("p", p)?, ground)?;
            d.hhalf_sq.ok_or(Error::Truncated)
        };
        let h = at(1.0)?;
        let p = (q / h).sqrt();
        (lo..=hi).contains(&p).then_some(p)
    } else {
        let above = |x: f64| {
            template
                .with_param(vary, x)
                .and_then(|p| closed_form_diagnostics(&p, ground))
                .ok()
                .and_then(|d| d.hhalf_sq)
                .is_some_and(|h| h >= q)
        };
        if above(lo) {
            Some(lo)
        } else {
            first_transition(above, lo, hi, 100)
        }
    };
    Ok(CriterionCurves {
        p_dhr_scatter,
        p_lushnikov,
        p_adapted,
        p_hhalf,
        p_negative_energy,
    })
}

/// A bracket in `p` from the analytic criteria: 0.98 of the end of the DHR
/// scattering stretch, and 1.02 of the first value where a blow-up criterion
/// (Lushnikov, adapted or negative energy) fires.
pub fn analytic_bracket(template: &Profile, ground: &GroundState) -> Result<(f64, f64)> {
    let start = template.param("p")?;
    let hi_search = 20.0 * start.max(1.0) * template.core_width().max(1.0).powi(2);
    let c = criterion_curves(template, "p", (1e-3, hi_search), ground)?;
    let lo = c
        .p_dhr_scatter
        .ok_or_else(|| Error::Bracket("no analytic scattering region".into()))?;
    let hi = [c.p_lushnikov, c.p_adapted, c.p_negative_energy]
        .into_iter()
        .flatten()
        .fold(f64::INFINITY, f64::min);
    if !hi.is_finite() {
        return Err(Error::Bracket("no analytic blow-up region".into()));
    }
    Ok((0.98 * lo, 1.02 * hi))
}

/// One sweep point: a template and the bracket to bisect within.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub template: Profile,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub threshold: Result<ThresholdResult>,
    pub curves: Result<CriterionCurves>,
}

/// Worker count: the request (or the available parallelism), capped by
/// [`THREADS_ENV`] when set.
pub fn worker_count(requested: Option<usize>) -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    let n = requested.unwrap_or(available).max(1);
    cap.map_or(n, |c| n.min(c))
}

/// Run [`find_threshold`] at every point, independently and in parallel.
/// Rows come back in input order; a failed point does not stop the others.
pub fn sweep(
    points: &[SweepPoint],
    vary: &str,
    tol: f64,
    params: &EvolveParams,
    ground: &GroundState,
    workers: usize,
) -> Result<Vec<SweepRow>> {
    if points.is_empty() {
        return Err(Error::Parameter("sweep lattice is empty".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        points
            .par_iter()
            .map(|point| {
                let (lo, hi) = point.bracket;
                SweepRow {
                    point: *point,
                    threshold: find_threshold(
                        &point.template,
                        vary,
                        point.bracket,
                        tol,
                        params,
                        ground,
                    ),
                    curves: criterion_curves(
                        &point.template,
                        vary,
                        (lo.min(hi) / 4.0, 4.0 * lo.max(hi)),
                        ground,
                    ),
                }
            })
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundstate::solve_default;

    #[test]
    fn transition_is_located() {
        let x = first_transition(|x| x < 1.2345, 0.0, 3.0, 50).unwrap();
        assert!((x - 1.2345).abs() < 1e-12);
        assert!(first_transition(|x| x < 5.0, 0.0, 3.0, 50).is_none());
    }

    #[test]
    fn gaussian_curves_match_coefficients() {
        let ground = solve_default().unwrap();
        let g: Profile = "family=gaussian p=1".parse().unwrap();
        let c = criterion_curves(&g, "p", (0.01, 4.0), &ground).unwrap();
        assert!((c.p_dhr_scatter.unwrap() - 1.92).abs() < 0.01);
        assert!((c.p_lushnikov.unwrap() - 2.38).abs() < 0.01);
        assert!((c.p_adapted.unwrap() - 2.45).abs() < 0.01);
        assert!((c.p_hhalf.unwrap() - 2.10).abs() < 0.01);
        assert!((c.p_negative_energy.unwrap() - 2.91).abs() < 0.01);
        let (lo, hi) = analytic_bracket(&g, &ground).unwrap();
        assert!(lo < 1.92 && lo > 1.85 && hi > 2.38 && hi < 2.45);
    }

    #[test]
    fn bad_brackets_are_rejected() {
        let ground = solve_default().unwrap();
        let g: Profile = "family=gaussian p=1".parse().unwrap();
        let params = EvolveParams::default();
        assert!(matches!(
            find_threshold(&g, "p", (2.0, 1.0), 0.01, &params, &ground),
            Err(Error::Bracket(_))
        ));
        assert!(matches!(
            find_threshold(&g, "lambda", (1.0, 2.0), 0.01, &params, &ground),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn workers_respect_the_cap() {
        assert!(worker_count(Some(3)) >= 1);
        assert_eq!(worker_count(Some(1)), 1);
    }
}
