//! Acceptance suite: one PASS/FAIL line per criterion. Failures are reported,
//! not raised, so the run always completes.

use std::f64::consts::PI;
use std::time::Instant;

use nls_collapse::criteria::{evaluate_all, verify_inequalities, Verdict};
use nls_collapse::groundstate::solve_default;
use nls_collapse::profiles::closed_form_core;
use nls_collapse::scan::{
    analytic_bracket, classify_point, criterion_curves, find_threshold, RunSummary,
};
use nls_collapse::solver::{simulate_profile, virial_check, Classification, EvolveParams};
use nls_collapse::tables::{compute_table, TableId, TableOptions};
use nls_collapse::{GroundState, Profile, RadialField, RadialGrid};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<(bool, String), String>;

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn report(id: u8, title: &str, started: Instant, outcome: Outcome) {
    let secs = started.elapsed().as_secs_f64();
    let (status, detail) = match outcome {
        Ok((true, d)) => ("PASS", d),
        Ok((false, d)) => ("FAIL", d),
        Err(e) => ("FAIL", format!("error: {e}")),
    };
    println!("{status} {id} {title} [{secs:.0}s]: {detail}");
}

fn ground_state(q: &GroundState) -> Outcome {
    let grad_ratio = q.grad_sq / q.mass_sq;
    let l4_ratio = q.l4_fourth / q.mass_sq;
    let pass = (q.mass_sq - 18.94).abs() <= 0.05
        && (q.var - 20.32).abs() <= 0.05
        && (q.hhalf_sq - 27.727).abs() <= 0.03
        && rel(grad_ratio, 3.0) <= 1e-6
        && rel(l4_ratio, 4.0) <= 1e-6;
    Ok((
        pass,
        format!(
            "mass {:.6}, variance {:.6}, hhalf {:.6}, ratios {:.9}/{:.9}",
            q.mass_sq, q.var, q.hhalf_sq, grad_ratio, l4_ratio
        ),
    ))
}

fn random_field(rng: &mut StdRng, grid: RadialGrid) -> RadialField {
    let parts: Vec<(f64, f64, f64, f64, f64)> = (0..rng.gen_range(1..=4))
        .map(|_| {
            (
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.0..2.0),
                rng.gen_range(0.5..2.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.0..2.0 * PI),
            )
        })
        .collect();
    RadialField::from_fn(grid, |r| {
        parts
            .iter()
            .map(|&(amp, centre, width, chirp, phase)| {
                let s = (r - centre) / width;
                Complex64::from_polar(amp * (-s * s).exp(), phase + chirp * r * r)
            })
            .sum()
    })
}

fn inequalities() -> Outcome {
    let grid = RadialGrid::new(1.0, 20000).map_err(|e| e.to_string())?;
    let extremizer =
        RadialField::from_fn(grid, |r| Complex64::new((1.0 - r * r).max(0.0).sqrt(), 0.0));
    let target = 3f64.powi(5) * 25.0 / (4.0 * 7f64.powi(5) * PI * PI);
    let l14 = verify_inequalities(&extremizer).lagrangian.powi(14);
    let l14_err = rel(l14, target);

    let grid = RadialGrid::new(40.0, 20000).map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(20);
    let mut worst: f64 = f64::INFINITY;
    for _ in 0..1000 {
        let f = random_field(&mut rng, grid);
        let rep = verify_inequalities(&f);
        let mass = nls_collapse::quantities::moments(&f).mass;
        worst = worst
            .min(rep.uncertainty_residual / (mass * mass))
            .min(rep.interpolation_residual / mass.sqrt());
    }

    let mut saturation: f64 = 0.0;
    for chirp in [0.0, 0.3, -0.7] {
        let g = RadialField::from_fn(grid, |r| {
            Complex64::from_polar((-r * r / 2.0).exp(), chirp * r * r)
        });
        let rep = verify_inequalities(&g);
        let mass = nls_collapse::quantities::moments(&g).mass;
        saturation = saturation.max((rep.uncertainty_residual / (mass * mass)).abs());
    }
    Ok((
        l14_err <= 1e-4 && worst >= -1e-10 && saturation <= 1e-8,
        format!(
            "L^14 relative error {l14_err:.2e}, worst scaled residual over 1000 fields {worst:.3e}, Gaussian saturation {saturation:.2e}"
        ),
    ))
}

/// Every cell of `id` against its reference value within `tol`.
fn table_within(
    id: TableId,
    q: &GroundState,
    tol: f64,
    misses: &mut Vec<String>,
) -> Result<usize, String> {
    let table = compute_table(id, q, &TableOptions::default()).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for c in &table.cells {
        if c.reference.is_none() {
            continue;
        }
        checked += 1;
        match c.abs_diff() {
            Some(d) if d <= tol => {}
            _ => misses.push(format!(
                "{id} {} {}: {:?} vs {:?}",
                c.row,
                c.column,
                c.computed.map(|x| (x * 1000.0).round() / 1000.0),
                c.reference.unwrap()
            )),
        }
    }
    Ok(checked)
}

fn coefficients(q: &GroundState) -> Outcome {
    let mut misses = Vec::new();
    let n = table_within(TableId::Coefficients, q, 0.01, &mut misses)?;
    Ok((
        misses.is_empty(),
        format!(
            "{} of {n} coefficients within 0.01 {misses:?}",
            n - misses.len()
        ),
    ))
}

fn root_tables(q: &GroundState) -> Outcome {
    let ids = [
        TableId::T1Me,
        TableId::T1Lgauss,
        TableId::T1LAgauss,
        TableId::T3MEphase,
        TableId::T4LPhase,
        TableId::T4LAphase,
    ];
    let mut misses = Vec::new();
    let mut n = 0;
    for id in ids {
        n += table_within(id, q, 0.02, &mut misses)?;
    }
    Ok((
        misses.is_empty(),
        format!(
            "{} of {n} entries within 0.02; outside: {}",
            n - misses.len(),
            if misses.is_empty() {
                "none".into()
            } else {
                misses.join("; ")
            }
        ),
    ))
}

fn thresholds(q: &GroundState, scattered: &mut Vec<RunSummary>) -> Outcome {
    let cases = [
        ("family=gaussian p=2 alpha=1 gamma=0", 2.075, 0.03),
        ("family=supergaussian p=2 alpha=1 gamma=0", 2.015, 0.03),
        ("family=offcentered p=3.5 alpha=1 gamma=0", 3.575, 0.05),
        ("family=oscillatory p=2.9 beta=0 gamma=0", 2.935, 0.05),
    ];
    let params = EvolveParams::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (spec, centre, band) in cases {
        let template: Profile = spec
            .parse()
            .map_err(|e: nls_collapse::Error| e.to_string())?;
        let bracket = analytic_bracket(&template, q).map_err(|e| e.to_string())?;
        let t =
            find_threshold(&template, "p", bracket, 0.01, &params, q).map_err(|e| e.to_string())?;
        scattered.extend(
            t.runs
                .iter()
                .filter(|r| r.classification.is_scattered())
                .cloned(),
        );
        let ok = !t.inconclusive
            && t.scatter_run.classification.is_scattered()
            && t.blowup_run.classification.is_blowup()
            && t.p_scatter >= centre - band
            && t.p_blowup <= centre + band;
        pass &= ok;
        parts.push(format!(
            "{} ({:.4}, {:.4}) vs {centre}±{band} {}",
            template.family().name(),
            t.p_scatter,
            t.p_blowup,
            if ok { "ok" } else { "MISS" }
        ));
    }
    Ok((pass, parts.join("; ")))
}

/// Templates of the consistency lattice with the varied key. The rescaled-`Q`
/// templates carry explicit values: their criterion regions are not monotone
/// in `lambda`.
fn lattice_templates() -> Vec<(&'static str, &'static str, Option<[f64; 5]>)> {
    vec![
        ("family=gaussian p=1 alpha=1 gamma=0", "p", None),
        ("family=gaussian p=1 alpha=0.5 gamma=0", "p", None),
        ("family=gaussian p=1 alpha=2 gamma=0", "p", None),
        ("family=gaussian p=1 alpha=1 gamma=0.5", "p", None),
        ("family=gaussian p=1 alpha=1 gamma=-0.5", "p", None),
        ("family=supergaussian p=1 alpha=1 gamma=0", "p", None),
        ("family=supergaussian p=1 alpha=2 gamma=0", "p", None),
        ("family=supergaussian p=1 alpha=1 gamma=0.5", "p", None),
        ("family=supergaussian p=1 alpha=1 gamma=-0.5", "p", None),
        ("family=offcentered p=1 alpha=1 gamma=0", "p", None),
        ("family=offcentered p=1 alpha=0.5 gamma=0", "p", None),
        ("family=offcentered p=1 alpha=1 gamma=0.5", "p", None),
        ("family=offcentered p=1 alpha=1 gamma=-0.5", "p", None),
        ("family=oscillatory p=1 beta=0 gamma=0", "p", None),
        ("family=oscillatory p=1 beta=1 gamma=0", "p", None),
        ("family=oscillatory p=1 beta=2 gamma=0", "p", None),
        ("family=oscillatory p=1 beta=0 gamma=0.5", "p", None),
        ("family=oscillatory p=1 beta=0 gamma=-0.5", "p", None),
        (
            "family=q lambda=1 gamma=0",
            "lambda",
            Some([0.5, 0.8, 1.25, 1.6, 2.0]),
        ),
        (
            "family=q lambda=1 gamma=-0.3",
            "lambda",
            Some([0.3, 0.9, 1.1, 1.5, 2.0]),
        ),
    ]
}

fn consistency(q: &GroundState, scattered: &mut Vec<RunSummary>) -> Outcome {
    let params = EvolveParams::default();
    let (mut points, mut simulated) = (0, 0);
    let mut violations = Vec::new();
    for (spec, vary, explicit) in lattice_templates() {
        let template: Profile = spec
            .parse()
            .map_err(|e: nls_collapse::Error| e.to_string())?;
        let values = match explicit {
            Some(values) => values,
            None => {
                let c = criterion_curves(&template, vary, (1e-2, 40.0), q)
                    .map_err(|e| e.to_string())?;
                let blow = [c.p_lushnikov, c.p_adapted, c.p_negative_energy]
                    .into_iter()
                    .flatten()
                    .fold(f64::INFINITY, f64::min);
                let blow = if blow.is_finite() { blow } else { 2.0 };
                let calm = c.p_dhr_scatter.unwrap_or(0.5 * blow);
                [
                    0.5 * calm,
                    0.95 * calm,
                    0.5 * (calm + blow),
                    1.05 * blow,
                    1.5 * blow,
                ]
            }
        };
        for value in values {
            points += 1;
            let profile = template
                .with_param(vary, value)
                .map_err(|e| e.to_string())?;
            let verdicts = evaluate_all(&closed_form_core(&profile, q).map_err(|e| e.to_string())?);
            let expect_blowup = verdicts.iter().any(|v| v.verdict == Verdict::BlowUp);
            let expect_scatter = verdicts.iter().any(|v| v.verdict == Verdict::Scatter);
            if !expect_blowup && !expect_scatter {
                continue;
            }
            simulated += 1;
            let label = format!("{profile}");
            match classify_point(&template, vary, value, &params, q) {
                Ok(run) => {
                    let ok = match run.classification {
                        Classification::BlowUp { .. } => expect_blowup,
                        Classification::Scattered { .. } => {
                            scattered.push(run.clone());
                            expect_scatter
                        }
                        Classification::Undetermined { .. } => false,
                    };
                    if !ok {
                        violations.push(format!("{label}: {}", run.classification.label()));
                    }
                }
                Err(e) => violations.push(format!("{label}: {e}")),
            }
        }
    }
    Ok((
        violations.is_empty(),
        format!(
            "{points} lattice points, {simulated} with a firing premise simulated, {} violations {violations:?}",
            violations.len()
        ),
    ))
}

fn conservation(q: &GroundState, scattered: &[RunSummary]) -> Outcome {
    let worst_mass = scattered.iter().map(|r| r.mass_drift).fold(0.0, f64::max);
    let worst_energy = scattered.iter().map(|r| r.energy_drift).fold(0.0, f64::max);
    let drift_ok = !scattered.is_empty() && worst_mass < 1e-6 && worst_energy < 1e-6;

    let soliton = Profile::Q {
        lambda: 1.0,
        gamma: 0.0,
    };
    let params = EvolveParams {
        t_max: 2.0,
        phase_budget: 1e-3,
        ..EvolveParams::default()
    };
    let run = simulate_profile(&soliton, q, &params).map_err(|e| e.to_string())?;
    let amp0 = run.series[0].amplitude;
    let amp_dev = run
        .series
        .iter()
        .map(|s| rel(s.amplitude, amp0))
        .fold(0.0, f64::max);
    let soliton_ok = amp_dev <= 0.02 && run.final_time() >= 2.0 - 1e-9;

    let probe: Profile = "family=gaussian p=1 alpha=1 gamma=0.2"
        .parse()
        .map_err(|e: nls_collapse::Error| e.to_string())?;
    let mut residuals = Vec::new();
    for k in 0..3 {
        let scale = 2f64.powi(k);
        let params = EvolveParams {
            t_max: 1.0,
            dt0: 4e-3 / scale,
            sample_interval: 0.1 / scale,
            amp_sample_change: f64::INFINITY,
            sponge: None,
            r_max: 20.0,
            intervals: 1024 * (1 << k),
            ..EvolveParams::default()
        };
        let out = simulate_profile(&probe, q, &params).map_err(|e| e.to_string())?;
        let worst = virial_check(&out)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|v| v.against_gradient.abs().max(v.against_l4.abs()))
            .fold(0.0, f64::max);
        residuals.push(worst);
    }
    let orders: Vec<f64> = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let shown: Vec<String> = residuals.iter().map(|r| format!("{r:.2e}")).collect();
    let virial_ok = orders.iter().all(|&p| p >= 1.8);

    Ok((
        drift_ok && soliton_ok && virial_ok,
        format!(
            "{} scattering runs: mass drift ≤ {worst_mass:.2e}, energy drift ≤ {worst_energy:.2e}; soliton amplitude deviation {amp_dev:.2e} to t=2; virial residuals {} (orders {orders:.2?})",
            scattered.len(),
            shown.join(", ")
        ),
    ))
}

fn main() {
    let started = Instant::now();
    let q = match solve_default() {
        Ok(q) => q,
        Err(e) => {
            println!("FAIL 1 ground state: {e}");
            return;
        }
    };
    report(1, "ground state", started, ground_state(&q));
    let t = Instant::now();
    report(2, "sharp inequalities", t, inequalities());
    let t = Instant::now();
    report(3, "criterion coefficients", t, coefficients(&q));
    let t = Instant::now();
    report(4, "quadratic-phase root tables", t, root_tables(&q));
    let mut scattered = Vec::new();
    let t = Instant::now();
    report(5, "simulated thresholds", t, thresholds(&q, &mut scattered));
    let t = Instant::now();
    report(
        6,
        "criteria against simulation",
        t,
        consistency(&q, &mut scattered),
    );
    let t = Instant::now();
    report(
        7,
        "conservation, soliton and virial",
        t,
        conservation(&q, &scattered),
    );
    println!("SKIP 8 full figure sweeps and conjecture probes: excluded from acceptance");
}
