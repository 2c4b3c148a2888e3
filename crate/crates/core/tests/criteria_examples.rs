use std::sync::OnceLock;

use nls_collapse::criteria::{
    adapted, lushnikov, mass_concentration, radial_localized, LocalizedInput, Verdict,
    DEFAULT_KAPPA_PSI,
};
use nls_collapse::groundstate::solve_default;
use nls_collapse::quantities::moments;
use nls_collapse::solver::{evolve, EvolveParams};
use nls_collapse::{Diagnostics, GroundState, RadialField, RadialGrid};
use num_complex::Complex64;

fn ground() -> &'static GroundState {
    static Q: OnceLock<GroundState> = OnceLock::new();
    Q.get_or_init(|| solve_default().unwrap())
}

/// Gaussian core `2.85 e^{−r²/2}` plus a slowly decaying real tail
/// `ε r₀²/(r₀² + r²)` cut off at `extent`.
fn heavy_tailed(extent: f64, dr: f64) -> RadialField {
    let (eps, r0) = (3e-4f64.sqrt() / 100.0, 10.0);
    let grid = RadialGrid::new(extent, (extent / dr).round() as usize).unwrap();
    RadialField::from_fn(grid, |r| {
        Complex64::new(
            2.85 * (-r * r / 2.0).exp() + eps * r0 * r0 / (r0 * r0 + r * r),
            0.0,
        )
    })
}

#[test]
fn localized_criterion_reaches_infinite_variance_data() {
    let q = ground();
    let delta = 0.1;
    let mut variances = Vec::new();
    let mut localized = Vec::new();
    for extent in [50_000.0, 150_000.0] {
        let field = heavy_tailed(extent, 0.03);
        let m = moments(&field);
        let radius = (DEFAULT_KAPPA_PSI * m.mass * m.mass / delta).sqrt() * (1.0 + 1e-9);
        let input = LocalizedInput::from_field(&field, radius).unwrap();
        let verdict = radial_localized(&input, delta, DEFAULT_KAPPA_PSI).unwrap();
        assert_eq!(verdict.verdict, Verdict::BlowUp, "{verdict:?}");
        variances.push(m.variance);
        localized.push(input.localized_variance);
        if extent > 100_000.0 {
            let d = Diagnostics::from_moments(&m, &q.norms());
            assert!(!lushnikov(&d).fires());
            assert!(!adapted(&d).fires());
        }
    }
    // the tail adds about 4π ε² r₀⁴ per unit of truncation radius
    let growth = (variances[1] - variances[0]) / 100_000.0;
    assert!((growth / (4.0 * std::f64::consts::PI * 3e-4) - 1.0).abs() < 0.01);
    assert!((localized[1] / localized[0] - 1.0).abs() < 0.01);
}

/// `A(1 − r²)³` on the unit ball.
fn bump(amplitude: f64) -> RadialField {
    let grid = RadialGrid::new(30.0, 8192).unwrap();
    RadialField::from_fn(grid, |r| {
        Complex64::new(amplitude * (1.0 - r * r).max(0.0).powi(3), 0.0)
    })
}

#[test]
fn concentrated_bump_blows_up() {
    let q = ground();
    let field = bump(8.166);
    let v = mass_concentration(&field, 0.01).unwrap();
    assert_eq!(v.verdict, Verdict::BlowUp, "{v:?}");
    assert!(v.witness("me").unwrap() > 1.0);
    assert!(v.witness("radius").unwrap() >= 1.0);
    assert_eq!(v.witness("outside_fraction").unwrap(), 0.0);

    let run = evolve(
        &field,
        q,
        &EvolveParams {
            t_max: 5.0,
            ..EvolveParams::default()
        },
    )
    .unwrap();
    assert!(run.classification.is_blowup(), "{:?}", run.classification);
}

#[test]
fn spread_bump_is_not_concentrated() {
    let field = bump(8.0);
    let v = mass_concentration(&field, 0.01).unwrap();
    assert_eq!(v.verdict, Verdict::NoConclusion);
}
