use std::f64::consts::PI;
use std::sync::OnceLock;

use nls_collapse::criteria::{
    evaluate_all, lushnikov, regime_boundary_me, verify_inequalities, Verdict,
};
use nls_collapse::groundstate::solve_default;
use nls_collapse::profiles::closed_form_core;
use nls_collapse::quantities::{compute_diagnostics, moments};
use nls_collapse::tables::find_roots;
use nls_collapse::{GroundState, Profile, RadialField, RadialGrid};
use num_complex::Complex64;
use proptest::prelude::*;

fn ground() -> &'static GroundState {
    static Q: OnceLock<GroundState> = OnceLock::new();
    Q.get_or_init(|| solve_default().unwrap())
}

/// (amplitude, centre, width, chirp, phase) of one Gaussian bump.
fn bump() -> impl Strategy<Value = Bump> {
    (
        -2.0..2.0f64,
        0.0..2.0f64,
        0.5..2.0f64,
        -1.0..1.0f64,
        0.0..(2.0 * PI),
    )
}

type Bump = (f64, f64, f64, f64, f64);

fn point(parts: &[Bump], r: f64) -> Complex64 {
    parts
        .iter()
        .map(|&(a, c, w, chirp, phase)| {
            let s = (r - c) / w;
            Complex64::from_polar(a * (-s * s).exp(), phase + chirp * r * r)
        })
        .sum()
}

fn mixture(parts: &[Bump], grid: RadialGrid) -> RadialField {
    RadialField::from_fn(grid, |r| point(parts, r))
}

fn family() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("gaussian"), Just("supergaussian"), Just("offcentered")]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inequalities_hold_on_mixtures(parts in prop::collection::vec(bump(), 1..5)) {
        let f = mixture(&parts, RadialGrid::new(30.0, 15000).unwrap());
        let m = moments(&f);
        prop_assume!(m.mass > 1e-6);
        let rep = verify_inequalities(&f);
        prop_assert!(rep.uncertainty_residual / (m.mass * m.mass) >= -1e-10);
        prop_assert!(rep.interpolation_residual / m.mass.sqrt() >= -1e-10);
        prop_assert!(rep.lagrangian >= rep.lagrangian_floor * (1.0 - 1e-10));
    }

    #[test]
    fn closed_forms_scale_with_the_amplitude(
        fam in family(), p in 0.2..5.0f64, a in 0.3..4.0f64, gamma in -1.0..1.0f64, k in 0.5..2.0f64,
    ) {
        let q = ground();
        let base: Profile = format!("family={fam} p={p} alpha={a} gamma={gamma}").parse().unwrap();
        let d = closed_form_core(&base, q).unwrap();
        let e = closed_form_core(&base.with_param("p", k * p).unwrap(), q).unwrap();
        let k2 = k * k;
        prop_assert!((e.mass / (k2 * d.mass) - 1.0).abs() < 1e-12);
        prop_assert!((e.grad_sq / (k2 * d.grad_sq) - 1.0).abs() < 1e-12);
        prop_assert!((e.l4_fourth / (k2 * k2 * d.l4_fourth) - 1.0).abs() < 1e-12);
        prop_assert!((e.variance / (k2 * d.variance) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn variance_rate_squared_is_phase_energy(
        fam in family(), p in 0.2..5.0f64, a in 0.3..4.0f64, gamma in -1.5..1.5f64,
    ) {
        let q = ground();
        let profile: Profile = format!("family={fam} p={p} alpha={a} gamma={gamma}").parse().unwrap();
        let d = closed_form_core(&profile, q).unwrap();
        let split = d.phase.unwrap();
        let lhs = d.variance_rate * d.variance_rate;
        prop_assert!((lhs - 32.0 * d.variance * split.e_gamma).abs() <= 1e-10 * lhs.max(1e-12));
        prop_assert!((split.e0 + split.e_gamma - d.energy).abs() <= 1e-10 * d.energy.abs().max(1.0));
    }

    #[test]
    fn verdicts_survive_nls_scaling(parts in prop::collection::vec(bump(), 1..4), up in any::<bool>()) {
        let q = ground();
        let lambda: f64 = if up { 2.0 } else { 0.5 };
        let base_grid = RadialGrid::new(30.0, 6000).unwrap();
        let scaled_grid = RadialGrid::new(30.0 / lambda, 6000).unwrap();
        let f = mixture(&parts, base_grid);
        let scaled = RadialField::from_fn(scaled_grid, |r| lambda * point(&parts, lambda * r));
        let a = compute_diagnostics(&f, q);
        let b = compute_diagnostics(&scaled, q);
        prop_assume!(a.mass > 1e-6);
        prop_assert!((a.me_ratio - b.me_ratio).abs() <= 1e-9 * a.me_ratio.abs().max(1.0));
        prop_assert!((a.eta - b.eta).abs() <= 1e-9 * a.eta.max(1.0));
        let va: Vec<Verdict> = evaluate_all(&a).iter().map(|v| v.verdict).collect();
        let vb: Vec<Verdict> = evaluate_all(&b).iter().map(|v| v.verdict).collect();
        prop_assert_eq!(va, vb);
    }

    #[test]
    fn real_lushnikov_implies_adapted_above_the_regime_boundary(
        fam in family(), p in 0.5..12.0f64, a in 0.3..4.0f64,
    ) {
        let q = ground();
        let profile: Profile = format!("family={fam} p={p} alpha={a} gamma=0").parse().unwrap();
        let d = closed_form_core(&profile, q).unwrap();
        prop_assume!(d.energy > 0.0 && d.me() > regime_boundary_me() * (1.0 + 1e-9));
        if lushnikov(&d).fires() {
            prop_assert!(nls_collapse::criteria::adapted(&d).fires());
        }
    }

    #[test]
    fn roots_of_shifted_products_are_found(r1 in 0.1..1.0f64, gap in 0.05..3.0f64) {
        let r2 = r1 + gap;
        let roots = find_roots(|x| (x - r1) * (x - r2), 1e-3, 10.0, 2000);
        prop_assert_eq!(roots.len(), 2);
        prop_assert!((roots[0] - r1).abs() < 1e-10 && (roots[1] - r2).abs() < 1e-10);
    }
}
