mod common;

use ac_harnack::ac_solver::{evolve, generate_ic, SchemeConfig};
use ac_harnack::harnack_params::{
    beta_admissible_max, derive_constants, phi_floor_check, phi_ode_residual, HarnackParams,
};
use ac_harnack::harnack_verify::{
    analyze_snapshot, classical_harnack_rhs_paper, classical_harnack_rhs_tight, log_field,
    phi_integral_quadrature, u_evolution_residual, verify_classical_pairs, verify_differential,
    SpaceTimePair,
};
use ac_harnack::torus_grid::{ScalarField, TorusGrid};
use ac_harnack::Error;
use common::*;
use proptest::prelude::*;

fn admissible() -> impl Strategy<Value = HarnackParams> {
    (0.05f64..0.95, 1u32..=3, 0.0f64..2.0, 1.0f64..3.0).prop_map(|(alpha, n, k, stretch)| {
        let max = beta_admissible_max(alpha, n, k).unwrap();
        HarnackParams::new(alpha, max * stretch, n, k).unwrap()
    })
}

#[test]
fn ricci_flat_constants() {
    for n in 1..=3u32 {
        let dc = derive_constants(&HarnackParams::ricci_flat(n)).unwrap();
        let nf = f64::from(n);
        assert!((dc.a - 1.0 / nf).abs() <= 1e-12);
        assert!(dc.b.abs() <= 1e-12);
        assert!((dc.c - 4.0 * nf).abs() <= 1e-12);
        assert!((dc.q - 2.0).abs() <= 1e-12);
    }
}

#[test]
fn beta_minus_four_in_two_dimensions() {
    let p = HarnackParams::new(0.5, -4.0, 2, 0.0).unwrap();
    let dc = derive_constants(&p).unwrap();
    assert!((dc.a - 0.375).abs() < 1e-15);
    assert!((dc.b - 1.0).abs() < 1e-15);
    assert!((dc.c - 8.0).abs() < 1e-15);
    assert!((dc.q - 13f64.sqrt() / 2.0).abs() < 1e-15);
}

#[test]
fn floor_check_on_an_admissible_curvature_case() {
    let p = HarnackParams::new(0.5, -2.0, 2, 1.0).unwrap();
    let dc = derive_constants(&p).unwrap();
    assert!((dc.phi_limit() - 4.0).abs() < 1e-12);
    assert!(phi_floor_check(&dc, &p));
}

#[test]
fn log_field_examples() {
    let g = TorusGrid::uniform(1, 1.0, 8).unwrap();
    let u = log_field(&ScalarField::constant(g, (-1.0f64).exp()).unwrap()).unwrap();
    assert!(u.values().iter().all(|&v| (v + 1.0).abs() < 1e-15));
    let near = log_field(&ScalarField::constant(g, 1.0 - 1e-9).unwrap()).unwrap();
    assert!(near.values().iter().all(|&v| (v + 1e-9).abs() < 1e-15));
}

#[test]
fn constant_field_h_is_scalar() {
    let g = TorusGrid::uniform(2, 1.0, 8).unwrap();
    for n in 1..=3u32 {
        let p = HarnackParams::ricci_flat(n);
        let dc = derive_constants(&p).unwrap();
        for &c0 in &[0.1, 0.5, 0.95] {
            let f = ScalarField::constant(g, c0).unwrap();
            for &t in &[0.05, 1.0, 20.0] {
                let s = analyze_snapshot(&f, &p, &dc, t).unwrap();
                let want = -f64::from(n) * c0 * c0 + dc.phi(t).unwrap();
                assert!((s.h_min - want).abs() < 1e-12 * want.abs().max(1.0));
                assert!(s.h_min > f64::from(n));
            }
        }
    }
    // φ dominates as t → 0⁺
    let p = HarnackParams::ricci_flat(1);
    let dc = derive_constants(&p).unwrap();
    let f = ScalarField::constant(g, 0.5).unwrap();
    assert!(analyze_snapshot(&f, &p, &dc, 1e-6).unwrap().h_min > 1e5);
}

#[test]
fn paper_rhs_against_high_precision() {
    let p = HarnackParams::ricci_flat(1);
    let dc = derive_constants(&p).unwrap();
    let got = classical_harnack_rhs_paper(&p, &dc, 0.2, 0.5, 1.0).unwrap();
    assert!(rel(got, PAPER_RHS_N1) < 1e-13);
    let tight = classical_harnack_rhs_tight(&p, &dc, 0.2, 0.5, 1.0).unwrap();
    assert!(rel(tight, TIGHT_RHS_N1) < 1e-13);

    let p2 = HarnackParams::ricci_flat(2);
    let dc2 = derive_constants(&p2).unwrap();
    let got = classical_harnack_rhs_paper(&p2, &dc2, 0.3, 0.1, 0.6).unwrap();
    assert!(rel(got, PAPER_RHS_N2) < 1e-13);
}

#[test]
fn phi_integral_oracle() {
    let dc = derive_constants(&HarnackParams::ricci_flat(1)).unwrap();
    let closed = dc.phi_integral(0.3, 2.1).unwrap();
    let quad = phi_integral_quadrature(&dc, 0.3, 2.1, 1e-13).unwrap();
    assert!(rel(closed, PHI_INTEGRAL_N1) < 1e-13);
    assert!(rel(quad, PHI_INTEGRAL_N1) < 1e-10);
}

#[test]
fn rhs_tends_to_one_for_close_times() {
    let p = HarnackParams::ricci_flat(2);
    let dc = derive_constants(&p).unwrap();
    let paper = classical_harnack_rhs_paper(&p, &dc, 0.0, 0.5, 0.5 + 1e-9).unwrap();
    let tight = classical_harnack_rhs_tight(&p, &dc, 0.0, 0.5, 0.5 + 1e-9).unwrap();
    assert!((paper - 1.0).abs() < 1e-6);
    assert!((tight - 1.0).abs() < 1e-6);
    for (t1, t2) in [(0.5, 0.5), (0.6, 0.5), (0.0, 0.5), (-1.0, 0.5)] {
        assert!(matches!(
            classical_harnack_rhs_paper(&p, &dc, 0.0, t1, t2),
            Err(Error::Domain(_))
        ));
    }
}

#[test]
fn constant_trajectory_classical_pairs() {
    let g = TorusGrid::uniform(1, 1.0, 16).unwrap();
    let f0 = ScalarField::constant(g, 0.4).unwrap();
    let traj = evolve(&f0, 1.0, SchemeConfig::explicit_auto(), 0.1).unwrap();
    let p = HarnackParams::ricci_flat(1);
    let pairs: Vec<SpaceTimePair> = (1..traj.len() - 1)
        .map(|i| SpaceTimePair {
            x1: 3,
            snap1: i,
            x2: 3,
            snap2: i + 1,
        })
        .collect();
    let report = verify_classical_pairs(&traj, &p, &pairs, 0.0).unwrap();
    assert!(report.passed());
    // ratio > 1 ≥ both bounds
    assert!(report.check("ratio_above_paper_bound").unwrap().value > 0.0);
    for pair in &pairs {
        let s = traj.snapshots();
        assert!(s[pair.snap2].field.values()[3] > s[pair.snap1].field.values()[3]);
    }
}

#[test]
fn constant_trajectory_differential_margin_exceeds_n() {
    let g = TorusGrid::uniform(1, 1.0, 16).unwrap();
    let f0 = ScalarField::constant(g, 0.3).unwrap();
    let traj = evolve(&f0, 2.0, SchemeConfig::explicit_auto(), 0.1).unwrap();
    let p = HarnackParams::ricci_flat(1);
    let report = verify_differential(&traj, &p, 0.05, 1e-2).unwrap();
    assert!(report.passed());
    assert!(report.check("harnack_nonnegative").unwrap().margin > 1.0);
}

#[test]
fn inadmissible_beta_is_a_config_entry() {
    let g = TorusGrid::uniform(1, 1.0, 16).unwrap();
    let f0 = ScalarField::constant(g, 0.3).unwrap();
    let traj = evolve(&f0, 0.2, SchemeConfig::explicit_auto(), 0.1).unwrap();
    let mut p = HarnackParams::ricci_flat(1);
    p.beta = -0.1;
    assert!(derive_constants(&p).is_err());
    let report = verify_differential(&traj, &p, 0.05, 1e-2).unwrap();
    assert!(!report.passed());
    assert!(report.config_error.as_deref().unwrap().contains("beta"));
}

#[test]
fn u_residual_on_constant_data() {
    let g = TorusGrid::uniform(1, 1.0, 8).unwrap();
    for &(c0, dt) in &[(0.5, 1e-4), (0.999_999, 1e-4)] {
        let f0 = ScalarField::constant(g, c0).unwrap();
        let traj = evolve(&f0, 0.2, SchemeConfig::explicit(dt), 0.01).unwrap();
        for j in 1..traj.len() - 1 {
            let s = traj.snapshots();
            let m = |t: f64| (t / dt).round() as usize;
            let (fb, fh, fa) = (
                logistic_euler(c0, dt, m(s[j - 1].t)),
                logistic_euler(c0, dt, m(s[j].t)),
                logistic_euler(c0, dt, m(s[j + 1].t)),
            );
            let want = (fa.ln() - fb.ln()) / (s[j + 1].t - s[j - 1].t) - (1.0 - fh * fh);
            let res = u_evolution_residual(&traj, j).unwrap();
            assert!((res.max() - want).abs() < 1e-9, "{c0} {j}");
        }
    }
}

#[test]
fn u_residual_small_for_small_steps() {
    // explicit Euler carries an O(dt) bias of about (dt/2) g'(f) g(f) / f
    let g = TorusGrid::uniform(1, 1.0, 8).unwrap();
    let f0 = ScalarField::constant(g, 0.5).unwrap();
    let traj = evolve(&f0, 0.05, SchemeConfig::explicit(1e-5), 0.001).unwrap();
    let worst = (1..traj.len() - 1)
        .map(|j| u_evolution_residual(&traj, j).unwrap().max_abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn u_residual_refines_at_second_order() {
    // h and the snapshot spacing halve together; dt ∝ h² keeps the
    // Euler bias on the same O(h²) footing
    let norm = |n: usize| {
        let g = TorusGrid::uniform(1, 1.0, n).unwrap();
        let f0 = ScalarField::from_fn(g, |x| {
            0.5 + 0.2 * (2.0 * std::f64::consts::PI * x[0]).sin()
        })
        .unwrap();
        let every = 0.2 / n as f64;
        let traj = evolve(&f0, 0.1 + every, SchemeConfig::explicit_auto(), every).unwrap();
        // the snapshot just before the last one sits at t = 0.1
        let j = traj.len() - 2;
        assert!((traj.snapshots()[j].t - 0.1).abs() < 1e-9);
        u_evolution_residual(&traj, j).unwrap().max_abs()
    };
    let (a, b, c) = (norm(32), norm(64), norm(128));
    let s1 = (a / b).log2();
    let s2 = (b / c).log2();
    assert!((1.6..2.4).contains(&s1) && (1.6..2.4).contains(&s2), "{s1} {s2}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_solves_riccati(p in admissible(), d in prop_oneof![Just(0.0), Just(0.1)], lt in -3.0f64..1.7) {
        let p = p.with_shift(d).unwrap();
        let dc = derive_constants(&p).unwrap();
        let t = 10f64.powf(lt);
        let r = phi_ode_residual(t, &dc, d).unwrap();
        let scale = dc.a * dc.phi(t).unwrap().powi(2);
        prop_assert!(r.abs() <= 1e-8 * scale.max(1.0));
    }

    #[test]
    fn identity_pair(p in admissible()) {
        let dc = derive_constants(&p).unwrap();
        let (r1, r2) = dc.identity_residuals(p.beta);
        prop_assert!(r1.abs() <= 1e-12 && r2.abs() <= 1e-12);
    }

    #[test]
    fn tight_dominates_paper(p in admissible(), d_geo in 0.0f64..2.0, t1 in 0.01f64..3.0, dt in 1e-3f64..3.0) {
        let dc = derive_constants(&p).unwrap();
        let paper = classical_harnack_rhs_paper(&p, &dc, d_geo, t1, t1 + dt).unwrap();
        let tight = classical_harnack_rhs_tight(&p, &dc, d_geo, t1, t1 + dt).unwrap();
        prop_assert!(tight >= paper);
    }

    #[test]
    fn tight_nonincreasing_in_distance(p in admissible(), d1 in 0.0f64..1.0, dd in 0.0f64..1.0, t1 in 0.01f64..2.0, dt in 1e-3f64..2.0) {
        let dc = derive_constants(&p).unwrap();
        let near = classical_harnack_rhs_tight(&p, &dc, d1, t1, t1 + dt).unwrap();
        let far = classical_harnack_rhs_tight(&p, &dc, d1 + dd, t1, t1 + dt).unwrap();
        prop_assert!(far <= near);
        prop_assert!(near <= 1.0);
    }

    #[test]
    fn p_terms_signs_on_random_fields(seed in 0u64..1000, n in 1u32..=3) {
        let g = TorusGrid::uniform(1, 1.0, 32).unwrap();
        let f = generate_ic(&g, seed, 0.05, 0.95, 4).unwrap();
        let p = HarnackParams::ricci_flat(n);
        let dc = derive_constants(&p).unwrap();
        let s = analyze_snapshot(&f, &p, &dc, 0.3).unwrap();
        prop_assert!(s.p2_min >= 0.0);
        prop_assert!(s.p3_min >= s.p3_lower_bound - 1e-9 * s.p3_lower_bound.abs());
    }
}
