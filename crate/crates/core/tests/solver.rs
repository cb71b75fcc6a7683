mod common;

use ac_harnack::ac_solver::{
    discrete_energy, evolve, generate_ic, SchemeConfig, CONFINEMENT_FLOOR,
};
use ac_harnack::torus_grid::{ScalarField, TorusGrid};
use common::*;
use proptest::prelude::*;

#[test]
fn oracle_self_consistency() {
    for &t in &[0.1, 1.0, 2.0] {
        assert!(rel(logistic_rk4(0.5, t, 4000), logistic_exact(0.5, t)) < 1e-13);
    }
}

#[test]
fn constant_run_matches_logistic_solution() {
    let g = TorusGrid::uniform(1, 1.0, 64).unwrap();
    let f0 = ScalarField::constant(g, 0.5).unwrap();
    let traj = evolve(&f0, 1.0, SchemeConfig::explicit_auto(), 0.5).unwrap();
    let last = traj.last().field.values()[0];
    assert!((last - 0.84335).abs() < 5e-5);
    assert!(rel(last, logistic_exact(0.5, 1.0)) < 1e-4);
}

#[test]
fn explicit_error_is_first_order() {
    let g = TorusGrid::uniform(1, 1.0, 8).unwrap();
    let f0 = ScalarField::constant(g, 0.5).unwrap();
    let exact = logistic_exact(0.5, 2.0);
    let err = |dt: f64| {
        let traj = evolve(&f0, 2.0, SchemeConfig::explicit(dt), 2.0).unwrap();
        rel(traj.last().field.values()[0], exact)
    };
    let (coarse, fine) = (err(1e-3), err(5e-4));
    let slope = (coarse / fine).log2();
    assert!((0.9..1.1).contains(&slope), "{slope}");
}

#[test]
fn imex_constant_run_is_first_order_too() {
    let g = TorusGrid::uniform(2, 1.0, 8).unwrap();
    let f0 = ScalarField::constant(g, 0.3).unwrap();
    let exact = logistic_exact(0.3, 1.0);
    let err = |dt: f64| {
        let traj = evolve(&f0, 1.0, SchemeConfig::imex(dt), 1.0).unwrap();
        rel(traj.last().field.values()[5], exact)
    };
    let slope = (err(1e-2) / err(5e-3)).log2();
    assert!((0.9..1.1).contains(&slope), "{slope}");
}

#[test]
fn seeded_runs_are_reproducible() {
    let g = TorusGrid::uniform(2, 1.0, 16).unwrap();
    let a = generate_ic(&g, 11, 0.1, 0.9, 3).unwrap();
    let b = generate_ic(&g, 11, 0.1, 0.9, 3).unwrap();
    assert_eq!(a, b);
    let ta = evolve(&a, 0.05, SchemeConfig::explicit_auto(), 0.01).unwrap();
    let tb = evolve(&b, 0.05, SchemeConfig::explicit_auto(), 0.01).unwrap();
    assert_eq!(ta.snapshots(), tb.snapshots());
}

#[test]
fn energy_decreases_along_explicit_run() {
    let g = TorusGrid::uniform(1, 1.0, 64).unwrap();
    let f0 = generate_ic(&g, 5, 0.1, 0.9, 4).unwrap();
    let traj = evolve(&f0, 0.5, SchemeConfig::explicit_auto(), 0.01).unwrap();
    let e: Vec<f64> = traj.snapshots().iter().map(|s| discrete_energy(&s.field)).collect();
    assert!(e.windows(2).all(|w| w[1] <= w[0] + 1e-14));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn explicit_runs_stay_confined(seed in 0u64..10_000, modes in 1u32..6, n in 16usize..64) {
        let g = TorusGrid::uniform(1, 1.0, n).unwrap();
        let f0 = generate_ic(&g, seed, 1e-3, 1.0 - 1e-3, modes).unwrap();
        let traj = evolve(&f0, 0.2, SchemeConfig::explicit_auto(), 0.05).unwrap();
        let c = traj.confinement().unwrap();
        prop_assert_eq!(c.breaches, 0);
        prop_assert!(c.min_seen >= CONFINEMENT_FLOOR && c.max_seen <= 1.0 - CONFINEMENT_FLOOR);
        // range of the solution never widens
        prop_assert!(c.min_seen >= f0.min() && c.max_seen <= 1.0);
    }

    #[test]
    fn shift_commutes_with_evolution(seed in 0u64..1000, shift in 0usize..16) {
        let g = TorusGrid::uniform(1, 1.0, 16).unwrap();
        let f0 = generate_ic(&g, seed, 0.2, 0.8, 3).unwrap();
        let a = evolve(&f0, 0.05, SchemeConfig::explicit_auto(), 0.05).unwrap();
        let b = evolve(&f0.shifted(&[shift]), 0.05, SchemeConfig::explicit_auto(), 0.05).unwrap();
        let want = a.last().field.shifted(&[shift]);
        for (x, y) in b.last().field.values().iter().zip(want.values()) {
            prop_assert!((x - y).abs() < 1e-14);
        }
    }
}
