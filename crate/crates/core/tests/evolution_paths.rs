//! Whole homotopies against reference values and their own invariants.

use num_complex::Complex64;
use slitcap_core::evolution::{integrate, integrate_drive, rhs};
use slitcap_core::geometry::normalize;
use slitcap_core::pipeline::module_rate;
use slitcap_core::reference::{
    sliding_segment, LATTICE_CASES, SLIDING_SEGMENT_CASES, SLIDING_SEGMENT_START,
};
use slitcap_core::symmetric::initial_state;
use slitcap_core::{solve, AccessoryState, Drive, SlitConfig, Tolerances};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn state_distance(a: &AccessoryState, b: &AccessoryState) -> f64 {
    let mut d = (a.m - b.m)
        .abs()
        .max((a.y0 - b.y0).abs())
        .max((a.a - b.a).norm());
    for k in 0..4 {
        d = d.max((a.x[k] - b.x[k]).abs());
    }
    d
}

#[test]
fn sliding_segment_modules() {
    for &(a, m, cap) in &SLIDING_SEGMENT_CASES {
        let sol = solve(&sliding_segment(a), Tolerances::default()).unwrap();
        assert!(
            (sol.state.m - m).abs() < 1e-4,
            "a = {a}: m = {}",
            sol.state.m
        );
        assert!((1.0 / sol.state.m - cap).abs() < 2e-4, "a = {a}");
    }
}

#[test]
fn lattice_cases_capacity_and_drift() {
    for (i, case) in LATTICE_CASES.iter().enumerate() {
        let sol = solve(&case.config(), Tolerances::default()).unwrap();
        let cap = 1.0 / sol.state.m;
        assert!((cap - case.capacity).abs() < 5e-5, "case {}: {cap}", i + 1);
        assert!(
            sol.defects.sum_defect < 1e-7,
            "case {}: {:?}",
            i + 1,
            sol.defects
        );
        assert!(
            sol.defects.residue_defect < 1e-7,
            "case {}: {:?}",
            i + 1,
            sol.defects
        );
    }
}

#[test]
fn symmetric_targets_are_fixed_points() {
    let cfgs = [
        sliding_segment(SLIDING_SEGMENT_START),
        SlitConfig::from_endpoints([c(0., 1.), c(3., 1.), c(0., -1.), c(3., -1.)]),
    ];
    for cfg in cfgs {
        let n = normalize(&cfg).unwrap();
        let s0 = initial_state(&n).unwrap().state();
        let end = *integrate(&s0, &n, Tolerances::default()).unwrap().last();
        assert!(state_distance(&s0, &end) < 1e-10);
    }
}

#[test]
fn reversing_the_drive_returns_to_the_start() {
    let n = normalize(&sliding_segment(2.0)).unwrap();
    let s0 = initial_state(&n).unwrap().state();
    let drive = Drive::from_config(&n);
    let mut s1 = *integrate_drive(&s0, &drive, 1.0, Tolerances::default())
        .unwrap()
        .last();
    s1.t = 0.0;
    let back = *integrate_drive(&s1, &drive.reversed(), 1.0, Tolerances::default())
        .unwrap()
        .last();
    assert!(state_distance(&s0, &back) < 1e-6);
}

#[test]
fn halving_the_tolerance_halves_the_error() {
    let cfg = sliding_segment(7.0);
    let m_at = |rel_tol: f64| {
        let tol = Tolerances {
            rel_tol,
            abs_tol: 1e-13,
        };
        solve(&cfg, tol).unwrap().state.m
    };
    let reference = m_at(1e-13);
    let coarse = (m_at(1e-6) - reference).abs();
    let fine = (m_at(5e-7) - reference).abs();
    assert!(coarse > 0.0);
    assert!(fine <= 0.5 * coarse, "{coarse:e} -> {fine:e}");
}

#[test]
fn module_rate_matches_finite_difference_slope() {
    let h = 1e-3;
    let a = SLIDING_SEGMENT_START;
    let m = |a: f64| {
        solve(&sliding_segment(a), Tolerances::default())
            .unwrap()
            .state
            .m
    };
    let fd = (m(a + h) - m(a - h)) / (2.0 * h);
    let sol = solve(&sliding_segment(a), Tolerances::default()).unwrap();
    let rate = module_rate(&sol, [true, true, false, false], c(1.0, 0.0)).unwrap();
    assert!(
        (rate - fd).abs() < 1e-5 * fd.abs().max(1.0),
        "{rate} vs {fd}"
    );

    let sol = solve(&sliding_segment(4.0), Tolerances::default()).unwrap();
    let fd = (m(4.0 + h) - m(4.0 - h)) / (2.0 * h);
    let rate = module_rate(&sol, [true, true, false, false], c(1.0, 0.0)).unwrap();
    assert!(
        (rate - fd).abs() < 1e-5 * fd.abs().max(1.0),
        "{rate} vs {fd}"
    );
}

#[test]
fn abscissa_rates_sum_to_zero() {
    let n = normalize(&sliding_segment(5.0)).unwrap();
    let s0 = initial_state(&n).unwrap().state();
    let d = rhs(&s0, &n).unwrap();
    assert!(d.dx.iter().sum::<f64>().abs() < 1e-9);
}
