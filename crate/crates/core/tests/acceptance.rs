//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use common::lattice_sums::{richardson2, wp_sum};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use slitcap_core::elliptic::{wp, zeta_w};
use slitcap_core::evolution::integrate;
use slitcap_core::geometry::normalize;
use slitcap_core::oracle::{annulus_capacity, grid_capacity, GridSpec};
use slitcap_core::pipeline::{module_rate, SlidingFamily};
use slitcap_core::reconstruction::map_derivative;
use slitcap_core::reference::{
    sliding_segment, LATTICE_CASES, SLIDING_SEGMENT_CASES, SLIDING_SEGMENT_INITIAL,
    SLIDING_SEGMENT_START,
};
use slitcap_core::symmetric::initial_state;
use slitcap_core::{compute, solve, ComputeOptions, Lattice, MapData, SlitConfig, Tolerances};

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(err: Complex64, size: Complex64) -> f64 {
    err.norm() / size.norm().max(1.0)
}

fn reference_capacities() -> Outcome {
    let clock = Instant::now();
    let mut worst: f64 = 0.0;
    for case in &LATTICE_CASES {
        match solve(&case.config(), Tolerances::default()) {
            Ok(sol) => worst = worst.max((1.0 / sol.state.m - case.capacity).abs()),
            Err(e) => return outcome(false, format!("solver failed: {e}")),
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    outcome(
        worst < 5e-5 && secs < 600.0,
        format!("15 configurations, max |dcap| = {worst:.2e}, {secs:.1} s"),
    )
}

fn sliding_segment_modules() -> Outcome {
    let (mut dm, mut dcap, mut slowest): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for &(a, m, cap) in &SLIDING_SEGMENT_CASES {
        let clock = Instant::now();
        match solve(&sliding_segment(a), Tolerances::default()) {
            Ok(sol) => {
                dm = dm.max((sol.state.m - m).abs());
                dcap = dcap.max((1.0 / sol.state.m - cap).abs());
            }
            Err(e) => return outcome(false, format!("a = {a}: {e}")),
        }
        slowest = slowest.max(clock.elapsed().as_secs_f64());
    }
    outcome(
        dm < 1e-4 && dcap < 2e-4 && slowest < 60.0,
        format!(
            "8 positions, max |dm| = {dm:.2e}, max |dcap| = {dcap:.2e}, slowest run {slowest:.2} s"
        ),
    )
}

fn start_values() -> Outcome {
    let s = normalize(&sliding_segment(SLIDING_SEGMENT_START)).and_then(|n| initial_state(&n));
    let Ok(s) = s else {
        return outcome(false, "start computation failed".into());
    };
    let (m0, x, a0) = SLIDING_SEGMENT_INITIAL;
    let (dm, dx, da) = ((s.m0 - m0).abs(), (s.x_tilde - x).abs(), (s.a0 - a0).norm());
    outcome(
        dm < 1e-7 && dx < 1e-6 && da < 1e-6,
        format!("|dm0| = {dm:.1e}, |dx| = {dx:.1e}, |da0| = {da:.1e}"),
    )
}

fn kernel_properties() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let h = 1e-4;
    let mut worst = [0.0f64; 5];
    for k in 0..20 {
        let l = Lattice::new(0.2 * 25f64.powf(k as f64 / 19.0)).unwrap();
        worst[0] = worst[0].max((l.omega2() * l.eta1() - l.eta2() - c(0.0, 2.0 * PI)).norm());
        let m = l.omega2_im();
        let mut points = Vec::new();
        while points.len() < 20 {
            let z = c(rng.gen_range(-0.5..0.5), m * rng.gen_range(-0.5..0.5));
            if l.lattice_distance(z) > 0.1 * m.min(1.0) {
                points.push(z);
            }
        }
        for (i, &z) in points.iter().enumerate() {
            let v = l.eval(z).unwrap();
            let e = c(h, 0.0);
            let fd = |f: &dyn Fn(Complex64) -> Complex64| {
                (8.0 * (f(z + e) - f(z - e)) - (f(z + 2.0 * e) - f(z - 2.0 * e))) / (12.0 * h)
            };
            worst[1] = worst[1].max(rel(fd(&|w| zeta_w(w, &l).unwrap()) + v.wp, v.wp));
            worst[2] = worst[2].max(rel(fd(&|w| l.ln_sigma(w).unwrap()) - v.zeta, v.zeta));
            let terms = [4.0 * v.wp.powu(3), l.g2() * v.wp, l.g3()];
            let size = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
            let cubic = v.wp_prime * v.wp_prime - (terms[0] - terms[1] - terms[2]);
            worst[3] = worst[3].max(cubic.norm() / size);
            if i < 5 {
                let oracle = richardson2(|n| wp_sum(z, l.omega2(), n), 40);
                worst[4] = worst[4].max(rel(wp(z, &l).unwrap() - oracle, oracle));
            }
        }
    }
    let sq = Lattice::new(1.0).unwrap();
    let (g3, eta) = (sq.g3().norm(), (sq.eta1() - PI).norm());
    let pass = worst[0] < 1e-12
        && worst[1] < 1e-8
        && worst[2] < 1e-8
        && worst[3] < 1e-9
        && worst[4] < 1e-6
        && g3 < 1e-13
        && eta < 1e-10;
    outcome(
        pass,
        format!(
            "legendre {:.1e}, zeta' {:.1e}, sigma'/sigma {:.1e}, cubic {:.1e}, lattice sum {:.1e}, g3 {g3:.1e}, eta1 {eta:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn first_integrals() -> Outcome {
    let (mut sum, mut residue): (f64, f64) = (0.0, 0.0);
    for case in &LATTICE_CASES {
        match solve(&case.config(), Tolerances::default()) {
            Ok(sol) => {
                sum = sum.max(sol.defects.sum_defect);
                residue = residue.max(sol.defects.residue_defect);
            }
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    outcome(
        sum < 1e-7 && residue < 1e-7,
        format!("max sum drift {sum:.1e}, max residue defect {residue:.1e}"),
    )
}

fn zero_velocity() -> Outcome {
    let mut worst: f64 = 0.0;
    for cfg in [
        sliding_segment(SLIDING_SEGMENT_START),
        SlitConfig::from_endpoints([c(0., 1.), c(3., 1.), c(0., -1.), c(3., -1.)]),
        SlitConfig::from_endpoints([c(1., 1.), c(2., 2.), c(1., -1.), c(2., -2.)]),
    ] {
        let n = normalize(&cfg).unwrap();
        let s0 = initial_state(&n).unwrap().state();
        let s1 = *integrate(&s0, &n, Tolerances::default()).unwrap().last();
        let mut d = (s0.m - s1.m)
            .abs()
            .max((s0.y0 - s1.y0).abs())
            .max((s0.a - s1.a).norm());
        for k in 0..4 {
            d = d.max((s0.x[k] - s1.x[k]).abs());
        }
        worst = worst.max(d);
    }
    outcome(
        worst < 1e-10,
        format!("3 symmetric inputs, max state change {worst:.1e}"),
    )
}

fn map_reconstruction() -> Outcome {
    let (mut ends, mut lines, mut period, mut quasi): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for idx in [0, 9, 14] {
        let cfg = LATTICE_CASES[idx].config();
        let diam = cfg.diameter();
        let r = match compute(&cfg, &ComputeOptions::default()) {
            Ok(r) => r,
            Err(e) => return outcome(false, e.to_string()),
        };
        ends = ends.max(r.endpoint_errors.iter().fold(0.0, |a: f64, &b| a.max(b)) / diam);
        lines = lines.max(r.line_deviation / diam);
        let n = normalize(&cfg).unwrap();
        let md = MapData::new(&r.accessory, n.beta, n.canonical.a3).unwrap();
        let m = md.state.m;
        for z in [c(0.37, -0.1), c(-0.2, -0.6 * m)] {
            let f = md.eval(z).unwrap();
            let g = md.eval(z + 1.0).unwrap();
            period = period.max((f - g).norm() / md.c.norm().max(1.0));
            let d = map_derivative(z, &md).unwrap();
            let up = map_derivative(z + c(0.0, 2.0 * m), &md).unwrap();
            quasi = quasi.max((up / d - Complex64::from_polar(1.0, 2.0 * md.beta)).norm());
        }
    }
    outcome(
        ends < 1e-5 && lines < 1e-6 && period < 1e-8 && quasi < 1e-8,
        format!("endpoint {ends:.1e}, carrier {lines:.1e}, period {period:.1e}, quasi-period {quasi:.1e} (relative)"),
    )
}

fn dzeta_domega2() -> Outcome {
    let mut rng = StdRng::seed_from_u64(99);
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for m in [0.5, 1.0, 2.5] {
        let l = Lattice::new(m).unwrap();
        let steps: Vec<Lattice> = [-2.0, -1.0, 1.0, 2.0]
            .iter()
            .map(|k| Lattice::new(m + k * h).unwrap())
            .collect();
        let mut n = 0;
        while n < 10 {
            let z = c(rng.gen_range(-0.5..0.5), m * rng.gen_range(-0.5..0.5));
            if l.lattice_distance(z) < 0.1 * m.min(1.0) {
                continue;
            }
            n += 1;
            let f: Vec<Complex64> = steps.iter().map(|s| zeta_w(z, s).unwrap()).collect();
            let fd = (8.0 * (f[2] - f[1]) - (f[3] - f[0])) / (12.0 * h);
            let exact = Complex64::i() * l.dzeta_domega2(z).unwrap();
            worst = worst.max(rel(fd - exact, exact));
        }
    }
    outcome(
        worst < 1e-6,
        format!("30 points on 3 lattices, max deviation {worst:.1e}"),
    )
}

fn sliding_extremum() -> Outcome {
    // Equal parallel slits; the symmetric position is a = 1, midway between
    // two samples.
    let family =
        SlidingFamily::new(c(0.0, 1.0), c(1.0, 0.0), 2.0, c(0.0, -1.0), c(2.0, -1.0)).unwrap();
    let step = 0.25;
    let grid: Vec<f64> = (0..16).map(|k| -0.875 + step * k as f64).collect();
    let mut samples = Vec::new();
    for &a in &grid {
        let sol = match solve(&family.at(a), Tolerances::default()) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("a = {a}: {e}")),
        };
        let rate = module_rate(&sol, [true, true, false, false], family.direction).unwrap();
        samples.push((a, sol.state.m, rate));
    }
    let (a_min, _, _) =
        samples.iter().copied().fold(
            (0.0, f64::INFINITY, 0.0),
            |acc, s| if s.1 < acc.1 { s } else { acc },
        );
    let mut mismatches = 0;
    for i in 1..samples.len() - 1 {
        let fd = samples[i + 1].1 - samples[i - 1].1;
        if fd.signum() != samples[i].2.signum() {
            mismatches += 1;
        }
    }
    outcome(
        (a_min - 1.0).abs() <= step && mismatches == 0,
        format!("minimum at a = {a_min} (symmetric at 1, step {step}), {mismatches} sign mismatches over 14 interior points"),
    )
}

fn grid_cross_check() -> Outcome {
    let spec = GridSpec {
        half_width: 6.0,
        resolution: 256,
    };
    let mut worst: f64 = 0.0;
    for idx in [0, 10, 14] {
        let cfg = LATTICE_CASES[idx].config();
        let exact = 1.0 / solve(&cfg, Tolerances::default()).unwrap().state.m;
        match grid_capacity(&cfg, spec) {
            Ok(g) => worst = worst.max((g / exact - 1.0).abs()),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    let exact = 2.0 * PI / 2f64.ln();
    let annulus = annulus_capacity(0.5, spec)
        .map(|s| (s.capacity / exact - 1.0).abs())
        .unwrap_or(f64::NAN);
    outcome(
        worst < 0.02 && annulus < 0.01,
        format!(
            "max relative deviation {:.2}% on 3 slit pairs, annulus {:.2}%",
            100.0 * worst,
            100.0 * annulus
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("reference capacities", reference_capacities),
        ("sliding segment modules", sliding_segment_modules),
        ("symmetric start values", start_values),
        ("elliptic kernel properties", kernel_properties),
        ("first-integral drift", first_integrals),
        ("zero-velocity invariance", zero_velocity),
        ("map reconstruction", map_reconstruction),
        ("period derivative of zeta", dzeta_domega2),
        ("sliding-slit extremum and sign", sliding_extremum),
        ("grid oracle cross-check", grid_cross_check),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {} [{:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            clock.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
