//! Brute-force lattice sums and products over `|m|, |n| ≤ N`, used as
//! independent oracles for the theta-series implementation.
//!
//! Points on the truncation boundary get trapezoid weights (½ on edges, ¼ at
//! corners) so the truncation tail is an even series in `1/N`; `richardson`
//! and `richardson2` remove its leading terms.

use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn weighted_points(omega2: Complex64, n: i64) -> impl Iterator<Item = (f64, Complex64)> {
    (-n..=n).flat_map(move |a| {
        (-n..=n).filter_map(move |b| {
            if a == 0 && b == 0 {
                return None;
            }
            let wa = if a.abs() == n { 0.5 } else { 1.0 };
            let wb = if b.abs() == n { 0.5 } else { 1.0 };
            Some((wa * wb, c(a as f64, 0.0) + omega2 * b as f64))
        })
    })
}

pub fn richardson(f: impl Fn(i64) -> Complex64, n: i64) -> Complex64 {
    (4.0 * f(2 * n) - f(n)) / 3.0
}

/// Two extrapolation levels, removing the `N⁻²` and `N⁻⁴` tail terms.
pub fn richardson2(f: impl Fn(i64) -> Complex64, n: i64) -> Complex64 {
    let (a, b, c) = (f(n), f(2 * n), f(4 * n));
    let r1 = (4.0 * b - a) / 3.0;
    let r2 = (4.0 * c - b) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

pub fn wp_sum(z: Complex64, omega2: Complex64, n: i64) -> Complex64 {
    let mut s = 1.0 / (z * z);
    for (wt, w) in weighted_points(omega2, n) {
        s += wt * (1.0 / ((z - w) * (z - w)) - 1.0 / (w * w));
    }
    s
}

pub fn zeta_sum(z: Complex64, omega2: Complex64, n: i64) -> Complex64 {
    let mut s = 1.0 / z;
    for (wt, w) in weighted_points(omega2, n) {
        s += wt * (1.0 / (z - w) + 1.0 / w + z / (w * w));
    }
    s
}

pub fn sigma_product(z: Complex64, omega2: Complex64, n: i64) -> Complex64 {
    let mut ln = z.ln();
    for (wt, w) in weighted_points(omega2, n) {
        let r = z / w;
        ln += wt * ((1.0 - r).ln() + r + r * r / 2.0);
    }
    ln.exp()
}

pub fn g2_sum(omega2: Complex64, n: i64) -> Complex64 {
    weighted_points(omega2, n)
        .map(|(wt, w)| wt * 60.0 / (w * w * w * w))
        .sum()
}

pub fn g3_sum(omega2: Complex64, n: i64) -> Complex64 {
    weighted_points(omega2, n)
        .map(|(wt, w)| wt * 140.0 / (w * w * w * w * w * w))
        .sum()
}
