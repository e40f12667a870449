//! Self-consistency checks of the elliptic kernel and comparison against the
//! reference capacities.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::Lattice;
use crate::error::Result;
use crate::evolution::Tolerances;
use crate::pipeline::solve;
use crate::reference::{CAPACITY_TOLERANCE, LATTICE_CASES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
        }
    }

    pub fn passed(&self) -> bool {
        self.value.is_finite() && self.value < self.limit
    }
}

/// `count` values of `omega2_im`, log-spaced over `[lo, hi]`.
pub fn lattice_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (count.max(2) - 1) as f64;
    (0..count).map(|k| lo * (step * k as f64).exp()).collect()
}

/// Deterministic points spread over the period cell `[−½, ½] × [−M/2, M/2]`,
/// kept at least a tenth of the short period away from the lattice.
pub fn cell_points(lattice: &Lattice, count: usize) -> Vec<Complex64> {
    const PHI1: f64 = 0.754_877_666_246_692_7;
    const PHI2: f64 = 0.569_840_290_998_053_2;
    let m = lattice.omega2_im();
    let clearance = 0.1 * m.min(1.0);
    let mut out = Vec::with_capacity(count);
    let mut k = 0usize;
    while out.len() < count {
        k += 1;
        let u = (0.5 + PHI1 * k as f64).fract() - 0.5;
        let v = (0.5 + PHI2 * k as f64).fract() - 0.5;
        let z = Complex64::new(u, v * m);
        if lattice.lattice_distance(z) >= clearance {
            out.push(z);
        }
    }
    out
}

fn scaled(err: Complex64, size: Complex64) -> f64 {
    err.norm() / size.norm().max(1.0)
}

/// Largest deviations of one lattice from the identities the kernel must
/// satisfy: Legendre, `ζ′ = −℘`, `(ln σ)′ = ζ` and the cubic differential
/// equation of `℘`, the last relative to its largest term.
pub fn lattice_checks(lattice: &Lattice, points: &[Complex64]) -> Result<[f64; 4]> {
    const H: f64 = 1e-4;
    let mut worst = [lattice.legendre_defect(), 0.0, 0.0, 0.0];
    let (g2, g3) = (lattice.g2(), lattice.g3());
    for &z in points {
        let v = lattice.eval(z)?;
        let dz = Complex64::new(H, 0.0);
        let zeta = |w: Complex64| lattice.eval(w).map(|v| v.zeta);
        let d_zeta = (8.0 * (zeta(z + dz)? - zeta(z - dz)?)
            - (zeta(z + 2.0 * dz)? - zeta(z - 2.0 * dz)?))
            / (12.0 * H);
        worst[1] = worst[1].max(scaled(d_zeta + v.wp, v.wp));
        let ls = |w: Complex64| lattice.ln_sigma(w);
        let d_ln_sigma = (8.0 * (ls(z + dz)? - ls(z - dz)?)
            - (ls(z + 2.0 * dz)? - ls(z - 2.0 * dz)?))
            / (12.0 * H);
        worst[2] = worst[2].max(scaled(d_ln_sigma - v.zeta, v.zeta));
        let terms = [4.0 * v.wp * v.wp * v.wp, g2 * v.wp, g3];
        let size = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        let residual = v.wp_prime * v.wp_prime - (terms[0] - terms[1] - terms[2]);
        worst[3] = worst[3].max(residual.norm() / size);
    }
    Ok(worst)
}

/// Property checks over twenty lattices plus the square-lattice specials.
pub fn kernel_checks() -> Result<Vec<Check>> {
    let mut worst = [0.0f64; 4];
    for m in lattice_grid(0.2, 5.0, 20) {
        let lattice = Lattice::new(m)?;
        let points = cell_points(&lattice, 20);
        let w = lattice_checks(&lattice, &points)?;
        for (acc, x) in worst.iter_mut().zip(w) {
            *acc = acc.max(x);
        }
    }
    let square = Lattice::new(1.0)?;
    Ok(vec![
        Check::new("legendre relation", worst[0], 1e-12),
        Check::new("zeta derivative", worst[1], 1e-8),
        Check::new("log-sigma derivative", worst[2], 1e-8),
        Check::new("wp cubic identity", worst[3], 1e-9),
        Check::new("square lattice g3", square.g3().norm(), 1e-13),
        Check::new("square lattice eta1", (square.eta1() - PI).norm(), 1e-10),
    ])
}

/// Capacity deltas for the fifteen reference configurations.
pub fn reference_checks(tol: Tolerances) -> Vec<Check> {
    LATTICE_CASES
        .iter()
        .enumerate()
        .map(|(i, case)| {
            let name = format!("reference case {}", i + 1);
            match solve(&case.config(), tol) {
                Ok(sol) => Check::new(
                    name,
                    (1.0 / sol.state.m - case.capacity).abs(),
                    CAPACITY_TOLERANCE,
                ),
                Err(_) => Check::new(name, f64::NAN, CAPACITY_TOLERANCE),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_checks_pass() {
        for c in kernel_checks().unwrap() {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn cell_points_avoid_the_lattice() {
        let l = Lattice::new(0.2).unwrap();
        let p = cell_points(&l, 20);
        assert_eq!(p.len(), 20);
        assert!(p.iter().all(|&z| l.lattice_distance(z) >= 0.02));
    }
}
