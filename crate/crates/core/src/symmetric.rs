//! Closed-form maps for mirror-symmetric slit pairs, used as the starting
//! point of every homotopy.
//!
//! The symmetric maps live on the lattice `(1, i·m)`:
//!
//! ```text
//! β > 0:  f(z) = c e^{2αη₁z} σ(z − α)/σ(z + α),   α = β/(4π)
//! β = 0:  f(z) = −(b/π)(ζ(z) − η₁z)
//! ```
//!
//! Their critical points sit on `Im z = ±m/2`. Shifting by `α − i·m/2` moves
//! the pole to `−i·m/2` and the critical points onto the two boundary lines
//! of the evolution lattice `(1, 2i·m)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{inverse_wp, BranchRegion, Lattice};
use crate::error::{Error, Result};
use crate::evolution::AccessoryState;
use crate::geometry::{CaseTag, NormalizedConfig};

pub const BRACKET: (f64, f64) = (0.1, 3.0);
pub const BISECTION_STEPS: usize = 70;

/// Accessory parameters of the symmetric start configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricSolution {
    pub m0: f64,
    /// Abscissa of the critical point before the shift.
    pub x_tilde: f64,
    pub x_init: [f64; 4],
    pub y0_init: f64,
    pub a0: Complex64,
    pub c0: f64,
}

impl SymmetricSolution {
    pub fn state(&self) -> AccessoryState {
        AccessoryState {
            x: self.x_init,
            m: self.m0,
            y0: self.y0_init,
            a: self.a0,
            t: 0.0,
        }
    }
}

fn upper_critical_point(lattice: &Lattice, w: Complex64) -> Result<Complex64> {
    let z = inverse_wp(w, lattice, BranchRegion::quarter_cell(lattice))?;
    Ok(z)
}

/// Critical point `X₀ + i·m/2` of the symmetric generic map.
pub fn critical_point(m: f64, alpha: f64) -> Result<Complex64> {
    let lattice = Lattice::new(m)?;
    let a = Complex64::new(alpha, 0.0);
    let v = lattice.eval(a)?;
    let w = v.wp - v.wp_prime / (2.0 * (a * lattice.eta1() - v.zeta));
    upper_critical_point(&lattice, w)
}

pub fn critical_abscissa(m: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.25) {
        return Err(Error::OutOfRange(format!(
            "alpha = {alpha} outside (0, 1/4)"
        )));
    }
    Ok(critical_point(m, alpha)?.re)
}

/// Ratio of the far and near distances of a slit to the carrier
/// intersection, as a function of the module.
pub fn length_ratio(m: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.25) {
        return Err(Error::OutOfRange(format!(
            "alpha = {alpha} outside (0, 1/4)"
        )));
    }
    let lattice = Lattice::new(m)?;
    let z2 = critical_point(m, alpha)?;
    let a = Complex64::new(alpha, 0.0);
    let log_l = -4.0 * alpha * lattice.eta1() * z2
        + 2.0 * (lattice.ln_sigma(z2 + a)? - lattice.ln_sigma(z2 - a)?);
    Ok(log_l.re.exp())
}

/// Critical point `X₀ + i·m/2` of the symmetric parallel map, a root of
/// `℘(z) = −η₁`.
pub fn parallel_critical_point(m: f64) -> Result<Complex64> {
    let lattice = Lattice::new(m)?;
    upper_critical_point(&lattice, -lattice.eta1())
}

/// Slit length over half the gap, `(2/π)|Re(ζ(z₂) − η₁z₂)|`.
pub fn parallel_length_ratio(m: f64) -> Result<f64> {
    let lattice = Lattice::new(m)?;
    let z2 = parallel_critical_point(m)?;
    let v = lattice.eval(z2)?;
    Ok(2.0 / PI * (v.zeta - lattice.eta1() * z2).re.abs())
}

fn bisect(target: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let (mut lo, mut hi) = BRACKET;
    let ratio_lo = f(lo)?;
    let ratio_hi = f(hi)?;
    let (f_lo, f_hi) = (ratio_lo - target, ratio_hi - target);
    if f_lo * f_hi > 0.0 || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::BracketFailure {
            target,
            lo,
            hi,
            ratio_lo,
            ratio_hi,
        });
    }
    let mut f_hi = f_hi;
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 * mid {
            break;
        }
        let fm = f(mid)? - target;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm * f_hi > 0.0 {
            hi = mid;
            f_hi = fm;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Module of the symmetric generic configuration with `l₄/l₃ = target_ratio`.
pub fn solve_symmetric_module(target_ratio: f64, alpha: f64) -> Result<f64> {
    if !(target_ratio.is_finite() && target_ratio > 1.0) {
        return Err(Error::OutOfRange(format!(
            "length ratio {target_ratio} must exceed 1"
        )));
    }
    bisect(target_ratio, |m| length_ratio(m, alpha))
}

/// Module of two equal parallel slits of length `length` at vertical
/// distance `gap`, stacked exactly above each other.
pub fn solve_parallel_module(length: f64, gap: f64) -> Result<f64> {
    if !(length > 0.0 && gap > 0.0) {
        return Err(Error::OutOfRange(
            "slit length and gap must be positive".into(),
        ));
    }
    bisect(2.0 * length / gap, parallel_length_ratio)
}

pub fn initial_state_generic(ncfg: &NormalizedConfig) -> Result<SymmetricSolution> {
    if ncfg.case_tag != CaseTag::Generic || !(ncfg.beta > 0.0 && ncfg.beta < PI) {
        return Err(Error::OutOfRange(format!(
            "generic start needs 0 < beta < pi, got {}",
            ncfg.beta
        )));
    }
    let alpha = ncfg.beta / (4.0 * PI);
    let m0 = solve_symmetric_module(ncfg.l4 / ncfg.l3, alpha)?;
    let x_tilde = critical_abscissa(m0, alpha)?;
    let lattice = Lattice::new(m0)?;
    let a0 = 0.5 * (ncfg.l3 * ncfg.l4).ln() - 2.0 * alpha * alpha * lattice.eta1()
        + lattice.ln_sigma(Complex64::new(2.0 * alpha, 0.0))?
        + Complex64::new(0.0, PI);
    Ok(SymmetricSolution {
        m0,
        x_tilde,
        x_init: [
            alpha + x_tilde,
            alpha - x_tilde,
            alpha + x_tilde,
            alpha - x_tilde,
        ],
        y0_init: -0.5 * m0,
        a0: Complex64::new(a0.re, PI),
        c0: (ncfg.l3 * ncfg.l4).sqrt(),
    })
}

pub fn initial_state_parallel(ncfg: &NormalizedConfig) -> Result<SymmetricSolution> {
    if ncfg.case_tag != CaseTag::Parallel {
        return Err(Error::OutOfRange(
            "parallel start needs parallel carriers".into(),
        ));
    }
    let gap = ncfg.gap();
    let m0 = solve_parallel_module(ncfg.l3, gap)?;
    let x_tilde = parallel_critical_point(m0)?.re;
    Ok(SymmetricSolution {
        m0,
        x_tilde,
        x_init: [x_tilde, -x_tilde, x_tilde, -x_tilde],
        y0_init: -0.5 * m0,
        a0: Complex64::new((gap / (2.0 * PI)).ln(), PI),
        c0: gap / PI,
    })
}

pub fn initial_state(ncfg: &NormalizedConfig) -> Result<SymmetricSolution> {
    match ncfg.case_tag {
        CaseTag::Generic => initial_state_generic(ncfg),
        CaseTag::Parallel => initial_state_parallel(ncfg),
    }
}
