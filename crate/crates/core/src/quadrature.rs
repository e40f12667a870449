//! Adaptive Gauss–Kronrod (7, 15) quadrature of complex functions along
//! straight segments in the complex plane.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 40;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the odd Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7K15 panel on `[a, b]`: the Kronrod estimate and its difference
/// from the Gauss estimate.
fn panel<F>(f: &F, a: Complex64, b: Complex64) -> Result<(Complex64, f64)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dz = half * XGK[i];
        let pair = f(center - dz)? + f(center + dz)?;
        kronrod += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    Ok((kronrod * half, ((kronrod - gauss) * half).norm()))
}

/// `∫_a^b f(z) dz` along the segment from `a` to `b`, to absolute tolerance
/// `tol`.
pub fn integrate_segment<F>(f: &F, a: Complex64, b: Complex64, tol: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (value, err) = panel(f, a, b)?;
    refine(f, a, b, value, err, tol, 0)
}

fn refine<F>(
    f: &F,
    a: Complex64,
    b: Complex64,
    value: Complex64,
    err: f64,
    tol: f64,
    depth: u32,
) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if err <= tol {
        return Ok(value);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::QuadratureFailure(format!(
            "no convergence on [{a}, {b}] (error estimate {err:e})"
        )));
    }
    let mid = 0.5 * (a + b);
    let (left, el) = panel(f, a, mid)?;
    let (right, er) = panel(f, mid, b)?;
    if !(left + right).is_finite() {
        return Err(Error::QuadratureFailure(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    Ok(refine(f, a, mid, left, el, 0.5 * tol, depth + 1)?
        + refine(f, mid, b, right, er, 0.5 * tol, depth + 1)?)
}

/// Integral along a polyline through `points`.
pub fn integrate_path<F>(f: &F, points: &[Complex64], tol: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let legs = points.len().saturating_sub(1).max(1) as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for w in points.windows(2) {
        total += integrate_segment(f, w[0], w[1], tol / legs)?;
    }
    Ok(total)
}
