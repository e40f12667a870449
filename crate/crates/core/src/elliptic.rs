//! Weierstrass `σ`, `ζ`, `℘`, `℘′` on rectangular lattices generated by
//! `ω₁ = 1` and `ω₂ = i·M`.
//!
//! Everything is evaluated from the Jacobi `θ₁` q-series:
//!
//! ```text
//! θ₁(v | τ) = 2 Σₙ (−1)ⁿ q^{(n+½)²} sin((2n+1)v),     q = e^{iπτ}
//! σ(z)      = e^{η₁z²/2} θ₁(πz) / (π θ₁′(0))
//! ζ(z)      = η₁ z + π θ₁′(πz)/θ₁(πz)
//! η₁        = 2ζ(½) = −π² θ₁‴(0) / (3 θ₁′(0))
//! ```
//!
//! Lattices with `M < 1` are first rescaled to the equivalent lattice with
//! period ratio `1/M` (the map `z ↦ z/(iM)`), so the series always runs with
//! `q ≤ e^{−π}` and needs at most a handful of terms. Arguments are reduced
//! into the fundamental rectangle before summation and the quasi-periodicity
//! factors are reapplied afterwards.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Arguments closer than this to a lattice point are rejected by the
/// functions that have poles there.
pub const POLE_RADIUS: f64 = 1e-12;

const MIN_PERIOD: f64 = 1e-4;
const MAX_PERIOD: f64 = 1e4;
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Rectangular period lattice `Z + ω₂Z` with `ω₂ = i·omega2_im`.
#[derive(Debug, Clone)]
pub struct Lattice {
    omega2_im: f64,
    tau: Complex64,
    nome_q: f64,
    eta1: Complex64,
    eta2: Complex64,
    g2: Complex64,
    g3: Complex64,
    canon: Canonical,
}

/// The same lattice written as `scale · (Z + i·period·Z)` with `period ≥ 1`.
#[derive(Debug, Clone)]
struct Canonical {
    scale: Complex64,
    period: f64,
    /// `(−1)ⁿ e^{−π·period·n(n+1)}` for the retained terms.
    weights: Vec<f64>,
    eta1: f64,
    eta2: Complex64,
    ln_pi_theta_prime0: f64,
}

/// Values of the three meromorphic functions at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeierstrassValues {
    pub zeta: Complex64,
    pub wp: Complex64,
    pub wp_prime: Complex64,
}

/// Closed rectangle used to select a branch of `℘⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRegion {
    pub re_range: (f64, f64),
    pub im_range: (f64, f64),
}

impl BranchRegion {
    pub fn new(re_range: (f64, f64), im_range: (f64, f64)) -> Self {
        Self { re_range, im_range }
    }

    /// `[0, ½] × [0, Im(ω₂)/2]`, on which `℘` is one-to-one.
    pub fn quarter_cell(lattice: &Lattice) -> Self {
        Self::new((0.0, 0.5), (0.0, 0.5 * lattice.omega2_im()))
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re_range.0 - slack
            && z.re <= self.re_range.1 + slack
            && z.im >= self.im_range.0 - slack
            && z.im <= self.im_range.1 + slack
    }

    fn clamp(&self, z: Complex64) -> Complex64 {
        Complex64::new(
            z.re.clamp(self.re_range.0, self.re_range.1),
            z.im.clamp(self.im_range.0, self.im_range.1),
        )
    }
}

struct ThetaSums {
    /// `θ₁⁽ᵏ⁾(v) = 2q^{1/4} e^{log_scale} s[k]`
    s: [Complex64; 4],
    log_scale: Complex64,
}

impl Lattice {
    /// Builds the lattice with `ω₁ = 1`, `ω₂ = i·omega2_im`.
    pub fn new(omega2_im: f64) -> Result<Self> {
        if !omega2_im.is_finite() || !(MIN_PERIOD..=MAX_PERIOD).contains(&omega2_im) {
            return Err(Error::OutOfRange(format!(
                "omega2_im = {omega2_im} outside [{MIN_PERIOD:e}, {MAX_PERIOD:e}]"
            )));
        }
        let (scale, period) = if omega2_im >= 1.0 {
            (Complex64::new(1.0, 0.0), omega2_im)
        } else {
            (Complex64::new(0.0, omega2_im), 1.0 / omega2_im)
        };
        let canon = Canonical::new(scale, period)?;

        let (eta1, eta2) = if omega2_im >= 1.0 {
            (Complex64::new(canon.eta1, 0.0), canon.eta2)
        } else {
            // ω₁ = 1 corresponds to −ω₂′ on the canonical lattice and ω₂ to ω₁′.
            (-canon.eta2 / scale, canon.eta1 / scale)
        };
        let (g2c, g3c) = eisenstein_invariants(period)?;
        let s2 = scale * scale;
        let g2 = Complex64::new(g2c, 0.0) / (s2 * s2);
        let g3 = Complex64::new(g3c, 0.0) / (s2 * s2 * s2);

        Ok(Self {
            omega2_im,
            tau: Complex64::new(0.0, omega2_im),
            nome_q: (-PI * omega2_im).exp(),
            eta1: Complex64::new(eta1.re, 0.0),
            eta2: Complex64::new(0.0, eta2.im),
            g2: Complex64::new(g2.re, 0.0),
            g3: Complex64::new(g3.re, 0.0),
            canon,
        })
    }

    pub fn omega2_im(&self) -> f64 {
        self.omega2_im
    }

    pub fn omega2(&self) -> Complex64 {
        Complex64::new(0.0, self.omega2_im)
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn nome_q(&self) -> f64 {
        self.nome_q
    }

    /// `η₁ = 2ζ(½)`.
    pub fn eta1(&self) -> Complex64 {
        self.eta1
    }

    /// `η₂ = 2ζ(ω₂/2)`.
    pub fn eta2(&self) -> Complex64 {
        self.eta2
    }

    pub fn g2(&self) -> Complex64 {
        self.g2
    }

    pub fn g3(&self) -> Complex64 {
        self.g3
    }

    /// `|ω₂η₁ − η₂ − 2πi|`.
    pub fn legendre_defect(&self) -> f64 {
        (self.omega2() * self.eta1 - self.eta2 - Complex64::new(0.0, 2.0 * PI)).norm()
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn lattice_distance(&self, z: Complex64) -> f64 {
        let (zr, _, _) = self.canon.reduce(z / self.canon.scale);
        zr.norm() * self.canon.scale.norm()
    }

    /// `ζ`, `℘` and `℘′` at `z`.
    pub fn eval(&self, z: Complex64) -> Result<WeierstrassValues> {
        let c = &self.canon;
        let (zr, j, k) = c.reduce(z / c.scale);
        if zr.norm() * c.scale.norm() < POLE_RADIUS {
            return Err(Error::PoleProximity {
                z,
                radius: POLE_RADIUS,
            });
        }
        let th = c.theta_sums(PI * zr);
        let r1 = th.s[1] / th.s[0];
        let r2 = th.s[2] / th.s[0];
        let r3 = th.s[3] / th.s[0];
        let zeta_c = c.eta1 * zr + PI * r1 + (j as f64) * c.eta1 + (k as f64) * c.eta2;
        let wp_c = -c.eta1 - PI * PI * (r2 - r1 * r1);
        let wpp_c = -PI.powi(3) * (r3 - 3.0 * r1 * r2 + 2.0 * r1 * r1 * r1);
        let s = c.scale;
        Ok(WeierstrassValues {
            zeta: zeta_c / s,
            wp: wp_c / (s * s),
            wp_prime: wpp_c / (s * s * s),
        })
    }

    /// Natural logarithm of `σ(z)` (any branch). Fails at lattice points.
    pub fn ln_sigma(&self, z: Complex64) -> Result<Complex64> {
        let c = &self.canon;
        let (zr, j, k) = c.reduce(z / c.scale);
        if zr.norm() * c.scale.norm() < POLE_RADIUS {
            return Err(Error::PoleProximity {
                z,
                radius: POLE_RADIUS,
            });
        }
        Ok(c.scale.ln() + c.ln_sigma_reduced(zr, j, k))
    }

    pub fn sigma(&self, z: Complex64) -> Complex64 {
        let c = &self.canon;
        let (zr, j, k) = c.reduce(z / c.scale);
        if zr == Complex64::new(0.0, 0.0) {
            return zr;
        }
        c.scale * c.ln_sigma_reduced(zr, j, k).exp()
    }

    /// `∂ζ(z; 1, ω₂)/∂ω₂` (holomorphic derivative in the second period).
    pub fn dzeta_domega2(&self, z: Complex64) -> Result<Complex64> {
        let v = self.eval(z)?;
        Ok(self.dzeta_domega2_from(z, &v))
    }

    /// Same as [`Lattice::dzeta_domega2`] with the function values supplied.
    pub fn dzeta_domega2_from(&self, z: Complex64, v: &WeierstrassValues) -> Complex64 {
        let eta1 = self.eta1;
        let bracket =
            0.5 * v.wp_prime + (v.zeta - eta1 * z) * v.wp + eta1 * v.zeta - self.g2 / 12.0 * z;
        -bracket / Complex64::new(0.0, 2.0 * PI)
    }
}

impl Canonical {
    fn new(scale: Complex64, period: f64) -> Result<Self> {
        let mut weights = Vec::new();
        for n in 0..=200usize {
            let nf = n as f64;
            let bound = (-PI * period * nf * nf).exp() * (2.0 * nf + 1.0).powi(3);
            if n > 0 && bound < 1e-18 {
                break;
            }
            if n == 200 {
                return Err(Error::ConvergenceFailure(format!(
                    "theta series for period {period} needs more than 200 terms"
                )));
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            weights.push(sign * (-PI * period * nf * (nf + 1.0)).exp());
        }
        let (mut p1, mut p3) = (0.0, 0.0);
        for (n, w) in weights.iter().enumerate() {
            let k = 2.0 * n as f64 + 1.0;
            p1 += w * k;
            p3 += w * k * k * k;
        }
        let eta1 = PI * PI * p3 / (3.0 * p1);
        let eta2 = Complex64::new(0.0, period * eta1 - 2.0 * PI);
        Ok(Self {
            scale,
            period,
            weights,
            eta1,
            eta2,
            ln_pi_theta_prime0: (PI * p1).ln(),
        })
    }

    /// Splits `z = zr + j + k·i·period` with `zr` in the centred period cell.
    fn reduce(&self, z: Complex64) -> (Complex64, i64, i64) {
        let k = (z.im / self.period).round();
        let j = z.re.round();
        let zr = Complex64::new(z.re - j, z.im - k * self.period);
        (zr, j as i64, k as i64)
    }

    fn ln_sigma_reduced(&self, zr: Complex64, j: i64, k: i64) -> Complex64 {
        let th = self.theta_sums(PI * zr);
        let mut ln =
            self.eta1 * zr * zr / 2.0 + th.log_scale + th.s[0].ln() - self.ln_pi_theta_prime0;
        if j != 0 || k != 0 {
            let omega = Complex64::new(j as f64, k as f64 * self.period);
            let eta = self.eta1 * j as f64 + self.eta2 * k as f64;
            ln += eta * (zr + omega / 2.0);
            if j % 2 != 0 || k % 2 != 0 {
                ln += Complex64::new(0.0, PI);
            }
        }
        ln
    }

    fn theta_sums(&self, v: Complex64) -> ThetaSums {
        if v.im < 0.0 {
            let t = self.theta_sums_upper(-v);
            return ThetaSums {
                s: [-t.s[0], t.s[1], -t.s[2], t.s[3]],
                log_scale: t.log_scale,
            };
        }
        self.theta_sums_upper(v)
    }

    fn theta_sums_upper(&self, v: Complex64) -> ThetaSums {
        let mut s = [Complex64::new(0.0, 0.0); 4];
        if v.im < 1.0 {
            for (n, w) in self.weights.iter().enumerate() {
                let k = 2.0 * n as f64 + 1.0;
                let (sn, cs) = sin_cos(v * k);
                s[0] += sn * *w;
                s[1] += cs * (w * k);
                s[2] -= sn * (w * k * k);
                s[3] -= cs * (w * k * k * k);
            }
            ThetaSums {
                s,
                log_scale: Complex64::new(0.0, 0.0),
            }
        } else {
            // Scaled by e^{iv}: sin((2n+1)v)e^{iv} = (e^{i(2n+2)v} − e^{−i2nv}) / 2i.
            for n in 0..self.weights.len() {
                let nf = n as f64;
                let k = 2.0 * nf + 1.0;
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let base = -PI * self.period * nf * (nf + 1.0);
                let ep = (Complex64::new(base, 0.0) + I * v * (2.0 * nf + 2.0)).exp();
                let em = (Complex64::new(base, 0.0) - I * v * (2.0 * nf)).exp();
                let sn = (ep - em) / (2.0 * I) * sign;
                let cs = (ep + em) / 2.0 * sign;
                s[0] += sn;
                s[1] += cs * k;
                s[2] -= sn * (k * k);
                s[3] -= cs * (k * k * k);
            }
            ThetaSums {
                s,
                log_scale: -I * v,
            }
        }
    }
}

fn sin_cos(z: Complex64) -> (Complex64, Complex64) {
    let (s, c) = z.re.sin_cos();
    let (sh, ch) = (z.im.sinh(), z.im.cosh());
    (
        Complex64::new(s * ch, c * sh),
        Complex64::new(c * ch, -s * sh),
    )
}

/// `g₂`, `g₃` of `Z + i·period·Z` (period ≥ 1) from the Eisenstein series
/// `E₄`, `E₆` in `q² = e^{−2π·period}`.
fn eisenstein_invariants(period: f64) -> Result<(f64, f64)> {
    let q2 = (-2.0 * PI * period).exp();
    let (mut s3, mut s5) = (0.0f64, 0.0f64);
    let mut qn = 1.0;
    for n in 1..=200 {
        qn *= q2;
        let nf = n as f64;
        let lam = qn / (1.0 - qn);
        let t3 = nf.powi(3) * lam;
        let t5 = nf.powi(5) * lam;
        s3 += t3;
        s5 += t5;
        if t5 < 1e-20 * (1.0 + s5) {
            let e4 = 1.0 + 240.0 * s3;
            let e6 = 1.0 - 504.0 * s5;
            return Ok((4.0 * PI.powi(4) / 3.0 * e4, 8.0 * PI.powi(6) / 27.0 * e6));
        }
    }
    Err(Error::ConvergenceFailure(
        "Eisenstein series did not converge".into(),
    ))
}

/// Builds the lattice `Z + i·omega2_im·Z`.
pub fn lattice_from_periods(omega2_im: f64) -> Result<Lattice> {
    Lattice::new(omega2_im)
}

/// Jacobi `θ₁(z | τ)` by direct summation of its q-series.
pub fn theta1(z: Complex64, tau: Complex64) -> Result<Complex64> {
    theta1_series(z, tau, 0)
}

/// `θ₁′(0 | τ) = 2 Σ (−1)ⁿ (2n+1) q^{(n+½)²}`.
pub fn theta1_prime_zero(tau: Complex64) -> Result<Complex64> {
    theta1_series(Complex64::new(0.0, 0.0), tau, 1)
}

fn theta1_series(z: Complex64, tau: Complex64, derivative: u32) -> Result<Complex64> {
    if tau.im <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "Im(tau) = {} must be positive",
            tau.im
        )));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..200 {
        let h = n as f64 + 0.5;
        let k = 2.0 * n as f64 + 1.0;
        let qpow = (I * PI * tau * h * h).exp();
        let (sn, cs) = sin_cos(z * k);
        let trig = if derivative == 0 { sn } else { cs * k };
        let sign = if n % 2 == 0 { 2.0 } else { -2.0 };
        let term = qpow * trig * sign;
        sum += term;
        // The magnitude bound covers terms that vanish by accident (z = 0).
        let bound = qpow.norm() * (k * z.im.abs()).exp() * k.powi(derivative as i32 + 1);
        if n > 0 && bound <= 1e-17 * sum.norm() {
            return Ok(sum);
        }
        if n > 0 && sum.norm() == 0.0 && bound < 1e-300 {
            return Ok(sum);
        }
    }
    Err(Error::ConvergenceFailure(
        "theta1 series needs more than 200 terms".into(),
    ))
}

/// Weierstrass `σ(z)` on `lattice`.
pub fn sigma(z: Complex64, lattice: &Lattice) -> Complex64 {
    lattice.sigma(z)
}

/// Weierstrass `ζ(z)` on `lattice`.
pub fn zeta_w(z: Complex64, lattice: &Lattice) -> Result<Complex64> {
    Ok(lattice.eval(z)?.zeta)
}

/// Weierstrass `℘(z)` on `lattice`.
pub fn wp(z: Complex64, lattice: &Lattice) -> Result<Complex64> {
    Ok(lattice.eval(z)?.wp)
}

/// `℘′(z)` on `lattice`.
pub fn wp_prime(z: Complex64, lattice: &Lattice) -> Result<Complex64> {
    Ok(lattice.eval(z)?.wp_prime)
}

/// `∂ζ/∂ω₂` at `z` on `lattice`.
pub fn dzeta_domega2(z: Complex64, lattice: &Lattice) -> Result<Complex64> {
    lattice.dzeta_domega2(z)
}

const GRID: usize = 64;
const NEWTON_STARTS: usize = 8;
const NEWTON_ITERS: usize = 50;

/// Solves `℘(z) = w` for `z` in `region`.
///
/// A 64×64 grid of the region seeds Newton's method from the best few
/// cells; converged roots are folded back into the region by `z ↦ ±z + ω`.
/// Among the roots found, the one with the smallest imaginary part wins,
/// then the smallest real part.
pub fn inverse_wp(w: Complex64, lattice: &Lattice, region: BranchRegion) -> Result<Complex64> {
    let tol = 1e-11 * w.norm().max(1.0);
    let (rl, rh) = region.re_range;
    let (il, ih) = region.im_range;
    if !(rh > rl && ih > il) {
        return Err(Error::OutOfRange("empty branch region".into()));
    }

    let mut seeds: Vec<(f64, Complex64)> = Vec::with_capacity(GRID * GRID);
    for a in 0..GRID {
        for b in 0..GRID {
            let z = Complex64::new(
                rl + (a as f64 + 0.5) / GRID as f64 * (rh - rl),
                il + (b as f64 + 0.5) / GRID as f64 * (ih - il),
            );
            if let Ok(v) = lattice.eval(z) {
                let r = (v.wp - w).norm();
                if r.is_finite() {
                    seeds.push((r, z));
                }
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));

    let slack = 1e-9 * (rh - rl).max(ih - il);
    let omega2 = lattice.omega2();
    let mut best_residual = f64::INFINITY;
    let mut roots: Vec<Complex64> = Vec::new();
    for &(_, start) in seeds.iter().take(NEWTON_STARTS) {
        let Some((root, residual)) = newton_wp(w, lattice, start, tol) else {
            continue;
        };
        best_residual = best_residual.min(residual);
        if residual > tol {
            continue;
        }
        for sign in [1.0, -1.0] {
            for j in -2..=2 {
                for k in -2..=2 {
                    let cand = root * sign + Complex64::new(j as f64, 0.0) + omega2 * k as f64;
                    if region.contains(cand, slack) {
                        roots.push(region.clamp(cand));
                    }
                }
            }
        }
    }
    if best_residual.is_infinite() {
        best_residual = seeds.first().map_or(f64::INFINITY, |s| s.0);
    }
    roots
        .into_iter()
        .min_by(|a, b| {
            if (a.im - b.im).abs() > 1e-10 {
                a.im.total_cmp(&b.im)
            } else {
                a.re.total_cmp(&b.re)
            }
        })
        .ok_or(Error::NoRootInRegion { best_residual })
}

fn newton_wp(
    w: Complex64,
    lattice: &Lattice,
    start: Complex64,
    tol: f64,
) -> Option<(Complex64, f64)> {
    let mut z = start;
    let mut residual = f64::INFINITY;
    for _ in 0..NEWTON_ITERS {
        let v = lattice.eval(z).ok()?;
        let f = v.wp - w;
        residual = f.norm();
        if residual <= tol {
            return Some((z, residual));
        }
        if v.wp_prime.norm() == 0.0 {
            return None;
        }
        let step = f / v.wp_prime;
        z -= step;
        if !z.is_finite() {
            return None;
        }
    }
    let v = lattice.eval(z).ok()?;
    residual = residual.min((v.wp - w).norm());
    Some((z, residual))
}
