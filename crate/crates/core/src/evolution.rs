//! Evolution of the accessory parameters along the homotopy `t ∈ [0, 1]`.
//!
//! All elliptic functions here are taken on the lattice `(1, 2i·m)`. The
//! preimages of the slit endpoints are
//!
//! ```text
//! z₁ = x₁,  z₂ = x₂,  z₃ = x₃ + i·m,  z₄ = x₄ − i·m,  z₀ = i·y₀,  z̄₀ = −z₀
//! ```
//!
//! and `a = log d₋₁` is the logarithm of the residue of the map at `z₀`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{Lattice, WeierstrassValues};
use crate::error::{Error, Result};
use crate::geometry::NormalizedConfig;

/// Arguments of `σ` closer than this to a lattice point signal colliding
/// parameters.
pub const COLLISION_RADIUS: f64 = 1e-10;
pub const DEFECT_ABORT: f64 = 1e-5;
pub const DEFECT_WARN: f64 = 1e-7;
const MIN_STEP: f64 = 1e-12;
const MAX_STEPS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccessoryState {
    pub x: [f64; 4],
    pub m: f64,
    pub y0: f64,
    pub a: Complex64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateDerivative {
    pub dx: [f64; 4],
    pub dm: f64,
    pub dy0: f64,
    pub da: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintDefects {
    pub sum_defect: f64,
    pub residue_defect: f64,
}

impl ConstraintDefects {
    pub fn max(&self) -> f64 {
        self.sum_defect.max(self.residue_defect)
    }
}

/// Endpoint velocities `Ȧ₁..Ȧ₄` and the angle between the carriers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    pub beta: f64,
    pub velocities: [Complex64; 4],
}

impl Drive {
    pub fn from_config(ncfg: &NormalizedConfig) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            beta: ncfg.beta,
            velocities: [ncfg.v1, ncfg.v2, zero, zero],
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            beta: self.beta,
            velocities: self.velocities.map(|v| -v),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            beta: self.beta,
            velocities: self.velocities.map(|v| v * s),
        }
    }
}

impl AccessoryState {
    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(2.0 * self.m)
    }

    pub fn z(&self) -> [Complex64; 4] {
        let [x1, x2, x3, x4] = self.x;
        [
            Complex64::new(x1, 0.0),
            Complex64::new(x2, 0.0),
            Complex64::new(x3, self.m),
            Complex64::new(x4, -self.m),
        ]
    }

    pub fn z0(&self) -> Complex64 {
        Complex64::new(0.0, self.y0)
    }

    fn to_vec(self) -> [f64; 8] {
        let [x1, x2, x3, x4] = self.x;
        [x1, x2, x3, x4, self.m, self.y0, self.a.re, self.a.im]
    }

    fn from_vec(v: &[f64; 8], t: f64) -> Self {
        Self {
            x: [v[0], v[1], v[2], v[3]],
            m: v[4],
            y0: v[5],
            a: Complex64::new(v[6], v[7]),
            t,
        }
    }
}

impl StateDerivative {
    fn to_vec(self) -> [f64; 8] {
        let [a, b, c, d] = self.dx;
        [a, b, c, d, self.dm, self.dy0, self.da.re, self.da.im]
    }
}

fn checked_ln_sigma(lattice: &Lattice, z: Complex64) -> Result<Complex64> {
    if lattice.lattice_distance(z) < COLLISION_RADIUS {
        return Err(Error::PoleProximity {
            z,
            radius: COLLISION_RADIUS,
        });
    }
    lattice.ln_sigma(z)
}

/// `γ = βη₁/π`, the linear exponent of the map derivative.
pub fn linear_exponent(beta: f64, lattice: &Lattice) -> Complex64 {
    lattice.eta1() * (beta / PI)
}

/// `γ_k = Ȧ_k / f″(z_k)` for `k = 1..=4`, with the scale constant
/// eliminated through the residue `e^a`.
pub fn gamma_k(s: &AccessoryState, drive: &Drive, k: usize) -> Result<Complex64> {
    if !(1..=4).contains(&k) {
        return Err(Error::OutOfRange(format!("endpoint index {k}")));
    }
    let lattice = s.lattice()?;
    gamma_with(s, drive, &lattice, k - 1)
}

fn gamma_with(s: &AccessoryState, drive: &Drive, lattice: &Lattice, k: usize) -> Result<Complex64> {
    let v = drive.velocities[k];
    if v == Complex64::new(0.0, 0.0) {
        return Ok(v);
    }
    let z = s.z();
    let z0 = s.z0();
    let gam = linear_exponent(drive.beta, lattice);
    let mut ln = -2.0 * checked_ln_sigma(lattice, 2.0 * z0)? - (s.a + gam * (z[k] - z0))
        + 2.0 * checked_ln_sigma(lattice, z[k] - z0)?
        + 2.0 * checked_ln_sigma(lattice, z[k] + z0)?;
    for (j, &zj) in z.iter().enumerate() {
        ln += checked_ln_sigma(lattice, z0 - zj)?;
        if j != k {
            ln -= checked_ln_sigma(lattice, z[k] - zj)?;
        }
    }
    Ok(-v * ln.exp())
}

/// All four `γ_k` at once.
pub fn gammas(s: &AccessoryState, drive: &Drive) -> Result<[Complex64; 4]> {
    let lattice = s.lattice()?;
    let mut g = [Complex64::new(0.0, 0.0); 4];
    for (k, gk) in g.iter_mut().enumerate() {
        *gk = gamma_with(s, drive, &lattice, k)?;
    }
    Ok(g)
}

fn eval_checked(lattice: &Lattice, z: Complex64) -> Result<WeierstrassValues> {
    if lattice.lattice_distance(z) < COLLISION_RADIUS {
        return Err(Error::PoleProximity {
            z,
            radius: COLLISION_RADIUS,
        });
    }
    lattice.eval(z)
}

/// Right-hand side of the accessory-parameter system for a configuration.
pub fn rhs(s: &AccessoryState, ncfg: &NormalizedConfig) -> Result<StateDerivative> {
    rhs_drive(s, &Drive::from_config(ncfg))
}

pub fn rhs_drive(s: &AccessoryState, drive: &Drive) -> Result<StateDerivative> {
    if s.m.is_nan() || s.m <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "module m = {} is not positive",
            s.m
        )));
    }
    let lattice = s.lattice()?;
    let mut g = [Complex64::new(0.0, 0.0); 4];
    for (k, gk) in g.iter_mut().enumerate() {
        *gk = gamma_with(s, drive, &lattice, k)?;
    }
    if g.iter().all(|gk| gk.norm() == 0.0) {
        return Ok(StateDerivative::default());
    }
    let z = s.z();
    let z0 = s.z0();
    let eta1 = lattice.eta1();
    let gam = linear_exponent(drive.beta, &lattice);
    let g_sum: Complex64 = g.iter().sum();

    // ζ(z_l − z_j) for l ≠ j; antisymmetric in (l, j).
    let mut zeta_diff = [[Complex64::new(0.0, 0.0); 4]; 4];
    for l in 0..4 {
        for j in l + 1..4 {
            let v = eval_checked(&lattice, z[l] - z[j])?.zeta;
            zeta_diff[l][j] = v;
            zeta_diff[j][l] = -v;
        }
    }
    let mut pole_k = Vec::with_capacity(4);
    for &zk in &z {
        pole_k.push(eval_checked(&lattice, z0 - zk)?);
    }

    let mut dx = [0.0; 4];
    for l in 0..4 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in (0..4).filter(|&j| j != l) {
            if g[j].norm() != 0.0 {
                acc += g[j] * (zeta_diff[l][j] - pole_k[j].zeta - eta1 * (z[l] - z0));
            }
        }
        if g[l].norm() != 0.0 {
            let zeta_lo = eval_checked(&lattice, z[l] - z0)?.zeta;
            let zeta_lb = eval_checked(&lattice, z[l] + z0)?.zeta;
            let others: Complex64 = (0..4).filter(|&s| s != l).map(|s| zeta_diff[l][s]).sum();
            acc += g[l] * (others + gam - eta1 * (z[l] - z0) - zeta_lo - 2.0 * zeta_lb);
        }
        dx[l] = -acc.re;
    }

    let dm = PI * g_sum.re;
    let da = g
        .iter()
        .zip(&pole_k)
        .map(|(gj, v)| gj * v.wp)
        .sum::<Complex64>()
        + eta1 * g_sum;

    let dz = [
        Complex64::new(dx[0], 0.0),
        Complex64::new(dx[1], 0.0),
        Complex64::new(dx[2], dm),
        Complex64::new(dx[3], -dm),
    ];
    let twice = eval_checked(&lattice, 2.0 * z0)?;
    let wp_sum: Complex64 = pole_k.iter().map(|v| v.wp).sum();
    let denom = 4.0 * twice.wp - wp_sum;
    if denom.norm() < 1e-10 {
        return Err(Error::SingularPinch(denom.norm()));
    }
    let drive_term: Complex64 = -pole_k
        .iter()
        .zip(&dz)
        .map(|(v, d)| v.wp * d)
        .sum::<Complex64>();
    let half = Complex64::new(0.5, 0.0);
    let half_vals = lattice.eval(half)?;
    let d_period = 4.0 * lattice.dzeta_domega2_from(2.0 * z0, &twice)
        - (4.0 * drive.beta / PI) * lattice.dzeta_domega2_from(half, &half_vals)
        - 2.0
            * z.iter()
                .zip(&pole_k)
                .map(|(&zk, v)| lattice.dzeta_domega2_from(z0 - zk, v))
                .sum::<Complex64>();
    let dy0 = (drive_term / denom).im + (d_period / denom).re * dm;

    Ok(StateDerivative { dx, dm, dy0, da })
}

/// Drift of the two first integrals: `Σx_k = β/π` and the vanishing residue
/// of `f′` at `z₀`.
pub fn constraint_defects(s: &AccessoryState, beta: f64) -> Result<ConstraintDefects> {
    let lattice = s.lattice()?;
    let z0 = s.z0();
    let mut residue =
        linear_exponent(beta, &lattice) - 2.0 * eval_checked(&lattice, 2.0 * z0)?.zeta;
    for zk in s.z() {
        residue += eval_checked(&lattice, z0 - zk)?.zeta;
    }
    Ok(ConstraintDefects {
        sum_defect: (s.x.iter().sum::<f64>() - beta / PI).abs(),
        residue_defect: residue.norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepStat {
    pub t: f64,
    pub dt: f64,
    pub error_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<AccessoryState>,
    pub step_stats: Vec<StepStat>,
    pub defect_log: Vec<ConstraintDefects>,
    pub rejected_steps: usize,
    /// Accepted steps whose defects exceeded the warning level.
    pub defect_warnings: usize,
}

impl Trajectory {
    pub fn last(&self) -> &AccessoryState {
        self.samples
            .last()
            .expect("trajectory holds the initial state")
    }

    pub fn max_defects(&self) -> ConstraintDefects {
        self.defect_log.iter().fold(
            ConstraintDefects {
                sum_defect: 0.0,
                residue_defect: 0.0,
            },
            |acc, d| ConstraintDefects {
                sum_defect: acc.sum_defect.max(d.sum_defect),
                residue_defect: acc.residue_defect.max(d.residue_defect),
            },
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(1e-13..=1e-6).contains(&v) {
                return Err(Error::OutOfRange(format!(
                    "{name} = {v:e} outside [1e-13, 1e-6]"
                )));
            }
        }
        Ok(())
    }
}

/// Integrates from `s0` over `t ∈ [s0.t, 1]` for a normalized configuration.
pub fn integrate(
    s0: &AccessoryState,
    ncfg: &NormalizedConfig,
    tol: Tolerances,
) -> Result<Trajectory> {
    integrate_drive(s0, &Drive::from_config(ncfg), 1.0, tol)
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Fifth- minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type Vec8 = [f64; 8];

fn eval_vec(y: &Vec8, t: f64, drive: &Drive) -> Result<Vec8> {
    Ok(rhs_drive(&AccessoryState::from_vec(y, t), drive)?.to_vec())
}

fn is_transient(e: &Error) -> bool {
    matches!(e, Error::PoleProximity { .. } | Error::OutOfRange(_))
}

/// Adaptive Dormand–Prince integration with constant endpoint velocities,
/// from `s0.t` to `t_end`.
pub fn integrate_drive(
    s0: &AccessoryState,
    drive: &Drive,
    t_end: f64,
    tol: Tolerances,
) -> Result<Trajectory> {
    tol.validate()?;
    let mut traj = Trajectory {
        samples: vec![*s0],
        step_stats: Vec::new(),
        defect_log: vec![constraint_defects(s0, drive.beta)?],
        rejected_steps: 0,
        defect_warnings: 0,
    };
    let span = t_end - s0.t;
    if span <= 0.0 {
        return Ok(traj);
    }

    let mut t = s0.t;
    let mut y = s0.to_vec();
    let mut k1 = eval_vec(&y, t, drive)?;
    if k1.iter().all(|&v| v == 0.0) {
        let mut s = *s0;
        s.t = t_end;
        traj.samples.push(s);
        traj.defect_log.push(traj.defect_log[0]);
        traj.step_stats.push(StepStat {
            t: t_end,
            dt: span,
            error_norm: 0.0,
        });
        return Ok(traj);
    }
    let mut h = (0.01 * span).min(span);

    for _ in 0..MAX_STEPS {
        if t >= t_end {
            break;
        }
        let last_step = t + h >= t_end;
        if last_step {
            h = t_end - t;
        }
        if h < MIN_STEP {
            return Err(Error::StepSizeUnderflow {
                t,
                dt: h,
                last_state: Box::new(AccessoryState::from_vec(&y, t)),
            });
        }

        match dp_step(&y, t, h, &k1, drive) {
            Ok((y_new, k7, err)) => {
                let norm = error_norm(&y, &y_new, &err, tol);
                if norm <= 1.0 {
                    let t_new = if last_step { t_end } else { t + h };
                    let state = AccessoryState::from_vec(&y_new, t_new);
                    let defects = constraint_defects(&state, drive.beta)?;
                    if defects.max() > DEFECT_ABORT {
                        return Err(Error::DefectBlowup {
                            t: t_new,
                            sum_defect: defects.sum_defect,
                            residue_defect: defects.residue_defect,
                        });
                    }
                    if defects.max() > DEFECT_WARN {
                        traj.defect_warnings += 1;
                    }
                    traj.samples.push(state);
                    traj.defect_log.push(defects);
                    traj.step_stats.push(StepStat {
                        t: t_new,
                        dt: h,
                        error_norm: norm,
                    });
                    t = t_new;
                    y = y_new;
                    k1 = k7;
                    let factor = if norm == 0.0 {
                        5.0
                    } else {
                        (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    h *= factor;
                } else {
                    traj.rejected_steps += 1;
                    h *= (0.9 * norm.powf(-0.2)).clamp(0.2, 1.0);
                }
            }
            Err(e) if is_transient(&e) => {
                traj.rejected_steps += 1;
                h *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    if t < t_end {
        return Err(Error::StepSizeUnderflow {
            t,
            dt: h,
            last_state: Box::new(AccessoryState::from_vec(&y, t)),
        });
    }
    Ok(traj)
}

fn dp_step(y: &Vec8, t: f64, h: f64, k1: &Vec8, drive: &Drive) -> Result<(Vec8, Vec8, Vec8)> {
    let mut k = [[0.0; 8]; 7];
    k[0] = *k1;
    for stage in 1..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(stage) {
            let a = A[stage][j];
            if a != 0.0 {
                for (yi, ki) in ys.iter_mut().zip(kj) {
                    *yi += h * a * ki;
                }
            }
        }
        k[stage] = eval_vec(&ys, t + C[stage] * h, drive)?;
    }
    let mut y_new = *y;
    let mut err = [0.0; 8];
    for (s, ks) in k.iter().enumerate() {
        for i in 0..8 {
            y_new[i] += h * B[s] * ks[i];
            err[i] += h * E[s] * ks[i];
        }
    }
    Ok((y_new, k[6], err))
}

fn error_norm(y: &Vec8, y_new: &Vec8, err: &Vec8, tol: Tolerances) -> f64 {
    let sum: f64 = (0..8)
        .map(|i| {
            let sc = tol.abs_tol + tol.rel_tol * y[i].abs().max(y_new[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (sum / 8.0).sqrt()
}
