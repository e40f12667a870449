//! Finite-difference condenser capacity, an independent cross-check of the
//! conformal-map solver.
//!
//! The plane is truncated to a box of half-size `half_width · diam` with a
//! homogeneous Neumann condition on its sides. Cells are uniform with side
//! `1/resolution` over the plates and grow geometrically towards the box,
//! giving a 5-point finite-volume Laplacian on a tensor grid. Cells whose
//! centre lies within half a cell of a plate carry that plate's potential;
//! the capacity is the discrete Dirichlet energy of the solution.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SlitConfig;

const GROWTH: f64 = 1.1;
const CG_TOL: f64 = 1e-10;
/// Uniform cells added around the plates' bounding box on each side.
const CORE_MARGIN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Box half-size in multiples of the configuration diameter.
    pub half_width: f64,
    /// Cells per unit length near the plates.
    pub resolution: usize,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.half_width.is_nan() || self.half_width < 4.0 {
            return Err(Error::OutOfRange(format!(
                "half_width = {} below 4 diameters",
                self.half_width
            )));
        }
        if self.resolution < 32 {
            return Err(Error::OutOfRange(format!(
                "resolution = {} below 32",
                self.resolution
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Plate {
    Segment(Complex64, Complex64),
    Circle { center: Complex64, radius: f64 },
}

impl Plate {
    fn distance(&self, p: Complex64) -> f64 {
        match *self {
            Plate::Segment(a, b) => {
                let d = b - a;
                let s = ((p - a) * d.conj()).re / d.norm_sqr();
                (p - (a + d * s.clamp(0.0, 1.0))).norm()
            }
            Plate::Circle { center, radius } => ((p - center).norm() - radius).abs(),
        }
    }

    fn bounds(&self) -> (Complex64, Complex64) {
        match *self {
            Plate::Segment(a, b) => (
                Complex64::new(a.re.min(b.re), a.im.min(b.im)),
                Complex64::new(a.re.max(b.re), a.im.max(b.im)),
            ),
            Plate::Circle { center, radius } => (
                center - Complex64::new(radius, radius),
                center + Complex64::new(radius, radius),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub capacity: f64,
    pub unknowns: usize,
    pub iterations: usize,
    pub residual: f64,
}

/// Capacity of the condenser formed by the two slits of `cfg`.
pub fn grid_capacity(cfg: &SlitConfig, gs: GridSpec) -> Result<f64> {
    Ok(grid_solve(cfg, gs)?.capacity)
}

pub fn grid_solve(cfg: &SlitConfig, gs: GridSpec) -> Result<GridSolution> {
    cfg.validate()?;
    condenser_capacity(
        Plate::Segment(cfg.a1, cfg.a2),
        Plate::Segment(cfg.a3, cfg.a4),
        cfg.diameter(),
        gs,
    )
}

/// Capacity of the annulus `q < |z| < 1` on the same grid machinery.
pub fn annulus_capacity(q: f64, gs: GridSpec) -> Result<GridSolution> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::OutOfRange(format!(
            "annulus ratio q = {q} outside (0, 1)"
        )));
    }
    let origin = Complex64::new(0.0, 0.0);
    condenser_capacity(
        Plate::Circle {
            center: origin,
            radius: q,
        },
        Plate::Circle {
            center: origin,
            radius: 1.0,
        },
        2.0,
        gs,
    )
}

/// Cell faces along one axis: uniform over `[lo, hi]`, then growing
/// geometrically out to `[box_lo, box_hi]`.
fn axis_faces(lo: f64, hi: f64, h: f64, box_lo: f64, box_hi: f64) -> Vec<f64> {
    let n = ((hi - lo) / h).ceil() as usize + 2 * CORE_MARGIN;
    let start = 0.5 * (lo + hi) - 0.5 * n as f64 * h;
    let core: Vec<f64> = (0..=n).map(|i| start + i as f64 * h).collect();
    let grow = |edge: f64, limit: f64, dir: f64| {
        let mut faces = Vec::new();
        let mut w = h;
        let mut x = edge;
        while dir * (limit - x) > 0.0 {
            w *= GROWTH;
            x += dir * w;
            if dir * (limit - x) < 0.5 * w {
                x = limit;
            }
            faces.push(x);
        }
        faces
    };
    let mut faces: Vec<f64> = grow(core[0], box_lo, -1.0).into_iter().rev().collect();
    faces.extend_from_slice(&core);
    faces.extend(grow(core[n], box_hi, 1.0));
    faces
}

struct Grid {
    nx: usize,
    ny: usize,
    /// Coupling across the face between `p` and its east / north neighbour.
    east: Vec<f64>,
    north: Vec<f64>,
    /// `None` for unknowns, `Some(v)` for cells held at potential `v`.
    fixed: Vec<Option<f64>>,
}

impl Grid {
    fn build(low: Plate, high: Plate, diam: f64, gs: GridSpec) -> Result<Self> {
        let h = 1.0 / gs.resolution as f64;
        let (lo_a, hi_a) = low.bounds();
        let (lo_b, hi_b) = high.bounds();
        let lo = Complex64::new(lo_a.re.min(lo_b.re), lo_a.im.min(lo_b.im));
        let hi = Complex64::new(hi_a.re.max(hi_b.re), hi_a.im.max(hi_b.im));
        let center = 0.5 * (lo + hi);
        let half = gs.half_width * diam;
        let fx = axis_faces(lo.re, hi.re, h, center.re - half, center.re + half);
        let fy = axis_faces(lo.im, hi.im, h, center.im - half, center.im + half);
        let (nx, ny) = (fx.len() - 1, fy.len() - 1);
        let cx: Vec<f64> = fx.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let cy: Vec<f64> = fy.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let dx: Vec<f64> = fx.windows(2).map(|w| w[1] - w[0]).collect();
        let dy: Vec<f64> = fy.windows(2).map(|w| w[1] - w[0]).collect();

        let mut fixed = vec![None; nx * ny];
        for (plate, value) in [(low, 0.0), (high, 1.0)] {
            let (plo, phi) = plate.bounds();
            let i0 = fx.partition_point(|&x| x < plo.re - h).saturating_sub(1);
            let i1 = fx.partition_point(|&x| x <= phi.re + h).min(nx);
            let j0 = fy.partition_point(|&y| y < plo.im - h).saturating_sub(1);
            let j1 = fy.partition_point(|&y| y <= phi.im + h).min(ny);
            for j in j0..j1 {
                for i in i0..i1 {
                    let p = Complex64::new(cx[i], cy[j]);
                    if plate.distance(p) <= 0.5 * dx[i].max(dy[j]) {
                        let cell = &mut fixed[j * nx + i];
                        if matches!(*cell, Some(v) if v != value) {
                            return Err(Error::OutOfRange(
                                "plates overlap at this resolution".into(),
                            ));
                        }
                        *cell = Some(value);
                    }
                }
            }
        }

        let mut east = vec![0.0; nx * ny];
        let mut north = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let p = j * nx + i;
                if i + 1 < nx {
                    east[p] = dy[j] / (cx[i + 1] - cx[i]);
                }
                if j + 1 < ny {
                    north[p] = dx[i] / (cy[j + 1] - cy[j]);
                }
            }
        }
        Ok(Self {
            nx,
            ny,
            east,
            north,
            fixed,
        })
    }

    /// Neighbours of `p` with the coupling weight.
    fn neighbours(&self, p: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (i, j) = (p % self.nx, p / self.nx);
        let w = (i > 0).then(|| (p - 1, self.east[p - 1]));
        let e = (i + 1 < self.nx).then(|| (p + 1, self.east[p]));
        let s = (j > 0).then(|| (p - self.nx, self.north[p - self.nx]));
        let n = (j + 1 < self.ny).then(|| (p + self.nx, self.north[p]));
        [w, e, s, n].into_iter().flatten()
    }

    fn energy(&self, u: &[f64]) -> f64 {
        let mut e = 0.0;
        for p in 0..self.nx * self.ny {
            if p % self.nx + 1 < self.nx {
                e += self.east[p] * (u[p + 1] - u[p]).powi(2);
            }
            if p + self.nx < self.nx * self.ny {
                e += self.north[p] * (u[p + self.nx] - u[p]).powi(2);
            }
        }
        e
    }
}

/// Operator restricted to free cells, stored as the diagonal plus the
/// free-free east/north couplings.
struct Operator<'a> {
    grid: &'a Grid,
    diag: Vec<f64>,
    east: Vec<f64>,
    north: Vec<f64>,
}

impl<'a> Operator<'a> {
    fn new(grid: &'a Grid) -> (Self, Vec<f64>) {
        let n = grid.nx * grid.ny;
        let mut diag = vec![1.0; n];
        let mut rhs = vec![0.0; n];
        let mut east = vec![0.0; n];
        let mut north = vec![0.0; n];
        for p in 0..n {
            if grid.fixed[p].is_some() {
                rhs[p] = 0.0;
                continue;
            }
            diag[p] = 0.0;
            for (q, w) in grid.neighbours(p) {
                diag[p] += w;
                if let Some(v) = grid.fixed[q] {
                    rhs[p] += w * v;
                }
            }
            if p % grid.nx + 1 < grid.nx && grid.fixed[p + 1].is_none() {
                east[p] = grid.east[p];
            }
            if p + grid.nx < n && grid.fixed[p + grid.nx].is_none() {
                north[p] = grid.north[p];
            }
        }
        (
            Self {
                grid,
                diag,
                east,
                north,
            },
            rhs,
        )
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nx = self.grid.nx;
        let n = x.len();
        for p in 0..n {
            let mut v = self.diag[p] * x[p];
            if self.east[p] != 0.0 {
                v -= self.east[p] * x[p + 1];
            }
            if p >= 1 && self.east[p - 1] != 0.0 {
                v -= self.east[p - 1] * x[p - 1];
            }
            if self.north[p] != 0.0 {
                v -= self.north[p] * x[p + nx];
            }
            if p >= nx && self.north[p - nx] != 0.0 {
                v -= self.north[p - nx] * x[p - nx];
            }
            y[p] = v;
        }
    }

    /// Modified incomplete Cholesky pivots. A pivot that collapses falls
    /// back to the unmodified incomplete factorization at that cell.
    fn mic_pivots(&self) -> Vec<f64> {
        let nx = self.grid.nx;
        let mut d = self.diag.clone();
        for p in 0..d.len() {
            let (mut plain, mut fill) = (0.0, 0.0);
            if p >= 1 && self.east[p - 1] != 0.0 {
                let b = self.east[p - 1];
                plain += b * b / d[p - 1];
                fill += b * self.north[p - 1] / d[p - 1];
            }
            if p >= nx && self.north[p - nx] != 0.0 {
                let c = self.north[p - nx];
                plain += c * c / d[p - nx];
                fill += c * self.east[p - nx] / d[p - nx];
            }
            let modified = d[p] - plain - fill;
            d[p] = if modified > 1e-3 * d[p] {
                modified
            } else {
                d[p] - plain
            };
        }
        d
    }

    fn precondition(&self, d: &[f64], r: &[f64], z: &mut [f64]) {
        let nx = self.grid.nx;
        let n = r.len();
        for p in 0..n {
            let mut v = r[p];
            if p >= 1 {
                v += self.east[p - 1] * z[p - 1];
            }
            if p >= nx {
                v += self.north[p - nx] * z[p - nx];
            }
            z[p] = v / d[p];
        }
        for p in (0..n).rev() {
            let mut v = 0.0;
            if p + 1 < n {
                v += self.east[p] * z[p + 1];
            }
            if p + nx < n {
                v += self.north[p] * z[p + nx];
            }
            z[p] += v / d[p];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn condenser_capacity(low: Plate, high: Plate, diam: f64, gs: GridSpec) -> Result<GridSolution> {
    gs.validate()?;
    let grid = Grid::build(low, high, diam, gs)?;
    let (op, b) = Operator::new(&grid);
    let n = b.len();
    let pivots = op.mic_pivots();

    let mut x = vec![0.0; n];
    for (p, v) in grid.fixed.iter().enumerate() {
        if let Some(v) = v {
            x[p] = *v;
        }
    }
    // Fixed cells have unit rows; start their residual at zero.
    let mut r: Vec<f64> = b.clone();
    for (p, v) in grid.fixed.iter().enumerate() {
        if v.is_some() {
            r[p] = 0.0;
        }
    }
    let b_norm = dot(&r, &r).sqrt().max(f64::MIN_POSITIVE);
    let mut z = vec![0.0; n];
    op.precondition(&pivots, &r, &mut z);
    let mut dir = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let max_iter = 20 * (grid.nx + grid.ny) + 1000;
    let mut residual = 1.0;
    let mut iterations = 0;
    // Fixed cells are decoupled unit rows with zero residual, so r, z and
    // dir vanish there and the fixed part of x is never touched.
    while iterations < max_iter {
        residual = dot(&r, &r).sqrt() / b_norm;
        if residual <= CG_TOL {
            break;
        }
        op.apply(&dir, &mut q);
        let alpha = rz / dot(&dir, &q);
        for p in 0..n {
            x[p] += alpha * dir[p];
            r[p] -= alpha * q[p];
        }
        op.precondition(&pivots, &r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for p in 0..n {
            dir[p] = z[p] + beta * dir[p];
        }
        iterations += 1;
    }
    if residual > CG_TOL {
        return Err(Error::NonConvergence {
            residual,
            iterations,
        });
    }
    Ok(GridSolution {
        capacity: grid.energy(&x),
        unknowns: grid.fixed.iter().filter(|v| v.is_none()).count(),
        iterations,
        residual,
    })
}
