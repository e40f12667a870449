//! The conformal map itself, rebuilt from a solved accessory state:
//!
//! ```text
//! f′(z) = c e^{γz} Πₖ σ(z − z_k) / (σ²(z − z₀) σ²(z + z₀))
//! ```
//!
//! on the lattice `(1, 2i·m)`. The strip `−m < Im z < 0` with its vertical
//! sides identified is the annulus; `Im z = 0` is sent onto the moving slit
//! and `Im z = −m` onto the fixed one. The map is integrated by adaptive
//! quadrature, with the additive constant pinned by `f(x₃ − i·m) = A₃`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::Lattice;
use crate::error::{Error, Result};
use crate::evolution::{linear_exponent, AccessoryState};
use crate::geometry::SlitConfig;
use crate::quadrature::integrate_path;

/// Paths keep at least this distance from the poles of `f′`.
pub const POLE_CLEARANCE: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct MapData {
    pub state: AccessoryState,
    pub beta: f64,
    /// Multiplier `c` of `f′`.
    pub c: Complex64,
    /// `f` at the base point `x₃ − i·m`.
    pub c1: Complex64,
    pub gamma: Complex64,
    lattice: Lattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub max_line_deviation: f64,
    pub endpoint_errors: [f64; 4],
}

/// Scale constant `c` from the log-residue `a`.
pub fn recover_scale(s: &AccessoryState, beta: f64) -> Result<Complex64> {
    let lattice = s.lattice()?;
    let z0 = s.z0();
    let gam = linear_exponent(beta, &lattice);
    let mut ln = s.a - gam * z0 + 2.0 * lattice.ln_sigma(2.0 * z0)?;
    for zk in s.z() {
        ln -= lattice.ln_sigma(z0 - zk)?;
    }
    Ok(-ln.exp())
}

impl MapData {
    /// Map for state `s`, pinned so that `f(x₃ − i·m) = a3`.
    pub fn new(s: &AccessoryState, beta: f64, a3: Complex64) -> Result<Self> {
        let lattice = s.lattice()?;
        Ok(Self {
            state: *s,
            beta,
            c: recover_scale(s, beta)?,
            c1: a3,
            gamma: linear_exponent(beta, &lattice),
            lattice,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    /// Preimage of `A₃` on the lower boundary line.
    pub fn base(&self) -> Complex64 {
        Complex64::new(self.state.x[2], -self.state.m)
    }

    /// Preimages of the four endpoints on the strip boundary.
    pub fn endpoint_preimages(&self) -> [Complex64; 4] {
        let s = &self.state;
        [
            Complex64::new(s.x[0], 0.0),
            Complex64::new(s.x[1], 0.0),
            Complex64::new(s.x[2], -s.m),
            Complex64::new(s.x[3], -s.m),
        ]
    }

    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        map_derivative(z, self)
    }

    /// Distance from `z` to the nearest pole of `f′`.
    pub fn pole_distance(&self, z: Complex64) -> f64 {
        let z0 = self.state.z0();
        self.lattice
            .lattice_distance(z - z0)
            .min(self.lattice.lattice_distance(z + z0))
    }

    fn segment_clear(&self, a: Complex64, b: Complex64) -> bool {
        let n = (((b - a).norm() / (0.25 * POLE_CLEARANCE)).ceil() as usize).clamp(8, 100_000);
        (0..=n).all(|i| self.pole_distance(a + (b - a) * (i as f64 / n as f64)) >= POLE_CLEARANCE)
    }

    /// Polyline from `from` to `to` that stays clear of the poles.
    pub fn path(&self, from: Complex64, to: Complex64) -> Result<Vec<Complex64>> {
        if self.pole_distance(from) < POLE_CLEARANCE || self.pole_distance(to) < POLE_CLEARANCE {
            return Err(Error::PathBlocked { from, to });
        }
        if self.segment_clear(from, to) {
            return Ok(vec![from, to]);
        }
        let corner_a = Complex64::new(to.re, from.im);
        let corner_b = Complex64::new(from.re, to.im);
        for corner in [corner_a, corner_b] {
            if self.pole_distance(corner) >= POLE_CLEARANCE
                && self.segment_clear(from, corner)
                && self.segment_clear(corner, to)
            {
                return Ok(vec![from, corner, to]);
            }
        }
        // Detour sideways around the obstruction.
        let span = (to - from).norm().max(1e-3);
        let normal = Complex64::new(0.0, 1.0) * (to - from) / span;
        for shift in [0.05, -0.05, 0.15, -0.15, 0.3, -0.3] {
            let p1 = from + (to - from) * 0.25 + normal * shift;
            let p2 = from + (to - from) * 0.75 + normal * shift;
            let pts = [from, p1, p2, to];
            if pts[1..3]
                .iter()
                .all(|&p| self.pole_distance(p) >= POLE_CLEARANCE)
                && pts.windows(2).all(|w| self.segment_clear(w[0], w[1]))
            {
                return Ok(pts.to_vec());
            }
        }
        Err(Error::PathBlocked { from, to })
    }

    /// `f(z)` by integration from the base point.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        map_eval(z, self, self.base(), self.c1)
    }

    fn quad_tol(&self) -> f64 {
        1e-10 * self.c.norm()
    }
}

/// `f′(z)`; zero at the `z_k`, double poles at `±z₀` modulo the lattice.
pub fn map_derivative(z: Complex64, md: &MapData) -> Result<Complex64> {
    let l = &md.lattice;
    let z0 = md.state.z0();
    let mut ln = md.gamma * z - 2.0 * l.ln_sigma(z - z0)? - 2.0 * l.ln_sigma(z + z0)?;
    let mut product = Complex64::new(1.0, 0.0);
    for zk in md.state.z() {
        let w = z - zk;
        // σ vanishes at lattice points, where ln σ is unavailable.
        if l.lattice_distance(w) < 1e-8 {
            product *= l.sigma(w);
        } else {
            ln += l.ln_sigma(w)?;
        }
    }
    Ok(md.c * ln.exp() * product)
}

/// `f(z) = base_value + ∫_base^z f′`, along a path avoiding the poles.
pub fn map_eval(
    z: Complex64,
    md: &MapData,
    base: Complex64,
    base_value: Complex64,
) -> Result<Complex64> {
    let path = md.path(base, z)?;
    let f = |w: Complex64| map_derivative(w, md);
    Ok(base_value + integrate_path(&f, &path, md.quad_tol())?)
}

/// Samples `f` on both boundary lines of the strip and measures how far the
/// images stray from the slit carriers of `target`, plus the endpoint
/// mismatches `|f(z_k) − A_k|`. `target` must be in the canonical frame
/// that `md` was pinned in.
pub fn boundary_trace(md: &MapData, target: &SlitConfig, n: usize) -> Result<BoundaryTrace> {
    if n < 64 {
        return Err(Error::OutOfRange(format!(
            "trace needs at least 64 samples, got {n}"
        )));
    }
    let pre = md.endpoint_preimages();
    let targets = target.endpoints();
    let f = |w: Complex64| map_derivative(w, md);
    let tol = md.quad_tol() / n as f64;

    let mut values = [Complex64::new(0.0, 0.0); 4];
    values[2] = md.c1;
    values[3] = md.c1 + integrate_path(&f, &[pre[2], pre[3]], tol)?;
    values[0] = map_eval(pre[0], md, pre[2], md.c1)?;
    values[1] = values[0] + integrate_path(&f, &[pre[0], pre[1]], tol)?;

    let mut endpoint_errors = [0.0; 4];
    for k in 0..4 {
        endpoint_errors[k] = (values[k] - targets[k]).norm();
    }

    let deviation = |w: Complex64, p: Complex64, q: Complex64| {
        let d = (q - p) / (q - p).norm();
        ((w - p) * d.conj()).im.abs()
    };
    let mut max_dev: f64 = 0.0;
    for (start, value, p, q) in [
        (pre[0], values[0], targets[0], targets[1]),
        (pre[2], values[2], targets[2], targets[3]),
    ] {
        let mut w = start;
        let mut fw = value;
        for i in 1..=n {
            let next = start + Complex64::new(i as f64 / n as f64, 0.0);
            fw += integrate_path(&f, &[w, next], tol)?;
            w = next;
            max_dev = max_dev.max(deviation(fw, p, q));
        }
    }
    Ok(BoundaryTrace {
        max_line_deviation: max_dev,
        endpoint_errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::integrate;
    use crate::evolution::Tolerances;
    use crate::geometry::normalize;
    use crate::symmetric::initial_state;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn solved(p: [Complex64; 4]) -> (MapData, SlitConfig) {
        let n = normalize(&SlitConfig::from_endpoints(p)).unwrap();
        let s0 = initial_state(&n).unwrap().state();
        let s = *integrate(&s0, &n, Tolerances::default()).unwrap().last();
        (
            MapData::new(&s, n.beta, n.canonical.a3).unwrap(),
            n.canonical,
        )
    }

    #[test]
    fn scale_round_trip() {
        let (md, _) = solved([c(1., 0.), c(2., 0.), c(0., -1.), c(0., -2.)]);
        let s = &md.state;
        let l = md.lattice();
        let z0 = s.z0();
        let mut ln = md.gamma * z0 - 2.0 * l.ln_sigma(2.0 * z0).unwrap();
        for zk in s.z() {
            ln += l.ln_sigma(z0 - zk).unwrap();
        }
        let residue_modulus = md.c.norm() * ln.exp().norm();
        assert!((residue_modulus - s.a.re.exp()).abs() < 1e-12 * residue_modulus);
    }

    #[test]
    fn derivative_vanishes_at_critical_points() {
        let (md, _) = solved([c(0., 1.), c(3., 2.), c(3., -2.), c(4., -3.)]);
        for zk in md.endpoint_preimages() {
            assert!(map_derivative(zk, &md).unwrap().norm() < 1e-10 * md.c.norm());
        }
    }

    #[test]
    fn derivative_periodicity() {
        let (md, _) = solved([c(0., 1.), c(3., 2.), c(3., -2.), c(4., -3.)]);
        let z = c(0.37, -0.1);
        let d = map_derivative(z, &md).unwrap();
        let shifted = map_derivative(z + 1.0, &md).unwrap();
        assert!((shifted / d - 1.0).norm() < 1e-10);
        let up = map_derivative(z + c(0.0, 2.0 * md.state.m), &md).unwrap();
        let expected = Complex64::from_polar(1.0, 2.0 * md.beta);
        assert!((up / d - expected).norm() < 1e-8);
    }

    #[test]
    fn endpoints_and_carriers() {
        let (md, target) = solved([c(0., 1.), c(2., 1.), c(-2., -1.), c(-1., -1.)]);
        let tr = boundary_trace(&md, &target, 64).unwrap();
        let diam = target.diameter();
        assert!(
            tr.endpoint_errors.iter().all(|&e| e < 1e-5 * diam),
            "{tr:?}"
        );
        assert!(tr.max_line_deviation < 1e-6 * diam, "{tr:?}");
        assert!(boundary_trace(&md, &target, 10).is_err());
    }

    #[test]
    fn residue_at_pole_tracks_identity_defect() {
        let p = [c(0., 1.), c(3., 2.), c(3., -2.), c(4., -3.)];
        let n = normalize(&SlitConfig::from_endpoints(p)).unwrap();
        let s0 = initial_state(&n).unwrap().state();
        let tight = Tolerances {
            rel_tol: 1e-12,
            abs_tol: 1e-13,
        };
        let s = *integrate(&s0, &n, tight).unwrap().last();
        let md = MapData::new(&s, n.beta, n.canonical.a3).unwrap();
        let z0 = s.z0();
        let r = 0.01;
        let sq = [c(r, -r), c(r, r), c(-r, r), c(-r, -r), c(r, -r)].map(|p| z0 + p);
        let f = |w: Complex64| map_derivative(w, &md);
        let loop_integral = integrate_path(&f, &sq, 1e-13 * md.c.norm()).unwrap();
        assert!(
            loop_integral.norm() < 1e-10 * md.c.norm(),
            "{loop_integral}"
        );

        // The residue of f′ at z₀ is −d₋₁ times the residue-identity defect.
        let defect = crate::evolution::constraint_defects(&s, n.beta)
            .unwrap()
            .residue_defect;
        let predicted = 2.0 * std::f64::consts::PI * s.a.re.exp() * defect;
        assert!((loop_integral.norm() - predicted).abs() < 1e-12 + 1e-3 * predicted);
    }
}
