//! Slit configurations and their reduction to the canonical frame used by
//! the homotopy.
//!
//! In the canonical frame of a non-parallel pair the carrier lines meet at the
//! origin, `A₃A₄` lies on the ray `e^{−iβ/2}·R₊` and `A₁A₂` on the line through
//! `e^{iβ/2}`, with `0 < β < π`. The homotopy starts from the mirror image of
//! `A₃A₄` and slides `A₁`, `A₂` along their carrier with constant velocity.
//!
//! For parallel pairs both carriers are horizontal, `A₁A₂` above `A₃A₄`, and
//! the start configuration is `A₃A₄` translated straight up.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum slit length and minimum slit separation (relative to the longer
/// slit).
pub const MIN_FEATURE: f64 = 1e-9;
/// Carriers within this relative cross product are parallel.
const PARALLEL_TOL: f64 = 1e-12;
/// Carriers closer to parallel than this (but not parallel) are refused.
const NEAR_PARALLEL_ANGLE: f64 = 1e-6;

/// Two slits `A₁A₂` and `A₃A₄` in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlitConfig {
    pub a1: Complex64,
    pub a2: Complex64,
    pub a3: Complex64,
    pub a4: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    Generic,
    Parallel,
}

/// `p ↦ rotation · (reflect ? p̄ : p) + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidMotion {
    pub reflect: bool,
    pub rotation: Complex64,
    pub translation: Complex64,
}

impl RigidMotion {
    pub fn identity() -> Self {
        Self {
            reflect: false,
            rotation: Complex64::new(1.0, 0.0),
            translation: Complex64::new(0.0, 0.0),
        }
    }

    pub fn apply(&self, p: Complex64) -> Complex64 {
        let p = if self.reflect { p.conj() } else { p };
        self.rotation * p + self.translation
    }

    pub fn invert(&self, w: Complex64) -> Complex64 {
        let p = (w - self.translation) / self.rotation;
        if self.reflect {
            p.conj()
        } else {
            p
        }
    }
}

/// A configuration brought into the canonical frame, with the endpoint
/// velocities that carry the symmetric start onto it at `t = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedConfig {
    pub case_tag: CaseTag,
    /// Intersection of the carrier lines in input coordinates (generic only).
    pub a5: Option<Complex64>,
    pub beta: f64,
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub v1: Complex64,
    pub v2: Complex64,
    /// Endpoints after renumbering, in the canonical frame.
    pub canonical: SlitConfig,
    /// Input coordinates to canonical coordinates.
    pub motion: RigidMotion,
    /// `labels[k]` is the input index (0-based) of canonical endpoint `k`.
    pub labels: [usize; 4],
}

impl SlitConfig {
    pub fn new(a1: Complex64, a2: Complex64, a3: Complex64, a4: Complex64) -> Result<Self> {
        let cfg = Self { a1, a2, a3, a4 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn endpoints(&self) -> [Complex64; 4] {
        [self.a1, self.a2, self.a3, self.a4]
    }

    pub fn from_endpoints(p: [Complex64; 4]) -> Self {
        Self {
            a1: p[0],
            a2: p[1],
            a3: p[2],
            a4: p[3],
        }
    }

    /// Largest distance between two endpoints.
    pub fn diameter(&self) -> f64 {
        let p = self.endpoints();
        let mut d: f64 = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                d = d.max((p[i] - p[j]).norm());
            }
        }
        d
    }

    pub fn map(&self, motion: &RigidMotion) -> Self {
        Self::from_endpoints(self.endpoints().map(|p| motion.apply(p)))
    }

    /// Lengths, finiteness and disjointness.
    pub fn validate(&self) -> Result<()> {
        if self
            .endpoints()
            .iter()
            .any(|p| !p.re.is_finite() || !p.im.is_finite())
        {
            return Err(Error::DegenerateGeometry("non-finite endpoint".into()));
        }
        let len12 = (self.a2 - self.a1).norm();
        let len34 = (self.a4 - self.a3).norm();
        let scale = len12.max(len34);
        if len12 < MIN_FEATURE * scale.max(1.0) || len34 < MIN_FEATURE * scale.max(1.0) {
            return Err(Error::DegenerateGeometry("slit of zero length".into()));
        }
        let gap = segment_distance(self.a1, self.a2, self.a3, self.a4);
        if gap < MIN_FEATURE * scale {
            return Err(Error::DegenerateGeometry(format!(
                "slits touch or intersect (distance {gap:e})"
            )));
        }
        Ok(())
    }
}

fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let s = ((p - a) * d.conj()).re / d.norm_sqr();
    (p - (a + d * s.clamp(0.0, 1.0))).norm()
}

fn cross(u: Complex64, v: Complex64) -> f64 {
    (u.conj() * v).im
}

/// Euclidean distance between segments `ab` and `cd` (zero if they cross).
pub fn segment_distance(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> f64 {
    let side = |p: Complex64, q: Complex64, r: Complex64| cross(q - p, r - p);
    let (d1, d2) = (side(c, d, a), side(c, d, b));
    let (d3, d4) = (side(a, b, c), side(a, b, d));
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Parallel or generic; collinear, near-parallel and intersecting pairs are
/// rejected.
pub fn classify(cfg: &SlitConfig) -> Result<CaseTag> {
    cfg.validate()?;
    let u = cfg.a2 - cfg.a1;
    let v = cfg.a4 - cfg.a3;
    let sine = cross(v, u) / (u.norm() * v.norm());
    if sine.abs() < PARALLEL_TOL {
        let offset = cross(v, cfg.a1 - cfg.a3).abs() / v.norm();
        if offset < MIN_FEATURE * u.norm().max(v.norm()) {
            return Err(Error::DegenerateGeometry(
                "slits share a carrier line".into(),
            ));
        }
        return Ok(CaseTag::Parallel);
    }
    if sine.abs() < NEAR_PARALLEL_ANGLE {
        return Err(Error::DegenerateGeometry(format!(
            "carriers nearly parallel (sin = {sine:e})"
        )));
    }
    Ok(CaseTag::Generic)
}

pub fn normalize(cfg: &SlitConfig) -> Result<NormalizedConfig> {
    match classify(cfg)? {
        CaseTag::Generic => normalize_generic(cfg),
        CaseTag::Parallel => normalize_parallel(cfg),
    }
}

fn on_segment(p: Complex64, a: Complex64, b: Complex64, tol: f64) -> bool {
    point_segment_distance(p, a, b) <= tol
}

/// Intersection of the lines through `a1a2` and `a3a4`.
fn line_intersection(
    a1: Complex64,
    a2: Complex64,
    a3: Complex64,
    a4: Complex64,
) -> Result<Complex64> {
    let den = ((a1 - a2) * (a3 - a4).conj()).im;
    let scale = (a1 - a2).norm() * (a3 - a4).norm();
    if den.abs() < 1e-14 * scale {
        return Err(Error::DegenerateGeometry(
            "carrier lines do not intersect".into(),
        ));
    }
    Ok(a2 + (a1 - a2) * ((a4 - a2) * (a3 - a4).conj()).im / den)
}

pub fn normalize_generic(cfg: &SlitConfig) -> Result<NormalizedConfig> {
    if classify(cfg)? != CaseTag::Generic {
        return Err(Error::DegenerateGeometry("carriers are parallel".into()));
    }
    let mut p = cfg.endpoints();
    let mut labels = [0usize, 1, 2, 3];
    let a5 = line_intersection(p[0], p[1], p[2], p[3])?;
    let tol = MIN_FEATURE * cfg.diameter();

    if on_segment(a5, p[2], p[3], tol) {
        p.swap(0, 2);
        p.swap(1, 3);
        labels.swap(0, 2);
        labels.swap(1, 3);
    }
    if (p[2] - a5).norm() > (p[3] - a5).norm() {
        p.swap(2, 3);
        labels.swap(2, 3);
    }
    if (p[0] - a5).norm() > (p[1] - a5).norm() {
        p.swap(0, 1);
        labels.swap(0, 1);
    }

    let mut beta = ((p[1] - p[0]) / (p[3] - p[2])).arg();
    let reflect = beta < 0.0;
    if reflect {
        beta = -beta;
    }
    let half = Complex64::from_polar(1.0, 0.5 * beta);
    let mirror = |z: Complex64| if reflect { z.conj() } else { z };
    let dir4 = mirror(p[3] - a5) / (p[3] - a5).norm();
    let rotation = half.conj() / dir4;
    let motion = RigidMotion {
        reflect,
        rotation,
        translation: -rotation * mirror(a5),
    };
    let canonical = SlitConfig::from_endpoints(p.map(|q| motion.apply(q)));

    let raw1 = canonical.a1;
    let l1 = if raw1.norm() < tol {
        0.0
    } else {
        (raw1 * half.conj()).re.signum() * raw1.norm()
    };
    let l2 = canonical.a2.norm();
    let l3 = canonical.a3.norm();
    let l4 = canonical.a4.norm();
    if l3 < tol {
        return Err(Error::DegenerateGeometry(
            "fixed slit ends at the carrier intersection".into(),
        ));
    }
    Ok(NormalizedConfig {
        case_tag: CaseTag::Generic,
        a5: Some(a5),
        beta,
        l1,
        l2,
        l3,
        l4,
        v1: half * (l1 - l3),
        v2: half * (l2 - l4),
        canonical,
        motion,
        labels,
    })
}

pub fn normalize_parallel(cfg: &SlitConfig) -> Result<NormalizedConfig> {
    if classify(cfg)? != CaseTag::Parallel {
        return Err(Error::DegenerateGeometry(
            "carriers are not parallel".into(),
        ));
    }
    let mut p = cfg.endpoints();
    let mut labels = [0usize, 1, 2, 3];
    let dir = (p[1] - p[0]) / (p[1] - p[0]).norm();
    let mut rotation = dir.conj();
    if (rotation * (p[0] - p[2])).im < 0.0 {
        rotation = -rotation;
    }
    let motion = RigidMotion {
        reflect: false,
        rotation,
        translation: Complex64::new(0.0, 0.0),
    };
    let mut q = p.map(|z| motion.apply(z));
    if q[0].re > q[1].re {
        q.swap(0, 1);
        p.swap(0, 1);
        labels.swap(0, 1);
    }
    if q[2].re > q[3].re {
        q.swap(2, 3);
        p.swap(2, 3);
        labels.swap(2, 3);
    }
    let gap = q[0].im - q[2].im;
    if gap < MIN_FEATURE * cfg.diameter() {
        return Err(Error::DegenerateGeometry(
            "slits share a carrier line".into(),
        ));
    }
    let canonical = SlitConfig::from_endpoints(q);
    Ok(NormalizedConfig {
        case_tag: CaseTag::Parallel,
        a5: None,
        beta: 0.0,
        l1: q[1].re - q[0].re,
        l2: q[1].re - q[0].re,
        l3: q[3].re - q[2].re,
        l4: q[3].re - q[2].re,
        v1: Complex64::new((q[0] - q[2]).re, 0.0),
        v2: Complex64::new((q[1] - q[3]).re, 0.0),
        canonical,
        motion,
        labels,
    })
}

impl NormalizedConfig {
    /// Vertical distance between the carriers (parallel case).
    pub fn gap(&self) -> f64 {
        self.canonical.a1.im - self.canonical.a3.im
    }

    /// Canonical endpoints at homotopy time `t`; `t = 1` is the target.
    pub fn at(&self, t: f64) -> SlitConfig {
        let c = &self.canonical;
        SlitConfig {
            a1: c.a1 - self.v1 * (1.0 - t),
            a2: c.a2 - self.v2 * (1.0 - t),
            a3: c.a3,
            a4: c.a4,
        }
    }

    /// The mirror-symmetric configuration the homotopy starts from.
    pub fn start(&self) -> SlitConfig {
        self.at(0.0)
    }

    /// True when the target already is the start configuration.
    pub fn is_symmetric(&self) -> bool {
        let scale = self.canonical.diameter();
        self.v1.norm() <= 1e-14 * scale && self.v2.norm() <= 1e-14 * scale
    }

    /// Canonical endpoint `k` (0-based) back in input coordinates and labels.
    pub fn to_input(&self, canonical: [Complex64; 4]) -> [Complex64; 4] {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (k, w) in canonical.into_iter().enumerate() {
            out[self.labels[k]] = self.motion.invert(w);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg(p: [(f64, f64); 4]) -> SlitConfig {
        SlitConfig::from_endpoints(p.map(|(x, y)| c(x, y)))
    }

    #[test]
    fn classification() {
        let generic = cfg([(0., -2.), (0., 3.), (1., 0.), (3., 0.)]);
        assert_eq!(classify(&generic).unwrap(), CaseTag::Generic);
        let parallel = cfg([(0., 1.), (2., 1.), (-2., -1.), (-1., -1.)]);
        assert_eq!(classify(&parallel).unwrap(), CaseTag::Parallel);
        let collinear = cfg([(0., 0.), (1., 0.), (2., 0.), (3., 0.)]);
        assert!(matches!(
            classify(&collinear),
            Err(Error::DegenerateGeometry(_))
        ));
        let crossing = cfg([(-1., 0.), (1., 0.), (0., -1.), (0., 1.)]);
        assert!(matches!(
            classify(&crossing),
            Err(Error::DegenerateGeometry(_))
        ));
        let nearly = cfg([(0., 1.), (2., 1. + 1e-9), (-2., -1.), (-1., -1.)]);
        assert!(matches!(
            classify(&nearly),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn generic_listing_example() {
        let n = normalize_generic(&cfg([(0., -2.), (0., 3.), (1., 0.), (3., 0.)])).unwrap();
        assert!(n.a5.unwrap().norm() < 1e-15);
        assert!((n.beta - PI / 2.0).abs() < 1e-15);
        assert_eq!((n.l3, n.l4), (1.0, 3.0));
        assert_eq!((n.l1, n.l2), (-2.0, 3.0));
        let half = Complex64::from_polar(1.0, PI / 4.0);
        assert!((n.canonical.a3 - half.conj()).norm() < 1e-15);
        assert!((n.canonical.a2 - 3.0 * half).norm() < 1e-14);
    }

    #[test]
    fn sliding_segment_start_is_symmetric() {
        let n = normalize_generic(&cfg([(1.0, 0.), (2.0, 0.), (0., -1.), (0., -2.)])).unwrap();
        assert!((n.beta - PI / 2.0).abs() < 1e-15);
        assert!((n.beta / (4.0 * PI) - 0.125).abs() < 1e-15);
        assert!(n.is_symmetric());
        assert_eq!((n.l3, n.l4), (1.0, 2.0));
    }

    #[test]
    fn fixed_slit_through_intersection_is_swapped() {
        // (0,2) ends at the carrier intersection, so it becomes the moving slit.
        let n = normalize_generic(&cfg([(0., 1.), (0., 3.), (0., 0.), (2., 0.)])).unwrap();
        assert_eq!(n.labels, [2, 3, 0, 1]);
        assert_eq!(n.l1, 0.0);
        assert_eq!((n.l2, n.l3, n.l4), (2.0, 1.0, 3.0));
        assert!(n.beta > 0.0 && n.beta < PI);

        let n = normalize_generic(&cfg([(0., 1.), (0., 3.), (-3., 0.), (2., 0.)])).unwrap();
        assert_eq!((n.l1, n.l2), (-2.0, 3.0));
        assert!((n.beta - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn negative_angle_is_reflected() {
        let n = normalize_generic(&cfg([(0., 3.), (0., -2.), (1., 0.), (3., 0.)])).unwrap();
        assert!(n.beta > 0.0);
        for (k, w) in n.to_input(n.canonical.endpoints()).into_iter().enumerate() {
            let orig = cfg([(0., 3.), (0., -2.), (1., 0.), (3., 0.)]).endpoints()[k];
            assert!((w - orig).norm() < 1e-14);
        }
    }

    #[test]
    fn normalization_is_idempotent() {
        let n = normalize_generic(&cfg([(0., 1.), (3., 2.), (3., -2.), (4., -3.)])).unwrap();
        let again = normalize_generic(&n.canonical).unwrap();
        assert!((again.beta - n.beta).abs() < 1e-14);
        for (a, b) in [
            (again.l1, n.l1),
            (again.l2, n.l2),
            (again.l3, n.l3),
            (again.l4, n.l4),
        ] {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn parallel_velocities() {
        let n = normalize_parallel(&cfg([(0., 1.), (2., 1.), (-2., -1.), (-1., -1.)])).unwrap();
        assert_eq!((n.v1.re, n.v2.re), (2.0, 3.0));
        assert_eq!(n.gap(), 2.0);

        let mirror =
            normalize_parallel(&cfg([(-1., 1.), (1., 1.), (-1., -1.), (1., -1.)])).unwrap();
        assert!(mirror.is_symmetric());

        let s = 0.7;
        let shifted =
            normalize_parallel(&cfg([(s, 1.), (1. + s, 1.), (0., -1.), (1., -1.)])).unwrap();
        assert!((shifted.v1.re - s).abs() < 1e-15 && (shifted.v2.re - s).abs() < 1e-15);
    }

    #[test]
    fn parallel_orientation_is_canonical() {
        // Vertical carriers, moving slit on the left, endpoints reversed.
        let n = normalize_parallel(&cfg([(-1., 2.), (-1., 0.), (1., 3.), (1., 1.)])).unwrap();
        let q = n.canonical;
        assert!(q.a1.re < q.a2.re && q.a3.re < q.a4.re);
        assert!((q.a1.im - q.a2.im).abs() < 1e-14 && q.a1.im > q.a3.im);
        assert!((n.gap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn homotopy_endpoints() {
        let n = normalize(&cfg([(0., 1.), (3., 2.), (3., -2.), (4., -3.)])).unwrap();
        let start = n.start();
        assert!((start.a1 - start.a3.conj()).norm() < 1e-14);
        assert!((start.a2 - start.a4.conj()).norm() < 1e-14);
        assert_eq!(n.at(1.0), n.canonical);
    }
}
