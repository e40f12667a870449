//! Published reference values used by the `tables` and `selftest`
//! commands.

use num_complex::Complex64;

use crate::geometry::SlitConfig;

/// A slit pair with endpoints on the integer lattice and its capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityCase {
    pub endpoints: [(f64, f64); 4],
    pub capacity: f64,
}

impl CapacityCase {
    pub fn config(&self) -> SlitConfig {
        SlitConfig::from_endpoints(self.endpoints.map(|(re, im)| Complex64::new(re, im)))
    }
}

/// Reference capacities of fifteen integer-lattice configurations.
pub const LATTICE_CASES: [CapacityCase; 15] = [
    case([(0., 1.), (2., 1.), (-2., -1.), (-1., -1.)], 1.44058466),
    case([(0., 1.), (2., 1.), (-2., -2.), (-1., -2.)], 1.30971558),
    case([(0., 1.), (2., 1.), (3., -2.), (4., -3.)], 1.35832035),
    case([(0., 1.), (2., 2.), (-2., -1.), (-1., -1.)], 1.42710109),
    case([(0., 1.), (2., 2.), (-2., -2.), (-1., -2.)], 1.29776864),
    case([(0., 1.), (2., 2.), (3., -2.), (4., -3.)], 1.32814214),
    case([(0., 1.), (3., 2.), (-2., -1.), (-1., -1.)], 1.49363842),
    case([(0., 1.), (3., 2.), (-2., -2.), (-1., -2.)], 1.36333122),
    case([(0., 1.), (3., 2.), (3., -2.), (4., -3.)], 1.45844055),
    case([(0., 1.), (0., 3.), (3., 0.), (4., 0.)], 1.29126199),
    case([(0., 1.), (0., 3.), (0., 0.), (2., 0.)], 2.18251913),
    case([(0., 1.), (0., 3.), (-3., 0.), (2., 0.)], 2.82846257),
    case([(0., 1.), (3., 1.), (0., -1.), (3., -1.)], 2.69941565),
    case([(0., 1.), (3., 2.), (0., -1.), (3., -2.)], 2.23470313),
    case([(0., 1.), (3., 3.), (0., -1.), (3., -3.)], 2.11547784),
];

const fn case(endpoints: [(f64, f64); 4], capacity: f64) -> CapacityCase {
    CapacityCase {
        endpoints,
        capacity,
    }
}

/// Unit segment `[a − ½, a + ½]` on the real axis against the fixed segment
/// from `−i` to `−2i`.
pub fn sliding_segment(a: f64) -> SlitConfig {
    SlitConfig::from_endpoints([
        Complex64::new(a - 0.5, 0.0),
        Complex64::new(a + 0.5, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(0.0, -2.0),
    ])
}

/// `(a, module, capacity)` for [`sliding_segment`] at `a = 0, …, 7`.
pub const SLIDING_SEGMENT_CASES: [(f64, f64, f64); 8] = [
    (0.0, 0.56247, 1.77787),
    (1.0, 0.62207, 1.60753),
    (2.0, 0.72955, 1.37070),
    (3.0, 0.82469, 1.21258),
    (4.0, 0.90239, 1.10817),
    (5.0, 0.96656, 1.03459),
    (6.0, 1.02073, 0.97968),
    (7.0, 1.06743, 0.93682),
];

/// Symmetric start of the sliding-segment family.
pub const SLIDING_SEGMENT_START: f64 = 1.5;

/// Module, critical abscissa and log-residue of the symmetric start.
pub const SLIDING_SEGMENT_INITIAL: (f64, f64, Complex64) = (
    0.67578477,
    0.22367571,
    Complex64::new(-1.11526111, std::f64::consts::PI),
);

pub const CAPACITY_TOLERANCE: f64 = 5e-5;
pub const MODULE_TOLERANCE: f64 = 1e-4;
