//! Conformal module and capacity of the exterior of two rectilinear slits.
//!
//! The complement of two slits `A₁A₂` and `A₃A₄` is a ring domain. Its
//! conformal map from an annulus is written with Weierstrass functions
//! whose accessory parameters (endpoint preimages, pole, module `m`, log
//! residue `a`) are transported along a homotopy that starts from a
//! mirror-symmetric pair with a closed-form map. The capacity is `1/m`.
//!
//! ```no_run
//! use num_complex::Complex64 as C;
//! use slitcap_core::{compute, ComputeOptions, SlitConfig};
//!
//! let cfg = SlitConfig::new(C::new(0., 1.), C::new(2., 1.), C::new(-2., -1.), C::new(-1., -1.))?;
//! let report = compute(&cfg, &ComputeOptions::default())?;
//! println!("cap = {:.8}", report.capacity);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod evolution;
pub mod geometry;
pub mod oracle;
pub mod pipeline;
pub mod quadrature;
pub mod reconstruction;
pub mod reference;
pub mod symmetric;

pub use elliptic::{Lattice, WeierstrassValues};
pub use error::{Error, Result};
pub use evolution::{AccessoryState, ConstraintDefects, Drive, Tolerances, Trajectory};
pub use geometry::{CaseTag, NormalizedConfig, RigidMotion, SlitConfig};
pub use oracle::{grid_capacity, GridSpec};
pub use pipeline::{
    compute, solve, ComputeOptions, PipelineError, Report, SlidingFamily, Stage, SweepPoint,
};
pub use reconstruction::MapData;
pub use symmetric::SymmetricSolution;
