use num_complex::Complex64;
use thiserror::Error;

use crate::evolution::AccessoryState;

/// Failure modes of the numerical pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("series or iteration did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("argument {z} lies within {radius:e} of a lattice point")]
    PoleProximity { z: Complex64, radius: f64 },

    #[error("no root of wp(z) = w in the branch region (best residual {best_residual:e})")]
    NoRootInRegion { best_residual: f64 },

    #[error("degenerate slit geometry: {0}")]
    DegenerateGeometry(String),

    #[error(
        "target ratio {target} not bracketed: ratio({lo}) = {ratio_lo}, ratio({hi}) = {ratio_hi}"
    )]
    BracketFailure {
        target: f64,
        lo: f64,
        hi: f64,
        ratio_lo: f64,
        ratio_hi: f64,
    },

    #[error("pole-ordinate equation is singular (|denominator| = {0:e})")]
    SingularPinch(f64),

    #[error("step size underflow at t = {t} (dt = {dt:e})")]
    StepSizeUnderflow {
        t: f64,
        dt: f64,
        last_state: Box<AccessoryState>,
    },

    #[error(
        "constraint defect blow-up at t = {t}: sum {sum_defect:e}, residue {residue_defect:e}"
    )]
    DefectBlowup {
        t: f64,
        sum_defect: f64,
        residue_defect: f64,
    },

    #[error("adaptive quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("no admissible integration path from {from} to {to}")]
    PathBlocked { from: Complex64, to: Complex64 },

    #[error(
        "iterative solver did not converge: residual {residual:e} after {iterations} iterations"
    )]
    NonConvergence { residual: f64, iterations: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
