//! End-to-end computation: normalize, start from the symmetric map, evolve
//! the accessory parameters, rebuild the map and check it.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::evolution::{gammas, integrate, AccessoryState, ConstraintDefects, Drive, Tolerances};
use crate::geometry::{normalize, CaseTag, NormalizedConfig, SlitConfig};
use crate::reconstruction::{boundary_trace, MapData};
use crate::symmetric::initial_state;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Geometry,
    Initialization,
    Evolution,
    Reconstruction,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Geometry => "geometry",
            Stage::Initialization => "initialization",
            Stage::Evolution => "evolution",
            Stage::Reconstruction => "reconstruction",
        })
    }
}

/// An upstream error tagged with the stage that raised it.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{stage} stage failed")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

fn at(stage: Stage) -> impl FnOnce(Error) -> PipelineError {
    move |source| PipelineError { stage, source }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputeOptions {
    pub tol: Tolerances,
    /// Samples per boundary line for the trace; `0` skips reconstruction.
    pub trace_samples: usize,
}

impl Default for ComputeOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            trace_samples: 128,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub module: f64,
    pub capacity: f64,
    pub case_tag: CaseTag,
    pub beta: f64,
    /// Final accessory parameters in the canonical frame.
    pub accessory: AccessoryState,
    /// Largest constraint defects seen along the trajectory.
    pub defects: ConstraintDefects,
    /// `|f(z_k) − A_k|` in the input labelling; zero when the trace is skipped.
    pub endpoint_errors: [f64; 4],
    pub line_deviation: f64,
    pub diameter: f64,
    pub steps: usize,
    pub rejected_steps: usize,
    pub defect_warnings: usize,
    pub runtime_ms: f64,
}

/// Solved state of one configuration, before any reporting.
#[derive(Debug, Clone)]
pub struct Solution {
    pub ncfg: NormalizedConfig,
    pub state: AccessoryState,
    pub defects: ConstraintDefects,
    pub steps: usize,
    pub rejected_steps: usize,
    pub defect_warnings: usize,
}

pub fn solve(cfg: &SlitConfig, tol: Tolerances) -> Result<Solution, PipelineError> {
    cfg.validate().map_err(at(Stage::Geometry))?;
    let ncfg = normalize(cfg).map_err(at(Stage::Geometry))?;
    let start = initial_state(&ncfg).map_err(at(Stage::Initialization))?;
    let traj = integrate(&start.state(), &ncfg, tol).map_err(at(Stage::Evolution))?;
    Ok(Solution {
        state: *traj.last(),
        defects: traj.max_defects(),
        steps: traj.step_stats.len(),
        rejected_steps: traj.rejected_steps,
        defect_warnings: traj.defect_warnings,
        ncfg,
    })
}

pub fn compute(cfg: &SlitConfig, opts: &ComputeOptions) -> Result<Report, PipelineError> {
    let clock = Instant::now();
    let sol = solve(cfg, opts.tol)?;
    let ncfg = &sol.ncfg;
    let mut endpoint_errors = [0.0; 4];
    let mut line_deviation = 0.0;
    if opts.trace_samples > 0 {
        let md = MapData::new(&sol.state, ncfg.beta, ncfg.canonical.a3)
            .map_err(at(Stage::Reconstruction))?;
        let trace = boundary_trace(&md, &ncfg.canonical, opts.trace_samples)
            .map_err(at(Stage::Reconstruction))?;
        for (k, e) in trace.endpoint_errors.into_iter().enumerate() {
            endpoint_errors[ncfg.labels[k]] = e;
        }
        line_deviation = trace.max_line_deviation;
    }
    Ok(Report {
        module: sol.state.m,
        capacity: 1.0 / sol.state.m,
        case_tag: ncfg.case_tag,
        beta: ncfg.beta,
        accessory: sol.state,
        defects: sol.defects,
        endpoint_errors,
        line_deviation,
        diameter: cfg.diameter(),
        steps: sol.steps,
        rejected_steps: sol.rejected_steps,
        defect_warnings: sol.defect_warnings,
        runtime_ms: clock.elapsed().as_secs_f64() * 1e3,
    })
}

/// `dm/ds` when the input endpoints flagged in `moving` translate with
/// velocity `direction`, read off as `π·Re Σγ_k` at a solved state.
pub fn module_rate(sol: &Solution, moving: [bool; 4], direction: Complex64) -> Result<f64, Error> {
    let ncfg = &sol.ncfg;
    let motion = &ncfg.motion;
    let linear = motion.rotation
        * if motion.reflect {
            direction.conj()
        } else {
            direction
        };
    let mut velocities = [Complex64::new(0.0, 0.0); 4];
    for (k, v) in velocities.iter_mut().enumerate() {
        if moving[ncfg.labels[k]] {
            *v = linear;
        }
    }
    let drive = Drive {
        beta: ncfg.beta,
        velocities,
    };
    let g = gammas(&sol.state, &drive)?;
    Ok(PI * g.iter().map(|z| z.re).sum::<f64>())
}

/// Segment of fixed length sliding along a line against a fixed segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlidingFamily {
    pub origin: Complex64,
    /// Unit direction of the line.
    pub direction: Complex64,
    pub length: f64,
    pub a3: Complex64,
    pub a4: Complex64,
}

impl SlidingFamily {
    pub fn new(
        origin: Complex64,
        direction: Complex64,
        length: f64,
        a3: Complex64,
        a4: Complex64,
    ) -> Result<Self, Error> {
        if !(direction.norm() > 0.0 && length > 0.0) {
            return Err(Error::OutOfRange(
                "sliding line needs a direction and a positive length".into(),
            ));
        }
        Ok(Self {
            origin,
            direction: direction / direction.norm(),
            length,
            a3,
            a4,
        })
    }

    /// Configuration with the moving segment centred at parameter `a`.
    pub fn at(&self, a: f64) -> SlitConfig {
        let half = 0.5 * self.length;
        SlitConfig::from_endpoints([
            self.origin + self.direction * (a - half),
            self.origin + self.direction * (a + half),
            self.a3,
            self.a4,
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub a: f64,
    pub module: f64,
    pub capacity: f64,
    pub defects: ConstraintDefects,
    /// `dm/da` from the solver's `γ_k` at the solved state.
    pub slope: f64,
}

pub fn sweep_point(
    family: &SlidingFamily,
    a: f64,
    tol: Tolerances,
) -> Result<SweepPoint, PipelineError> {
    let sol = solve(&family.at(a), tol)?;
    let slope = module_rate(&sol, [true, true, false, false], family.direction)
        .map_err(at(Stage::Evolution))?;
    Ok(SweepPoint {
        a,
        module: sol.state.m,
        capacity: 1.0 / sol.state.m,
        defects: sol.defects,
        slope,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub a: f64,
    pub module: f64,
    pub kind: ExtremumKind,
}

/// Interior extrema of sampled `(a, m)` pairs, located where the centred
/// difference changes sign. The reported sample is the extreme one of the
/// two straddling the sign change.
pub fn extrema(samples: &[(f64, f64)]) -> Vec<Extremum> {
    let n = samples.len();
    if n < 3 {
        return Vec::new();
    }
    let slopes: Vec<f64> = (1..n - 1)
        .map(|i| samples[i + 1].1 - samples[i - 1].1)
        .collect();
    let mut out = Vec::new();
    for (k, &d) in slopes.iter().enumerate() {
        let i = k + 1;
        if d == 0.0 {
            let kind = if samples[i].1 <= samples[i - 1].1 {
                ExtremumKind::Minimum
            } else {
                ExtremumKind::Maximum
            };
            out.push(extremum(samples[i], kind));
        } else if let Some(&next) = slopes.get(k + 1) {
            if d * next < 0.0 {
                let (p, q) = (samples[i], samples[i + 1]);
                let (kind, pick) = if d < 0.0 {
                    (ExtremumKind::Minimum, if p.1 <= q.1 { p } else { q })
                } else {
                    (ExtremumKind::Maximum, if p.1 >= q.1 { p } else { q })
                };
                out.push(extremum(pick, kind));
            }
        }
    }
    out
}

fn extremum((a, module): (f64, f64), kind: ExtremumKind) -> Extremum {
    Extremum { a, module, kind }
}
