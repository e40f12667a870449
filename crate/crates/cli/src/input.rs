//! Endpoint and tolerance intake from flags and config files.

use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::Deserialize;
use slitcap_core::{SlitConfig, Tolerances};

/// Parses `"re,im"`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [re, im] = parts[..] else {
        return Err(format!("expected `re,im`, got `{s}`"));
    };
    let re: f64 = re.parse().map_err(|_| format!("bad real part in `{s}`"))?;
    let im: f64 = im
        .parse()
        .map_err(|_| format!("bad imaginary part in `{s}`"))?;
    Ok(Complex64::new(re, im))
}

/// A point and direction, `"x0,y0,dx,dy"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub origin: Complex64,
    pub direction: Complex64,
}

pub fn parse_line(s: &str) -> Result<Line, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("expected `x0,y0,dx,dy`, got `{s}`"))?;
    let [x0, y0, dx, dy] = v[..] else {
        return Err(format!("expected four numbers in `{s}`"));
    };
    if dx == 0.0 && dy == 0.0 {
        return Err("line direction must be non-zero".into());
    }
    Ok(Line {
        origin: Complex64::new(x0, y0),
        direction: Complex64::new(dx, dy),
    })
}

/// Contents of a `--config` file. Endpoints are `[re, im]` pairs:
///
/// ```toml
/// a1 = [0.0, 1.0]
/// a2 = [2.0, 1.0]
/// a3 = [-2.0, -1.0]
/// a4 = [-1.0, -1.0]
/// rel_tol = 1e-10
/// ```
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub a1: Option<[f64; 2]>,
    pub a2: Option<[f64; 2]>,
    pub a3: Option<[f64; 2]>,
    pub a4: Option<[f64; 2]>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Endpoints from flags, falling back to the config file.
pub fn endpoints(flags: [Option<Complex64>; 4], file: &FileConfig) -> Result<SlitConfig> {
    let from_file = [file.a1, file.a2, file.a3, file.a4];
    let mut p = [Complex64::new(0.0, 0.0); 4];
    for k in 0..4 {
        p[k] = match (flags[k], from_file[k]) {
            (Some(z), _) => z,
            (None, Some([re, im])) => Complex64::new(re, im),
            (None, None) => bail!("endpoint a{} is missing", k + 1),
        };
    }
    Ok(SlitConfig::from_endpoints(p))
}

pub fn tolerances(rel: Option<f64>, abs: Option<f64>, file: &FileConfig) -> Result<Tolerances> {
    let defaults = Tolerances::default();
    let tol = Tolerances {
        rel_tol: rel.or(file.rel_tol).unwrap_or(defaults.rel_tol),
        abs_tol: abs.or(file.abs_tol).unwrap_or(defaults.abs_tol),
    };
    tol.validate()?;
    Ok(tol)
}
