//! Report rendering.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::{json, Value};
use slitcap_core::pipeline::Extremum;
use slitcap_core::{Report, SweepPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// Nine significant digits; positional notation unless the magnitude makes
/// that unreadable.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exp) {
        format!("{:.*}", (8 - exp) as usize, x)
    } else {
        format!("{x:.8e}")
    }
}

pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn report_json(r: &Report) -> Value {
    let s = &r.accessory;
    json!({
        "module": r.module,
        "capacity": r.capacity,
        "accessory": {
            "x1": s.x[0], "x2": s.x[1], "x3": s.x[2], "x4": s.x[3],
            "y0": s.y0, "m": s.m, "a_re": s.a.re, "a_im": s.a.im,
        },
        "defects": {
            "sum": r.defects.sum_defect,
            "residue": r.defects.residue_defect,
        },
        "endpoint_errors": r.endpoint_errors,
        "line_deviation": r.line_deviation,
        "diameter": r.diameter,
        "case": r.case_tag,
        "beta": r.beta,
        "steps": r.steps,
        "rejected_steps": r.rejected_steps,
        "runtime_ms": r.runtime_ms,
    })
}

pub fn write_report(out: &mut dyn Write, r: &Report, format: Format) -> Result<()> {
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report_json(r))?)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record([
                "module",
                "capacity",
                "defect_sum",
                "defect_residue",
                "max_endpoint_error",
                "line_deviation",
                "runtime_ms",
            ])?;
            let worst = r.endpoint_errors.iter().copied().fold(0.0, f64::max);
            w.write_record(
                [
                    r.module,
                    r.capacity,
                    r.defects.sum_defect,
                    r.defects.residue_defect,
                    worst,
                    r.line_deviation,
                    r.runtime_ms,
                ]
                .map(sig9),
            )?;
            w.flush()?;
        }
        Format::Text => {
            let s = &r.accessory;
            writeln!(out, "mod G        {}", sig9(r.module))?;
            writeln!(out, "cap G        {}", sig9(r.capacity))?;
            writeln!(
                out,
                "case         {:?}, beta = {}",
                r.case_tag,
                sig9(r.beta)
            )?;
            writeln!(
                out,
                "accessory    x = [{}], y0 = {}, a = {} + {}i",
                s.x.map(sig9).join(", "),
                sig9(s.y0),
                sig9(s.a.re),
                sig9(s.a.im)
            )?;
            writeln!(
                out,
                "defects      sum {:.2e}, residue {:.2e}",
                r.defects.sum_defect, r.defects.residue_defect
            )?;
            writeln!(
                out,
                "endpoints    |f(z_k) - A_k| = [{}]",
                r.endpoint_errors.map(|e| format!("{e:.2e}")).join(", ")
            )?;
            writeln!(out, "carriers     max deviation {:.2e}", r.line_deviation)?;
            writeln!(
                out,
                "solver       {} steps ({} rejected), {:.1} ms",
                r.steps, r.rejected_steps, r.runtime_ms
            )?;
        }
    }
    Ok(())
}

/// One sweep row: the parameter and either a solved point or an error.
pub type SweepRow = (f64, Result<SweepPoint, String>);

pub fn write_sweep(
    out: &mut dyn Write,
    rows: &[SweepRow],
    extrema: &[Extremum],
    signs: &SignCheck,
    format: Format,
) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["a", "m", "cap", "defect_sum", "defect_residue"])?;
            for (a, row) in rows {
                let v = match row {
                    Ok(p) => [
                        p.a,
                        p.module,
                        p.capacity,
                        p.defects.sum_defect,
                        p.defects.residue_defect,
                    ],
                    Err(_) => [*a, f64::NAN, f64::NAN, f64::NAN, f64::NAN],
                };
                w.write_record(v.map(sig9))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let points: Vec<Value> = rows
                .iter()
                .map(|(a, row)| match row {
                    Ok(p) => json!({
                        "a": p.a, "m": p.module, "cap": p.capacity,
                        "defect_sum": p.defects.sum_defect, "defect_residue": p.defects.residue_defect,
                        "slope": p.slope,
                    }),
                    Err(e) => json!({ "a": a, "error": e }),
                })
                .collect();
            let doc = json!({
                "points": points,
                "extrema": extrema,
                "sign_check": { "agree": signs.agree, "disagree": signs.disagree, "undecided": signs.undecided },
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
        }
        Format::Text => {
            writeln!(out, "{:>12} {:>12} {:>12} {:>12}", "a", "m", "cap", "dm/da")?;
            for (a, row) in rows {
                match row {
                    Ok(p) => writeln!(
                        out,
                        "{:>12} {:>12} {:>12} {:>12}",
                        sig9(p.a),
                        sig9(p.module),
                        sig9(p.capacity),
                        format!("{:.3e}", p.slope)
                    )?,
                    Err(e) => writeln!(out, "{:>12} failed: {e}", sig9(*a))?,
                }
            }
            write_sweep_summary(out, extrema, signs)?;
        }
    }
    Ok(())
}

pub fn write_sweep_summary(
    out: &mut dyn Write,
    extrema: &[Extremum],
    signs: &SignCheck,
) -> Result<()> {
    for e in extrema {
        writeln!(
            out,
            "{:?} of m near a = {} (m = {})",
            e.kind,
            sig9(e.a),
            sig9(e.module)
        )?;
    }
    writeln!(
        out,
        "slope sign vs centred difference: {} agree, {} disagree, {} too flat to call",
        signs.agree, signs.disagree, signs.undecided
    )?;
    Ok(())
}

/// Agreement between the solver's `dm/da` and centred differences of `m`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SignCheck {
    pub agree: usize,
    pub disagree: usize,
    pub undecided: usize,
}

/// Differences below this are within solver noise and carry no sign.
const FLAT: f64 = 1e-9;

pub fn sign_check(points: &[SweepPoint]) -> SignCheck {
    let mut s = SignCheck::default();
    for w in points.windows(3) {
        let fd = w[2].module - w[0].module;
        let slope = w[1].slope * (w[2].a - w[0].a);
        if fd.abs() < FLAT || slope.abs() < FLAT {
            s.undecided += 1;
        } else if fd.signum() == slope.signum() {
            s.agree += 1;
        } else {
            s.disagree += 1;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(1.440584661234), "1.44058466");
        assert_eq!(sig9(0.5624695479), "0.562469548");
        assert_eq!(sig9(123.456789012), "123.456789");
        assert_eq!(sig9(-2.0), "-2.00000000");
        assert_eq!(sig9(3.2e-11), "3.20000000e-11");
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(f64::NAN), "nan");
    }
}
