//! CSV and JSON writers. CSV files start with `# key=value` metadata lines,
//! then a header row; floats use the shortest round-trip representation.

use std::io::{self, Write};

use serde::Serialize;

use crate::asymptotics::ConvergenceReport;
use crate::equidist::WeylReport;
use crate::spectrum::CoefficientSpectrum;
use crate::stationary::StationaryRow;

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn meta(w: &mut impl Write, pairs: &[(&str, String)]) -> io::Result<()> {
    for (k, v) in pairs {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

pub fn write_spectrum_csv(w: &mut impl Write, spec: &CoefficientSpectrum, extra: &[(&str, String)]) -> io::Result<()> {
    let mut m = vec![
        ("x", fmt_f64(spec.x)),
        ("grid_pow", spec.grid_pow.to_string()),
        ("parseval_defect", fmt_f64(spec.parseval_defect)),
        ("tail_bound", fmt_f64(spec.tail_bound)),
    ];
    m.extend(extra.iter().cloned());
    meta(w, &m)?;
    writeln!(w, "nu,re,im,abs")?;
    for (nu, c) in spec.iter() {
        writeln!(w, "{nu},{},{},{}", fmt_f64(c.re), fmt_f64(c.im), fmt_f64(c.norm()))?;
    }
    Ok(())
}

/// Convergence rows with the error column derived from the limit.
#[derive(Debug, Serialize)]
struct ConvergenceRowView {
    param: f64,
    s: f64,
    err: f64,
    external_sum: f64,
    periphery_sum: f64,
    central_sum: f64,
    s_uncertainty: f64,
    grid_pow: u32,
    parseval_defect: f64,
}

#[derive(Debug, Serialize)]
struct ConvergenceView<'a> {
    phase_label: &'a str,
    limit: f64,
    quad_tol: f64,
    rows: Vec<ConvergenceRowView>,
}

fn convergence_view(r: &ConvergenceReport) -> ConvergenceView<'_> {
    ConvergenceView {
        phase_label: &r.phase_label,
        limit: r.limit,
        quad_tol: r.quad_tol,
        rows: r
            .rows
            .iter()
            .map(|row| ConvergenceRowView {
                param: row.param,
                s: row.s,
                err: r.err(row),
                external_sum: row.external_sum,
                periphery_sum: row.periphery_sum,
                central_sum: row.central_sum,
                s_uncertainty: row.s_uncertainty,
                grid_pow: row.grid_pow,
                parseval_defect: row.parseval_defect,
            })
            .collect(),
    }
}

pub fn write_convergence_csv(w: &mut impl Write, r: &ConvergenceReport, extra: &[(&str, String)]) -> io::Result<()> {
    let mut m = vec![
        ("phase", r.phase_label.clone()),
        ("limit", fmt_f64(r.limit)),
        ("quad_tol", fmt_f64(r.quad_tol)),
    ];
    m.extend(extra.iter().cloned());
    meta(w, &m)?;
    writeln!(w, "param,s,err,external_sum,periphery_sum,central_sum,s_uncertainty,grid_pow,parseval_defect")?;
    for row in convergence_view(r).rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            fmt_f64(row.param),
            fmt_f64(row.s),
            fmt_f64(row.err),
            fmt_f64(row.external_sum),
            fmt_f64(row.periphery_sum),
            fmt_f64(row.central_sum),
            fmt_f64(row.s_uncertainty),
            row.grid_pow,
            fmt_f64(row.parseval_defect)
        )?;
    }
    Ok(())
}

pub fn write_convergence_json(w: &mut impl Write, r: &ConvergenceReport) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, &convergence_view(r))?;
    writeln!(w)
}

pub fn write_stationary_csv(w: &mut impl Write, rows: &[StationaryRow], extra: &[(&str, String)]) -> io::Result<()> {
    meta(w, extra)?;
    writeln!(w, "nu,exact,approx,abs_err,remainder_bound")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.nu,
            fmt_f64(r.exact),
            fmt_f64(r.approx),
            fmt_f64(r.abs_err),
            fmt_f64(r.remainder_bound)
        )?;
    }
    Ok(())
}

pub fn write_weyl_csv(w: &mut impl Write, r: &WeylReport) -> io::Result<()> {
    meta(
        w,
        &[
            ("j", r.j.to_string()),
            ("interval", format!("[{},{}]", fmt_f64(r.interval.0), fmt_f64(r.interval.1))),
            ("fitted_decay", fmt_f64(r.fitted_decay)),
        ],
    )?;
    writeln!(w, "n,magnitude")?;
    for (n, m) in &r.values {
        writeln!(w, "{n},{}", fmt_f64(*m))?;
    }
    Ok(())
}

/// Any serializable value as pretty JSON followed by a newline.
pub fn write_json(w: &mut impl Write, v: &impl Serialize) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, v)?;
    writeln!(w)
}
