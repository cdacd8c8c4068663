//! `wnl`: command-line experiments on the Wiener-algebra norms of
//! `e^{ixh(t)}`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wnl_core::asymptotics::{asymptotic_limit, convergence_study_with, log_growth_study};
use wnl_core::equidist::{final_step_decomposition, FinalStep};
use wnl_core::export::{
    fmt_f64, write_convergence_csv, write_convergence_json, write_json, write_stationary_csv,
};
use wnl_core::phase::{build_sine, parse_phase_spec, validate, PhaseFunction};
use wnl_core::specfun::{bessel_j_sequence, gamma_fn, BESSEL_MAX_ORDER};
use wnl_core::spectrum::{
    compute_spectrum, compute_spectrum_auto, partition_terms, scaled_norm, window_margin,
    CoefficientSpectrum,
};
use wnl_core::stationary::{compare_central, minimal_remainder_constant, StationaryRow, DEFAULT_REMAINDER_C};

const VALIDATION_GRID: usize = 4096;

#[derive(Parser, Debug)]
#[command(name = "wnl", version, about = "Fourier coefficients and Wiener-algebra norms of exp(i x h(t))")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the convergence hypotheses for a phase; exit 0 iff all hold.
    Validate,
    /// S(x) = Σ|a_{x,ν}|/√x against its limit (log-growth mode for `abs`).
    Converge,
    /// Exact central coefficients against their stationary-phase approximation.
    StationaryCompare,
    /// Σ|J_ν(x)|/√x from Bessel values, with a spectrum cross-check.
    Bessel,
    /// S(n) trajectories for Blaschke phases, no convergence claim.
    ExploreBlaschke,
    /// Decomposition of the central sum for a given ε.
    FinalStep,
}

#[derive(Args, Debug)]
struct Opts {
    /// sine | abs | linear:k | blaschke:a1,a2,... (complex zeros as a+bi)
    #[arg(long, global = true, default_value = "sine")]
    phase: String,
    /// Comma-separated n or x values.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
    /// Quadrature tolerance, within [1e-14, 1e-4].
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    /// `auto` or a fixed power of two for the FFT grid.
    #[arg(long, global = true, default_value = "auto", value_parser = parse_grid_pow)]
    grid_pow: GridPow,
    #[arg(long, global = true, default_value_t = 0.1)]
    epsilon: f64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Recorded in the output metadata.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GridPow {
    Auto,
    Fixed(u32),
}

impl GridPow {
    fn fixed(self) -> Option<u32> {
        match self {
            GridPow::Auto => None,
            GridPow::Fixed(p) => Some(p),
        }
    }

    fn label(self) -> String {
        match self {
            GridPow::Auto => "auto".into(),
            GridPow::Fixed(p) => p.to_string(),
        }
    }
}

fn parse_grid_pow(s: &str) -> std::result::Result<GridPow, String> {
    if s == "auto" {
        return Ok(GridPow::Auto);
    }
    s.parse::<u32>()
        .map(GridPow::Fixed)
        .map_err(|_| format!("expected `auto` or a non-negative integer, got {s:?}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    configure_threads()?;
    let o = &cli.opts;
    if !(1e-14..=1e-4).contains(&o.tol) {
        bail!("--tol must lie in [1e-14, 1e-4], got {}", o.tol);
    }
    match cli.command {
        Command::Validate => cmd_validate(o),
        Command::Converge => cmd_converge(o),
        Command::StationaryCompare => cmd_stationary_compare(o),
        Command::Bessel => cmd_bessel(o),
        Command::ExploreBlaschke => cmd_explore_blaschke(o),
        Command::FinalStep => cmd_final_step(o),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("WNL_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .with_context(|| format!("WNL_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn phase_of(o: &Opts) -> Result<PhaseFunction> {
    parse_phase_spec(&o.phase).map_err(Into::into)
}

/// `--params`, or `default` when the flag was not given.
fn params_of(o: &Opts, default: &[f64]) -> Result<Vec<f64>> {
    let p = if o.params.is_empty() { default.to_vec() } else { o.params.clone() };
    if p.is_empty() {
        bail!("--params must not be empty");
    }
    if let Some(bad) = p.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        bail!("--params must be positive and finite, got {bad}");
    }
    Ok(p)
}

fn spectrum_of(phase: &PhaseFunction, x: f64, grid: GridPow) -> Result<CoefficientSpectrum> {
    Ok(match grid {
        GridPow::Auto => compute_spectrum_auto(phase, x)?,
        GridPow::Fixed(p) => compute_spectrum(phase, x, p)?,
    })
}

fn common_meta(o: &Opts) -> Vec<(&'static str, String)> {
    vec![
        ("phase", o.phase.clone()),
        ("grid_pow_policy", o.grid_pow.label()),
        ("seed", o.seed.to_string()),
    ]
}

fn meta_lines(w: &mut impl Write, pairs: &[(&str, String)]) -> io::Result<()> {
    for (k, v) in pairs {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

fn emit(o: &Opts, body: &[u8]) -> Result<()> {
    match &o.out {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            match out.write_all(body).and_then(|_| out.flush()) {
                // a closed pipe (`| head`) is not a failure of the computation
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                r => Ok(r?),
            }
        }
    }
}

/// Summary lines go to stdout when the report went to a file, else stderr.
fn summary(o: &Opts, line: &str) {
    if o.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn cmd_validate(o: &Opts) -> Result<ExitCode> {
    let phase = phase_of(o)?;
    let report = validate(&phase, VALIDATION_GRID)?;
    let mut buf = Vec::new();
    match o.format {
        Format::Json => write_json(&mut buf, &report)?,
        Format::Csv => {
            meta_lines(&mut buf, &[("phase", report.label.clone()), ("grid", VALIDATION_GRID.to_string())])?;
            writeln!(buf, "field,value")?;
            let flags = [
                ("periodicity_ok", report.periodicity_ok),
                ("oddness_ok", report.oddness_ok),
                ("sign_definite_ok", report.sign_definite_ok),
                ("derivatives_ok", report.derivatives_ok),
                ("regularity_0", report.regularity_0),
                ("regularity_pi", report.regularity_pi),
            ];
            for (k, v) in flags {
                writeln!(buf, "{k},{v}")?;
            }
            for (k, v) in [
                ("alpha", report.alpha),
                ("beta", report.beta),
                ("doubling_ratio_0", report.doubling_ratio_0),
                ("doubling_ratio_pi", report.doubling_ratio_pi),
            ] {
                writeln!(buf, "{k},{}", fmt_f64(v))?;
            }
            writeln!(buf, "passed,{}", report.passed())?;
            for m in &report.messages {
                writeln!(buf, "message,\"{}\"", m.replace('"', "'"))?;
            }
        }
    }
    emit(o, &buf)?;
    summary(o, &format!("{}: {}", report.label, if report.passed() { "PASS" } else { "FAIL" }));
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

#[derive(Serialize)]
struct LogGrowthView<'a> {
    phase_label: &'a str,
    mode: &'static str,
    target: f64,
    seed: u64,
    rows: &'a [wnl_core::asymptotics::LogGrowthRow],
}

fn cmd_converge(o: &Opts) -> Result<ExitCode> {
    let phase = phase_of(o)?;
    let params = params_of(o, &[100.0, 400.0, 1600.0, 6400.0])?;
    if phase.label == "abs" {
        return converge_log_growth(o, &phase, &params);
    }
    let report = convergence_study_with(&phase, &params, o.tol, o.grid_pow.fixed())?;
    let mut buf = Vec::new();
    match o.format {
        Format::Csv => write_convergence_csv(&mut buf, &report, &common_meta(o)[1..])?,
        Format::Json => write_convergence_json(&mut buf, &report)?,
    }
    emit(o, &buf)?;
    let last = report.rows.last().expect("non-empty study");
    summary(o, &format!("limit = {}", fmt_f64(report.limit)));
    summary(o, &format!("final error = {} at {}", fmt_f64(report.err(last)), fmt_f64(last.param)));
    Ok(ExitCode::SUCCESS)
}

/// Phases that are not `C²` have norms growing like `log n`; report
/// `norm/log n` against `2/π`.
fn converge_log_growth(o: &Opts, phase: &PhaseFunction, params: &[f64]) -> Result<ExitCode> {
    let rows = log_growth_study(phase, params)?;
    let target = 2.0 / PI;
    let mut buf = Vec::new();
    match o.format {
        Format::Csv => {
            let mut m = common_meta(o);
            m.push(("mode", "log-growth".into()));
            m.push(("target", fmt_f64(target)));
            meta_lines(&mut buf, &m)?;
            writeln!(buf, "n,norm,norm_over_log,grid_pow")?;
            for r in &rows {
                writeln!(buf, "{},{},{},{}", fmt_f64(r.n), fmt_f64(r.norm), fmt_f64(r.norm_over_log), r.grid_pow)?;
            }
        }
        Format::Json => write_json(
            &mut buf,
            &LogGrowthView { phase_label: &phase.label, mode: "log-growth", target, seed: o.seed, rows: &rows },
        )?,
    }
    emit(o, &buf)?;
    let last = rows.last().expect("non-empty study");
    summary(o, &format!("norm/log n = {} at n = {} (2/pi = {})", fmt_f64(last.norm_over_log), fmt_f64(last.n), fmt_f64(target)));
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct StationaryView<'a> {
    phase_label: &'a str,
    n: f64,
    c: f64,
    fitted_c: f64,
    delta: f64,
    phi: f64,
    seed: u64,
    rows: &'a [StationaryRow],
}

fn cmd_stationary_compare(o: &Opts) -> Result<ExitCode> {
    let phase = phase_of(o)?;
    let params = params_of(o, &[1000.0])?;
    let [n] = params[..] else {
        bail!("stationary-compare takes exactly one n, got {}", params.len());
    };
    let part = partition_terms(&phase, n)?;
    let rows = if part.central.is_empty() {
        Vec::new()
    } else {
        let spec = spectrum_of(&phase, n, o.grid_pow)?;
        compare_central(&phase, &spec, &part, DEFAULT_REMAINDER_C)?
    };
    let fitted_c = minimal_remainder_constant(&rows);
    let mut buf = Vec::new();
    match o.format {
        Format::Csv => {
            let mut m = common_meta(o);
            m.extend([
                ("n", fmt_f64(n)),
                ("c", fmt_f64(DEFAULT_REMAINDER_C)),
                ("fitted_c", fmt_f64(fitted_c)),
                ("delta", fmt_f64(part.delta)),
                ("phi", fmt_f64(part.phi)),
            ]);
            write_stationary_csv(&mut buf, &rows, &m)?;
        }
        Format::Json => write_json(
            &mut buf,
            &StationaryView {
                phase_label: &phase.label,
                n,
                c: DEFAULT_REMAINDER_C,
                fitted_c,
                delta: part.delta,
                phi: part.phi,
                seed: o.seed,
                rows: &rows,
            },
        )?,
    }
    emit(o, &buf)?;
    summary(o, &format!("{} central coefficients, fitted C = {}", rows.len(), fmt_f64(fitted_c)));
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct BesselRow {
    x: f64,
    s: f64,
    err: f64,
    spectrum_s: f64,
    path_diff: f64,
}

#[derive(Serialize)]
struct BesselView<'a> {
    limit: f64,
    seed: u64,
    rows: &'a [BesselRow],
}

fn cmd_bessel(o: &Opts) -> Result<ExitCode> {
    let xs = params_of(o, &[25.0, 100.0, 400.0])?;
    let limit = 16.0 / gamma_fn(0.25)?.powi(2);
    let sine = build_sine();
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        // |J_ν(x)| is negligible once ν exceeds x by the spectrum window margin
        let top = (x + window_margin(x, 1.0)).ceil() as i64;
        if top > BESSEL_MAX_ORDER {
            bail!("x = {x} needs Bessel orders up to {top}, above {BESSEL_MAX_ORDER}");
        }
        let j = bessel_j_sequence(top as usize, x)?;
        let s = (j[0].abs() + 2.0 * j[1..].iter().map(|v| v.abs()).sum::<f64>()) / x.sqrt();
        let spectrum_s = scaled_norm(&spectrum_of(&sine, x, o.grid_pow)?).value;
        rows.push(BesselRow { x, s, err: (s - limit).abs(), spectrum_s, path_diff: (s - spectrum_s).abs() });
    }
    let mut buf = Vec::new();
    match o.format {
        Format::Csv => {
            meta_lines(
                &mut buf,
                &[
                    ("limit", fmt_f64(limit)),
                    ("grid_pow_policy", o.grid_pow.label()),
                    ("seed", o.seed.to_string()),
                ],
            )?;
            writeln!(buf, "x,s,err,spectrum_s,path_diff")?;
            for r in &rows {
                writeln!(
                    buf,
                    "{},{},{},{},{}",
                    fmt_f64(r.x),
                    fmt_f64(r.s),
                    fmt_f64(r.err),
                    fmt_f64(r.spectrum_s),
                    fmt_f64(r.path_diff)
                )?;
            }
        }
        Format::Json => write_json(&mut buf, &BesselView { limit, seed: o.seed, rows: &rows })?,
    }
    emit(o, &buf)?;
    summary(o, &format!("limit = 16/Gamma(1/4)^2 = {}", fmt_f64(limit)));
    Ok(ExitCode::SUCCESS)
}

#[derive(Debug, Serialize)]
struct ExploreRow {
    n: f64,
    s: f64,
    reference_gap: Option<f64>,
    parseval_defect: f64,
    grid_pow: u32,
}

#[derive(Serialize)]
struct ExploreView<'a> {
    phase_label: &'a str,
    exploratory: bool,
    reference: Option<f64>,
    seed: u64,
    rows: &'a [ExploreRow],
}

const EXPLORATORY: &str = "exploratory: no theorem applies";

fn cmd_explore_blaschke(o: &Opts) -> Result<ExitCode> {
    let phase = phase_of(o)?;
    if !phase.label.starts_with("blaschke") {
        bail!("explore-blaschke needs a blaschke:... phase, got {}", phase.label);
    }
    let ns = params_of(o, &[16.0, 64.0, 256.0, 1024.0])?;
    let report = validate(&phase, VALIDATION_GRID)?;
    let exploratory = !report.passed();
    if exploratory {
        eprintln!("warning: {} fails the convergence hypotheses ({}); {EXPLORATORY}", phase.label, report.messages.join("; "));
    }
    let reference = if exploratory { None } else { Some(asymptotic_limit(&phase, o.tol)?) };
    let rows = ns
        .iter()
        .map(|&n| {
            let spec = spectrum_of(&phase, n, o.grid_pow)?;
            let s = scaled_norm(&spec).value;
            Ok(ExploreRow {
                n,
                s,
                reference_gap: reference.map(|r| s - r),
                parseval_defect: spec.parseval_defect,
                grid_pow: spec.grid_pow,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    match o.format {
        Format::Csv => {
            let mut m = common_meta(o);
            if exploratory {
                m.push(("note", EXPLORATORY.into()));
            }
            m.push(("reference", reference.map_or("none".into(), fmt_f64)));
            meta_lines(&mut buf, &m)?;
            writeln!(buf, "n,s,reference_gap,parseval_defect,grid_pow")?;
            for r in &rows {
                writeln!(
                    buf,
                    "{},{},{},{},{}",
                    fmt_f64(r.n),
                    fmt_f64(r.s),
                    r.reference_gap.map_or(String::new(), fmt_f64),
                    fmt_f64(r.parseval_defect),
                    r.grid_pow
                )?;
            }
        }
        Format::Json => write_json(
            &mut buf,
            &ExploreView { phase_label: &phase.label, exploratory, reference, seed: o.seed, rows: &rows },
        )?,
    }
    emit(o, &buf)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct FinalStepView<'a> {
    phase_label: &'a str,
    epsilon: f64,
    seed: u64,
    rows: &'a [FinalStep],
}

fn cmd_final_step(o: &Opts) -> Result<ExitCode> {
    let phase = phase_of(o)?;
    let ns = params_of(o, &[1000.0])?;
    let rows = ns
        .iter()
        .map(|&n| final_step_decomposition(&phase, n, o.epsilon))
        .collect::<wnl_core::Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    match o.format {
        Format::Csv => {
            let mut m = common_meta(o);
            m.push(("epsilon", fmt_f64(o.epsilon)));
            if let Some(r) = rows.first() {
                m.push(("j_eps", format!("[{},{}]", fmt_f64(r.j_eps.0), fmt_f64(r.j_eps.1))));
            }
            meta_lines(&mut buf, &m)?;
            writeln!(buf, "n,central_sum,integral,d_n,a,b,c,e,a_majorant")?;
            for r in &rows {
                let vals = [r.n, r.central_sum, r.integral, r.d_n, r.a, r.b, r.c, r.e, r.a_majorant];
                writeln!(buf, "{}", vals.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","))?;
            }
        }
        Format::Json => write_json(
            &mut buf,
            &FinalStepView { phase_label: &phase.label, epsilon: o.epsilon, seed: o.seed, rows: &rows },
        )?,
    }
    emit(o, &buf)?;
    Ok(ExitCode::SUCCESS)
}
