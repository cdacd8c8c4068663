//! The limit `L(h) = (2/π)^{3/2} ∫₀^π √|h''|`, convergence studies of
//! `S(x) → L(h)`, and Riemann sums of functions with an integrable
//! singularity at the left endpoint.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{psi, validate, PhaseFunction};
use crate::quad::toward_endpoint;
use crate::spectrum::{
    check_periodic, compute_spectrum, compute_spectrum_auto, full_grid_l1, partition_sums, partition_terms, scaled_norm,
};

/// `(2/π)^{3/2}`.
pub fn limit_prefactor() -> f64 {
    (2.0 / PI).powf(1.5)
}

/// `L(h) = (2/π)^{3/2} ∫₀^π √|h''(t)| dt` to absolute accuracy `tol`.
pub fn asymptotic_limit(phase: &PhaseFunction, tol: f64) -> Result<f64> {
    limit_from_curvature(|t| phase.d2(t), tol)
}

/// `(2/π)^{3/2} ∫₀^π √|d2(t)| dt` for an arbitrary curvature function.
///
/// The interval is split at `π/2` and each half is refined geometrically
/// toward its outer endpoint, where `√|h''|` typically has an unbounded
/// derivative.
pub fn limit_from_curvature(d2: impl Fn(f64) -> f64 + Sync, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol must be positive, got {tol}")));
    }
    let pre = limit_prefactor();
    let half = PI / 2.0;
    let left = toward_endpoint(|s| d2(s).abs().sqrt(), half, tol / (2.0 * pre))?;
    let right = toward_endpoint(|s| d2(PI - s).abs().sqrt(), half, tol / (2.0 * pre))?;
    Ok(pre * (left.value + right.value))
}

/// `L(h)` from the same integral written over `x = h'(t)`:
/// `(2/π)^{3/2} ∫_α^β (h''(ψ(x)))^{−1/2} dx`.
///
/// The integrand blows up like an inverse root at both ends and `ψ` loses
/// relative precision there, so this route is good to about `1e−6`; it serves
/// as a cross-check of [`asymptotic_limit`]. Tolerances below `1e−8` are
/// raised to `1e−8`.
pub fn asymptotic_limit_dual(phase: &PhaseFunction, tol: f64) -> Result<f64> {
    let tol = tol.max(1e-8);
    let p = phase.normalized();
    let (a, b) = (p.alpha(), p.beta());
    if !(a < b) {
        return Err(Error::Precondition("h' must be strictly monotone on (0, π)".into()));
    }
    let g = |x: f64| match psi(&p, x) {
        Ok(t) => 1.0 / p.d2(t).sqrt(),
        Err(_) => f64::NAN,
    };
    let half = 0.5 * (b - a);
    let pre = limit_prefactor();
    let left = toward_endpoint(|v| g(a + v), half, tol / (2.0 * pre))?;
    let right = toward_endpoint(|v| g(b - v), half, tol / (2.0 * pre))?;
    Ok(pre * (left.value + right.value))
}

/// `((b−a)/n) Σ_{j=2}^{n} f(a + j(b−a)/n)`: the right-endpoint Riemann sum
/// without its first summand.
pub fn truncated_riemann(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Result<f64> {
    riemann_from(f, a, b, n, 2)
}

/// The full right-endpoint Riemann sum (`j` from 1).
pub fn right_riemann(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Result<f64> {
    riemann_from(f, a, b, n, 1)
}

fn riemann_from(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize, first: usize) -> Result<f64> {
    if n == 0 || !(b > a) {
        return Err(Error::Domain(format!("need n >= 1 and a < b (n = {n}, a = {a}, b = {b})")));
    }
    let h = (b - a) / n as f64;
    let mut sum = 0.0;
    for j in first..=n {
        let v = f(a + j as f64 * h);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("f({}) = {v}", a + j as f64 * h)));
        }
        sum += v;
    }
    Ok(h * sum)
}

/// `(1/n) Σ f(k/n)` over integers `k` with `a < k/n ≤ b`, optionally without
/// the first lattice point. With `a` irrational the first point can sit
/// arbitrarily close to a singularity of `f` at `a`.
pub fn lattice_riemann(f: impl Fn(f64) -> f64, a: f64, b: f64, n: u64, omit_first: bool) -> Result<f64> {
    if n == 0 || !(b > a) {
        return Err(Error::Domain(format!("need n >= 1 and a < b (n = {n}, a = {a}, b = {b})")));
    }
    let nf = n as f64;
    let k1 = first_lattice_index(a, n);
    let k_end = (b * nf).floor() as i64;
    let start = if omit_first { k1 + 1 } else { k1 };
    let mut sum = 0.0;
    for k in start..=k_end {
        let v = f(k as f64 / nf);
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("f({k}/{n}) = {v}")));
        }
        sum += v;
    }
    Ok(sum / nf)
}

/// Smallest `k` with `k/n > a`.
pub fn first_lattice_index(a: f64, n: u64) -> i64 {
    let nf = n as f64;
    let mut k = (a * nf).floor() as i64;
    while k as f64 / nf <= a {
        k += 1;
    }
    while (k - 1) as f64 / nf > a {
        k -= 1;
    }
    k
}

/// The first summand `(1/n) f(k₁/n)` of [`lattice_riemann`].
pub fn first_lattice_term(f: impl Fn(f64) -> f64, a: f64, n: u64) -> f64 {
    f(first_lattice_index(a, n) as f64 / n as f64) / n as f64
}

/// `(1/n) Σ (h''(ψ(k/n)))^{−1/2}` over `nα + 1 ≤ k ≤ nh'(d)`, for the
/// normalized phase. Bounded by a multiple of `d` for small `d`.
pub fn riemann_sum_bound_check(phase: &PhaseFunction, n: f64, d: f64) -> Result<f64> {
    if !(d > 0.0 && d <= PI / 2.0) {
        return Err(Error::Domain(format!("d must lie in (0, π/2], got {d}")));
    }
    let p = phase.normalized();
    let lo = (n * p.alpha() + 1.0).ceil() as i64;
    let hi = (n * p.d1(d)).floor() as i64;
    if hi < lo {
        return Ok(0.0);
    }
    let terms: Result<Vec<f64>> = (lo..=hi)
        .into_par_iter()
        .map(|k| {
            let x = k as f64 / n;
            if x >= p.beta() {
                return Ok(0.0);
            }
            let t = psi(&p, x)?;
            Ok(1.0 / p.d2(t).sqrt())
        })
        .collect();
    Ok(terms?.iter().sum::<f64>() / n)
}

/// One row of a convergence study. The error is derived on demand from the
/// report's limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub param: f64,
    pub s: f64,
    pub s_uncertainty: f64,
    pub external_sum: f64,
    pub periphery_sum: f64,
    pub central_sum: f64,
    pub grid_pow: u32,
    pub parseval_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub phase_label: String,
    pub limit: f64,
    pub quad_tol: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn err(&self, row: &ConvergenceRow) -> f64 {
        (row.s - self.limit).abs()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| self.err(r)).collect()
    }
}

/// `S(x)` and the partition sums for each parameter, against `L(h)`.
///
/// Refuses phases that fail [`validate`]. Parameters must be `≥ 2`; with a
/// nonzero winding number each `x·k` must be an integer. Rows come out sorted
/// by parameter.
pub fn convergence_study(phase: &PhaseFunction, params: &[f64], quad_tol: f64) -> Result<ConvergenceReport> {
    convergence_study_with(phase, params, quad_tol, None)
}

/// As [`convergence_study`], with a fixed `grid_pow` instead of the automatic
/// choice when `grid_pow` is given.
pub fn convergence_study_with(
    phase: &PhaseFunction,
    params: &[f64],
    quad_tol: f64,
    grid_pow: Option<u32>,
) -> Result<ConvergenceReport> {
    let report = validate(phase, 256)?;
    if !report.passed() {
        return Err(Error::Precondition(format!(
            "phase {} fails the convergence hypotheses: {}",
            phase.label,
            report.messages.join("; ")
        )));
    }
    let mut params = params.to_vec();
    if params.is_empty() {
        return Err(Error::Precondition("empty parameter list".into()));
    }
    if let Some(bad) = params.iter().find(|x| !(**x >= 2.0 && x.is_finite())) {
        return Err(Error::Precondition(format!("parameters must be finite and >= 2, got {bad}")));
    }
    for &x in &params {
        check_periodic(phase, x)?;
    }
    params.sort_by(f64::total_cmp);
    params.dedup();
    let limit = asymptotic_limit(phase, quad_tol)?;
    let rows: Result<Vec<ConvergenceRow>> = params
        .par_iter()
        .map(|&x| {
            let spec = match grid_pow {
                Some(p) => compute_spectrum(phase, x, p)?,
                None => compute_spectrum_auto(phase, x)?,
            };
            let norm = scaled_norm(&spec);
            let part = partition_terms(phase, x)?;
            let sums = partition_sums(&spec, &part)?;
            let r = x.sqrt();
            Ok(ConvergenceRow {
                param: x,
                s: norm.value,
                s_uncertainty: norm.uncertainty,
                external_sum: sums.external / r,
                periphery_sum: sums.periphery / r,
                central_sum: sums.central / r,
                grid_pow: spec.grid_pow,
                parseval_defect: spec.parseval_defect,
            })
        })
        .collect();
    Ok(ConvergenceReport { phase_label: phase.label.clone(), limit, quad_tol, rows: rows? })
}

/// Norm growth for phases that are not `C²`, where `‖e^{inh}‖` grows like
/// `log n` instead of `√n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogGrowthRow {
    pub n: f64,
    pub norm: f64,
    pub norm_over_log: f64,
    pub grid_pow: u32,
}

/// Unscaled norms from [`full_grid_l1`] with `2^grid_pow ≥ 256 n`, capped at
/// `2^24`. The aliased tail beyond the grid is of order `n/2^grid_pow`.
pub fn log_growth_study(phase: &PhaseFunction, ns: &[f64]) -> Result<Vec<LogGrowthRow>> {
    let mut ns = ns.to_vec();
    if let Some(bad) = ns.iter().find(|x| !(**x >= 2.0 && x.is_finite())) {
        return Err(Error::Precondition(format!("parameters must be finite and >= 2, got {bad}")));
    }
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    ns.iter()
        .map(|&n| {
            let grid_pow = ((256.0 * n * phase.max_abs_d1().max(1.0)).log2().ceil() as u32).clamp(10, 24);
            let norm = full_grid_l1(phase, n, grid_pow)?;
            Ok(LogGrowthRow { n, norm, norm_over_log: norm / n.ln(), grid_pow })
        })
        .collect()
}
