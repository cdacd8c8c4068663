//! Stationary-phase approximation of the central coefficients, Fresnel
//! integrals, and the two integration-by-parts bounds for oscillatory
//! integrals without stationary points.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{psi, PhaseFunction};
use crate::quad::adaptive;
use crate::spectrum::{CoefficientSpectrum, Region, TermPartition};

/// Default constant in the remainder bound `C/(n|h''|δ) + nω(δ)δ³`.
pub const DEFAULT_REMAINDER_C: f64 = 8.0;

/// Leading-order approximation of one central coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryApproximation {
    pub nu: i64,
    /// `t* = ψ(ν/n)`, the stationary point of `nh(t) − νt` in `(0, π)`.
    pub t_star: f64,
    /// `ρ = n(h(t*) − h'(t*)t*) = −n·h*(ν/n)`.
    pub rho: f64,
    /// `√(2/π) (n|h''(t*)|)^{−1/2} cos(ρ ± π/4)`, sign of `h''`.
    pub approx: f64,
    /// `1/(n|h''(t*)|δ)`.
    pub curvature_term: f64,
    /// `nω(δ)δ³`.
    pub omega_term: f64,
    pub c: f64,
    /// `c·curvature_term + omega_term`.
    pub remainder_bound: f64,
    /// ω is sampled on a grid and may underestimate the true modulus.
    pub sampled_omega: bool,
}

pub fn approximate_central(
    phase: &PhaseFunction,
    n: f64,
    nu: i64,
    part: &TermPartition,
) -> Result<StationaryApproximation> {
    approximate_central_with(phase, n, nu, part, DEFAULT_REMAINDER_C)
}

/// For `ν` in the central range of `part`.
///
/// Works on the phase as given: for `h'' < 0` the stationary point is where
/// `h' = ν/n` with `h'` decreasing and the Fresnel factor is `e^{−iπ/4}`.
pub fn approximate_central_with(
    phase: &PhaseFunction,
    n: f64,
    nu: i64,
    part: &TermPartition,
    c: f64,
) -> Result<StationaryApproximation> {
    if (part.n - n).abs() > 1e-9 * n.abs().max(1.0) {
        return Err(Error::Precondition(format!("partition built for n = {} not {n}", part.n)));
    }
    if part.classify(nu) != Region::Central {
        return Err(Error::Domain(format!("nu = {nu} is not a central index for n = {n}")));
    }
    let x = nu as f64 / n;
    let t_star = psi(phase, x)?;
    let d2 = phase.d2(t_star).abs();
    let rho = n * (phase.h(t_star) - phase.d1(t_star) * t_star);
    let s = if phase.sign < 0 { -1.0 } else { 1.0 };
    let approx = (2.0 / PI).sqrt() / (n * d2).sqrt() * (rho + s * FRAC_PI_4).cos();
    let curvature_term = 1.0 / (n * d2 * part.delta);
    let omega_term = n * part.omega_delta * part.delta.powi(3);
    Ok(StationaryApproximation {
        nu,
        t_star,
        rho,
        approx,
        curvature_term,
        omega_term,
        c,
        remainder_bound: c * curvature_term + omega_term,
        sampled_omega: true,
    })
}

/// One row of an exact-versus-approximate comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryRow {
    pub nu: i64,
    pub exact: f64,
    pub approx: f64,
    pub abs_err: f64,
    pub remainder_bound: f64,
    pub curvature_term: f64,
    pub omega_term: f64,
}

/// Compares every central coefficient of `spec` with its approximation.
pub fn compare_central(
    phase: &PhaseFunction,
    spec: &CoefficientSpectrum,
    part: &TermPartition,
    c: f64,
) -> Result<Vec<StationaryRow>> {
    let n = spec.x;
    part.central_indices()
        .par_iter()
        .map(|&nu| {
            let exact = spec
                .get(nu)
                .ok_or_else(|| Error::Precondition(format!("nu = {nu} outside the spectrum window")))?;
            let a = approximate_central_with(phase, n, nu, part, c)?;
            Ok(StationaryRow {
                nu,
                exact: exact.re,
                approx: a.approx,
                abs_err: (exact - a.approx).norm(),
                remainder_bound: a.remainder_bound,
                curvature_term: a.curvature_term,
                omega_term: a.omega_term,
            })
        })
        .collect()
}

/// Smallest `C ≥ 0` with `abs_err ≤ C·curvature_term + omega_term` on all rows.
pub fn minimal_remainder_constant(rows: &[StationaryRow]) -> f64 {
    rows.iter()
        .map(|r| (r.abs_err - r.omega_term) / r.curvature_term)
        .fold(0.0, f64::max)
}

/// `∫₀^∞ e^{iu²} du = (√π/2) e^{iπ/4}`.
pub fn fresnel_full() -> Complex64 {
    Complex64::from_polar(PI.sqrt() / 2.0, FRAC_PI_4)
}

/// `∫_x^∞ e^{iu²} du` for `x > 0`.
///
/// Rotating the path to `u = x + e^{iπ/4}s` gives
/// `e^{iπ/4} e^{ix²} ∫₀^∞ e^{−√2xs − s²} e^{i√2xs} ds`, whose integrand decays
/// monotonically in modulus; it is cut where the modulus drops below `1e−17`.
pub fn fresnel_tail(x: f64) -> Result<Complex64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("fresnel_tail needs x > 0, got {x}")));
    }
    let a = SQRT_2 * x;
    let cut = 39.2;
    let s_max = 2.0 * cut / (a + (a * a + 4.0 * cut).sqrt());
    let f = |s: f64| Complex64::from_polar((-a * s - s * s).exp(), a * s);
    let est = adaptive(f, 0.0, s_max, 1e-14, 4000)?;
    Ok(Complex64::from_polar(1.0, FRAC_PI_4 + x * x) * est.value)
}

/// `Var_{[−π,π]}(1/φ')` for `φ(t) = nh(t) − νt`, which bounds `|2π a_{n,ν}|`.
///
/// Computed as `∫ n|h''| / (nh' − ν)² dt` on `[−π, 0]` and `[0, π]` plus the
/// jumps of `1/φ'` at 0 and across `±π` (nonzero only for phases whose `h'`
/// jumps there).
pub fn lemma1_var_bound(phase: &PhaseFunction, n: f64, nu: i64) -> Result<f64> {
    let nu_f = nu as f64;
    let (lo, hi) = phase.d1_range();
    if !(nu_f < n * lo || nu_f > n * hi) {
        return Err(Error::Precondition(format!(
            "nu/n = {} lies in the range of h' [{lo}, {hi}]: stationary point",
            nu_f / n
        )));
    }
    let dphi = |t: f64| n * phase.d1(t) - nu_f;
    let f = |t: f64| {
        let d = dphi(t);
        n * phase.d2(t).abs() / (d * d)
    };
    let scale = 1.0 / (nu_f - n * lo).abs().min((nu_f - n * hi).abs());
    let tol = 1e-12 * scale.max(1e-300);
    let left = adaptive(f, -PI, 0.0, tol, 20_000)?;
    let right = adaptive(f, 0.0, PI, tol, 20_000)?;
    let e = 1e-12;
    let jump0 = (1.0 / dphi(e) - 1.0 / dphi(-e)).abs();
    let jump_pi = (1.0 / dphi(PI - e) - 1.0 / dphi(-PI + e)).abs();
    Ok(left.value + right.value + jump0 + jump_pi)
}

/// `2/min(|φ'(a)|, |φ'(b)|)`, the bound on `|∫_a^b e^{iφ}|` for monotone `φ'`.
pub fn lemma1_monotone_bound(dphi_a: f64, dphi_b: f64) -> Result<f64> {
    if dphi_a == 0.0 || dphi_b == 0.0 || !dphi_a.is_finite() || !dphi_b.is_finite() {
        return Err(Error::Domain(format!(
            "derivatives at the endpoints must be finite and nonzero, got {dphi_a}, {dphi_b}"
        )));
    }
    Ok(2.0 / dphi_a.abs().min(dphi_b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{build_linear, build_sine, legendre};
    use crate::quad::GaussLegendre;
    use crate::spectrum::{coefficient_quadrature, partition_terms};

    #[test]
    fn sine_center_example() {
        let p = build_sine();
        let part = partition_terms(&p, 1000.0).unwrap();
        let a = approximate_central(&p, 1000.0, 0, &part).unwrap();
        assert!((a.t_star - PI / 2.0).abs() < 1e-12);
        assert!((a.rho - 1000.0).abs() < 1e-9);
        let want = (2.0 / (PI * 1000.0)).sqrt() * (1000.0 - FRAC_PI_4).cos();
        assert!((a.approx - want).abs() < 1e-12);
        assert!(a.sampled_omega);
    }

    #[test]
    fn rho_matches_legendre() {
        let p = build_sine();
        let n = 1000.0;
        let part = partition_terms(&p, n).unwrap();
        for nu in part.central_indices().into_iter().step_by(37) {
            let a = approximate_central(&p, n, nu, &part).unwrap();
            let l = legendre(&p, nu as f64 / n).unwrap();
            assert!((a.rho + n * l).abs() < 1e-9, "nu = {nu}");
            assert!((p.d1(a.t_star) - nu as f64 / n).abs() < 1e-10);
        }
    }

    #[test]
    fn non_central_index_is_rejected() {
        let p = build_sine();
        let part = partition_terms(&p, 1000.0).unwrap();
        assert!(matches!(approximate_central(&p, 1000.0, 999, &part), Err(Error::Domain(_))));
    }

    #[test]
    fn fresnel_pieces_add_up() {
        let rule = GaussLegendre::new(30);
        for x in [0.5, 2.0, 10.0] {
            let head = rule.composite(|u| Complex64::from_polar(1.0, u * u), 0.0, x, 200);
            let tail = fresnel_tail(x).unwrap();
            assert!((head + tail - fresnel_full()).norm() < 1e-12, "x = {x}");
            assert!(tail.norm() <= 1.0 / x);
        }
        assert!(fresnel_tail(0.0).is_err());
    }

    #[test]
    fn var_bound_examples() {
        let l = build_linear(1);
        assert_eq!(lemma1_var_bound(&l, 5.0, 3).unwrap(), 0.0);
        let s = build_sine();
        let b = lemma1_var_bound(&s, 10.0, 20).unwrap();
        let a = coefficient_quadrature(&s, 10.0, 20, 1e-14).unwrap();
        assert!(b >= 2.0 * PI * a.norm());
        let closed: f64 = 2.0 * (1.0 / (10.0 - 20.0_f64) - 1.0 / (-10.0 - 20.0_f64)).abs();
        assert!((b - closed).abs() < 1e-10, "{b} vs {closed}");
        assert!(matches!(lemma1_var_bound(&s, 10.0, 5), Err(Error::Precondition(_))));
    }

    #[test]
    fn monotone_bound() {
        assert_eq!(lemma1_monotone_bound(2.0, 4.0).unwrap(), 1.0);
        assert_eq!(lemma1_monotone_bound(4.0, -2.0).unwrap(), 1.0);
        assert!(lemma1_monotone_bound(0.0, 1.0).is_err());
    }
}
