//! Arrays of fractional parts `⟨nφ(k/n)⟩`, Weyl sums, interval counts,
//! weighted means and the Van der Corput bound, plus the decomposition of
//! the central sum used in the last step of the convergence argument.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{psi, PhaseFunction};
use crate::quad::{adaptive, toward_endpoint};
use crate::spectrum::partition_terms;

/// Fractional parts `s_{n,k} = ⟨nφ(k/n)⟩` for the lattice points `k/n ∈ j0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FracArray {
    pub n: u64,
    /// `k/n`.
    pub points: Vec<f64>,
    /// `s_{n,k} ∈ [0, 1)`.
    pub values: Vec<f64>,
}

/// `⟨v⟩ = v − ⌊v⌋`, forced into `[0, 1)`.
pub fn frac(v: f64) -> f64 {
    let f = v - v.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

pub fn fractional_array(varphi: impl Fn(f64) -> f64 + Sync, n: u64, j0: (f64, f64)) -> FracArray {
    let nf = n as f64;
    let lo = (j0.0 * nf).ceil() as i64;
    let hi = (j0.1 * nf).floor() as i64;
    let ks: Vec<i64> = (lo..=hi).collect();
    let points: Vec<f64> = ks.iter().map(|&k| k as f64 / nf).collect();
    let values = points.par_iter().map(|&x| frac(nf * varphi(x))).collect();
    FracArray { n, points, values }
}

/// `|Σ exp(2πi j s)| / count`; 0 for an empty list.
pub fn weyl_sum(svals: &[f64], j: i64) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("weyl_sum needs j != 0".into()));
    }
    if svals.is_empty() {
        return Ok(0.0);
    }
    let jf = j as f64;
    let s: Complex64 = svals
        .iter()
        .map(|&s| Complex64::from_polar(1.0, 2.0 * PI * jf * s))
        .sum();
    Ok(s.norm() / svals.len() as f64)
}

fn in_half_open(v: f64, iv: (f64, f64)) -> bool {
    iv.0 <= v && v < iv.1
}

/// `𝓝ₙ/n`: the number of `k` with `s_{n,k} ∈ i` and `k/n ∈ jint`, over `n`.
/// Both intervals are half-open `[lo, hi)`.
pub fn count_test(svals: &[f64], kfracs: &[f64], n: f64, i: (f64, f64), jint: (f64, f64)) -> Result<f64> {
    if svals.len() != kfracs.len() {
        return Err(Error::Precondition(format!(
            "misaligned arrays: {} values, {} points",
            svals.len(),
            kfracs.len()
        )));
    }
    let c = svals
        .iter()
        .zip(kfracs)
        .filter(|(s, k)| in_half_open(**s, i) && in_half_open(**k, jint))
        .count();
    Ok(c as f64 / n)
}

/// `(1/n) Σ f(k/n) g(s_{n,k})`.
pub fn weighted_mean_test(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    svals: &[f64],
    kfracs: &[f64],
    n: f64,
) -> Result<f64> {
    if svals.len() != kfracs.len() {
        return Err(Error::Precondition(format!(
            "misaligned arrays: {} values, {} points",
            svals.len(),
            kfracs.len()
        )));
    }
    Ok(svals.iter().zip(kfracs).map(|(s, k)| f(*k) * g(*s)).sum::<f64>() / n)
}

/// `g(x) = |cos π(x + 1/4)|`, period 1, mean `2/π`.
pub fn final_step_g(x: f64) -> f64 {
    (PI * (x + 0.25)).cos().abs()
}

/// `(|f'(b) − f'(a)| + 2)(4/√μ + A)`.
pub fn van_der_corput_bound(df_a: f64, df_b: f64, mu: f64, a_const: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    if !(a_const >= 0.0) {
        return Err(Error::Domain(format!("A must be nonnegative, got {a_const}")));
    }
    Ok(((df_b - df_a).abs() + 2.0) * (4.0 / mu.sqrt() + a_const))
}

/// `|Σ_{a < k ≤ b} exp(2πi f(k))|` by direct summation.
pub fn exponential_sum(f: impl Fn(f64) -> f64 + Sync, a: i64, b: i64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let s: Complex64 = (a + 1..=b)
        .into_par_iter()
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * frac(f(k as f64))))
        .sum();
    s.norm()
}

/// Weyl magnitudes `|U_{n,j}|/n` of `⟨nφ(k/n)⟩` over a grid of `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub j: i64,
    pub interval: (f64, f64),
    /// `(n, |U_{n,j}|/n)` with strictly increasing `n`.
    pub values: Vec<(u64, f64)>,
    /// Least-squares slope of `log magnitude` against `log n`.
    pub fitted_decay: f64,
}

impl WeylReport {
    /// `max magnitude·√n` and `min magnitude·√n` over the grid.
    pub fn sqrt_n_constants(&self) -> (f64, f64) {
        let c: Vec<f64> = self.values.iter().map(|(n, m)| m * (*n as f64).sqrt()).collect();
        (c.iter().cloned().fold(f64::NEG_INFINITY, f64::max), c.iter().cloned().fold(f64::INFINITY, f64::min))
    }
}

pub fn weyl_report(varphi: impl Fn(f64) -> f64 + Sync, interval: (f64, f64), j: i64, ns: &[u64]) -> Result<WeylReport> {
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.is_empty() {
        return Err(Error::Precondition("empty n grid".into()));
    }
    let values = ns
        .par_iter()
        .map(|&n| {
            let arr = fractional_array(&varphi, n, interval);
            Ok((n, weyl_sum(&arr.values, j)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let fitted_decay = loglog_slope(&values);
    Ok(WeylReport { j, interval, values, fitted_decay })
}

fn loglog_slope(values: &[(u64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .filter(|(_, m)| *m > 0.0)
        .map(|(n, m)| ((*n as f64).ln(), m.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Pieces of `𝓓ₙ = (1/n) Σ_central f(ν/n) g(⟨ρ/π⟩) − (2/π) ∫_α^β f`,
/// `f = (h''∘ψ)^{−1/2}`, split at `h'(ε)` and `h'(π − ε)`:
/// `𝓓ₙ = A + B + C − E`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalStep {
    pub n: f64,
    pub epsilon: f64,
    /// Central sum `(1/n) Σ f g` over `nαₙ ≤ ν ≤ nβₙ`.
    pub central_sum: f64,
    /// `(2/π) ∫_α^β f = (2/π) ∫₀^π √h''`.
    pub integral: f64,
    pub d_n: f64,
    /// Central terms with `ν ≤ nh'(ε)`.
    pub a: f64,
    /// Middle terms minus `(2/π) ∫` over `J_ε = [h'(ε), h'(π−ε)]`.
    pub b: f64,
    /// Central terms with `ν ≥ nh'(π−ε)`.
    pub c: f64,
    /// `(2/π)` times the integral over the two ε-ends.
    pub e: f64,
    /// `(1/n) Σ f` over `nα + 1 ≤ ν ≤ nh'(ε)`, which majorizes `A`.
    pub a_majorant: f64,
    pub j_eps: (f64, f64),
}

pub fn final_step_decomposition(phase: &PhaseFunction, n: f64, epsilon: f64) -> Result<FinalStep> {
    if !(epsilon > 0.0 && epsilon < PI / 2.0) {
        return Err(Error::Domain(format!("epsilon must lie in (0, π/2), got {epsilon}")));
    }
    let p = phase.normalized();
    let part = partition_terms(phase, n)?;
    let (alpha, beta) = (p.alpha(), p.beta());
    let j_eps = (p.d1(epsilon), p.d1(PI - epsilon));

    // per-ν term f(ν/n)·g(⟨ρ/π⟩)/n on the normalized phase
    let term = |nu: i64| -> Result<(f64, f64)> {
        let x = nu as f64 / n;
        let t = psi(&p, x)?;
        let f = 1.0 / p.d2(t).sqrt();
        let rho = n * (p.h(t) - p.d1(t) * t);
        Ok((f / n, f * final_step_g(frac(rho / PI)) / n))
    };
    let (lo, hi) = (part.central.lo, part.central.hi);
    let a_end = (n * j_eps.0).floor() as i64;
    let c_start = (n * j_eps.1).ceil() as i64;
    let terms: Vec<(i64, f64)> = (lo..=hi)
        .into_par_iter()
        .map(|nu| Ok((nu, term(nu)?.1)))
        .collect::<Result<Vec<_>>>()?;
    let mut a = 0.0;
    let mut b_sum = 0.0;
    let mut c = 0.0;
    for (nu, v) in &terms {
        if *nu <= a_end {
            a += v;
        } else if *nu >= c_start {
            c += v;
        } else {
            b_sum += v;
        }
    }
    let central_sum = a + b_sum + c;

    let maj_lo = (n * alpha + 1.0).ceil() as i64;
    let a_majorant: f64 = (maj_lo..=a_end)
        .into_par_iter()
        .filter(|&nu| (nu as f64 / n) > alpha && (nu as f64 / n) < beta)
        .map(|nu| term(nu).map(|t| t.0))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .sum();

    // ∫ over x = h'(t) of (h''∘ψ)^{−1/2} equals ∫ √h'' dt
    let sq = |t: f64| p.d2(t).abs().sqrt();
    let tol = 1e-12;
    let end0 = toward_endpoint(sq, epsilon, tol)?.value;
    let end_pi = toward_endpoint(|s| sq(PI - s), epsilon, tol)?.value;
    let middle = adaptive(sq, epsilon, PI - epsilon, tol, 20_000)?.value;
    let two_pi = 2.0 / PI;
    let e = two_pi * (end0 + end_pi);
    let integral = two_pi * (end0 + end_pi + middle);
    let b = b_sum - two_pi * middle;
    Ok(FinalStep {
        n,
        epsilon,
        central_sum,
        integral,
        d_n: central_sum - integral,
        a,
        b,
        c,
        e,
        a_majorant,
        j_eps,
    })
}
