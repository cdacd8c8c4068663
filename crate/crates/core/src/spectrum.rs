//! Fourier coefficients `a_{x,ν}` of `e^{ixh(t)}`, the scaled norm
//! `S(x) = Σ|a_{x,ν}| / √x`, and the external / periphery / central
//! partition of the index set.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{choose_phi, ModulusTable, PhaseFunction};
use crate::quad::GaussLegendre;
use crate::specfun::trigamma;

/// Largest accepted `grid_pow` (2²⁶ complex samples ≈ 1 GiB).
pub const MAX_GRID_POW: u32 = 26;
/// Parseval defect above which a spectrum is declared under-resolved.
pub const DEFECT_GATE: f64 = 1e-6;
const TV_SAMPLES: usize = 4096;

/// Rejects `(x, k)` pairs for which `e^{ixh}` is not 2π-periodic.
pub fn check_periodic(phase: &PhaseFunction, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("x must be finite, got {x}")));
    }
    if phase.winding_k != 0 {
        let xk = x * phase.winding_k as f64;
        if (xk - xk.round()).abs() > 1e-9 * (1.0 + xk.abs()) {
            return Err(Error::NonPeriodic { x, k: phase.winding_k });
        }
    }
    Ok(())
}

/// `a_{x,ν} = (1/2π) ∫_{−π}^{π} e^{i(xh(t) − νt)} dt` by composite
/// Gauss–Legendre quadrature.
///
/// The interval is split at 0 and cut into panels of width about one
/// oscillation period `2π/(|x|·max|h'| + |ν| + 1)`; the panel count is doubled
/// until two successive values agree to `tol`.
pub fn coefficient_quadrature(phase: &PhaseFunction, x: f64, nu: i64, tol: f64) -> Result<Complex64> {
    check_periodic(phase, x)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol must be positive, got {tol}")));
    }
    let rule = GaussLegendre::new(20);
    quadrature_with_rule(phase, x, nu, tol, &rule)
}

fn quadrature_with_rule(
    phase: &PhaseFunction,
    x: f64,
    nu: i64,
    tol: f64,
    rule: &GaussLegendre,
) -> Result<Complex64> {
    const MAX_PANELS: usize = 1 << 22;
    let nu_f = nu as f64;
    let f = |t: f64| Complex64::from_polar(1.0, x * phase.h(t) - nu_f * t);
    let freq = x.abs() * phase.max_abs_d1() + nu_f.abs() + 1.0;
    let mut panels = (freq / 2.0).ceil().max(2.0) as usize;
    let eval = |p: usize| (rule.composite(f, -PI, 0.0, p) + rule.composite(f, 0.0, PI, p)) / (2.0 * PI);
    let mut prev = eval(panels);
    loop {
        panels *= 2;
        let cur = eval(panels);
        if !(cur.re.is_finite() && cur.im.is_finite()) {
            return Err(Error::NonFinite(format!("coefficient integrand at x = {x}, nu = {nu}")));
        }
        let err = (cur - prev).norm();
        if err <= tol {
            return Ok(cur);
        }
        if panels >= MAX_PANELS {
            return Err(Error::Budget { what: "coefficient quadrature", estimate: cur.norm(), error: err });
        }
        prev = cur;
    }
}

/// [`coefficient_quadrature`] for many indices, in parallel.
pub fn coefficients_quadrature(
    phase: &PhaseFunction,
    x: f64,
    nus: &[i64],
    tol: f64,
) -> Result<Vec<Complex64>> {
    check_periodic(phase, x)?;
    let rule = GaussLegendre::new(20);
    nus.par_iter().map(|&nu| quadrature_with_rule(phase, x, nu, tol, &rule)).collect()
}

/// A window of coefficients `a_{x,ν}`, `nu_min ≤ ν ≤ nu_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpectrum {
    pub x: f64,
    pub grid_pow: u32,
    pub nu_min: i64,
    pub nu_max: i64,
    pub coeffs: Vec<Complex64>,
    /// Certified bound on `Σ_{ν outside the window} |a_{x,ν}|`.
    pub tail_bound: f64,
    /// `|Σ_window |a|² − 1|`.
    pub parseval_defect: f64,
}

impl CoefficientSpectrum {
    pub fn get(&self, nu: i64) -> Option<Complex64> {
        if nu < self.nu_min || nu > self.nu_max {
            return None;
        }
        self.coeffs.get((nu - self.nu_min) as usize).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, c)| (self.nu_min + i as i64, *c))
    }

    /// `Σ |a_ν|` over the window.
    pub fn l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }
}

/// Half-width `W = max(32, 4√|x|, 8(|x|·m3/2)^{1/3})` of the margin kept
/// beyond the band `x·[min h', max h']`, with `m3 = max(|h'''(0)|, |h'''(π)|)`.
///
/// Past the band edge the coefficients decay on the Airy scale
/// `(|x|·|h'''|/2)^{1/3}`; eight such scales leave a relative amplitude
/// below `1e−7`.
pub fn window_margin(x: f64, m3: f64) -> f64 {
    let airy = 8.0 * (x.abs() * m3 / 2.0).cbrt();
    let base = (4.0 * x.abs().sqrt()).max(32.0);
    if airy.is_finite() {
        base.max(airy)
    } else {
        base
    }
}

/// Retained index window `[⌈x·min h' − W⌉, ⌊x·max h' + W⌋]`.
pub fn coefficient_window(phase: &PhaseFunction, x: f64) -> (i64, i64) {
    let (lo, hi) = phase.d1_range();
    let (a, b) = (x * lo, x * hi);
    let m3 = phase.d3(0.0).abs().max(phase.d3(PI).abs());
    let w = window_margin(x, m3);
    ((a.min(b) - w).ceil() as i64, (a.max(b) + w).floor() as i64)
}

/// Smallest `grid_pow` meeting the resolution requirement with margin:
/// `2^p ≥ 8(|x|·max|h'| + 64)` and the window fits in `[−2^{p−1}, 2^{p−1})`.
pub fn auto_grid_pow(phase: &PhaseFunction, x: f64) -> u32 {
    let (lo, hi) = coefficient_window(phase, x);
    let need = (8.0 * (x.abs() * phase.max_abs_d1() + 64.0))
        .max(2.0 * (lo.unsigned_abs().max(hi.unsigned_abs()) as f64 + 1.0));
    let mut p = 6;
    while ((1u64 << p) as f64) < need {
        p += 1;
    }
    p
}

/// Sampled total variation of `h'` over one period, never less than
/// `2|h'(π) − h'(0)|`.
pub fn total_variation_d1(phase: &PhaseFunction) -> f64 {
    let mut tv = 0.0;
    let mut prev = phase.d1(-PI);
    for i in 1..=TV_SAMPLES {
        let v = phase.d1(-PI + 2.0 * PI * i as f64 / TV_SAMPLES as f64);
        tv += (v - prev).abs();
        prev = v;
    }
    let floor = 2.0 * (phase.beta() - phase.alpha()).abs();
    if tv.is_finite() {
        tv.max(floor)
    } else {
        f64::INFINITY
    }
}

/// Bound on `Σ |a_{x,ν}|` over `ν < nu_min` and `ν > nu_max`.
///
/// Outside the band `|φ'| ≥ D` for `φ = xh − νt`, so the variation bound gives
/// `|a_{x,ν}| ≤ |x|·TV(h') / (2π D²)`; the distances to the band grow by one
/// per index and `Σ_{m≥0} (D₀+m)^{−2} = ψ₁(D₀)`.
pub fn tail_bound(phase: &PhaseFunction, x: f64, nu_min: i64, nu_max: i64) -> f64 {
    let (lo, hi) = phase.d1_range();
    let (a, b) = ((x * lo).min(x * hi), (x * lo).max(x * hi));
    let d_hi = nu_max as f64 + 1.0 - b;
    let d_lo = a - (nu_min as f64 - 1.0);
    if !(d_hi > 0.0 && d_lo > 0.0) {
        return f64::INFINITY;
    }
    let tv = total_variation_d1(phase);
    let s = trigamma(d_hi).unwrap_or(f64::INFINITY) + trigamma(d_lo).unwrap_or(f64::INFINITY);
    x.abs() * tv / (2.0 * PI) * s
}

fn sampled_dft(phase: &PhaseFunction, x: f64, grid_pow: u32) -> Result<Vec<Complex64>> {
    if grid_pow > MAX_GRID_POW {
        return Err(Error::Precondition(format!("grid_pow {grid_pow} exceeds {MAX_GRID_POW}")));
    }
    let n = 1usize << grid_pow;
    let step = 2.0 * PI / n as f64;
    // t_j = −π + j·step, so a_ν = (−1)^ν/N · DFT_ν
    let mut buf: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|j| Complex64::from_polar(1.0, x * phase.h(-PI + j as f64 * step)))
        .collect();
    if buf.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NonFinite(format!("phase samples at x = {x}")));
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    fft.process(&mut buf);
    let scale = 1.0 / n as f64;
    Ok(buf.into_iter().map(|c| c * scale).collect())
}

fn dft_coefficient(dft: &[Complex64], nu: i64) -> Complex64 {
    let n = dft.len() as i64;
    let c = dft[nu.rem_euclid(n) as usize];
    if nu.rem_euclid(2) == 0 {
        c
    } else {
        -c
    }
}

/// Coefficients from `2^grid_pow` uniform samples and one FFT, restricted to
/// [`coefficient_window`], with a certified tail bound.
///
/// Fails with [`Error::UnderResolved`] when `2^grid_pow < 8(|x|·max|h'| + 1)`,
/// when the window does not fit in `[−2^{grid_pow−1}, 2^{grid_pow−1})`, or
/// when the Parseval defect of the window exceeds [`DEFECT_GATE`].
pub fn compute_spectrum(phase: &PhaseFunction, x: f64, grid_pow: u32) -> Result<CoefficientSpectrum> {
    check_periodic(phase, x)?;
    let n = (1u64 << grid_pow.min(63)) as f64;
    let need = 8.0 * (x.abs() * phase.max_abs_d1() + 1.0);
    if n < need {
        return Err(Error::UnderResolved {
            grid_pow,
            detail: format!("2^grid_pow = {n} < 8(|x| max|h'| + 1) = {need:.1}"),
        });
    }
    let (nu_min, nu_max) = coefficient_window(phase, x);
    let half = (n / 2.0) as i64;
    if nu_min < -half || nu_max >= half {
        return Err(Error::UnderResolved {
            grid_pow,
            detail: format!("coefficient window [{nu_min}, {nu_max}] exceeds [-{half}, {half})"),
        });
    }
    let dft = sampled_dft(phase, x, grid_pow)?;
    let coeffs: Vec<Complex64> = (nu_min..=nu_max).map(|nu| dft_coefficient(&dft, nu)).collect();
    let energy: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let parseval_defect = (energy - 1.0).abs();
    if parseval_defect > DEFECT_GATE {
        return Err(Error::UnderResolved {
            grid_pow,
            detail: format!("Parseval defect {parseval_defect:.3e} > {DEFECT_GATE:e}"),
        });
    }
    let tail_bound = tail_bound(phase, x, nu_min, nu_max);
    Ok(CoefficientSpectrum { x, grid_pow, nu_min, nu_max, coeffs, tail_bound, parseval_defect })
}

/// [`compute_spectrum`] with [`auto_grid_pow`].
pub fn compute_spectrum_auto(phase: &PhaseFunction, x: f64) -> Result<CoefficientSpectrum> {
    compute_spectrum(phase, x, auto_grid_pow(phase, x))
}

/// `Σ |DFT_ν| / 2^grid_pow` over every bin, without window or defect gate.
///
/// Meant for phases that are not `C²` (e.g. `|t|`), whose coefficients decay
/// only like `ν^{−2}`; aliasing makes this a slight underestimate of the norm
/// and no tail certificate is given.
pub fn full_grid_l1(phase: &PhaseFunction, x: f64, grid_pow: u32) -> Result<f64> {
    check_periodic(phase, x)?;
    Ok(sampled_dft(phase, x, grid_pow)?.iter().map(|c| c.norm()).sum())
}

/// `S(x)` with uncertainty `tail_bound/√|x|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub uncertainty: f64,
}

pub fn scaled_norm(spec: &CoefficientSpectrum) -> NormEstimate {
    let r = spec.x.abs().sqrt();
    NormEstimate { value: spec.l1() / r, uncertainty: spec.tail_bound / r }
}

/// Which part of the index set a coefficient belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    External,
    PeripheryLeft,
    Central,
    PeripheryRight,
}

/// Closed integer interval, empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexRange {
    pub lo: i64,
    pub hi: i64,
}

impl IndexRange {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }
    pub fn len(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo) as u64 + 1
        }
    }
    pub fn contains(&self, nu: i64) -> bool {
        self.lo <= nu && nu <= self.hi
    }
}

/// Index partition for a given `n`, expressed for the normalized phase
/// (`h'' > 0`, so `α < β`). For a phase with `h'' < 0` the index `ν` of the
/// original phase is classified through `sign·ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermPartition {
    pub n: f64,
    pub sign: i8,
    pub phi: f64,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_n: f64,
    pub beta_n: f64,
    /// Sampled `ω(δ)` of `h''`.
    pub omega_delta: f64,
    /// External indices: `ν ≤ external_below` or `ν ≥ external_above`.
    pub external_below: i64,
    pub external_above: i64,
    pub periphery_left: IndexRange,
    pub central: IndexRange,
    pub periphery_right: IndexRange,
    pub phi_diagnostic: Option<String>,
}

impl TermPartition {
    /// Region of index `nu` of the original (not normalized) phase.
    ///
    /// Precedence is external, central, periphery; with it the regions are
    /// disjoint and cover all integers.
    pub fn classify(&self, nu: i64) -> Region {
        let m = if self.sign < 0 { -nu } else { nu };
        if m <= self.external_below || m >= self.external_above {
            Region::External
        } else if self.central.contains(m) {
            Region::Central
        } else if self.periphery_left.contains(m) {
            Region::PeripheryLeft
        } else {
            Region::PeripheryRight
        }
    }

    /// Central indices of the original phase, in increasing order.
    pub fn central_indices(&self) -> Vec<i64> {
        let mut v: Vec<i64> = (self.central.lo..=self.central.hi)
            .map(|m| if self.sign < 0 { -m } else { m })
            .collect();
        v.sort_unstable();
        v
    }
}

/// Builds the partition: `Φ` from [`choose_phi`], `δ = min(Φ/√n, π/8)`,
/// `αₙ = max(h'(2δ), α + 1/n)`, `βₙ = min(h'(π − 2δ), β − 1/n)` on the
/// normalized phase.
///
/// External: `ν ∉ (αn+1, βn−1)`. Central: `nαₙ ≤ ν ≤ nβₙ`. Periphery: the
/// rest, left of `nαₙ` or right of `nβₙ`. When `αₙ ≥ βₙ` the central range is
/// empty.
pub fn partition_terms(phase: &PhaseFunction, n: f64) -> Result<TermPartition> {
    if !(n >= 2.0) {
        return Err(Error::Precondition(format!("partition needs n >= 2, got {n}")));
    }
    let p = phase.normalized();
    let (alpha, beta) = (p.alpha(), p.beta());
    if !(alpha < beta) {
        return Err(Error::Precondition(format!(
            "h' must increase strictly on (0, π) after normalization (α = {alpha}, β = {beta})"
        )));
    }
    let choice = choose_phi(&p, n)?;
    let delta = (choice.phi / n.sqrt()).min(PI / 8.0);
    let alpha_n = p.d1(2.0 * delta).max(alpha + 1.0 / n);
    let beta_n = p.d1(PI - 2.0 * delta).min(beta - 1.0 / n);
    let grid = ((4.0 * PI / delta).ceil() as usize).max(1024);
    let omega_delta = ModulusTable::new(&p, grid).omega(delta);

    let external_below = (alpha * n + 1.0).floor() as i64;
    let external_above = (beta * n - 1.0).ceil() as i64;
    let c_lo = (n * alpha_n).ceil() as i64;
    let c_hi = (n * beta_n).floor() as i64;
    let central = IndexRange { lo: c_lo.max(external_below + 1), hi: c_hi.min(external_above - 1) };
    let periphery_left = IndexRange { lo: external_below + 1, hi: (c_lo - 1).min(external_above - 1) };
    let periphery_right = IndexRange {
        lo: (c_hi + 1).max(periphery_left.hi + 1).max(external_below + 1),
        hi: external_above - 1,
    };
    Ok(TermPartition {
        n,
        sign: phase.sign,
        phi: choice.phi,
        delta,
        alpha,
        beta,
        alpha_n,
        beta_n,
        omega_delta,
        external_below,
        external_above,
        periphery_left,
        central,
        periphery_right,
        phi_diagnostic: choice.diagnostic,
    })
}

/// `Σ|a|` over the external, periphery and central indices of the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionSums {
    pub external: f64,
    pub periphery: f64,
    pub central: f64,
}

impl PartitionSums {
    pub fn total(&self) -> f64 {
        self.external + self.periphery + self.central
    }
}

pub fn partition_sums(spec: &CoefficientSpectrum, part: &TermPartition) -> Result<PartitionSums> {
    if (spec.x - part.n).abs() > 1e-9 * part.n.abs().max(1.0) {
        return Err(Error::Precondition(format!(
            "spectrum built for x = {} but partition for n = {}",
            spec.x, part.n
        )));
    }
    let mut s = PartitionSums { external: 0.0, periphery: 0.0, central: 0.0 };
    for (nu, c) in spec.iter() {
        let a = c.norm();
        match part.classify(nu) {
            Region::External => s.external += a,
            Region::Central => s.central += a,
            Region::PeripheryLeft | Region::PeripheryRight => s.periphery += a,
        }
    }
    Ok(s)
}

/// Spectra for several `x` in parallel, each with [`auto_grid_pow`].
pub fn compute_spectra(phase: &PhaseFunction, xs: &[f64]) -> Vec<Result<CoefficientSpectrum>> {
    xs.par_iter().map(|&x| compute_spectrum_auto(phase, x)).collect()
}
