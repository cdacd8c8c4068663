//! Phase functions `h` with `h(t + 2π) = h(t) + 2kπ`, their derivatives,
//! hypothesis validation, the inverse `ψ` of `h'` on `(0, π)`, the Legendre
//! transform and the modulus of continuity of `h''`.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A shared real-valued function of one real variable.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Number of samples used to bracket the range of `h'` at construction.
const RANGE_SAMPLES: usize = 4096;

/// A phase `h` together with `h'`, `h''`, `h'''`.
///
/// `sign` is the sign of `h''` on `(0, π)` as declared by the builder;
/// [`PhaseFunction::normalized`] returns `−h` when it is negative so that
/// downstream code can work with `h'' > 0`.
#[derive(Clone)]
pub struct PhaseFunction {
    h: RealFn,
    d1: RealFn,
    d2: RealFn,
    d3: RealFn,
    pub winding_k: i64,
    pub odd: bool,
    pub sign: i8,
    pub label: String,
    d1_min: f64,
    d1_max: f64,
}

impl fmt::Debug for PhaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseFunction")
            .field("label", &self.label)
            .field("winding_k", &self.winding_k)
            .field("odd", &self.odd)
            .field("sign", &self.sign)
            .field("d1_range", &(self.d1_min, self.d1_max))
            .finish()
    }
}

impl PhaseFunction {
    /// Assembles a phase from analytic derivatives.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: impl Into<String>,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d3: impl Fn(f64) -> f64 + Send + Sync + 'static,
        winding_k: i64,
        odd: bool,
        sign: i8,
    ) -> Self {
        Self::from_parts(label.into(), Arc::new(h), Arc::new(d1), Arc::new(d2), Arc::new(d3), winding_k, odd, sign)
    }

    #[allow(clippy::too_many_arguments)]
    fn from_parts(
        label: String,
        h: RealFn,
        d1: RealFn,
        d2: RealFn,
        d3: RealFn,
        winding_k: i64,
        odd: bool,
        sign: i8,
    ) -> Self {
        let mut d1_min = f64::INFINITY;
        let mut d1_max = f64::NEG_INFINITY;
        let samples = (0..=RANGE_SAMPLES)
            .map(|i| -PI + 2.0 * PI * i as f64 / RANGE_SAMPLES as f64)
            .chain([0.0, PI]);
        for t in samples {
            let v = d1(t);
            if v.is_finite() {
                d1_min = d1_min.min(v);
                d1_max = d1_max.max(v);
            }
        }
        Self {
            h,
            d1,
            d2,
            d3,
            winding_k,
            odd,
            sign: if sign < 0 { -1 } else { 1 },
            label,
            d1_min,
            d1_max,
        }
    }

    /// User-supplied `h` with finite-difference derivatives.
    ///
    /// Central differences with steps `1e-5`, `1e-3`, `2e-3` for `h'`, `h''`,
    /// `h'''`; each is accurate to `O(step²)` for smooth `h` plus rounding of
    /// order `ε·|h| / stepᵐ`. The sign of `h''` is taken at `π/2`.
    pub fn from_fn(
        label: impl Into<String>,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        winding_k: i64,
        odd: bool,
    ) -> Self {
        let h: RealFn = Arc::new(h);
        let (h1, h2, h3) = (h.clone(), h.clone(), h.clone());
        let d1: RealFn = Arc::new(move |t| {
            let s = 1e-5;
            (h1(t + s) - h1(t - s)) / (2.0 * s)
        });
        let d2: RealFn = Arc::new(move |t| {
            let s = 1e-3;
            (h2(t + s) - 2.0 * h2(t) + h2(t - s)) / (s * s)
        });
        let d3: RealFn = Arc::new(move |t| {
            let s = 2e-3;
            (h3(t + 2.0 * s) - 2.0 * h3(t + s) + 2.0 * h3(t - s) - h3(t - 2.0 * s)) / (2.0 * s * s * s)
        });
        let sign = if d2(PI / 2.0) < 0.0 { -1 } else { 1 };
        Self::from_parts(label.into(), h, d1, d2, d3, winding_k, odd, sign)
    }

    pub fn h(&self, t: f64) -> f64 {
        (self.h)(t)
    }
    pub fn d1(&self, t: f64) -> f64 {
        (self.d1)(t)
    }
    pub fn d2(&self, t: f64) -> f64 {
        (self.d2)(t)
    }
    pub fn d3(&self, t: f64) -> f64 {
        (self.d3)(t)
    }

    /// `α = h'(0)`.
    pub fn alpha(&self) -> f64 {
        self.d1(0.0)
    }

    /// `β = h'(π)`.
    pub fn beta(&self) -> f64 {
        self.d1(PI)
    }

    /// Sampled `(min, max)` of `h'` over a full period.
    pub fn d1_range(&self) -> (f64, f64) {
        (self.d1_min, self.d1_max)
    }

    /// Sampled `max |h'|` over a full period.
    pub fn max_abs_d1(&self) -> f64 {
        self.d1_min.abs().max(self.d1_max.abs())
    }

    /// `c·h` for `c ≠ 0`; rejected when `c·k` is not an integer.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(Error::Domain(format!("scale factor must be finite and nonzero, got {c}")));
        }
        let k = c * self.winding_k as f64;
        if (k - k.round()).abs() > 1e-12 {
            return Err(Error::NonPeriodic { x: c, k: self.winding_k });
        }
        let (h, d1, d2, d3) = (self.h.clone(), self.d1.clone(), self.d2.clone(), self.d3.clone());
        let sign = if c < 0.0 { -self.sign } else { self.sign };
        Ok(Self::from_parts(
            format!("{c}*({})", self.label),
            Arc::new(move |t| c * h(t)),
            Arc::new(move |t| c * d1(t)),
            Arc::new(move |t| c * d2(t)),
            Arc::new(move |t| c * d3(t)),
            k.round() as i64,
            self.odd,
            sign,
        ))
    }

    /// The phase with `h'' > 0` on `(0, π)`: `self` or `−self`.
    ///
    /// `e^{−ixh}` is the conjugate of `e^{ixh}`, so its coefficients are
    /// `conj(a_{x,−ν})` and every norm is unchanged.
    pub fn normalized(&self) -> Self {
        if self.sign > 0 {
            return self.clone();
        }
        let (h, d1, d2, d3) = (self.h.clone(), self.d1.clone(), self.d2.clone(), self.d3.clone());
        Self::from_parts(
            format!("-({})", self.label),
            Arc::new(move |t| -h(t)),
            Arc::new(move |t| -d1(t)),
            Arc::new(move |t| -d2(t)),
            Arc::new(move |t| -d3(t)),
            -self.winding_k,
            self.odd,
            1,
        )
    }
}

/// `h(t) = sin t`.
pub fn build_sine() -> PhaseFunction {
    PhaseFunction::new("sine", f64::sin, f64::cos, |t: f64| -t.sin(), |t: f64| -t.cos(), 0, true, -1)
}

/// Phase of the Blaschke product `∏ (e^{it} − α_j)/(1 − α_j e^{it})` written
/// as `e^{−ih(t)}`, for real zeros `α_j ∈ (0, 1)`.
///
/// Each factor winds once in the positive direction, so `h` decreases by
/// `2π` per factor per period: `winding_k = −J`.
pub fn build_blaschke(alphas: &[f64]) -> Result<PhaseFunction> {
    if alphas.is_empty() {
        return Err(Error::Domain("blaschke phase needs at least one zero".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(Error::Domain(format!("blaschke zero {a} outside (0,1)")));
    }
    let zeros: Vec<Complex64> = alphas.iter().map(|&a| Complex64::new(a, 0.0)).collect();
    let label = format!("blaschke:{}", join_floats(alphas));
    Ok(blaschke_phase(label, zeros))
}

/// Blaschke phase for arbitrary zeros in the open unit disk.
///
/// With non-real zeros `h` is no longer odd, and zeros of both signs make `h''`
/// change sign on `(0, π)`; such phases fall outside the convergence theorem
/// and are meant for exploratory runs.
pub fn build_blaschke_general(zeros: &[Complex64]) -> Result<PhaseFunction> {
    if zeros.is_empty() {
        return Err(Error::Domain("blaschke phase needs at least one zero".into()));
    }
    if let Some(a) = zeros.iter().find(|a| !(a.norm() < 1.0)) {
        return Err(Error::Domain(format!("blaschke zero {a} outside the open unit disk")));
    }
    let label = format!(
        "blaschke:{}",
        zeros.iter().map(format_complex).collect::<Vec<_>>().join(",")
    );
    Ok(blaschke_phase(label, zeros.to_vec()))
}

fn blaschke_phase(label: String, zeros: Vec<Complex64>) -> PhaseFunction {
    let odd = zeros.iter().all(|a| a.im == 0.0);
    let j = zeros.len() as i64;
    let z: Arc<[Complex64]> = zeros.into();
    let (z0, z1, z2, z3) = (z.clone(), z.clone(), z.clone(), z.clone());
    // h(t) = −J t + 2 Σ arg(1 − conj(α) e^{it}); the argument is continuous
    // because the real part stays positive.
    let h = move |t: f64| {
        let e = Complex64::from_polar(1.0, t);
        -(z0.len() as f64) * t
            + 2.0 * z0.iter().map(|a| (Complex64::new(1.0, 0.0) - a.conj() * e).arg()).sum::<f64>()
    };
    // With D = |e^{it} − α|²: h' = −Σ (1−|α|²)/D,
    // h'' = Σ (1−|α|²) D'/D², h''' = Σ (1−|α|²)(D''D − 2D'²)/D³.
    let parts = |a: &Complex64, t: f64| {
        let e = Complex64::from_polar(1.0, t);
        let w = a.conj() * e;
        let d = (e - a).norm_sqr();
        (1.0 - a.norm_sqr(), d, 2.0 * w.im, 2.0 * w.re)
    };
    let d1 = move |t: f64| -z1.iter().map(|a| { let (q, d, _, _) = parts(a, t); q / d }).sum::<f64>();
    let d2 = move |t: f64| z2.iter().map(|a| { let (q, d, dp, _) = parts(a, t); q * dp / (d * d) }).sum::<f64>();
    let d3 = move |t: f64| {
        z3.iter()
            .map(|a| {
                let (q, d, dp, dpp) = parts(a, t);
                q * (dpp * d - 2.0 * dp * dp) / (d * d * d)
            })
            .sum::<f64>()
    };
    let sign = if d2(PI / 2.0) < 0.0 { -1 } else { 1 };
    PhaseFunction::new(label, h, d1, d2, d3, -j, odd, sign)
}

/// The 2π-periodic even phase equal to `|t|` on `(−π, π]`.
///
/// Not `C²`: it fails the convergence hypotheses and serves the
/// logarithmic-growth check only.
pub fn build_piecewise_abs() -> PhaseFunction {
    PhaseFunction::new(
        "abs",
        |t: f64| wrap_to_pi(t).abs(),
        |t: f64| {
            let w = wrap_to_pi(t);
            if w == 0.0 || w == PI {
                0.0
            } else {
                w.signum()
            }
        },
        |_| 0.0,
        |_| 0.0,
        0,
        false,
        1,
    )
}

/// `h(t) = k t`, a pure character `e^{ikt}`.
pub fn build_linear(k: i64) -> PhaseFunction {
    let kf = k as f64;
    PhaseFunction::new(format!("linear:{k}"), move |t| kf * t, move |_| kf, |_| 0.0, |_| 0.0, k, true, 1)
}

/// Parses `sine | abs | linear:k | blaschke:a1,a2,...`.
///
/// Blaschke zeros are real numbers or complex numbers written `a+bi`;
/// anything other than reals in `(0, 1)` builds the general (exploratory)
/// Blaschke phase.
pub fn parse_phase_spec(spec: &str) -> Result<PhaseFunction> {
    let spec = spec.trim();
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a.trim())),
        None => (spec, None),
    };
    match (name, arg) {
        ("sine", None) => Ok(build_sine()),
        ("abs", None) => Ok(build_piecewise_abs()),
        ("linear", Some(a)) => a
            .parse::<i64>()
            .map(build_linear)
            .map_err(|_| Error::Parse(format!("linear needs an integer slope, got {a:?}"))),
        ("blaschke", Some(a)) => {
            let zeros = a
                .split(',')
                .map(|s| parse_complex(s.trim()))
                .collect::<Result<Vec<_>>>()?;
            if zeros.iter().all(|z| z.im == 0.0 && z.re > 0.0 && z.re < 1.0) {
                build_blaschke(&zeros.iter().map(|z| z.re).collect::<Vec<_>>())
            } else {
                build_blaschke_general(&zeros)
            }
        }
        _ => Err(Error::Parse(format!(
            "unknown phase {spec:?}; expected sine | abs | linear:k | blaschke:a1,a2,..."
        ))),
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::Parse(format!("cannot parse {s:?} as a real or complex number"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Ok(v) = s.parse::<f64>() {
        return Ok(Complex64::new(v, 0.0));
    }
    let body = s.strip_suffix('i').ok_or_else(bad)?;
    // split at the last sign that is not part of an exponent or the leading sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re.parse::<f64>().map_err(|_| bad())?, im))
}

fn format_complex(z: &Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}{}i", z.re, z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn wrap_to_pi(t: f64) -> f64 {
    let w = t - 2.0 * PI * ((t + PI) / (2.0 * PI)).floor();
    // w ∈ [−π, π); map −π to π so the interval is (−π, π]
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Outcome of [`validate`]; each flag is computed independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub label: String,
    pub periodicity_ok: bool,
    pub oddness_ok: bool,
    pub sign_definite_ok: bool,
    pub derivatives_ok: bool,
    pub regularity_0: bool,
    pub regularity_pi: bool,
    pub alpha: f64,
    pub beta: f64,
    pub doubling_ratio_0: f64,
    pub doubling_ratio_pi: f64,
    pub messages: Vec<String>,
}

impl ValidationReport {
    /// Conjunction of all flags.
    pub fn passed(&self) -> bool {
        self.periodicity_ok
            && self.oddness_ok
            && self.sign_definite_ok
            && self.derivatives_ok
            && self.regularity_0
            && self.regularity_pi
    }
}

/// Knobs of the hypothesis check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    pub grid_size: usize,
    /// Threshold `R` for `sup h''(2t)/h''(t)` near the zeros of `h''`.
    pub ratio_threshold: f64,
    /// The doubling test runs over `t ∈ (0, 2c)`.
    pub c: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { grid_size: 256, ratio_threshold: 64.0, c: PI / 8.0 }
    }
}

/// Checks the convergence hypotheses on a sample grid of `grid_size` points.
pub fn validate(phase: &PhaseFunction, grid_size: usize) -> Result<ValidationReport> {
    validate_with(phase, &ValidationOptions { grid_size, ..Default::default() })
}

pub fn validate_with(phase: &PhaseFunction, opts: &ValidationOptions) -> Result<ValidationReport> {
    if opts.grid_size < 64 {
        return Err(Error::Precondition(format!("grid_size must be >= 64, got {}", opts.grid_size)));
    }
    let g = opts.grid_size;
    let mut messages = Vec::new();
    let full_grid: Vec<f64> = (0..g).map(|i| -PI + 2.0 * PI * (i as f64 + 0.5) / g as f64).collect();

    let two_pi_k = 2.0 * PI * phase.winding_k as f64;
    let mut periodicity_ok = true;
    let mut oddness_ok = true;
    for &t in &full_grid {
        let (a, b) = (phase.h(t), phase.h(t + 2.0 * PI));
        if !(a.is_finite() && b.is_finite()) {
            periodicity_ok = false;
            messages.push(format!("non-finite h near t = {t:.6}"));
            break;
        }
        if (b - a - two_pi_k).abs() > 1e-8 * (1.0 + a.abs() + two_pi_k.abs()) {
            periodicity_ok = false;
            messages.push(format!(
                "h(t+2π) − h(t) = {:.6e} ≠ 2πk = {two_pi_k:.6e} at t = {t:.6}",
                b - a
            ));
            break;
        }
    }
    for &t in &full_grid {
        let (a, b) = (phase.h(t), phase.h(-t));
        if !((a + b).abs() <= 1e-9 * (1.0 + a.abs())) {
            oddness_ok = false;
            messages.push(format!("h(−t) + h(t) = {:.3e} at t = {t:.6}: h is not odd", a + b));
            break;
        }
    }
    if oddness_ok != phase.odd {
        messages.push(format!("declared odd = {} but sampled oddness = {oddness_ok}", phase.odd));
    }

    let derivatives_ok = check_derivatives(phase, &full_grid, &mut messages);

    let sign = phase.sign as f64;
    let mut sign_definite_ok = true;
    let mut d2_scale: f64 = 0.0;
    for i in 1..g {
        let t = PI * i as f64 / g as f64;
        let v = sign * phase.d2(t);
        d2_scale = d2_scale.max(v.abs());
        if !(v > 0.0) {
            if sign_definite_ok {
                messages.push(format!("sign·h''({t:.6}) = {v:.3e} is not positive"));
            }
            sign_definite_ok = false;
        }
    }
    for t in [0.0, PI] {
        let v = phase.d2(t);
        if !(v.abs() <= 1e-9 * (1.0 + d2_scale)) {
            sign_definite_ok = false;
            messages.push(format!("h''({t:.6}) = {v:.3e}, expected 0"));
        }
    }

    let ratio_at = |m: &dyn Fn(f64) -> f64| -> f64 {
        let mut worst: f64 = 0.0;
        // geometric grid t = 2c·2^{−j/4}, j ≥ 1, reaching t ≈ 1e−9
        for j in 1..=4 * 32 {
            let t = 2.0 * opts.c * 2f64.powf(-(j as f64) / 4.0);
            let (lo, hi) = (m(t), m(2.0 * t));
            let r = if lo > 0.0 && hi.is_finite() && lo.is_finite() { hi / lo } else { f64::INFINITY };
            worst = worst.max(if r.is_nan() { f64::INFINITY } else { r });
        }
        worst
    };
    let doubling_ratio_0 = ratio_at(&|t| sign * phase.d2(t));
    let doubling_ratio_pi = ratio_at(&|t| sign * phase.d2(PI - t));
    let regularity_0 = doubling_ratio_0 <= opts.ratio_threshold;
    let regularity_pi = doubling_ratio_pi <= opts.ratio_threshold;
    if !regularity_0 {
        messages.push(format!(
            "sup h''(2t)/h''(t) near 0 is {doubling_ratio_0:.3e} > {}",
            opts.ratio_threshold
        ));
    }
    if !regularity_pi {
        messages.push(format!(
            "sup h''(π−2t)/h''(π−t) near π is {doubling_ratio_pi:.3e} > {}",
            opts.ratio_threshold
        ));
    }

    Ok(ValidationReport {
        label: phase.label.clone(),
        periodicity_ok,
        oddness_ok,
        sign_definite_ok,
        derivatives_ok,
        regularity_0,
        regularity_pi,
        alpha: phase.alpha(),
        beta: phase.beta(),
        doubling_ratio_0,
        doubling_ratio_pi,
        messages,
    })
}

fn check_derivatives(phase: &PhaseFunction, grid: &[f64], messages: &mut Vec<String>) -> bool {
    let mut scale: f64 = 1.0;
    for &t in grid {
        scale = scale.max(phase.d1(t).abs()).max(phase.d2(t).abs()).max(phase.d3(t).abs());
    }
    if !scale.is_finite() {
        messages.push("non-finite derivative values".into());
        return false;
    }
    for &t in grid {
        let s1 = 1e-4;
        let fd1 = (phase.h(t + s1) - phase.h(t - s1)) / (2.0 * s1);
        let s2 = 1e-3;
        let fd2 = (phase.d1(t + s2) - phase.d1(t - s2)) / (2.0 * s2);
        let e1 = (fd1 - phase.d1(t)).abs();
        let e2 = (fd2 - phase.d2(t)).abs();
        if !(e1 <= 1e-6 * scale) || !(e2 <= 1e-4 * scale) {
            messages.push(format!(
                "derivatives disagree with finite differences at t = {t:.6} (|Δh'| = {e1:.2e}, |Δh''| = {e2:.2e})"
            ));
            return false;
        }
    }
    true
}

/// `ψ(x)`: the `t ∈ (0, π)` with `h'(t) = x`, for `x` strictly between
/// `h'(0)` and `h'(π)`.
///
/// Bisection on the monotone `h'`, then up to three Newton steps kept inside
/// the bracket. `ψ` increases with `x` when `h'' > 0` and decreases when
/// `h'' < 0`.
pub fn psi(phase: &PhaseFunction, x: f64) -> Result<f64> {
    let (a, b) = (phase.alpha(), phase.beta());
    let (lo_v, hi_v) = if a < b { (a, b) } else { (b, a) };
    if !(x > lo_v && x < hi_v) {
        return Err(Error::Domain(format!(
            "psi({x}) requires x strictly between h'(0) = {a} and h'(π) = {b}"
        )));
    }
    let increasing = b > a;
    let g = |t: f64| {
        let v = phase.d1(t) - x;
        if increasing {
            v
        } else {
            -v
        }
    };
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = g(mid);
        if v == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..3 {
        let r = phase.d1(t) - x;
        let d = phase.d2(t);
        if r == 0.0 || d == 0.0 || !d.is_finite() {
            break;
        }
        let next = t - r / d;
        if !(next >= lo && next <= hi) || (phase.d1(next) - x).abs() >= r.abs() {
            break;
        }
        t = next;
    }
    Ok(t)
}

/// Legendre transform `h*(x) = x ψ(x) − h(ψ(x))`.
pub fn legendre(phase: &PhaseFunction, x: f64) -> Result<f64> {
    let t = psi(phase, x)?;
    Ok(x * t - phase.h(t))
}

/// Samples of `h''` on a uniform grid of `[0, π]` for repeated evaluation of
/// the modulus of continuity `ω(δ) = sup{|h''(s) − h''(t)| : |s − t| ≤ δ}`.
#[derive(Debug, Clone)]
pub struct ModulusTable {
    samples: Vec<f64>,
    spacing: f64,
}

impl ModulusTable {
    pub fn new(phase: &PhaseFunction, grid_size: usize) -> Self {
        let grid_size = grid_size.max(2);
        let spacing = PI / grid_size as f64;
        let samples = (0..=grid_size).map(|i| phase.d2(i as f64 * spacing)).collect();
        Self { samples, spacing }
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Sampled `ω(δ)`: the largest oscillation of `h''` over any window of
    /// grid points spanning at most `δ`. A lower bound of the true modulus.
    pub fn omega(&self, delta: f64) -> f64 {
        if !(delta > 0.0) {
            return 0.0;
        }
        let width = ((delta / self.spacing) + 1e-9).floor() as usize;
        let width = width.min(self.samples.len() - 1);
        if width == 0 {
            return 0.0;
        }
        sliding_range_max(&self.samples, width + 1)
    }
}

/// max over windows of `len` consecutive samples of (max − min), via
/// monotone deques.
fn sliding_range_max(v: &[f64], len: usize) -> f64 {
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best: f64 = 0.0;
    for i in 0..v.len() {
        while maxq.back().is_some_and(|&j| v[j] <= v[i]) {
            maxq.pop_back();
        }
        maxq.push_back(i);
        while minq.back().is_some_and(|&j| v[j] >= v[i]) {
            minq.pop_back();
        }
        minq.push_back(i);
        let start = (i + 1).saturating_sub(len);
        while maxq.front().is_some_and(|&j| j < start) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&j| j < start) {
            minq.pop_front();
        }
        if let (Some(&hi), Some(&lo)) = (maxq.front(), minq.front()) {
            best = best.max(v[hi] - v[lo]);
        }
    }
    best
}

/// Sampled modulus of continuity of `h''` on `[0, π]`.
pub fn modulus_of_continuity(phase: &PhaseFunction, delta: f64, grid_size: usize) -> Result<f64> {
    if !(delta > 0.0 && delta <= PI) {
        return Err(Error::Domain(format!("delta must lie in (0, π], got {delta}")));
    }
    let spacing = PI / grid_size as f64;
    if spacing > delta / 4.0 {
        return Err(Error::Precondition(format!(
            "grid spacing {spacing:.3e} exceeds delta/4 = {:.3e}",
            delta / 4.0
        )));
    }
    Ok(ModulusTable::new(phase, grid_size).omega(delta))
}

/// A solution of `ω(Φ/√n) Φ⁴ = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiChoice {
    pub phi: f64,
    /// `ω(Φ/√n)` at the returned `Φ`.
    pub omega: f64,
    /// Set when the root fell outside `[1, n^{1/4}]` and `Φ` was clamped.
    pub diagnostic: Option<String>,
}

/// `Φₙ` for a sampled modulus of continuity of the phase's `h''`.
pub fn choose_phi(phase: &PhaseFunction, n: f64) -> Result<PhiChoice> {
    if !(n >= 2.0) {
        return Err(Error::Precondition(format!("choose_phi needs n >= 2, got {n}")));
    }
    // spacing ≤ δ_min/4 with δ_min = 1/√n
    let grid = ((4.0 * PI * n.sqrt()).ceil() as usize).clamp(1024, 1 << 23);
    let table = ModulusTable::new(phase, grid);
    choose_phi_with(|d| table.omega(d), n)
}

/// `Φₙ` for an explicit nondecreasing modulus `omega`, by bisection on
/// `Φ ↦ ω(Φ/√n) Φ⁴` over `[1, n^{1/4}]`.
pub fn choose_phi_with(omega: impl Fn(f64) -> f64, n: f64) -> Result<PhiChoice> {
    if !(n >= 2.0) {
        return Err(Error::Precondition(format!("choose_phi needs n >= 2, got {n}")));
    }
    let root_n = n.sqrt();
    let g = |phi: f64| omega(phi / root_n) * phi.powi(4);
    let upper = n.powf(0.25);
    if !(g(upper) >= 1.0) {
        return Ok(PhiChoice {
            phi: upper,
            omega: omega(upper / root_n),
            diagnostic: Some(format!(
                "omega(Φ/√n)Φ⁴ < 1 on [1, n^(1/4)] (degenerate modulus); Φ clamped to n^(1/4) = {upper}"
            )),
        });
    }
    if g(1.0) >= 1.0 {
        return Ok(PhiChoice {
            phi: 1.0,
            omega: omega(1.0 / root_n),
            diagnostic: Some("omega(1/√n) >= 1; Φ clamped to 1".into()),
        });
    }
    let (mut lo, mut hi) = (1.0, upper);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(PhiChoice { phi: hi, omega: omega(hi / root_n), diagnostic: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_values() {
        let s = build_sine();
        assert_eq!(s.h(PI / 2.0), 1.0);
        assert_eq!(s.d2(PI / 2.0), -1.0);
        assert!(s.sign as f64 * s.d2(PI / 2.0) > 0.0);
        assert_eq!(s.winding_k, 0);
        assert!(s.odd);
        assert_eq!(s.d1_range(), (-1.0, 1.0));
    }

    #[test]
    fn blaschke_closed_form_derivatives() {
        let b = build_blaschke(&[0.5]).unwrap();
        assert!((b.d1(0.0) + 3.0).abs() < 1e-14);
        assert!((b.d3(0.0) - 12.0).abs() < 1e-12);
        // h'(π) = −(1−α)/(1+α), h'''(π) = −2α(1−α)/(1+α)³
        assert!((b.d1(PI) + 1.0 / 3.0).abs() < 1e-14);
        assert!((b.d3(PI) + 2.0 * 0.5 * 0.5 / 1.5f64.powi(3)).abs() < 1e-12);
        for i in 1..100 {
            assert!(b.d2(PI * i as f64 / 100.0) > 0.0);
        }
        assert_eq!(b.winding_k, -1);
        assert_eq!(b.sign, 1);
        // h(π) = −π for one factor
        assert!((b.h(PI) + PI).abs() < 1e-14);
    }

    #[test]
    fn blaschke_second_derivative_closed_form() {
        let alphas = [0.3, 0.7];
        let b = build_blaschke(&alphas).unwrap();
        for t in [0.1, 1.0, 2.5] {
            let want: f64 = alphas
                .iter()
                .map(|a| 2.0 * a * (1.0 - a * a) * f64::sin(t) / (1.0 + a * a - 2.0 * a * f64::cos(t)).powi(2))
                .sum();
            assert!((b.d2(t) - want).abs() < 1e-13);
        }
        assert_eq!(b.winding_k, -2);
    }

    #[test]
    fn blaschke_rejects_bad_zeros() {
        assert!(build_blaschke(&[]).is_err());
        assert!(build_blaschke(&[0.5, 1.0]).is_err());
        assert!(build_blaschke(&[-0.2]).is_err());
        assert!(build_blaschke_general(&[Complex64::new(0.8, 0.7)]).is_err());
    }

    #[test]
    fn abs_phase_values() {
        let a = build_piecewise_abs();
        assert!((a.h(PI / 2.0) - PI / 2.0).abs() < 1e-15);
        assert!((a.h(-PI / 2.0) - PI / 2.0).abs() < 1e-15);
        assert!((a.h(2.0 * PI + 0.3) - 0.3).abs() < 1e-14);
        let r = validate(&a, 256).unwrap();
        assert!(!r.sign_definite_ok);
        assert!(!r.oddness_ok);
        assert!(r.periodicity_ok);
    }

    #[test]
    fn validate_sine_and_blaschke_pass() {
        for p in [build_sine(), build_blaschke(&[0.5]).unwrap(), build_blaschke(&[0.3, 0.7]).unwrap()] {
            let r = validate(&p, 256).unwrap();
            assert!(r.passed(), "{}: {:?}", p.label, r.messages);
            assert!(r.doubling_ratio_0.is_finite() && r.doubling_ratio_pi.is_finite());
        }
    }

    #[test]
    fn validate_linear_fails_sign_definiteness() {
        let r = validate(&build_linear(1), 256).unwrap();
        assert!(!r.sign_definite_ok);
        assert!(r.periodicity_ok && r.oddness_ok);
        assert!(!r.passed());
    }

    #[test]
    fn validate_flags_flat_zero_of_second_derivative() {
        // h'' = e^{−1/t} near 0 (odd extension); only the regularity flag matters here
        let d2 = |t: f64| {
            if t == 0.0 {
                0.0
            } else {
                t.signum() * (-1.0 / t.abs()).exp() * (PI - t.abs())
            }
        };
        let p = PhaseFunction::new("flat", f64::sin, f64::cos, d2, |_| 0.0, 0, true, 1);
        let r = validate(&p, 256).unwrap();
        assert!(!r.regularity_0);
        assert!(r.regularity_pi);
    }

    #[test]
    fn validate_rejects_tiny_grid() {
        assert!(matches!(validate(&build_sine(), 10), Err(Error::Precondition(_))));
    }

    #[test]
    fn validate_reports_non_finite_values_as_failures() {
        let p = PhaseFunction::new("nan", |_| f64::NAN, |_| f64::NAN, |_| f64::NAN, |_| f64::NAN, 0, true, 1);
        let r = validate(&p, 64).unwrap();
        assert!(!r.passed());
        assert!(!r.periodicity_ok);
    }

    #[test]
    fn psi_examples() {
        let s = build_sine();
        assert!((psi(&s, 0.0).unwrap() - PI / 2.0).abs() < 1e-14);
        assert!((psi(&s, 1f64.cos()).unwrap() - 1.0).abs() < 1e-12);
        let b = build_blaschke(&[0.5]).unwrap();
        let t = psi(&b, -1.0).unwrap();
        assert!((b.d1(t) + 1.0).abs() < 1e-10);
        assert!(matches!(psi(&s, 1.0), Err(Error::Domain(_))));
        assert!(matches!(psi(&b, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn legendre_examples() {
        let s = build_sine();
        assert!((legendre(&s, 0.0).unwrap() + 1.0).abs() < 1e-14);
        let x: f64 = 0.5;
        let closed = x * x.acos() - (1.0 - x * x).sqrt();
        assert!((legendre(&s, x).unwrap() - closed).abs() < 1e-13);
    }

    #[test]
    fn modulus_examples() {
        let s = build_sine();
        // h'' = −sin on [0, π] ranges over [−1, 0]
        let w = modulus_of_continuity(&s, PI, 4096).unwrap();
        assert!((w - 1.0).abs() < 1e-6, "{w}");
        for d in [1e-3, 1e-2, 0.1] {
            let w = modulus_of_continuity(&s, d, 100_000).unwrap();
            assert!(w <= d + 1e-12);
            assert!(w >= 0.9 * d);
        }
        assert!(modulus_of_continuity(&s, 0.01, 100).is_err());
        assert!(modulus_of_continuity(&s, 0.0, 100).is_err());
    }

    #[test]
    fn phi_with_linear_modulus() {
        let c = choose_phi_with(|x| x, 1e10).unwrap();
        assert!((c.phi - 10.0).abs() < 1e-9);
        assert!(c.diagnostic.is_none());
        let c = choose_phi_with(|x| x, 12345.0).unwrap();
        assert!((c.phi - 12345f64.powf(0.1)).abs() < 1e-9);
    }

    #[test]
    fn phi_degenerate_modulus_clamps() {
        let c = choose_phi_with(|_| 0.0, 1000.0).unwrap();
        assert!((c.phi - 1000f64.powf(0.25)).abs() < 1e-12);
        assert!(c.diagnostic.is_some());
        assert!(choose_phi_with(|x| x, 1.0).is_err());
    }

    #[test]
    fn phi_for_sine() {
        let n = 1e6;
        let c = choose_phi(&build_sine(), n).unwrap();
        let want = n.powf(0.1);
        assert!((c.phi / want - 1.0).abs() < 0.05, "{} vs {want}", c.phi);
    }

    #[test]
    fn parse_specs() {
        assert_eq!(parse_phase_spec("sine").unwrap().label, "sine");
        assert_eq!(parse_phase_spec("linear:3").unwrap().winding_k, 3);
        let b = parse_phase_spec("blaschke:0.3,0.7").unwrap();
        assert_eq!(b.label, "blaschke:0.3,0.7");
        assert!(b.odd);
        let g = parse_phase_spec("blaschke:0.5,0.2-0.3i").unwrap();
        assert!(!g.odd);
        assert_eq!(g.winding_k, -2);
        assert!(parse_phase_spec("cosine").is_err());
        assert!(parse_phase_spec("linear:x").is_err());
        assert!(parse_phase_spec("blaschke:").is_err());
        assert_eq!(parse_complex("-0.25i").unwrap(), Complex64::new(0.0, -0.25));
        assert_eq!(parse_complex("1e-1+2e-1i").unwrap(), Complex64::new(0.1, 0.2));
    }

    #[test]
    fn normalized_and_scaled() {
        let s = build_sine();
        let n = s.normalized();
        assert_eq!(n.sign, 1);
        assert!(n.d2(1.0) > 0.0);
        assert_eq!(n.h(0.7), -s.h(0.7));
        let b = build_blaschke(&[0.5]).unwrap();
        assert!(b.scaled(0.5).is_err());
        let b2 = b.scaled(2.0).unwrap();
        assert_eq!(b2.winding_k, -2);
        let s3 = s.scaled(3.0).unwrap();
        assert!((s3.d1(0.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn finite_difference_builder_tracks_analytic_derivatives() {
        let p = PhaseFunction::from_fn("fd-sine", f64::sin, 0, true);
        assert_eq!(p.sign, -1);
        for t in [0.3, 1.1, 2.9] {
            assert!((p.d1(t) - t.cos()).abs() < 1e-9);
            assert!((p.d2(t) + t.sin()).abs() < 1e-6);
            assert!((p.d3(t) + t.cos()).abs() < 1e-5);
        }
        assert!(validate(&p, 128).unwrap().passed());
    }
}
