//! Special functions used as independent oracles: Γ, B, the Gauss
//! hypergeometric function ₂F₁, Bessel functions `J_ν` of integer order, and
//! the closed forms for the norm limit of a single Blaschke factor.
//!
//! Everything here is pure and allocation-light; no caches.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real `x` that is not a non-positive integer.
///
/// Lanczos approximation (g = 7, 9 terms) for `x ≥ 1/2`, reflection below.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of non-finite argument {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Domain(format!("gamma has a pole at {x}")));
    }
    if x > 171.6 {
        return Err(Error::Domain(format!("gamma({x}) overflows f64")));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // split the power to stay finite up to x ≈ 171
    let half = t.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * half * (-t).exp() * half * acc
}

/// Euler beta function `B(a, b) = Γ(a)Γ(b)/Γ(a+b)`.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if a <= 0.0 || b <= 0.0 {
        return Err(Error::Domain(format!("beta({a}, {b}) requires positive arguments")));
    }
    Ok(gamma_fn(a)? * gamma_fn(b)? / gamma_fn(a + b)?)
}

/// Trigamma `ψ₁(x) = Σ_{j≥0} 1/(x+j)²` for `x > 0`.
pub fn trigamma(x: f64) -> Result<f64> {
    if x <= 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("trigamma({x}) requires x > 0")));
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 20.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // asymptotic series with Bernoulli numbers
    let series = inv
        + 0.5 * inv2
        + inv * inv2 * (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0)));
    Ok(acc + series)
}

/// Gauss hypergeometric function `₂F₁(a, b; c; z)` for real arguments with `z < 1`.
///
/// Plain Gauss series for `|z| ≤ 1/2`; for `1/2 < z < 1` the connection
/// formula onto `1 − z` (when `c − a − b` is not an integer); for `z < −1/2`
/// the Pfaff transformation onto `z/(z − 1) ∈ (0, 1)`.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if c <= 0.0 && c == c.floor() {
        return Err(Error::Domain(format!("2F1 undefined for c = {c}")));
    }
    if !(z < 1.0) {
        return Err(Error::Domain(format!("2F1 series diverges at z = {z} (need z < 1)")));
    }
    if z.abs() <= 0.5 {
        return gauss_series(a, b, c, z);
    }
    if z < -0.5 {
        let w = z / (z - 1.0);
        return Ok((1.0 - z).powf(-a) * hyp2f1(a, c - b, c, w)?);
    }
    let s = c - a - b;
    if (s - s.round()).abs() < 1e-12 {
        // Degenerate connection (logarithmic case); the direct series still
        // converges for z < 1, only slowly.
        return gauss_series(a, b, c, z);
    }
    let w = 1.0 - z;
    let g = |x: f64| gamma_unchecked(x);
    let first = g(c) * g(s) / (g(c - a) * g(c - b)) * gauss_series(a, b, a + b - c + 1.0, w)?;
    let second =
        w.powf(s) * g(c) * g(-s) / (g(a) * g(b)) * gauss_series(c - a, c - b, s + 1.0, w)?;
    Ok(first + second)
}

fn gauss_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    const MAX_TERMS: usize = 200_000;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut small = 0;
    for k in 0..MAX_TERMS {
        let k = k as f64;
        let denom = (c + k) * (k + 1.0);
        if denom == 0.0 {
            return Err(Error::Domain("2F1 series hit a zero denominator".into()));
        }
        term *= (a + k) * (b + k) / denom * z;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= 1e-17 * sum.abs() {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Budget {
        what: "2F1 Gauss series",
        estimate: sum,
        error: term.abs(),
    })
}

/// Largest order accepted by [`bessel_j`].
pub const BESSEL_MAX_ORDER: i64 = 10_000;
/// Largest argument accepted by [`bessel_j`].
pub const BESSEL_MAX_ARG: f64 = 10_000.0;

/// Bessel function of the first kind `J_ν(x)` of integer order, `x ≥ 0`.
///
/// Ascending series for `x ≤ 2`; otherwise Miller's backward recurrence
/// normalised by `J₀ + 2 Σ J_{2k} = 1`. Negative orders use
/// `J_{−ν} = (−1)^ν J_ν`.
pub fn bessel_j(nu: i64, x: f64) -> Result<f64> {
    if nu.abs() > BESSEL_MAX_ORDER {
        return Err(Error::Domain(format!("|nu| = {} exceeds {BESSEL_MAX_ORDER}", nu.abs())));
    }
    check_bessel_arg(x)?;
    let order = nu.unsigned_abs() as usize;
    let value = if x <= 2.0 {
        bessel_series(order, x)
    } else {
        miller(order, x)[order]
    };
    Ok(if nu < 0 && order % 2 == 1 { -value } else { value })
}

/// `J_0(x), …, J_{max_order}(x)` from a single backward sweep.
pub fn bessel_j_sequence(max_order: usize, x: f64) -> Result<Vec<f64>> {
    if max_order as i64 > BESSEL_MAX_ORDER {
        return Err(Error::Domain(format!("order {max_order} exceeds {BESSEL_MAX_ORDER}")));
    }
    check_bessel_arg(x)?;
    if x <= 2.0 {
        return Ok((0..=max_order).map(|n| bessel_series(n, x)).collect());
    }
    let mut all = miller(max_order, x);
    all.truncate(max_order + 1);
    Ok(all)
}

fn check_bessel_arg(x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("bessel_j requires x >= 0, got {x}")));
    }
    if x > BESSEL_MAX_ARG {
        return Err(Error::Domain(format!(
            "bessel_j argument {x} exceeds {BESSEL_MAX_ARG} (recurrence overflow regime)"
        )));
    }
    Ok(())
}

fn bessel_series(order: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let mut lead = 1.0;
    for k in 1..=order {
        lead *= half / k as f64;
        if lead == 0.0 {
            return 0.0;
        }
    }
    let q = -half * half;
    let mut term = lead;
    let mut sum = lead;
    for m in 1..200 {
        term *= q / (m as f64 * (m + order) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Backward recurrence `J_{k−1} = (2k/x) J_k − J_{k+1}`; returns normalised
/// values for orders `0..=start`.
fn miller(order: usize, x: f64) -> Vec<f64> {
    let xc = x.ceil() as usize;
    let mut start = order.max(xc) + xc + 20;
    if start % 2 == 1 {
        start += 1;
    }
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in &mut j[k - 1..] {
                *v *= 1e-250;
            }
        }
    }
    let norm = j[0] + 2.0 * j[2..=start].iter().step_by(2).sum::<f64>();
    j.truncate(start + 1);
    for v in &mut j {
        *v /= norm;
    }
    j
}

/// Both closed forms for the norm limit of a single Blaschke factor with
/// zero `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GirardValue {
    pub alpha: f64,
    /// `16√2 Γ(1/4)^{−2} √α/(1+α) · F(1/2, 3/4; 3/2; 4α/(1+α)²)`
    pub intro_form: f64,
    /// `8√2 Γ(1/4)^{−2} (1−β²)^{1/2} · F(1/2, 3/4; 3/2; 1−β²)`
    pub abstract_form: f64,
    /// `β = (1 − α)/(1 + α)`
    pub beta_param: f64,
}

pub fn girard_value(alpha: f64) -> Result<GirardValue> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("girard_value requires alpha in (0,1), got {alpha}")));
    }
    let g = gamma_fn(0.25)?;
    let z = 4.0 * alpha / ((1.0 + alpha) * (1.0 + alpha));
    let intro_form =
        16.0 * 2f64.sqrt() / (g * g) * alpha.sqrt() / (1.0 + alpha) * hyp2f1(0.5, 0.75, 1.5, z)?;
    let beta_param = (1.0 - alpha) / (1.0 + alpha);
    let one_minus_beta2 = 1.0 - beta_param * beta_param;
    let abstract_form = 8.0 * 2f64.sqrt() / (g * g)
        * one_minus_beta2.sqrt()
        * hyp2f1(0.5, 0.75, 1.5, one_minus_beta2)?;
    Ok(GirardValue { alpha, intro_form, abstract_form, beta_param })
}

/// `(2/π)^{3/2} ∫_{−1}^{1} √(Σ_j 2α_j(1−α_j²)/(1+α_j²−2α_j u)²) (1−u²)^{−1/4} du`.
pub fn corollary2_integral(alphas: &[f64]) -> Result<f64> {
    if alphas.is_empty() {
        return Err(Error::Domain("corollary2_integral needs at least one alpha".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(Error::Domain(format!("alpha = {a} outside (0,1)")));
    }
    let weight = |u: f64| -> f64 {
        alphas
            .iter()
            .map(|&a| {
                let d = 1.0 + a * a - 2.0 * a * u;
                2.0 * a * (1.0 - a * a) / (d * d)
            })
            .sum::<f64>()
            .sqrt()
    };
    // offsets v from u = ±1, with 1 − u² = v(2 − v) kept exact
    let tol = 1e-13;
    let right = quad::toward_endpoint(|v: f64| weight(1.0 - v) * (v * (2.0 - v)).powf(-0.25), 1.0, tol)?;
    let left = quad::toward_endpoint(|v: f64| weight(v - 1.0) * (v * (2.0 - v)).powf(-0.25), 1.0, tol)?;
    Ok((2.0 / PI).powf(1.5) * (left.value + right.value))
}
