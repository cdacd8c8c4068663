//! Quadrature building blocks: Gauss–Legendre rules, adaptive Gauss–Kronrod
//! integration, and geometric refinement toward an endpoint where the
//! integrand has an algebraic singularity (or an unbounded derivative).

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Result of a quadrature with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]` with this rule.
    pub fn integrate<T: QuadValue>(&self, f: impl Fn(f64) -> T, a: f64, b: f64) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * *w;
        }
        acc * half
    }

    /// Composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite<T: QuadValue>(&self, f: impl Fn(f64) -> T, a: f64, b: f64, panels: usize) -> T {
        let h = (b - a) / panels as f64;
        let mut acc = T::zero();
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let hi = if p + 1 == panels { b } else { lo + h };
            acc = acc + self.integrate(&f, lo, hi);
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod panel; returns (K15 value, |K15 - G7|).
fn kronrod15<T: QuadValue>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(mid - dx) + f(mid + dx);
        k = k + s * WGK[j];
        if j % 2 == 1 {
            g = g + s * WG[j / 2];
        }
    }
    let k = k * half;
    let g = g * half;
    (k, (k - g).magnitude())
}

/// Globally adaptive Gauss–Kronrod (G7/K15) integration of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error estimate until the summed
/// estimate is at most `abs_tol`, or fails after `max_panels` panels.
pub fn adaptive<T: QuadValue>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<Estimate<T>> {
    if a == b {
        return Ok(Estimate { value: T::zero(), error: 0.0, evals: 0 });
    }
    let mut panels: Vec<(f64, f64, T, f64)> = Vec::new();
    let (v, e) = kronrod15(&f, a, b);
    panels.push((a, b, v, e));
    let mut evals = 15;
    loop {
        let total_err: f64 = panels.iter().map(|p| p.3).sum();
        let value = panels.iter().fold(T::zero(), |acc, p| acc + p.2);
        if !value.magnitude().is_finite() {
            return Err(Error::NonFinite("integrand produced a non-finite value".into()));
        }
        if total_err <= abs_tol {
            return Ok(Estimate { value, error: total_err, evals });
        }
        if panels.len() >= max_panels {
            return Err(Error::Budget {
                what: "adaptive quadrature",
                estimate: value.magnitude(),
                error: total_err,
            });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty panel list");
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Panel cannot be split further in floating point.
            return Err(Error::Budget {
                what: "adaptive quadrature (panel underflow)",
                estimate: value.magnitude(),
                error: total_err,
            });
        }
        let (v1, e1) = kronrod15(&f, lo, mid);
        let (v2, e2) = kronrod15(&f, mid, hi);
        evals += 30;
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// Integrates `f(s)` over `s ∈ (0, length]` where `f` may be singular (or
/// have an unbounded derivative) at `s = 0`.
///
/// The interval is cut into geometric panels `[length·2^{-k-1}, length·2^{-k}]`,
/// each integrated adaptively; refinement stops once a panel contributes less
/// than `tol / 8`. The integrand receives the offset from the singular
/// endpoint, so callers keep full relative precision near it.
pub fn toward_endpoint<T: QuadValue>(f: impl Fn(f64) -> T, length: f64, tol: f64) -> Result<Estimate<T>> {
    const MAX_LEVELS: i32 = 400;
    let mut value = T::zero();
    let mut error = 0.0;
    let mut evals = 0;
    // per-level tolerances tol/16·0.75^k sum to at most tol/4
    let panel_tol = tol / 16.0;
    let mut previous = f64::NAN;
    for k in 0..MAX_LEVELS {
        let hi = length * 0.5f64.powi(k);
        let lo = 0.5 * hi;
        let est = adaptive(&f, lo, hi, panel_tol * 0.75f64.powi(k.min(40)), 2000)?;
        value = value + est.value;
        error += est.error;
        evals += est.evals;
        let contribution = est.value.magnitude();
        if k >= 3 && contribution < tol / 8.0 {
            // Panel contributions of an algebraic singularity decay
            // geometrically; bound the unresolved sliver [0, lo] by the tail of
            // that series.
            let ratio = contribution / previous;
            let tail = if ratio.is_finite() && ratio < 1.0 {
                contribution * ratio / (1.0 - ratio)
            } else {
                f64::INFINITY
            };
            if tail <= tol / 4.0 {
                error += tail;
                return Ok(Estimate { value, error, evals });
            }
        }
        previous = contribution;
    }
    Err(Error::Budget {
        what: "endpoint refinement",
        estimate: value.magnitude(),
        error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(10);
        // degree 19 is exact for a 10-point rule
        let v: f64 = rule.integrate(|x| x.powi(18) + 3.0 * x.powi(5), -1.0, 1.0);
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
        let sum_w: f64 = rule.weights().iter().sum();
        assert!((sum_w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_odd_order_has_center_node() {
        let rule = GaussLegendre::new(7);
        assert!(rule.nodes()[3].abs() < 1e-15);
        assert_eq!(rule.len(), 7);
    }

    #[test]
    fn adaptive_handles_smooth_and_peaked_integrands() {
        let e = adaptive(|x: f64| x.exp(), 0.0, 1.0, 1e-13, 100).unwrap();
        assert!((e.value - (1f64.exp() - 1.0)).abs() < 1e-13);
        let e = adaptive(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10, 1000).unwrap();
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((e.value - exact).abs() < 1e-8, "{} vs {}", e.value, exact);
    }

    #[test]
    fn adaptive_reports_budget_exhaustion() {
        let err = adaptive(|x: f64| (1.0 / x).sin(), 1e-9, 1.0, 1e-14, 4).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
    }

    #[test]
    fn complex_integrand() {
        let e = adaptive(|t: f64| Complex64::new(0.0, t).exp(), 0.0, std::f64::consts::PI, 1e-13, 100).unwrap();
        assert!((e.value - Complex64::new(0.0, 2.0)).norm() < 1e-13);
    }

    #[test]
    fn endpoint_refinement_resolves_root_singularities() {
        // ∫_0^1 s^{-1/2} ds = 2 and ∫_0^1 s^{-3/4} ds = 4
        let e = toward_endpoint(|s: f64| s.powf(-0.5), 1.0, 1e-12).unwrap();
        assert!((e.value - 2.0).abs() < 1e-11, "{}", e.value);
        let e = toward_endpoint(|s: f64| s.powf(-0.75), 1.0, 1e-12).unwrap();
        assert!((e.value - 4.0).abs() < 1e-10, "{}", e.value);
        let e = toward_endpoint(|s: f64| s.sqrt(), 2.0, 1e-13).unwrap();
        assert!((e.value - 2.0 / 3.0 * 2f64.powf(1.5)).abs() < 1e-12);
    }
}
