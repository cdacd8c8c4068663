//! Library results checked against independent oracles (closed forms,
//! alternative algorithms written here from scratch) and property tests for
//! the structural invariants.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use wnl_core::asymptotics::asymptotic_limit;
use wnl_core::equidist::{
    exponential_sum, fractional_array, frac, van_der_corput_bound, weyl_sum,
};
use wnl_core::phase::{
    build_blaschke, build_piecewise_abs, build_sine, choose_phi_with, legendre, psi, ModulusTable,
    PhaseFunction,
};
use wnl_core::quad::GaussLegendre;
use wnl_core::specfun::{bessel_j, bessel_j_sequence, gamma_fn, girard_value, hyp2f1};
use wnl_core::spectrum::{
    auto_grid_pow, coefficient_quadrature, compute_spectrum, compute_spectrum_auto, full_grid_l1,
    partition_terms, Region,
};
use wnl_core::stationary::{lemma1_monotone_bound, lemma1_var_bound};

// ---------------------------------------------------------------- oracles

/// Γ via the Stirling series after shifting the argument above 20.
fn stirling_gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * stirling_gamma(1.0 - x));
    }
    let mut z = x;
    let mut log_shift = 0.0;
    while z < 20.0 {
        log_shift += z.ln();
        z += 1.0;
    }
    let z2 = z * z;
    let series = 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2)
        - 1.0 / (1680.0 * z * z2 * z2 * z2);
    let lg = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series;
    (lg - log_shift).exp()
}

/// `J_n(x) = (1/2π) ∫ cos(nτ − x sin τ) dτ` by the periodic trapezoid rule.
fn bessel_trapezoid(n: i64, x: f64) -> f64 {
    let m = 4096;
    let h = 2.0 * PI / m as f64;
    (0..m)
        .map(|j| {
            let tau = -PI + j as f64 * h;
            (n as f64 * tau - x * tau.sin()).cos()
        })
        .sum::<f64>()
        / m as f64
}

/// Tanh-sinh quadrature on `(0, 1)`; `f` receives `(t, 1 − t)`.
fn tanh_sinh(f: impl Fn(f64, f64) -> f64) -> f64 {
    let h = 1.0 / 128.0;
    let mut sum = 0.0;
    let kmax = (4.5 / h) as i64;
    for k in -kmax..=kmax {
        let u = k as f64 * h;
        let s = 0.5 * PI * u.sinh();
        let t = 1.0 / (1.0 + (-2.0 * s).exp());
        let omt = 1.0 / (1.0 + (2.0 * s).exp());
        if t == 0.0 || omt == 0.0 {
            continue;
        }
        let w = 0.5 * PI * u.cosh() / (2.0 * s.cosh() * s.cosh());
        sum += f(t, omt) * w;
    }
    sum * h
}

/// Euler integral for `₂F₁(a, b; c; z)`, `c > b > 0`, `z < 1`.
fn hyp2f1_euler(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let pre = stirling_gamma(c) / (stirling_gamma(b) * stirling_gamma(c - b));
    pre * tanh_sinh(|t, omt| t.powf(b - 1.0) * omt.powf(c - b - 1.0) * (1.0 - z * t).powf(-a))
}

/// Coefficients of `e^{in|t|}`: `1/2` at `ν = ±n`, `(i/π)·2n/(n² − ν²)` when
/// `n + ν` is odd, zero otherwise.
fn abs_coefficient(n: i64, nu: i64) -> Complex64 {
    if nu.abs() == n {
        Complex64::new(0.5, 0.0)
    } else if (n + nu).rem_euclid(2) == 1 {
        let (nf, v) = (n as f64, nu as f64);
        Complex64::new(0.0, 2.0 * nf / (PI * (nf * nf - v * v)))
    } else {
        Complex64::new(0.0, 0.0)
    }
}

#[test]
fn gamma_matches_stirling() {
    for x in [0.1, 0.25, 0.5, 1.0, 1.5, 3.7, 7.3, 12.0, 25.5, 60.0, -0.5, -2.5] {
        let got = gamma_fn(x).unwrap();
        let want = stirling_gamma(x);
        assert!(((got - want) / want).abs() < 1e-13, "x = {x}: {got} vs {want}");
    }
    // mpmath
    assert!((gamma_fn(0.1).unwrap() - 9.513_507_698_668_73).abs() < 1e-12);
    assert!((gamma_fn(7.3).unwrap() - 1271.4236336639088).abs() < 1e-9);
    assert!((gamma_fn(-2.5).unwrap() + 0.9453087204829419).abs() < 1e-13);
}

#[test]
fn bessel_matches_integral_representation() {
    for &x in &[0.5, 2.0, 10.5, 33.3, 100.0] {
        for n in [-7, 0, 1, 2, 7, 15, 40, 90] {
            let got = bessel_j(n, x).unwrap();
            let want = bessel_trapezoid(n, x);
            assert!((got - want).abs() < 1e-13, "J_{n}({x}): {got} vs {want}");
        }
    }
    assert!((bessel_j(0, 100.0).unwrap() - 0.019985850304223122).abs() < 1e-15);
    assert!((bessel_j(7, 33.3).unwrap() + 0.13504726231599423).abs() < 1e-14);
}

#[test]
fn bessel_sum_identities() {
    for &x in &[3.0, 17.0, 250.0] {
        let j = bessel_j_sequence(x as usize + 80, x).unwrap();
        let squares = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
        assert!((squares - 1.0).abs() < 1e-13, "x = {x}: {squares}");
        // cos x = J₀ + 2Σ(−1)^k J_{2k},  sin x = 2Σ(−1)^k J_{2k+1}
        let mut c = j[0];
        let mut s = 0.0;
        for (k, v) in j.iter().enumerate().skip(1) {
            let sgn = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                c += 2.0 * sgn * v;
            } else {
                s += 2.0 * sgn * v;
            }
        }
        assert!((c - x.cos()).abs() < 1e-13, "cos, x = {x}");
        assert!((s - x.sin()).abs() < 1e-13, "sin, x = {x}");
    }
}

#[test]
fn hyp2f1_matches_euler_integral() {
    for z in [-3.0, -0.8, -0.2, 0.0, 0.3, 0.55, 0.75, 8.0 / 9.0, 0.97] {
        let got = hyp2f1(0.5, 0.75, 1.5, z).unwrap();
        let want = hyp2f1_euler(0.5, 0.75, 1.5, z);
        assert!((got - want).abs() < 1e-12, "z = {z}: {got} vs {want}");
    }
    assert!((hyp2f1(0.5, 0.75, 1.5, 8.0 / 9.0).unwrap() - 1.542_085_201_578_19).abs() < 1e-13);
    assert!((hyp2f1(0.5, 0.75, 1.5, -3.0).unwrap() - 0.6744407717426902).abs() < 1e-13);
}

#[test]
fn girard_values_match_reference() {
    // 30-digit reference values
    for (a, want) in [(0.2, 0.772949394815896), (0.5, 1.251338892764044), (0.8, 1.682258132565601)] {
        let g = girard_value(a).unwrap();
        assert!((g.intro_form - want).abs() < 1e-13, "alpha = {a}: {}", g.intro_form);
        assert!((g.abstract_form - want).abs() < 1e-13, "alpha = {a}: {}", g.abstract_form);
    }
}

#[test]
fn abs_phase_coefficients_closed_form() {
    let p = build_piecewise_abs();
    let n = 7;
    for nu in -20..=20 {
        let got = coefficient_quadrature(&p, n as f64, nu, 1e-13).unwrap();
        let want = abs_coefficient(n, nu);
        assert!((got - want).norm() < 1e-11, "nu = {nu}: {got} vs {want}");
    }
}

#[test]
fn abs_phase_full_grid_norm_is_aliased_closed_form() {
    let p = build_piecewise_abs();
    let (n, pow) = (16_i64, 12_u32);
    let big_n = 1_i64 << pow;
    // Σ_k 1/(c + kN) = (π/N)cot(πc/N) sums the aliases in closed form
    let nf = big_n as f64;
    let mut want = 0.0;
    for m in -big_n / 2..big_n / 2 {
        want += if (n + m).rem_euclid(2) == 1 {
            let cot = |c: f64| 1.0 / (PI * c / nf).tan();
            ((cot((n - m) as f64) + cot((n + m) as f64)) / nf).abs()
        } else if (m - n).rem_euclid(big_n) == 0 || (m + n).rem_euclid(big_n) == 0 {
            0.5
        } else {
            0.0
        };
    }
    let got = full_grid_l1(&p, n as f64, pow).unwrap();
    assert!((got - want).abs() < 1e-8, "{got} vs {want}");
}

#[test]
fn van_der_corput_bound_holds_against_direct_sums() {
    for mu in [1e-2, 1e-3, 1e-4] {
        for (a, b) in [(0_i64, 1000_i64), (-300, 700), (50, 5000)] {
            let f = |k: f64| 0.5 * mu * k * k + 0.3 * k;
            let direct: Complex64 = (a + 1..=b).map(|k| Complex64::from_polar(1.0, 2.0 * PI * f(k as f64))).sum();
            let fast = exponential_sum(f, a, b);
            assert!((fast - direct.norm()).abs() < 1e-8);
            let df = |k: f64| mu * k + 0.3;
            let bound = van_der_corput_bound(df(a as f64), df(b as f64), mu, 2.0).unwrap();
            assert!(fast <= bound, "mu = {mu}, ({a}, {b}): {fast} > {bound}");
        }
    }
}

#[test]
fn variation_bound_dominates_coefficients() {
    let s = build_sine();
    for (n, nu) in [(10.0, 12), (10.0, 30), (10.0, -25), (50.0, 60), (50.0, -51)] {
        let a = coefficient_quadrature(&s, n, nu, 1e-14).unwrap();
        let b = lemma1_var_bound(&s, n, nu).unwrap();
        assert!(2.0 * PI * a.norm() <= b, "n = {n}, nu = {nu}");
    }
    let ab = build_piecewise_abs();
    for nu in [9, 14, -11] {
        let a = coefficient_quadrature(&ab, 5.0, nu, 1e-13).unwrap();
        let b = lemma1_var_bound(&ab, 5.0, nu).unwrap();
        // attained with equality for this phase
        assert!(2.0 * PI * a.norm() <= b * (1.0 + 1e-12), "abs, nu = {nu}");
    }
}

#[test]
fn monotone_bound_on_quadratic_phase() {
    let rule = GaussLegendre::new(30);
    let v = rule.composite(|t| Complex64::from_polar(1.0, t * t), 1.0, 2.0, 16);
    // mpmath
    assert!((v - Complex64::new(-0.4430627754670557, 0.494_508_187_620_375)).norm() < 1e-13);
    let bound = lemma1_monotone_bound(2.0, 4.0).unwrap();
    assert!(v.norm() <= bound);
    assert!((v.re.abs() - 0.443).abs() < 1e-3);
}

// ---------------------------------------------------------------- properties

fn sine() -> PhaseFunction {
    build_sine()
}

fn half() -> PhaseFunction {
    build_blaschke(&[0.5]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gamma_agrees_with_stirling(x in 0.05f64..40.0) {
        let got = gamma_fn(x).unwrap();
        let want = stirling_gamma(x);
        prop_assert!(((got - want) / want).abs() < 5e-13);
    }

    #[test]
    fn partition_is_disjoint_and_covers(n in 2.0f64..20_000.0, use_sine in any::<bool>()) {
        let p = if use_sine { sine() } else { half() };
        let part = partition_terms(&p, n).unwrap();
        let ranges = [part.periphery_left, part.central, part.periphery_right];
        for i in 0..3 {
            for j in i + 1..3 {
                let (a, b) = (ranges[i], ranges[j]);
                prop_assert!(a.is_empty() || b.is_empty() || a.hi < b.lo || b.hi < a.lo);
            }
        }
        let covered: u64 = ranges.iter().map(|r| r.len()).sum();
        let interior = (part.external_above - part.external_below - 1).max(0) as u64;
        prop_assert_eq!(covered, interior);
        if !part.central.is_empty() {
            prop_assert!(part.central.lo as f64 >= n * part.alpha_n - 1e-9);
            prop_assert!(part.central.hi as f64 <= n * part.beta_n + 1e-9);
        }
        let lo = part.external_below - 2;
        let hi = part.external_above + 2;
        let mut central = 0u64;
        for m in lo..=hi {
            let nu = if part.sign < 0 { -m } else { m };
            let r = part.classify(nu);
            let expect = if m <= part.external_below || m >= part.external_above {
                Region::External
            } else if part.central.contains(m) {
                Region::Central
            } else if part.periphery_left.contains(m) {
                Region::PeripheryLeft
            } else {
                prop_assert!(part.periphery_right.contains(m));
                Region::PeripheryRight
            };
            prop_assert_eq!(r, expect);
            if r == Region::Central {
                central += 1;
            }
        }
        prop_assert_eq!(central, part.central.len());
    }

    #[test]
    fn spectra_are_unimodular_and_real(x in 2.0f64..300.0) {
        let spec = compute_spectrum_auto(&sine(), x).unwrap();
        let l2: f64 = spec.coeffs.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((l2 - 1.0).abs() < 1e-9);
        prop_assert!(spec.parseval_defect < 1e-9);
        prop_assert!(spec.max_imag() < 1e-9);
    }

    #[test]
    fn blaschke_spectra_are_unimodular(n in 2u32..400) {
        let spec = compute_spectrum_auto(&half(), n as f64).unwrap();
        prop_assert!(spec.parseval_defect < 1e-9);
        prop_assert!(spec.max_imag() < 1e-9);
    }

    #[test]
    fn refining_the_grid_changes_nothing(x in 1.0f64..200.0) {
        let p = sine();
        let pow = auto_grid_pow(&p, x);
        let a = compute_spectrum(&p, x, pow).unwrap();
        let b = compute_spectrum(&p, x, pow + 1).unwrap();
        prop_assert_eq!((a.nu_min, a.nu_max), (b.nu_min, b.nu_max));
        for (nu, c) in a.iter() {
            prop_assert!((c - b.get(nu).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn fft_and_quadrature_agree(x in 1.0f64..40.0, pick in 0.0f64..1.0) {
        let p = sine();
        let spec = compute_spectrum_auto(&p, x).unwrap();
        let nu = spec.nu_min + ((spec.nu_max - spec.nu_min) as f64 * pick) as i64;
        let q = coefficient_quadrature(&p, x, nu, 1e-13).unwrap();
        prop_assert!((spec.get(nu).unwrap() - q).norm() < 1e-9);
        let j = bessel_j(nu, x).unwrap();
        prop_assert!((q.re - j).abs() < 1e-10);
    }

    #[test]
    fn psi_inverts_the_derivative(x in -0.99f64..0.99, use_sine in any::<bool>()) {
        let p = if use_sine { sine() } else { half() };
        let (a, b) = (p.alpha(), p.beta());
        let y = a + (b - a) * (x + 1.0) / 2.0;
        let t = psi(&p, y).unwrap();
        prop_assert!((0.0..=PI).contains(&t));
        prop_assert!((p.d1(t) - y).abs() < 1e-11 * y.abs().max(1.0));
    }

    #[test]
    fn legendre_derivative_is_psi(x in -0.9f64..0.9) {
        let p = sine();
        let e = 1e-5;
        let slope = (legendre(&p, x + e).unwrap() - legendre(&p, x - e).unwrap()) / (2.0 * e);
        prop_assert!((slope - psi(&p, x).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn limit_scales_with_square_root(c in 0.1f64..10.0) {
        let p = sine();
        let base = asymptotic_limit(&p, 1e-12).unwrap();
        let scaled = asymptotic_limit(&p.scaled(c).unwrap(), 1e-12).unwrap();
        prop_assert!((scaled - c.sqrt() * base).abs() < 1e-10 * c.sqrt().max(1.0));
    }

    #[test]
    fn modulus_is_monotone(d1 in 1e-3f64..3.0, d2 in 1e-3f64..3.0, use_sine in any::<bool>()) {
        let p = if use_sine { sine() } else { half() };
        let table = ModulusTable::new(&p, 4096);
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(table.omega(lo) <= table.omega(hi));
        prop_assert!(table.omega(lo) >= 0.0);
    }

    #[test]
    fn choose_phi_solves_its_equation(n in 16.0f64..1e8, k in 0.5f64..4.0) {
        let choice = choose_phi_with(|d| k * d, n).unwrap();
        if choice.diagnostic.is_none() {
            let want = (n.sqrt() / k).powf(0.2);
            prop_assert!((choice.phi - want).abs() < 1e-9 * want);
            prop_assert!((choice.omega * choice.phi.powi(4) - 1.0).abs() < 1e-8);
        } else {
            let want = (n.sqrt() / k).powf(0.2);
            prop_assert!(want < 1.0 || want > n.powf(0.25));
        }
    }

    #[test]
    fn fractional_parts_and_weyl_magnitudes_are_bounded(
        n in 1u64..5000, j in 1i64..6, c in -3.0f64..3.0,
    ) {
        let arr = fractional_array(|x| c * x * x + x, n, (0.0, 1.0));
        prop_assert!(arr.values.iter().all(|v| (0.0..1.0).contains(v)));
        let w = weyl_sum(&arr.values, j).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&w));
        prop_assert!((0.0..1.0).contains(&frac(c * 1e6)));
    }
}
