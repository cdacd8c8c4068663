//! Fourier coefficients and Wiener-algebra norms of unimodular exponentials
//! `e^{ixh(t)}`.
//!
//! For a real phase `h` with `h(t + 2π) = h(t) + 2kπ`, the coefficients
//! `a_{x,ν}` of `e^{ixh(t)} = Σ a_{x,ν} e^{iνt}` are computed two independent
//! ways (uniform sampling + FFT, and adaptive panel quadrature). The scaled
//! norm `S(x) = Σ|a_{x,ν}| / √x` of an odd phase whose second derivative keeps
//! one sign on `(0, π)` tends to `(2/π)^{3/2} ∫₀^π √|h''(t)| dt`; the modules
//! below compute that limit, run convergence studies against it and check the
//! ingredients of the argument numerically:
//!
//! * [`phase`]: admissible phases, hypothesis validation, `ψ = (h')⁻¹`, the
//!   Legendre transform and the modulus of continuity of `h''`.
//! * [`spectrum`]: coefficient spectra, the scaled norm and the
//!   external / periphery / central index partition.
//! * [`stationary`]: the stationary-phase approximation of central
//!   coefficients, Fresnel integrals and oscillatory-integral bounds.
//! * [`asymptotics`]: the limit `L(h)`, convergence studies and truncated
//!   Riemann sums.
//! * [`equidist`]: fractional-part arrays, Weyl sums and the Van der Corput
//!   bound.
//! * [`specfun`]: Γ, B, ₂F₁, Bessel `J_ν` and the closed forms for single
//!   Blaschke factors.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod equidist;
pub mod error;
pub mod export;
pub mod phase;
pub mod quad;
pub mod specfun;
pub mod spectrum;
pub mod stationary;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use phase::{PhaseFunction, ValidationReport};
pub use spectrum::{CoefficientSpectrum, TermPartition};
