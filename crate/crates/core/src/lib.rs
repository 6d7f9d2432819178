//! Entanglement spreading in single-excitation XXZ spin chains.
//!
//! An excitation launched from the center of a chain spreads with amplitudes
//! `α_x(t)`; the concurrence between the origin and site `x` is
//! `2|α_0||α_x|`, and its second spatial moment `M(t) = 2|α_0| W(t)` with
//! `W(t) = Σ_{x≠0} x² |α_x|` measures how far entanglement has travelled.
//!
//! Modules, bottom up:
//! - [`bessel`]: integer-order `J_n` rows (Miller recurrence) and a series oracle.
//! - [`chain`]: ordered and centrally disordered Hamiltonians, seeded disorder.
//! - [`propagator`]: Chebyshev time evolution and a dense diagonalization oracle.
//! - [`analytic`]: closed-form amplitudes, bounds and asymptotes.
//! - [`observables`]: concurrence (shortcut and Wootters) and the moments.
//! - [`analysis`]: averaging, power-law fits, bound reports, emission fits.

pub mod analysis;
pub mod analytic;
pub mod bessel;
pub mod chain;
pub mod error;
pub mod observables;
pub mod propagator;

pub use error::{Error, Result};
pub use num_complex::Complex64;
