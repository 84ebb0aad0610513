//! Semidiscrete entropy gradient flows on the probability simplex.
//!
//! This crate builds finite-difference diffusion and drift-diffusion
//! schemes on a uniform grid over [0, 1] as gradient flows
//! ∂_t ρ = Qφ(ρ) = −K(ρ)D𝓔(ρ) of an entropy 𝓔 with respect to a nonlocal
//! transport metric, and certifies displacement λ-convexity of 𝓔 along the
//! geodesics of that metric.
//!
//! Module map:
//!
//! - [`means`] — logarithmic / f- / power means with analytic partials, and
//!   checkers for the identities the certificates rest on;
//! - [`markov`] — grid, potential weights, discrete gradient, and the
//!   reversible rate matrix Q;
//! - [`flow`] — entropy functionals, the Onsager operator K(ρ), adaptive
//!   time integration, and the zero-potential a priori estimate monitors;
//! - [`convexity`] — edge-space tridiagonal form of the entropy's second
//!   derivative, the explicit constant λ_h, Sturm-bisection PSD
//!   certificates, and the quadratic-flux counterexample;
//! - [`geodesics`] — constant-speed geodesics by Newton shooting (with an
//!   action-minimization fallback), the transport distance, and
//!   displacement-convexity verification along computed geodesics.

pub mod convexity;
pub mod error;
pub mod flow;
pub mod geodesics;
pub mod markov;
pub mod means;
mod ode;
pub mod report;

pub use error::{Error, Result};

/// Compiles the README's usage example as a doctest.
#[doc = include_str!("../../../README.md")]
#[cfg(doctest)]
pub struct ReadmeDoctests;
