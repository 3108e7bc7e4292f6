//! Numerics and simulation for integrated mixed moving average (MMA) processes.
//!
//! A model is the generating quadruple `(a, b, λ, π)` of an infinitely
//! divisible random measure together with a causal kernel `f(x, v)`. This
//! crate evaluates the integral conditions that govern existence and growth
//! of `X*(t) = ∫₀ᵗ X(u) du`, classifies the almost-sure growth rate, and
//! simulates `X*` paths from the underlying Poisson random measure.

pub mod conditions;
pub mod config;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod measures;
pub mod quadrature;
pub mod rng;
pub mod simulate;
pub mod special;

pub use error::{Error, Result};
