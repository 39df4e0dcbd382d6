//! Numerical toolkit for the sign uncertainty principle and the
//! `L²`-versus-`L¹×L¹` Fourier inequality on radial functions.
//!
//! Radial functions on `ℝ^d` are expanded in the Laguerre–Gaussian
//! eigenbasis `ψ_k(r) = L_k^{(d/2−1)}(2πr²) e^{−πr²}`, on which the unitary
//! Fourier transform acts as `ψ̂_k = (−1)^k ψ_k`. On top of that basis the
//! crate provides norms, last-sign-change radii, the closed-form bounds,
//! an inequality verifier, a ratio maximizer, and a small Cohn–Elkies linear
//! program with auditable certificates.

pub mod bounds;
pub mod error;
pub mod lp;
pub mod numerics;
pub mod optimize;
pub mod radial;
pub mod sign;
pub mod verify;

pub use error::{Error, Result};
pub use radial::{EigenExpansion, RadialProfile};
