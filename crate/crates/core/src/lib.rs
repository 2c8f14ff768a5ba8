//! Numerical laboratory for the local regularity theory of nonuniformly
//! elliptic equations `-div(A(x) ∇u) = f` with `λ⁻¹ ∈ L^q` and `μ ∈ L^p`.
//!
//! The crate is organised bottom-up:
//!
//! * [`exponents`] derives the critical exponents and classifies a parameter
//!   tuple into a regularity regime.
//! * [`coefficients`] evaluates the radial weights `r^β (log 1/r)^θ` and their
//!   integrability diagnostics, including the ellipticity aggregate `Λ(B_R)`.
//! * [`quadrature`] integrates the singular radial integrands after the
//!   substitution `r = e^{-t}`, including the counterexample kernels `K_m`.
//! * [`counterexamples`] evaluates the explicit unbounded solutions and their
//!   sources, and checks the radial strong form of the equation.
//! * [`solver`] solves the radial problem by finite volumes and the planar
//!   problem by a five-point scheme with conjugate gradients.
//! * [`harness`] turns solutions into empirical checks of the sup bound, the
//!   logarithmic bound, the Harnack quotient, oscillation decay and the Moser
//!   norm chain.

pub mod coefficients;
pub mod counterexamples;
pub mod digest;
pub mod error;
pub mod exponents;
pub mod fit;
pub mod harness;
pub mod quadrature;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
