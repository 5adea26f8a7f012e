//! Numerical laboratory for the first Dirac eigenvalue on flat 2-tori.
//!
//! The library covers four layers:
//!
//! * [`lattice`] — rank-2 lattices, spin structures as holonomy parities,
//!   dual lattices and reduction to the fundamental domain `M_1` of the
//!   spin-conformal moduli space;
//! * [`spectrum`] — the closed-form Dirac spectrum `±2π|v + δ_χ|`,
//!   kernel detection, and plane-wave eigenspinors;
//! * [`field`] — spinor fields on the χ-twisted frequency set, grid
//!   synthesis, quadrature, and the conformally invariant functional
//!   `J(ψ) = (∫|Dψ|^{4/3})^{3/2} / |∫⟨Dψ,ψ⟩|`;
//! * [`minimize`] / [`cylinder`] — variational estimation of
//!   `λ_min = inf J` over the moduli space, and the cylinder-to-sphere
//!   (Mercator) machinery with its `2√π` lower-bound checks.

pub mod cylinder;
pub mod error;
pub mod field;
pub mod lattice;
pub mod minimize;
pub mod spectrum;

pub use error::{Error, Result};

/// `λ_min` of the round 2-sphere, `2√π`, computed from the closed form.
pub fn sphere_lambda_min() -> f64 {
    2.0 * std::f64::consts::PI.sqrt()
}
