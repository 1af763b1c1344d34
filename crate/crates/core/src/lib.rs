//! Evolution operators for non-autonomous linear equations `x' = A(t)x` whose
//! generator commutators are central (scalar, or scalar multiples of a fixed
//! central element on matrix models).
//!
//! The crate builds the evolution three ways and checks them against each
//! other and against independent oracles:
//!
//! * piecewise-frozen exponential products over dyadic partitions
//!   ([`evolution`]), converging to the evolution as the mesh refines;
//! * a closed form `exp(∫A) · exp(½∫∫μ)` valid when pairwise commutators are
//!   central ([`magnus`]), together with its discrete Zassenhaus-type
//!   decomposition;
//! * commutator pass-through identities with correction integrals `S⁽ˡ⁾` for
//!   families whose p-fold commutators are central ([`commutator`]).
//!
//! Three backends exercise the machinery at desk scale: exact nilpotent
//! matrix families with a high-order ODE oracle ([`heisenberg`]), coherent
//! Weyl dynamics for linearly driven boson modes with a truncated Fock oracle
//! ([`weyl`], [`fock`]), and a spectral propagator for a quantum particle in
//! a time-dependent uniform electric field ([`schrodinger`]).

pub mod coeff;
pub mod commutator;
pub mod error;
pub mod evolution;
pub mod fock;
pub mod heisenberg;
pub mod linalg;
pub mod magnus;
pub mod quadrature;
pub mod schrodinger;
pub mod weyl;

pub use error::{Error, Result};
