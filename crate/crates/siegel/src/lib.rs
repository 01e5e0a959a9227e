//! Exact symplectic matrices over the integers, the argument cocycle on the
//! Siegel upper half-space, and multiplier systems of real weight.
//!
//! The crate is organized bottom-up:
//!
//! * [`matrix`]: exact `Sp(g, Z)` matrices, block structure, the action on the
//!   Siegel upper half-space, parabolic classification, standard families.
//! * [`cocycle`]: principal arguments, continued arguments of `det(CZ + D)`
//!   along paths, and the integer cocycle `w(M, N)` they define.
//! * [`genus1`]: the classical closed-form evaluation of the cocycle in genus
//!   one (a five-case sign table) in both orientations.
//! * [`symbols`]: Kronecker/Jacobi/Legendre symbols and small prime utilities,
//!   with an Euler-criterion oracle.
//! * [`forms`]: theta series and discriminant logarithms, Rademacher integers,
//!   and multiplier systems of weight 1/2 and arbitrary real weight.
//! * [`sample`]: seeded random instance generators used by tests and
//!   certificates.
//! * [`cert`]: machine-checkable certificates for the lemma suite, the
//!   commutator-identity check, and the level-4 weight-integrality chain.
//!
//! All randomized routines take explicit seeds and are deterministic; all
//! certificate JSON is byte-stable for a fixed seed and input.

pub mod cert;
pub mod cocycle;
pub mod forms;
pub mod genus1;
pub(crate) mod linalg;
pub mod matrix;
pub mod sample;
pub mod symbols;

pub use cocycle::{w_cocycle, CocycleValue};
pub use matrix::{SiegelPoint, SymplecticMatrix};
