//! Search for k-restricted minwise independent permutation families via
//! SAT, plus the surrounding combinatorics.
//!
//! The pipeline is: build a CNF model ([`encoder`]) for a configuration
//! `(n, k, d)` and optionally a subgroup of `S_n` whose cosets the family
//! must be made of ([`groups`]), solve it ([`solver`]), decode the model
//! into a [`Family`], and check it with the independent verifier in
//! [`family`].

pub mod bijection;
pub mod bounds;
pub mod cnf;
pub mod encoder;
pub mod error;
pub mod family;
pub mod groups;
pub mod patterns;
pub mod perm;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use family::{Family, VerificationReport};
pub use perm::Permutation;
