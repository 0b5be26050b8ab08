//! Exact and approximate permanents of non-negative matrices.
//!
//! The crate computes the permanent of a non-negative square matrix together
//! with its Bethe and scaled Sinkhorn approximations, their degree-`M`
//! (finite graph cover) counterparts, and the coefficient families that make
//! `perm(θ)^M`, `perm_B,M(θ)^M` and `perm_scS,M(θ)^M` linear in the monomials
//! `θ^{Mγ}` over the scaled doubly stochastic lattice `Γ_{M,n}`.
//!
//! Everything that is an identity is evaluated in exact rational arithmetic;
//! the analytic permanents are computed by convex minimization in binary64.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end, and shared caches live in the `permlab` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bounds;
pub mod coefficients;
pub mod degree_m;
mod error;
pub mod flow;
pub mod free_energy;
pub mod matrix;
pub mod permanent;
pub mod permutation;
pub mod rational;

pub use error::{Error, Result};
pub use flow::{enumerate_flow_matrices, FlowMatrix};
pub use matrix::{kron_uniform, support, RationalMatrix, SupportPattern};
pub use permutation::{cycle_count, valid_permutations, Permutation};
pub use rational::Rational;
