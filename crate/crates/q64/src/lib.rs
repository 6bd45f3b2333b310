//! Construction and analysis of rank-64 even unimodular lattices obtained
//! from pairs of ternary codes sitting inside eight copies of the E8 root
//! lattice reduced mod 3.
//!
//! The pipeline, bottom to top:
//!
//! * [`gf3`] — dense and bit-packed linear algebra over GF(3).
//! * [`e8`] — the E8 Gram matrix, its small-norm shells, the reduction
//!   `U = E/3E`, and the orthogonal group `O(E)` as integer matrices with a
//!   faithful permutation action on `U \ {0}`.
//! * [`perm`] — permutation groups: orbits, Schreier trees, and a
//!   deterministic incremental Schreier–Sims (base and strong generating set)
//!   for exact group orders and stabilizer chains.
//! * [`isotropic`] — maximal totally isotropic subspaces of `U`, orbit and
//!   stabilizer computations, and the pair geometry used to set up code
//!   coordinates.
//! * [`codes`] — the 8-dimensional ternary codes, their 24-dimensional
//!   annihilators, acceptance conditions, and the echelon form driving the
//!   minimal-vector backtrack.
//! * [`lattice`] — integer bases (Hermite normal form), Gram matrices, and
//!   exact certificates: evenness, determinant 1, index 3^32, and emptiness
//!   of small-norm shells.
//! * [`minvec`] — stratified enumeration of all minimal vectors.
//! * [`invariants`] — intersection-pattern distributions over the minimal
//!   vectors (the isomorphism-class separating invariant) with a SIMD
//!   histogram kernel.
//! * [`autgroup`] — rigidifying bases certifying automorphism groups.
//! * [`campaign`] — seeded end-to-end runs with resumable on-disk artifacts
//!   and a deterministic ledger.

pub mod autgroup;
pub mod campaign;
pub mod codes;
pub mod e8;
pub mod gf3;
pub mod invariants;
pub mod io;
pub mod isotropic;
pub mod lattice;
pub mod minvec;
pub mod perm;

mod error;

pub use error::{Error, Result};
