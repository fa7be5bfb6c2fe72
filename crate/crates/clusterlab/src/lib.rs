//! Exact-arithmetic invariants of cluster varieties.
//!
//! The crate is organized around the extended exchange matrix: [`cluster`]
//! implements matrix and seed mutation with Laurent-polynomial tracking,
//! [`louise`] certifies the Louise property by searching mutation classes for
//! separating edges, [`cover`] constructs covering maps and GSV forms through
//! Smith normal form, [`standard`] computes standard cohomology from residue
//! constraints, [`isolated`] produces mixed Hodge tables of isolated cluster
//! varieties, and [`arith`] counts points over finite fields and checks the
//! results against Frobenius-eigenvalue and Grothendieck–Lefschetz identities.
//!
//! All arithmetic is exact (arbitrary-precision integers and rationals).
//! With the default `parallel` feature the enumeration-heavy operations run
//! on rayon; disabling the feature compiles the same algorithms sequentially.

pub mod arith;
pub mod cluster;
pub mod cover;
pub mod hodge;
pub mod isolated;
pub mod laurent;
pub mod linalg;
pub mod louise;
pub mod standard;

mod par;

pub use cluster::{ExchangeMatrix, Quiver};
pub use hodge::{HodgeTable, PoincareSeries};
pub use linalg::{AbelianGroup, IntMatrix, SnfDecomposition};
