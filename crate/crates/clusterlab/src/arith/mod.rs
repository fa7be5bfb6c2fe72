//! Finite-field point counting and the arithmetic identities that check it:
//! Dirichlet characters, Frobenius-eigenvalue tables, quasi-polynomial
//! fitting and Grothendieck-Lefschetz consistency.

pub mod count;
pub mod dirichlet;
pub mod ff;
pub mod fit;

pub use count::{
    count_isolated, count_louise, grothendieck_consistency, rank1_count, GrothendieckReport,
    PointCountSample,
};
pub use dirichlet::{
    char_sum, char_sum_star, dir_star, dirichlet_group, frobenius_rank1, x_multiset,
    DirichletCharacter, EigenvalueDescriptor, FrobeniusRank1,
};
pub use ff::{make_field, FiniteField};
pub use fit::{fit_quasi_polynomial, QuasiPolynomial};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArithError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree {0} exceeds the cap {1}")]
    ExtensionTooLarge(u32, u32),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("character sum did not reduce to an integer")]
    NonIntegerSum,
    #[error("no quasi-polynomial fits the samples within the given bounds")]
    NoFit,
    #[error("certificate does not verify against the exchange matrix")]
    CertificateMismatch,
}
