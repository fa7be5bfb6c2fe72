//! Automorphism character groups, covering-map R-matrices and GSV forms.
//!
//! Covers are encoded by integer matrices R = (Id_n 0; P Q).  The
//! construction follows the Smith-normal-form recipe: with B = U D V and
//! all invariant factors dividing d, the matrix
//! U' = diag(V^-1, Id_m) * diag(d/d_1, ..., d/d_n, 1, ..., 1) * U^-1
//! satisfies U' B = (d Id_n; 0), and any integer row mix (M1 | M2) U' with
//! M1 = (Id_n; 0) keeps that product while leaving the trailing block M2
//! free to make Q nonsingular.  The postconditions are asserted on every
//! output rather than trusted.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cluster::ExchangeMatrix;
use crate::linalg::{self, AbelianGroup, IntMatrix};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoverError {
    #[error("exchange matrix does not have full rank")]
    NotFullRank,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("full-rank GSV forms require n+m to be even")]
    OddDimension,
    #[error("completion search exhausted its retry budget")]
    CompletionFailed,
}

/// Covering-map matrix in block form (Id_n 0; P Q).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverMatrix {
    n: usize,
    r: IntMatrix,
}

impl CoverMatrix {
    /// Checks the block form: top-left Id_n, top-right zero.
    pub fn new(n: usize, r: IntMatrix) -> Result<Self, CoverError> {
        if !r.is_square() || r.rows() < n {
            return Err(CoverError::PreconditionViolated(format!(
                "cover matrix must be square of size >= n, got {}x{}",
                r.rows(),
                r.cols()
            )));
        }
        for i in 0..n {
            for j in 0..r.cols() {
                let expect = if i == j { BigInt::one() } else { BigInt::zero() };
                if *r.at(i, j) != expect {
                    return Err(CoverError::PreconditionViolated(
                        "top block rows must be (Id_n | 0)".into(),
                    ));
                }
            }
        }
        Ok(CoverMatrix { n, r })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.r
    }

    pub fn is_full_rank(&self) -> bool {
        !self.r.det().is_zero()
    }
}

/// Character group of Aut(A): the cokernel Z^(n+m) / B Z^n.
pub fn aut_characters(b: &ExchangeMatrix) -> AbelianGroup {
    linalg::cokernel(b.matrix())
}

/// Locally constant characters: the torsion part of the cokernel.
pub fn locally_constant_characters(b: &ExchangeMatrix) -> AbelianGroup {
    linalg::torsion_cokernel(b.matrix())
}

/// Minimal d with d Z^n contained in B^T Z^(n+m): the lcm of the invariant
/// factors.  Requires full rank.
pub fn cover_degree(b: &ExchangeMatrix) -> Result<BigInt, CoverError> {
    let snf = linalg::smith_normal_form(b.matrix());
    let factors = snf.invariant_factors();
    if factors.len() != b.n() {
        return Err(CoverError::NotFullRank);
    }
    Ok(factors.iter().fold(BigInt::one(), |acc, d| acc.lcm(d)))
}

/// Builds a cover matrix R with R * B = (B; d Id_n; 0), taking d to be the
/// cover degree.
pub fn build_cover(b: &ExchangeMatrix, seed: u64) -> Result<CoverMatrix, CoverError> {
    let d = cover_degree(b)?;
    build_cover_with(b, &d, seed)
}

/// As [`build_cover`] for a chosen multiple d of the cover degree.
pub fn build_cover_with(
    b: &ExchangeMatrix,
    d: &BigInt,
    seed: u64,
) -> Result<CoverMatrix, CoverError> {
    let (n, m) = (b.n(), b.m());
    if m < n {
        return Err(CoverError::PreconditionViolated(format!(
            "need m >= n, got n={n}, m={m}"
        )));
    }
    let degree = cover_degree(b)?;
    if d.is_zero() || !(d % &degree).is_zero() {
        return Err(CoverError::PreconditionViolated(format!(
            "d = {d} is not a positive multiple of the cover degree {degree}"
        )));
    }
    let target = cover_target(b, d);

    // The identity is preferred whenever it already works (d-principal
    // coefficients and friends).
    let id = IntMatrix::identity(n + m);
    if id.mul(b.matrix()) == target {
        let r = CoverMatrix::new(n, id).expect("identity has block form");
        return Ok(r);
    }

    let snf = linalg::smith_normal_form(b.matrix());
    let u_inv = snf.u.inverse_unimodular().ok_or(CoverError::NotFullRank)?;
    let v_inv = snf.v.inverse_unimodular().ok_or(CoverError::NotFullRank)?;
    // diag(d/d_1, ..., d/d_n, 1, ..., 1)
    let mut scale = IntMatrix::identity(n + m);
    for i in 0..n {
        scale.set(i, i, d / snf.d.at(i, i));
    }
    // diag(V^-1, Id_m)
    let mut v_block = IntMatrix::identity(n + m);
    for i in 0..n {
        for j in 0..n {
            v_block.set(i, j, v_inv.at(i, j).clone());
        }
    }
    let u_prime = v_block.mul(&scale).mul(&u_inv);

    // (P Q) = (M1 | M2) U' with M1 = (Id_n; 0) fixed; choose integer M2
    // making Q nonsingular.  det Q is a nonzero polynomial in the entries
    // of M2, so a small search always terminates.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates_tried = 0usize;
    let next_m2 = |tries: usize, rng: &mut ChaCha8Rng| -> IntMatrix {
        match tries {
            0 => IntMatrix::identity(m),
            1 => IntMatrix::zeros(m, m),
            t => {
                let range = 1 + (t / 100) as i64;
                IntMatrix::from_fn(m, m, |_, _| BigInt::from(rng.gen_range(-range..=range)))
            }
        }
    };
    while candidates_tried < 10_000 {
        let m2 = next_m2(candidates_tried, &mut rng);
        candidates_tried += 1;
        let mut m1m2 = IntMatrix::zeros(m, n + m);
        for i in 0..n {
            m1m2.set(i, i, BigInt::one());
        }
        for i in 0..m {
            for j in 0..m {
                m1m2.set(i, n + j, m2.at(i, j).clone());
            }
        }
        let pq = m1m2.mul(&u_prime);
        let q = pq.submatrix(0..m, n..n + m);
        if q.det().is_zero() {
            continue;
        }
        let mut r = IntMatrix::zeros(n + m, n + m);
        for i in 0..n {
            r.set(i, i, BigInt::one());
        }
        for i in 0..m {
            for j in 0..n + m {
                r.set(n + i, j, pq.at(i, j).clone());
            }
        }
        assert_eq!(r.mul(b.matrix()), target, "cover construction postcondition");
        let cover = CoverMatrix::new(n, r).expect("block form by construction");
        assert!(cover.is_full_rank());
        return Ok(cover);
    }
    Err(CoverError::CompletionFailed)
}

/// The matrix (B; d Id_n; 0) that a cover of degree d must produce.
pub fn cover_target(b: &ExchangeMatrix, d: &BigInt) -> IntMatrix {
    let (n, m) = (b.n(), b.m());
    IntMatrix::from_fn(n + m, n, |i, j| {
        if i < n {
            b.matrix().at(i, j).clone()
        } else if i < 2 * n {
            if i - n == j {
                d.clone()
            } else {
                BigInt::zero()
            }
        } else {
            BigInt::zero()
        }
    })
}

/// Mutation of a cover matrix in direction k (1-based), relative to the
/// exchange matrix B at the same seed.  Only the entries (i, k) with i > n
/// change:
/// R'_ik = -R_ik - [C_ik]+ + sum_l R_il [B_lk]+   where C = R B.
pub fn mutate_cover(r: &CoverMatrix, b: &ExchangeMatrix, k: usize) -> CoverMatrix {
    let n = b.n();
    let size = b.size();
    assert!(k >= 1 && k <= n, "mutable index out of range");
    assert_eq!(r.matrix().rows(), size, "cover/exchange size mismatch");
    let kk = k - 1;
    let c = r.matrix().mul(b.matrix());
    let pos = |x: &BigInt| if x.is_positive() { x.clone() } else { BigInt::zero() };
    let out = IntMatrix::from_fn(size, size, |i, j| {
        if j != kk || i < n {
            r.matrix().at(i, j).clone()
        } else {
            let mut s = -r.matrix().at(i, kk) - pos(c.at(i, kk));
            for l in 0..size {
                s += r.matrix().at(i, l) * pos(b.matrix().at(l, kk));
            }
            s
        }
    });
    CoverMatrix::new(n, out).expect("mutation preserves block form")
}

/// Skew-symmetric square extension of an exchange matrix: the coefficient
/// matrix of a GSV 2-form.  The first n columns agree with B.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GsvMatrix {
    n: usize,
    bhat: IntMatrix,
}

impl GsvMatrix {
    pub fn new(n: usize, bhat: IntMatrix) -> Result<Self, CoverError> {
        if !bhat.is_square() {
            return Err(CoverError::PreconditionViolated("GSV matrix must be square".into()));
        }
        let size = bhat.rows();
        for i in 0..size {
            for j in 0..size {
                if *bhat.at(i, j) != -bhat.at(j, i) {
                    return Err(CoverError::PreconditionViolated(
                        "GSV matrix must be skew-symmetric".into(),
                    ));
                }
            }
        }
        Ok(GsvMatrix { n, bhat })
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.bhat
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_full_rank(&self) -> bool {
        !self.bhat.det().is_zero()
    }
}

/// Completes B to a full-rank skew-symmetric square matrix.  Deterministic
/// for a given seed: structured candidates first, then small sampled
/// bottom-right blocks of growing height.
pub fn complete_gsv(b: &ExchangeMatrix, seed: u64) -> Result<GsvMatrix, CoverError> {
    let (n, m) = (b.n(), b.m());
    let size = n + m;
    if size % 2 != 0 {
        return Err(CoverError::OddDimension);
    }
    if !linalg::is_full_rank(b.matrix()) {
        return Err(CoverError::NotFullRank);
    }
    let assemble = |lower: &IntMatrix| -> IntMatrix {
        // B-hat = (B, -C^T; C, M) with B-tilde = (B; C).
        IntMatrix::from_fn(size, size, |i, j| {
            if j < n {
                b.matrix().at(i, j).clone()
            } else if i < n {
                -b.matrix().at(j, i)
            } else {
                lower.at(i - n, j - n).clone()
            }
        })
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for tries in 0..10_000usize {
        let lower = match tries {
            0 => IntMatrix::zeros(m, m),
            1 => {
                // Standard symplectic-style pairing of the frozen block.
                IntMatrix::from_fn(m, m, |i, j| {
                    if i + 1 == j && i % 2 == 0 {
                        BigInt::one()
                    } else if j + 1 == i && j % 2 == 0 {
                        -BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
            }
            t => {
                let range = 1 + (t / 200) as i64;
                let mut lower = IntMatrix::zeros(m, m);
                for i in 0..m {
                    for j in i + 1..m {
                        let v = BigInt::from(rng.gen_range(-range..=range));
                        lower.set(i, j, v.clone());
                        lower.set(j, i, -v);
                    }
                }
                lower
            }
        };
        let bhat = assemble(&lower);
        if !bhat.det().is_zero() {
            let out = GsvMatrix::new(n, bhat).expect("skew by construction");
            debug_assert_eq!(out.matrix().submatrix(0..size, 0..n), *b.matrix());
            return Ok(out);
        }
    }
    Err(CoverError::CompletionFailed)
}

/// Pullback of a GSV form along a cover: C-hat = R * B-hat * R^T.
pub fn gsv_pullback(bhat: &GsvMatrix, r: &CoverMatrix) -> GsvMatrix {
    assert_eq!(bhat.matrix().rows(), r.matrix().rows(), "shape mismatch");
    let out = r.matrix().mul(bhat.matrix()).mul(&r.matrix().transpose());
    GsvMatrix::new(bhat.n, out).expect("congruence preserves skew-symmetry")
}
