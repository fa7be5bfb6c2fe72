//! Exact integer and rational linear algebra on lattice maps.
//!
//! Everything here works over arbitrary-precision integers: Smith normal
//! form with a full divisibility chain, ranks, determinants (Bareiss),
//! cokernel structure and unimodular inverses.  Matrices are immutable
//! values and all operations are pure functions.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Dense row-major integer matrix with arbitrary-precision entries.
///
/// Zero-dimensional matrices (0 rows or 0 columns) are legal everywhere.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.at(i, j))?;
            }
            writeln!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    /// Builds a matrix from rows of machine integers.
    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows.iter().flatten().map(|&x| BigInt::from(x)).collect();
        IntMatrix { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IntMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &BigInt {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> IntMatrix {
        IntMatrix::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        IntMatrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = BigInt::zero();
            for k in 0..self.cols {
                acc += self.at(i, k) * other.at(k, j);
            }
            acc
        })
    }

    /// Vertically stacks `self` on top of `other`.
    pub fn stack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.cols, "dimension mismatch in stack");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        IntMatrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn submatrix(&self, row_range: std::ops::Range<usize>, col_range: std::ops::Range<usize>) -> IntMatrix {
        IntMatrix::from_fn(row_range.len(), col_range.len(), |i, j| {
            self.at(row_range.start + i, col_range.start + j).clone()
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Exact determinant of a square matrix by fraction-free (Bareiss)
    /// elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> =
            (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = &num / &prev;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        sign * a[n - 1][n - 1].clone()
    }

    pub fn is_unimodular(&self) -> bool {
        self.is_square() && self.det().abs().is_one()
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        smith_normal_form(self).invariant_factors().len()
    }

    /// Inverse of a unimodular matrix; `None` when `self` is not unimodular.
    pub fn inverse_unimodular(&self) -> Option<IntMatrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        // Gauss-Jordan over the rationals on [self | I].
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                (0..2 * n)
                    .map(|j| {
                        if j < n {
                            BigRational::from(self.at(i, j).clone())
                        } else if j - n == i {
                            BigRational::one()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        for k in 0..n {
            let pivot = (k..n).find(|&i| !a[i][k].is_zero())?;
            a.swap(k, pivot);
            let p = a[k][k].clone();
            for j in 0..2 * n {
                a[k][j] = &a[k][j] / &p;
            }
            for i in 0..n {
                if i != k && !a[i][k].is_zero() {
                    let f = a[i][k].clone();
                    for j in 0..2 * n {
                        let sub = &f * &a[k][j];
                        a[i][j] = &a[i][j] - sub;
                    }
                }
            }
        }
        let mut out = IntMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = &a[i][n + j];
                if !v.denom().is_one() {
                    return None;
                }
                out.set(i, j, v.numer().clone());
            }
        }
        Some(out)
    }
}

/// Smith normal form `u * d * v = input` with unimodular `u`, `v` and a
/// diagonal `d` whose nonnegative entries form a divisibility chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SnfDecomposition {
    /// Nonzero diagonal entries d_1 | d_2 | ... of the diagonal factor.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let k = self.d.rows().min(self.d.cols());
        (0..k)
            .map(|i| self.d.at(i, i).clone())
            .filter(|x| !x.is_zero())
            .collect()
    }
}

/// Finitely generated abelian group `Z^free_rank + Z/t_1 + Z/t_2 + ...`
/// with the torsion entries forming a divisibility chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroup {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        AbelianGroup { free_rank: 0, torsion: Vec::new() }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn order(&self) -> Option<BigInt> {
        if self.free_rank > 0 {
            return None;
        }
        Some(self.torsion.iter().product())
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" x "))
        }
    }
}

struct SnfWorker {
    a: IntMatrix,
    u: IntMatrix,
    v: IntMatrix,
}

impl SnfWorker {
    // Row ops on `a` are mirrored on `u` by the inverse column op, and
    // column ops on `a` by the inverse row op on `v`, so u * a * v is
    // constant throughout.
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.a.cols() {
            let (x, y) = (self.a.at(i, c).clone(), self.a.at(j, c).clone());
            self.a.set(i, c, y);
            self.a.set(j, c, x);
        }
        for r in 0..self.u.rows() {
            let (x, y) = (self.u.at(r, i).clone(), self.u.at(r, j).clone());
            self.u.set(r, i, y);
            self.u.set(r, j, x);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.a.rows() {
            let (x, y) = (self.a.at(r, i).clone(), self.a.at(r, j).clone());
            self.a.set(r, i, y);
            self.a.set(r, j, x);
        }
        for c in 0..self.v.cols() {
            let (x, y) = (self.v.at(i, c).clone(), self.v.at(j, c).clone());
            self.v.set(i, c, y);
            self.v.set(j, c, x);
        }
    }

    /// row_j += q * row_i on `a`.
    fn add_row(&mut self, i: usize, j: usize, q: &BigInt) {
        for c in 0..self.a.cols() {
            let v = self.a.at(j, c) + q * self.a.at(i, c);
            self.a.set(j, c, v);
        }
        for r in 0..self.u.rows() {
            let v = self.u.at(r, i) - q * self.u.at(r, j);
            self.u.set(r, i, v);
        }
    }

    /// col_j += q * col_i on `a`.
    fn add_col(&mut self, i: usize, j: usize, q: &BigInt) {
        for r in 0..self.a.rows() {
            let v = self.a.at(r, j) + q * self.a.at(r, i);
            self.a.set(r, j, v);
        }
        for c in 0..self.v.cols() {
            let v = self.v.at(i, c) - q * self.v.at(j, c);
            self.v.set(i, c, v);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.a.cols() {
            let v = -self.a.at(i, c);
            self.a.set(i, c, v);
        }
        for r in 0..self.u.rows() {
            let v = -self.u.at(r, i);
            self.u.set(r, i, v);
        }
    }

    /// Smallest-|entry| nonzero position in the trailing submatrix.
    fn min_abs_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.a.rows() {
            for j in t..self.a.cols() {
                let x = self.a.at(i, j);
                if x.is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if self.a.at(bi, bj).abs() <= x.abs() => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        best
    }

    fn clear_position(&mut self, t: usize) {
        loop {
            let mut dirty = false;
            for i in t + 1..self.a.rows() {
                if !self.a.at(i, t).is_zero() {
                    let q = -(self.a.at(i, t) / self.a.at(t, t));
                    if !q.is_zero() {
                        self.add_row(t, i, &q);
                    }
                    if !self.a.at(i, t).is_zero() {
                        // Remainder became the smaller entry; promote it.
                        self.swap_rows(t, i);
                        dirty = true;
                    }
                }
            }
            for j in t + 1..self.a.cols() {
                if !self.a.at(t, j).is_zero() {
                    let q = -(self.a.at(t, j) / self.a.at(t, t));
                    if !q.is_zero() {
                        self.add_col(t, j, &q);
                    }
                    if !self.a.at(t, j).is_zero() {
                        self.swap_cols(t, j);
                        dirty = true;
                    }
                }
            }
            let col_clear = (t + 1..self.a.rows()).all(|i| self.a.at(i, t).is_zero());
            let row_clear = (t + 1..self.a.cols()).all(|j| self.a.at(t, j).is_zero());
            if col_clear && row_clear && !dirty {
                return;
            }
        }
    }
}

/// Smith normal form of an integer matrix.
///
/// Pivoting always picks the minimal-absolute-value nonzero entry, which
/// keeps coefficient growth under control.  The output is deterministic and
/// the divisibility chain d_1 | d_2 | ... is enforced.
pub fn smith_normal_form(m: &IntMatrix) -> SnfDecomposition {
    let mut w = SnfWorker {
        a: m.clone(),
        u: IntMatrix::identity(m.rows()),
        v: IntMatrix::identity(m.cols()),
    };
    let k = m.rows().min(m.cols());
    let mut t = 0;
    while t < k {
        let Some((pi, pj)) = w.min_abs_pivot(t) else { break };
        w.swap_rows(t, pi);
        w.swap_cols(t, pj);
        w.clear_position(t);
        // The pivot must divide every remaining entry for the chain to hold;
        // absorb a bad entry into the pivot row and redo.
        let mut offender = None;
        'scan: for i in t + 1..w.a.rows() {
            for j in t + 1..w.a.cols() {
                if !(w.a.at(i, j) % w.a.at(t, t)).is_zero() {
                    offender = Some(i);
                    break 'scan;
                }
            }
        }
        if let Some(i) = offender {
            w.add_row(i, t, &BigInt::one());
            continue;
        }
        if w.a.at(t, t).is_negative() {
            w.negate_row(t);
        }
        t += 1;
    }
    let out = SnfDecomposition { u: w.u, d: w.a, v: w.v };
    debug_assert!(out.u.mul(&out.d).mul(&out.v) == *m, "snf does not reproduce input");
    out
}

/// Cokernel `Z^rows / (column span)` of an integer matrix.
pub fn cokernel(b: &IntMatrix) -> AbelianGroup {
    let snf = smith_normal_form(b);
    let factors = snf.invariant_factors();
    AbelianGroup {
        free_rank: b.rows() - factors.len(),
        torsion: factors.into_iter().filter(|d| !d.is_one()).collect(),
    }
}

/// Torsion subgroup of the cokernel: `(b Q^cols ∩ Z^rows) / b Z^cols`.
pub fn torsion_cokernel(b: &IntMatrix) -> AbelianGroup {
    let coker = cokernel(b);
    AbelianGroup { free_rank: 0, torsion: coker.torsion }
}

/// Rank over the rationals.
pub fn rank(m: &IntMatrix) -> usize {
    m.rank()
}

/// True when an (n+m) x n matrix has rank n.
pub fn is_full_rank(b: &IntMatrix) -> bool {
    b.rank() == b.cols()
}

/// True when the transpose is surjective onto Z^n, i.e. the rows span the
/// full column lattice: rank n and all invariant factors equal to 1.
pub fn is_really_full_rank(b: &IntMatrix) -> bool {
    let snf = smith_normal_form(b);
    let factors = snf.invariant_factors();
    factors.len() == b.cols() && factors.iter().all(|d| d.is_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows)
    }

    #[test]
    fn snf_zero_matrix() {
        let snf = smith_normal_form(&m(&[vec![0]]));
        assert_eq!(snf.u, IntMatrix::identity(1));
        assert_eq!(snf.d, m(&[vec![0]]));
        assert_eq!(snf.v, IntMatrix::identity(1));
    }

    #[test]
    fn snf_column_gcd() {
        let snf = smith_normal_form(&m(&[vec![0], vec![3]]));
        assert_eq!(snf.invariant_factors(), vec![BigInt::from(3)]);
    }

    #[test]
    fn snf_divisibility_chain_forced() {
        let snf = smith_normal_form(&m(&[vec![2, 0], vec![0, 3]]));
        assert_eq!(
            snf.invariant_factors(),
            vec![BigInt::from(1), BigInt::from(6)]
        );
    }

    #[test]
    fn snf_empty_dimensions() {
        let snf = smith_normal_form(&IntMatrix::zeros(0, 3));
        assert!(snf.invariant_factors().is_empty());
        let snf = smith_normal_form(&IntMatrix::zeros(3, 0));
        assert!(snf.invariant_factors().is_empty());
        assert_eq!(cokernel(&IntMatrix::zeros(3, 0)).free_rank, 3);
    }

    #[test]
    fn cokernel_examples() {
        // Single column (0, 3)^T: Z + Z/3.
        let g = cokernel(&m(&[vec![0], vec![3]]));
        assert_eq!(g, AbelianGroup { free_rank: 1, torsion: vec![BigInt::from(3)] });

        // Principal coefficients: free of rank n.
        let principal = m(&[vec![0, 1], vec![-1, 0], vec![1, 0], vec![0, 1]]);
        let g = cokernel(&principal);
        assert_eq!(g, AbelianGroup { free_rank: 2, torsion: vec![] });

        // Rows (0,5), (-5,0), (1,0), (0,1): free of rank 2.
        let g = cokernel(&m(&[vec![0, 5], vec![-5, 0], vec![1, 0], vec![0, 1]]));
        assert_eq!(g, AbelianGroup { free_rank: 2, torsion: vec![] });
    }

    #[test]
    fn torsion_cokernel_examples() {
        let g = torsion_cokernel(&m(&[vec![0], vec![4]]));
        assert_eq!(g, AbelianGroup { free_rank: 0, torsion: vec![BigInt::from(4)] });

        let g = torsion_cokernel(&m(&[vec![2, 1], vec![1, 1]]));
        assert!(g.is_trivial());

        // 2*Id_2 stacked over zeros: (Z/2)^2.
        let g = torsion_cokernel(&m(&[vec![2, 0], vec![0, 2], vec![0, 0]]));
        assert_eq!(
            g,
            AbelianGroup { free_rank: 0, torsion: vec![BigInt::from(2), BigInt::from(2)] }
        );
    }

    #[test]
    fn really_full_rank_examples() {
        let principal = m(&[vec![0, 1], vec![-1, 0], vec![1, 0], vec![0, 1]]);
        assert!(is_really_full_rank(&principal));

        let col = m(&[vec![0], vec![3]]);
        assert!(is_full_rank(&col));
        assert!(!is_really_full_rank(&col));

        let five = m(&[vec![0, 5], vec![-5, 0], vec![1, 0], vec![0, 1]]);
        assert!(is_really_full_rank(&five));
    }

    #[test]
    fn unimodular_inverse_round_trip() {
        let a = m(&[vec![2, 1], vec![1, 1]]);
        let inv = a.inverse_unimodular().unwrap();
        assert_eq!(a.mul(&inv), IntMatrix::identity(2));
        assert!(m(&[vec![2, 0], vec![0, 2]]).inverse_unimodular().is_none());
    }

    #[test]
    fn determinant_bareiss() {
        assert_eq!(m(&[vec![0, 1], vec![-1, 0]]).det(), BigInt::one());
        assert_eq!(m(&[vec![1, 2], vec![3, 4]]).det(), BigInt::from(-2));
        assert_eq!(IntMatrix::identity(0).det(), BigInt::one());
        let skew = m(&[
            vec![0, 1, 1, 0],
            vec![-1, 0, 1, 0],
            vec![-1, -1, 0, 1],
            vec![0, 0, -1, 0],
        ]);
        assert_eq!(skew.det(), BigInt::one());
    }

    proptest! {
        #[test]
        fn snf_postconditions(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = IntMatrix::from_fn(rows, cols, |_, _| BigInt::from(rng.gen_range(-6i64..=6)));
            let snf = smith_normal_form(&a);
            prop_assert_eq!(snf.u.mul(&snf.d).mul(&snf.v), a);
            prop_assert!(snf.u.det().abs().is_one());
            prop_assert!(snf.v.det().abs().is_one());
            let k = snf.d.rows().min(snf.d.cols());
            for i in 0..k {
                prop_assert!(!snf.d.at(i, i).is_negative());
                for j in 0..k {
                    if i != j {
                        prop_assert!(snf.d.at(i, j).is_zero());
                    }
                }
            }
            let factors = snf.invariant_factors();
            for w in factors.windows(2) {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
        }

        #[test]
        fn cokernel_invariant_under_unimodular(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = IntMatrix::from_fn(4, 2, |_, _| BigInt::from(rng.gen_range(-5i64..=5)));
            // Random unimodular factors built from elementary operations.
            let mut left = IntMatrix::identity(4);
            let mut right = IntMatrix::identity(2);
            for _ in 0..6 {
                let i = rng.gen_range(0..4);
                let j = rng.gen_range(0..4);
                if i != j {
                    let c = BigInt::from(rng.gen_range(-2i64..=2));
                    for k in 0..4 {
                        let v = left.at(i, k) + &c * left.at(j, k);
                        left.set(i, k, v);
                    }
                }
                let i = rng.gen_range(0..2);
                let j = rng.gen_range(0..2);
                if i != j {
                    let c = BigInt::from(rng.gen_range(-2i64..=2));
                    for k in 0..2 {
                        let v = right.at(k, i) + &c * right.at(k, j);
                        right.set(k, i, v);
                    }
                }
            }
            prop_assert_eq!(cokernel(&left.mul(&a).mul(&right)), cokernel(&a));
        }
    }
}
