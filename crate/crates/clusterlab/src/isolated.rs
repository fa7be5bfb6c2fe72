//! Mixed Hodge tables of isolated cluster varieties.
//!
//! For an edgeless exchange matrix (0; C) with C of full column rank the
//! character group G = (C Q^n ∩ Z^m) / C Z^n is finite; an element g lifts
//! uniquely to g = sum q_j C_j over Q, and with J(g) = { j : q_j not an
//! integer } the g-isotypic part of cohomology has generating function
//! q^(2|J|) (1+q+q^2)^(n-|J|) (1+q)^(m-n), sitting in Deligne degree
//! (k, (k-|J|, k-|J|)).  Everything depends on g only through |J(g)|, so
//! large groups are summarized by |J|-strata without enumeration.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::hodge::{poly_mul, HodgeTable};
use crate::linalg::{self, IntMatrix};
use crate::par;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IsolatedError {
    #[error("frozen block does not have full column rank")]
    NotFullRank,
}

/// Default bound on |G| above which elements are counted per stratum
/// instead of enumerated.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// One isotypic contribution: either a single character (with its residue
/// vector) or a whole |J|-stratum when the group is summarized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsotypicSummary {
    /// Residue vector in Z^m representing g; `None` for aggregated strata.
    pub g: Option<Vec<BigInt>>,
    /// |J(g)|: the number of non-integral lift coordinates.
    pub j_size: usize,
    /// Number of group elements sharing this row (1 for enumerated rows).
    pub multiplicity: u128,
    /// Per-element dimensions by cohomological degree.
    pub dims: BTreeMap<usize, u64>,
}

impl IsotypicSummary {
    /// Weight offset of the stratum: entries sit at p = k - offset.
    pub fn weight_offset(&self) -> usize {
        self.j_size
    }
}

/// Per-element generating function q^(2j) (1+q+q^2)^(n-j) (1+q)^(m-n),
/// returned as degree -> dimension.
fn stratum_dims(n: usize, m: usize, j: usize) -> BTreeMap<usize, u64> {
    let one = BigInt::one();
    let mut poly = vec![one.clone()];
    for _ in 0..n - j {
        poly = poly_mul(&poly, &[one.clone(), one.clone(), one.clone()]);
    }
    for _ in 0..m - n {
        poly = poly_mul(&poly, &[one.clone(), one.clone()]);
    }
    poly.iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| (k + 2 * j, u64::try_from(c).expect("small coefficient")))
        .collect()
}

/// Number of a-tuples (a_i mod d_i) whose lift coordinates are integral on
/// every index of `t`.
fn integral_count(w: &IntMatrix, diag: &[BigInt], t: &[usize]) -> BigInt {
    let group_order: BigInt = diag.iter().product();
    if t.is_empty() {
        return group_order;
    }
    let l = diag.iter().fold(BigInt::one(), |acc, d| acc.lcm(d));
    let n = diag.len();
    // Integrality on row j of W (a_i / d_i) is the congruence
    // sum_i W_ji (L/d_i) a_i == 0 mod L; the solution count is
    // |G| / |image|, and the image size comes out of the lattice index of
    // [A | L Id] in Z^|t|.
    let a = IntMatrix::from_fn(t.len(), n + t.len(), |row, col| {
        if col < n {
            w.at(t[row], col) * (&l / &diag[col])
        } else if col - n == row {
            l.clone()
        } else {
            BigInt::zero()
        }
    });
    let lattice_index: BigInt = linalg::smith_normal_form(&a).invariant_factors().iter().product();
    let mut l_power = BigInt::one();
    for _ in 0..t.len() {
        l_power *= &l;
    }
    group_order / (l_power / lattice_index)
}

/// Mixed Hodge table of the isolated cluster variety with exchange matrix
/// (0; c), plus the per-isotypic breakdown.
pub fn isotypic_table(c: &IntMatrix) -> Result<(Vec<IsotypicSummary>, HodgeTable), IsolatedError> {
    isotypic_table_with_cap(c, DEFAULT_ENUMERATION_CAP)
}

pub fn isotypic_table_with_cap(
    c: &IntMatrix,
    enumeration_cap: u128,
) -> Result<(Vec<IsotypicSummary>, HodgeTable), IsolatedError> {
    let n = c.cols();
    let m = c.rows();
    let snf = linalg::smith_normal_form(c);
    let factors = snf.invariant_factors();
    if factors.len() != n {
        return Err(IsolatedError::NotFullRank);
    }
    let v_inv = snf.v.inverse_unimodular().expect("V is unimodular");
    let order: BigInt = factors.iter().product();

    let summaries = if order.to_u128().map_or(false, |o| o <= enumeration_cap) {
        enumerate_group(c, &snf.u, &v_inv, &factors)
    } else {
        strata_counts(&v_inv, &factors)
            .into_iter()
            .enumerate()
            .filter(|(_, count)| !count.is_zero())
            .map(|(j, count)| IsotypicSummary {
                g: None,
                j_size: j,
                multiplicity: count.to_u128().expect("stratum count fits u128"),
                dims: stratum_dims(n, m, j),
            })
            .collect()
    };

    let mut table = HodgeTable::new(n, m);
    for s in &summaries {
        for (&k, &dim) in &s.dims {
            let total = dim as u128 * s.multiplicity;
            table.add(k, k - s.j_size, u64::try_from(total).expect("table entry fits u64"));
        }
    }
    debug_assert!(table.validate().is_ok());
    Ok((summaries, table))
}

fn enumerate_group(
    c: &IntMatrix,
    u: &IntMatrix,
    v_inv: &IntMatrix,
    factors: &[BigInt],
) -> Vec<IsotypicSummary> {
    let n = c.cols();
    let m = c.rows();
    // Elements of G correspond to tuples a with 0 <= a_i < d_i via the
    // Smith form: the residue vector is U (a_1, .., a_n, 0, ..)^T and the
    // rational lift has coordinates q = V^-1 (a_1/d_1, .., a_n/d_n)^T.
    let sizes: Vec<u128> = factors.iter().map(|d| d.to_u128().expect("cap checked")).collect();
    let total: u128 = sizes.iter().product();
    let tuples: Vec<u128> = (0..total).collect();
    let mut out = par::map_collect(tuples, |mut idx| {
        let mut a = Vec::with_capacity(n);
        for size in &sizes {
            a.push(BigInt::from(idx % size));
            idx /= size;
        }
        let q: Vec<BigRational> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| BigRational::new(v_inv.at(j, i) * &a[i], factors[i].clone()))
                    .sum()
            })
            .collect();
        let j_size = q.iter().filter(|x| !x.denom().is_one()).count();
        let g: Vec<BigInt> = (0..m)
            .map(|row| (0..n).map(|i| u.at(row, i) * &a[i]).sum())
            .collect();
        IsotypicSummary { g: Some(g), j_size, multiplicity: 1, dims: stratum_dims(n, m, j_size) }
    });
    out.sort_by(|x, y| x.j_size.cmp(&y.j_size).then_with(|| x.g.cmp(&y.g)));
    out
}

/// Number of group elements with |J(g)| = j for each j, by
/// inclusion-exclusion over the sets of forced-integral coordinates.
fn strata_counts(v_inv: &IntMatrix, factors: &[BigInt]) -> Vec<BigInt> {
    let n = factors.len();
    assert!(n <= 30, "strata counting uses subset masks");
    let full: u32 = if n == 0 { 0 } else { (1u32 << n) - 1 };
    let subsets: Vec<Vec<usize>> = (0..=full)
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    let m_values: Vec<BigInt> = subsets
        .iter()
        .map(|t| integral_count(v_inv, factors, t))
        .collect();
    // Integrality on T means J is disjoint from T, so
    // M_T = sum over S disjoint from T of N_S and Moebius inversion gives
    // N_S = sum over T >= comp(S) of (-1)^(|T| - n + |S|) M_T.
    let mut per_size = vec![BigInt::zero(); n + 1];
    for s_mask in 0..=full {
        let s_size = (s_mask.count_ones()) as usize;
        let comp_mask = !s_mask & full;
        let mut acc = BigInt::zero();
        let mut extra = s_mask;
        loop {
            let t_mask = comp_mask | extra;
            let t_size = t_mask.count_ones() as usize;
            let m_t = &m_values[t_mask as usize];
            if (t_size - (n - s_size)) % 2 == 0 {
                acc += m_t;
            } else {
                acc -= m_t;
            }
            if extra == 0 {
                break;
            }
            extra = (extra - 1) & s_mask;
        }
        per_size[s_size] += acc;
    }
    per_size
}

/// The rank-1 table for (0; b): Betti numbers (1, 1, b) with top row
/// (1, 1, 1) and b-1 in degree 2, weight 1.
pub fn rank1_table(b: u64) -> HodgeTable {
    assert!(b >= 1, "b must be positive");
    let mut t = HodgeTable::new(1, 1);
    t.set(0, 0, 1);
    t.set(1, 1, 1);
    t.set(2, 2, 1);
    t.set(2, 1, b - 1);
    t
}
