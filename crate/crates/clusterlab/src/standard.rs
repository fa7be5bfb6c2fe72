//! Standard cohomology from residue constraints on the initial torus.
//!
//! A standard k-form eta = sum a_I theta_I extends across the mutation in
//! direction r exactly when eta_2 wedge (sum_s B_sr theta_s) = 0, where
//! eta = eta_1 + eta_2 wedge theta_r and theta_r is absent from eta_1 and
//! eta_2.  Imposing that for every mutable r is a linear system on the
//! coefficients a_I; the kernel dimension per degree is the standard
//! cohomology.
//!
//! Sign convention, fixed once: subsets are kept sorted increasingly, and
//! wedging merges sorted index lists with the inversion-count sign.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::cluster::ExchangeMatrix;
use crate::hodge::{poly_div_exact, poly_mul, PoincareSeries};
use crate::linalg::{self, IntMatrix};
use crate::par;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StandardError {
    #[error("exchange matrix does not have full rank")]
    NotFullRank,
    #[error("n+m = {0} exceeds the dimension cap {1}")]
    DimensionCap(usize, usize),
    #[error("quiver is not connected")]
    NotConnected,
    #[error("closed-form series is not a polynomial; the input cannot be of full rank")]
    NotPolynomial,
}

/// Default cap on n+m for the kernel computation.
pub const DEFAULT_DIMENSION_CAP: usize = 16;

/// Element of the exterior algebra on the symbols dlog x_1..dlog x_(n+m)
/// with rational coefficients, homogeneous pieces mixed freely.
///
/// Keys are strictly increasing index lists; zero coefficients are never
/// stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StandardForm {
    vars: usize,
    coeffs: BTreeMap<Vec<usize>, BigRational>,
}

impl StandardForm {
    pub fn zero(vars: usize) -> Self {
        StandardForm { vars, coeffs: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: impl Into<BigRational>) -> Self {
        let mut f = Self::zero(vars);
        f.insert(vec![], c.into());
        f
    }

    /// dlog of the symbol with 0-based index i.
    pub fn dlog(vars: usize, i: usize) -> Self {
        assert!(i < vars);
        let mut f = Self::zero(vars);
        f.insert(vec![i], BigRational::one());
        f
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&Vec<usize>, &BigRational)> {
        self.coeffs.iter()
    }

    /// Degree of a homogeneous form; `None` for 0 or mixed degrees.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let mut it = self.coeffs.keys().map(|k| k.len());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    fn insert(&mut self, key: Vec<usize>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &StandardForm) -> StandardForm {
        assert_eq!(self.vars, other.vars);
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.insert(k.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> StandardForm {
        if c.is_zero() {
            return StandardForm::zero(self.vars);
        }
        StandardForm {
            vars: self.vars,
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn wedge(&self, other: &StandardForm) -> StandardForm {
        assert_eq!(self.vars, other.vars);
        let mut out = StandardForm::zero(self.vars);
        for (ka, ca) in &self.coeffs {
            for (kb, cb) in &other.coeffs {
                if let Some((key, sign)) = merge_sorted(ka, kb) {
                    let mut c = ca * cb;
                    if sign < 0 {
                        c = -c;
                    }
                    out.insert(key, c);
                }
            }
        }
        out
    }

    pub fn wedge_power(&self, j: usize) -> StandardForm {
        let mut out = StandardForm::constant(self.vars, BigRational::one());
        for _ in 0..j {
            out = out.wedge(self);
        }
        out
    }
}

/// Merges two strictly increasing lists; `None` on a common index,
/// otherwise the merged list with the inversion-count sign.
fn merge_sorted(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, i8)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut inversions = 0usize;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => return None,
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                // b[j] jumps over the remaining entries of a.
                inversions += a.len() - i;
                out.push(b[j]);
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, if inversions % 2 == 0 { 1 } else { -1 }))
}

/// All size-k subsets of 0..vars in lexicographic order.
fn subsets(vars: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, vars: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        let need = k - cur.len();
        for i in start..=vars.saturating_sub(need) {
            cur.push(i);
            rec(i + 1, vars, k, cur, out);
            cur.pop();
        }
    }
    if k <= vars {
        rec(0, vars, k, &mut cur, &mut out);
    }
    out
}

/// Decomposes eta = eta_1 + eta_2 wedge theta_r and returns
/// eta_2 wedge (sum_s B_sr theta_s); the form extends across mutation r
/// iff this is zero.
pub fn residue_violation(form: &StandardForm, b: &ExchangeMatrix, r: usize) -> StandardForm {
    assert!(r >= 1 && r <= b.n(), "mutable index out of range");
    let vars = b.size();
    assert_eq!(form.vars(), vars);
    let rr = r - 1;
    let mut eta2 = StandardForm::zero(vars);
    for (key, c) in form.coefficients() {
        if let Some(t) = key.iter().position(|&i| i == rr) {
            // theta_I = (-1)^(|I|-1-t) theta_(I minus r) wedge theta_r.
            let reduced: Vec<usize> = key.iter().copied().filter(|&i| i != rr).collect();
            let sign = if (key.len() - 1 - t) % 2 == 0 { c.clone() } else { -c };
            eta2.insert(reduced, sign);
        }
    }
    let mut beta = StandardForm::zero(vars);
    for s in 0..vars {
        let w = b.matrix().at(s, rr);
        if !w.is_zero() {
            beta.insert(vec![s], BigRational::from(w.clone()));
        }
    }
    eta2.wedge(&beta)
}

/// Sparse integer rows of the residue-constraint system in degree k,
/// indexed by unknown column = rank of the k-subset.
fn constraint_rows(b: &ExchangeMatrix, k: usize) -> (usize, Vec<BTreeMap<usize, BigInt>>) {
    let vars = b.size();
    let cols: Vec<Vec<usize>> = subsets(vars, k);
    let col_index: HashMap<&[usize], usize> =
        cols.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    // Rows are indexed by (r, K) with K a k-subset; assembled per r.
    let mut rows: HashMap<(usize, Vec<usize>), BTreeMap<usize, BigInt>> = HashMap::new();
    for r in 0..b.n() {
        for (ci, subset) in cols.iter().enumerate() {
            let Some(t) = subset.iter().position(|&i| i == r) else { continue };
            let eta2_sign: i64 = if (k - 1 - t) % 2 == 0 { 1 } else { -1 };
            let reduced: Vec<usize> = subset.iter().copied().filter(|&i| i != r).collect();
            for s in 0..vars {
                let w = b.matrix().at(s, r);
                if w.is_zero() || reduced.binary_search(&s).is_ok() {
                    continue;
                }
                let greater = reduced.iter().filter(|&&j| j > s).count();
                let merge_sign: i64 = if greater % 2 == 0 { 1 } else { -1 };
                let mut key: Vec<usize> = reduced.clone();
                let pos = key.binary_search(&s).unwrap_err();
                key.insert(pos, s);
                debug_assert!(col_index.contains_key(key.as_slice()));
                let entry = rows
                    .entry((r, key))
                    .or_default()
                    .entry(ci)
                    .or_insert_with(BigInt::zero);
                *entry += w * BigInt::from(eta2_sign * merge_sign);
            }
        }
    }
    let mut out: Vec<BTreeMap<usize, BigInt>> = rows
        .into_values()
        .map(|row| row.into_iter().filter(|(_, v)| !v.is_zero()).collect())
        .collect();
    out.retain(|row: &BTreeMap<usize, BigInt>| !row.is_empty());
    out.sort();
    (cols.len(), out)
}

/// Rank of a sparse integer matrix by content-normalized row echelon.
fn sparse_rank(rows: Vec<BTreeMap<usize, BigInt>>) -> usize {
    let mut pivots: BTreeMap<usize, BTreeMap<usize, BigInt>> = BTreeMap::new();
    for mut row in rows {
        loop {
            let Some((&lead, lead_val)) = row.iter().next() else { break };
            let lead_val = lead_val.clone();
            match pivots.get(&lead) {
                None => {
                    let content = row.values().fold(BigInt::zero(), |acc, v| acc.gcd(v));
                    if !content.is_one() && !content.is_zero() {
                        for v in row.values_mut() {
                            *v /= &content;
                        }
                    }
                    pivots.insert(lead, row);
                    break;
                }
                Some(p) => {
                    let pv = p[&lead].clone();
                    let l = lead_val.lcm(&pv);
                    let (a, b) = (&l / &lead_val, &l / &pv);
                    let mut next: BTreeMap<usize, BigInt> = BTreeMap::new();
                    for (k, v) in &row {
                        next.insert(*k, v * &a);
                    }
                    for (k, v) in p {
                        let e = next.entry(*k).or_insert_with(BigInt::zero);
                        *e -= v * &b;
                    }
                    next.retain(|_, v| !v.is_zero());
                    row = next;
                }
            }
        }
    }
    pivots.len()
}

fn check_input(b: &ExchangeMatrix, cap: usize) -> Result<(), StandardError> {
    if b.size() > cap {
        return Err(StandardError::DimensionCap(b.size(), cap));
    }
    if !linalg::is_full_rank(b.matrix()) {
        return Err(StandardError::NotFullRank);
    }
    Ok(())
}

/// Dimension of the space of standard k-forms satisfying every residue
/// constraint, for k = 0..=n+m.
pub fn standard_dims(b: &ExchangeMatrix) -> Result<Vec<(usize, u64)>, StandardError> {
    standard_dims_with_cap(b, DEFAULT_DIMENSION_CAP)
}

pub fn standard_dims_with_cap(
    b: &ExchangeMatrix,
    cap: usize,
) -> Result<Vec<(usize, u64)>, StandardError> {
    check_input(b, cap)?;
    let degrees: Vec<usize> = (0..=b.size()).collect();
    let dims = par::map_collect(degrees, |k| {
        let (cols, rows) = constraint_rows(b, k);
        (k, (cols - sparse_rank(rows)) as u64)
    });
    Ok(dims)
}

/// Basis of the kernel in a single degree, as explicit standard forms.
pub fn standard_kernel_basis(
    b: &ExchangeMatrix,
    degree: usize,
) -> Result<Vec<StandardForm>, StandardError> {
    check_input(b, DEFAULT_DIMENSION_CAP)?;
    let vars = b.size();
    let cols = subsets(vars, degree);
    let (ncols, rows) = constraint_rows(b, degree);
    debug_assert_eq!(ncols, cols.len());
    // Dense rational Gauss-Jordan to a reduced echelon form.
    let mut mat: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|row| {
            let mut dense = vec![BigRational::zero(); ncols];
            for (&c, v) in row {
                dense[c] = BigRational::from(v.clone());
            }
            dense
        })
        .collect();
    let mut pivot_cols = Vec::new();
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(pr) = (rank..mat.len()).find(|&r| !mat[r][col].is_zero()) else { continue };
        mat.swap(rank, pr);
        let inv = mat[rank][col].clone();
        for c in 0..ncols {
            mat[rank][c] = &mat[rank][c] / &inv;
        }
        for r in 0..mat.len() {
            if r != rank && !mat[r][col].is_zero() {
                let f = mat[r][col].clone();
                for c in 0..ncols {
                    let sub = &f * &mat[rank][c];
                    mat[r][c] = &mat[r][c] - sub;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == mat.len() {
            break;
        }
    }
    let free_cols: Vec<usize> = (0..ncols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::with_capacity(free_cols.len());
    for &fc in &free_cols {
        let mut form = StandardForm::zero(vars);
        form.insert(cols[fc].clone(), BigRational::one());
        for (ri, &pc) in pivot_cols.iter().enumerate() {
            let v = &mat[ri][fc];
            if !v.is_zero() {
                form.insert(cols[pc].clone(), -v.clone());
            }
        }
        basis.push(form);
    }
    Ok(basis)
}

/// Closed-form Poincare series of the standard part:
/// (1+t)^(m-r) * prod over components (1 + t + ... + t^(n_i) + t^(n_i+1)).
///
/// A negative exponent m - r is handled by exact division; failure means
/// the closed form is not a polynomial, which cannot happen for full-rank
/// input.
pub fn poincare_closed(b: &ExchangeMatrix) -> Result<PoincareSeries, StandardError> {
    let comps = b.quiver().undirected_components();
    let r = comps.len();
    let mut poly = vec![BigInt::one()];
    for comp in &comps {
        let ni = comp.len();
        poly = poly_mul(&poly, &vec![BigInt::one(); ni + 2]);
    }
    let one_plus_t = vec![BigInt::one(), BigInt::one()];
    if b.m() >= r {
        for _ in 0..b.m() - r {
            poly = poly_mul(&poly, &one_plus_t);
        }
    } else {
        for _ in 0..r - b.m() {
            poly = poly_div_exact(&poly, &one_plus_t).ok_or(StandardError::NotPolynomial)?;
        }
    }
    let coefficients = poly
        .iter()
        .map(|c| u64::try_from(c).expect("nonnegative small coefficient"))
        .collect();
    Ok(PoincareSeries::from_coefficients(coefficients))
}

/// The reduced GSV form on the principal-coefficient torus: the 2-form of
/// the skew completion (B, -Id; Id, 0), namely
/// sum B_ij theta_i theta_j - 2 sum theta_i eta_i
/// (symbols: theta_i = i, eta_i = n + i).
pub fn reduced_gsv_form(b_principal: &IntMatrix) -> StandardForm {
    let n = b_principal.cols();
    assert_eq!(b_principal.rows(), n, "principal part must be square");
    let vars = 2 * n;
    let mut gamma = StandardForm::zero(vars);
    for i in 0..n {
        for j in i + 1..n {
            let w = b_principal.at(i, j);
            if !w.is_zero() {
                gamma.insert(vec![i, j], BigRational::from(w * BigInt::from(2)));
            }
        }
        gamma.insert(vec![i, n + i], BigRational::from(BigInt::from(-2)));
    }
    gamma
}

/// The basis gamma^j wedge eta_I (j + |I| <= n) of the standard part for
/// principal coefficients with connected quiver, paired with its degree
/// 2j + |I|.
pub fn principal_standard_basis(
    b_principal: &IntMatrix,
) -> Result<Vec<(usize, StandardForm)>, StandardError> {
    let n = b_principal.cols();
    let extended = ExchangeMatrix::principal(b_principal).expect("skew principal part");
    if extended.quiver().undirected_components().len() != 1 {
        return Err(StandardError::NotConnected);
    }
    let gamma = reduced_gsv_form(b_principal);
    let mut powers = vec![StandardForm::constant(2 * n, BigRational::one())];
    for j in 1..=n {
        powers.push(powers[j - 1].wedge(&gamma));
    }
    let mut out = Vec::new();
    for j in 0..=n {
        for size in 0..=n - j {
            for idx in subsets(n, size) {
                let mut form = powers[j].clone();
                for &i in &idx {
                    form = form.wedge(&StandardForm::dlog(2 * n, n + i));
                }
                debug_assert!(
                    (1..=n).all(|r| residue_violation(&form, &extended, r).is_zero()),
                    "basis form violates a residue constraint"
                );
                out.push((2 * j + size, form));
            }
        }
    }
    out.sort_by_key(|(deg, _)| *deg);
    Ok(out)
}

/// Exact rank of a family of forms, viewed as vectors of coefficients.
pub fn forms_rank(forms: &[StandardForm]) -> usize {
    let mut keys: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for f in forms {
        for (k, _) in f.coefficients() {
            let next = keys.len();
            keys.entry(k.clone()).or_insert(next);
        }
    }
    let rows: Vec<BTreeMap<usize, BigInt>> = forms
        .iter()
        .map(|f| {
            // Clear denominators row by row.
            let denom = f
                .coefficients()
                .fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
            f.coefficients()
                .map(|(k, c)| {
                    let scaled = c * BigRational::from(denom.clone());
                    debug_assert!(scaled.denom().is_one());
                    (keys[k], scaled.numer().clone())
                })
                .collect()
        })
        .collect();
    sparse_rank(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(n: usize, m: usize, rows: &[Vec<i64>]) -> ExchangeMatrix {
        ExchangeMatrix::from_i64_rows(n, m, rows).unwrap()
    }

    fn dims_vec(b: &ExchangeMatrix) -> Vec<u64> {
        standard_dims(b).unwrap().into_iter().map(|(_, d)| d).collect()
    }

    #[test]
    fn wedge_signs() {
        let vars = 3;
        let t0 = StandardForm::dlog(vars, 0);
        let t1 = StandardForm::dlog(vars, 1);
        let t01 = t0.wedge(&t1);
        let t10 = t1.wedge(&t0);
        assert_eq!(t01, t10.scale(&BigRational::from(BigInt::from(-1))));
        assert!(t0.wedge(&t0).is_zero());
        // (t0 ^ t2) ^ t1 = - t0 ^ t1 ^ t2.
        let t2 = StandardForm::dlog(vars, 2);
        let lhs = t0.wedge(&t2).wedge(&t1);
        let rhs = t0.wedge(&t1).wedge(&t2).scale(&BigRational::from(BigInt::from(-1)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn rank1_dims() {
        let b = ex(1, 1, &[vec![0], vec![2]]);
        assert_eq!(dims_vec(&b), vec![1, 1, 1]);
        for bb in 1..=3 {
            let b = ex(1, 1, &[vec![0], vec![bb]]);
            assert_eq!(dims_vec(&b), vec![1, 1, 1]);
        }
    }

    #[test]
    fn torus_dims_are_binomials() {
        let b = ex(0, 3, &[vec![], vec![], vec![]]);
        assert_eq!(dims_vec(&b), vec![1, 3, 3, 1]);
    }

    #[test]
    fn d4_dims() {
        let b = ex(
            4,
            2,
            &[
                vec![0, 1, 1, 1],
                vec![-1, 0, 0, 0],
                vec![-1, 0, 0, 0],
                vec![-1, 0, 0, 0],
                vec![0, 1, 0, 0],
                vec![0, 0, 1, 0],
            ],
        );
        assert!(linalg::is_really_full_rank(b.matrix()));
        assert_eq!(dims_vec(&b), vec![1, 2, 2, 2, 2, 2, 1]);
    }

    #[test]
    fn kernel_basis_elements_satisfy_constraints() {
        let b = ex(
            3,
            1,
            &[vec![0, 1, 1], vec![-1, 0, 1], vec![-1, -1, 0], vec![0, 0, -1]],
        );
        for k in 0..=4 {
            let basis = standard_kernel_basis(&b, k).unwrap();
            for f in &basis {
                for r in 1..=3 {
                    assert!(residue_violation(f, &b, r).is_zero());
                }
            }
            let expected = dims_vec(&b)[k];
            assert_eq!(basis.len() as u64, expected);
            assert_eq!(forms_rank(&basis), basis.len());
        }
    }

    #[test]
    fn poincare_closed_examples() {
        // D4 with m = 2: (1+t)(1+t+...+t^5).
        let b = ex(
            4,
            2,
            &[
                vec![0, 1, 1, 1],
                vec![-1, 0, 0, 0],
                vec![-1, 0, 0, 0],
                vec![-1, 0, 0, 0],
                vec![0, 1, 0, 0],
                vec![0, 0, 1, 0],
            ],
        );
        assert_eq!(
            poincare_closed(&b).unwrap().coefficients,
            vec![1, 2, 2, 2, 2, 2, 1]
        );

        // Even path with m = 0: 1 + t^2 + ... + t^n.
        let a4 = ex(
            4,
            0,
            &[
                vec![0, 1, 0, 0],
                vec![-1, 0, 1, 0],
                vec![0, -1, 0, 1],
                vec![0, 0, -1, 0],
            ],
        );
        assert_eq!(poincare_closed(&a4).unwrap().coefficients, vec![1, 0, 1, 0, 1]);
    }

    #[test]
    fn principal_basis_counts_and_dims() {
        // Path with two vertices, principal coefficients.
        let b = IntMatrix::from_i64_rows(&[vec![0, 1], vec![-1, 0]]);
        let basis = principal_standard_basis(&b).unwrap();
        let mut counts = vec![0u64; 5];
        for (deg, _) in &basis {
            counts[*deg] += 1;
        }
        assert_eq!(counts, vec![1, 2, 2, 2, 1]);
        let extended = ExchangeMatrix::principal(&b).unwrap();
        assert_eq!(dims_vec(&extended), counts);
        let forms: Vec<StandardForm> = basis.into_iter().map(|(_, f)| f).collect();
        assert_eq!(forms_rank(&forms), forms.len());
    }

    #[test]
    fn principal_basis_rank1() {
        let b = IntMatrix::from_i64_rows(&[vec![0]]);
        let basis = principal_standard_basis(&b).unwrap();
        let degrees: Vec<usize> = basis.iter().map(|(d, _)| *d).collect();
        assert_eq!(degrees, vec![0, 1, 2]);
    }

    #[test]
    fn disconnected_principal_is_rejected() {
        let b = IntMatrix::from_i64_rows(&[vec![0, 0], vec![0, 0]]);
        assert_eq!(principal_standard_basis(&b).unwrap_err(), StandardError::NotConnected);
    }

    #[test]
    fn standard_dims_mutation_invariant() {
        let b = ex(
            3,
            1,
            &[vec![0, 1, 1], vec![-1, 0, 1], vec![-1, -1, 0], vec![0, 0, -1]],
        );
        let reference = dims_vec(&b);
        for path in [vec![1], vec![2, 1], vec![3, 2, 1], vec![1, 2, 3, 1]] {
            let mutated = b.mutate_path(&path).unwrap();
            assert_eq!(dims_vec(&mutated), reference, "path {path:?}");
        }
    }

    #[test]
    fn rejects_rank_deficient_and_oversized() {
        let b = ex(2, 0, &[vec![0, 0], vec![0, 0]]);
        assert_eq!(standard_dims(&b).unwrap_err(), StandardError::NotFullRank);
        let torus = ex(0, 3, &[vec![], vec![], vec![]]);
        assert_eq!(
            standard_dims_with_cap(&torus, 2).unwrap_err(),
            StandardError::DimensionCap(3, 2)
        );
    }
}
