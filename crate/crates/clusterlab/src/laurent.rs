//! Sparse multivariate Laurent polynomials and seed mutation.
//!
//! Cluster variables are tracked as Laurent polynomials in the initial
//! cluster.  Division is exact sparse polynomial division under a fixed
//! graded-lex term order; a failed division surfaces as an error instead of
//! falling back to general fractions.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::cluster::{ClusterError, ExchangeMatrix};

/// Exponent vector; entries may be negative.
pub type Mono = Vec<i64>;

/// Sparse Laurent polynomial over the integers in a fixed number of symbols.
///
/// The map never stores zero coefficients, so equality is structural.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPoly {
    vars: usize,
    terms: BTreeMap<Mono, BigInt>,
}

fn graded_lex(a: &Mono, b: &Mono) -> std::cmp::Ordering {
    let da: i64 = a.iter().sum();
    let db: i64 = b.iter().sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

impl LaurentPoly {
    pub fn zero(vars: usize) -> Self {
        LaurentPoly { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: usize, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(vars);
        let c = c.into();
        if !c.is_zero() {
            p.terms.insert(vec![0; vars], c);
        }
        p
    }

    /// The symbol with 0-based index `i`.
    pub fn symbol(vars: usize, i: usize) -> Self {
        assert!(i < vars);
        let mut e = vec![0i64; vars];
        e[i] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(e, BigInt::one());
        LaurentPoly { vars, terms }
    }

    pub fn monomial(vars: usize, expo: Mono, c: impl Into<BigInt>) -> Self {
        assert_eq!(expo.len(), vars);
        let mut p = Self::zero(vars);
        let c = c.into();
        if !c.is_zero() {
            p.terms.insert(expo, c);
        }
        p
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of the all-zero exponent vector.
    pub fn constant_term(&self) -> BigInt {
        self.terms.get(&vec![0i64; self.vars]).cloned().unwrap_or_else(BigInt::zero)
    }

    /// True when the polynomial is a single term.
    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    fn insert_term(&mut self, e: Mono, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
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

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        assert_eq!(self.vars, other.vars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        assert_eq!(self.vars, other.vars);
        let mut out = LaurentPoly::zero(self.vars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Mono = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.insert_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u64) -> LaurentPoly {
        let mut out = LaurentPoly::constant(self.vars, 1);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Leading term under graded lex.
    fn leading(&self) -> Option<(&Mono, &BigInt)> {
        self.terms.iter().max_by(|a, b| graded_lex(a.0, b.0))
    }

    fn min_exponents(&self) -> Mono {
        let mut mins = vec![0i64; self.vars];
        for (i, min) in mins.iter_mut().enumerate() {
            *min = self.terms.keys().map(|e| e[i]).min().unwrap_or(0);
        }
        mins
    }

    fn shift(&self, delta: &Mono) -> LaurentPoly {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.iter().zip(delta).map(|(x, d)| x + d).collect(), c.clone()))
            .collect();
        LaurentPoly { vars: self.vars, terms }
    }

    /// Exact division; `None` unless `self = q * div` for a Laurent
    /// polynomial q with integer coefficients.
    pub fn div_exact(&self, div: &LaurentPoly) -> Option<LaurentPoly> {
        assert_eq!(self.vars, div.vars);
        assert!(!div.is_zero(), "division by zero");
        if self.is_zero() {
            return Some(LaurentPoly::zero(self.vars));
        }
        // Shift both operands into the ordinary polynomial ring so that
        // graded-lex reduction terminates.
        let sn = self.min_exponents();
        let sd = div.min_exponents();
        let num = self.shift(&sn.iter().map(|x| -x).collect());
        let den = div.shift(&sd.iter().map(|x| -x).collect());
        let mut rem = num;
        let mut quot = LaurentPoly::zero(self.vars);
        let (dlead_e, dlead_c) = {
            let (e, c) = den.leading().expect("nonzero divisor");
            (e.clone(), c.clone())
        };
        while !rem.is_zero() {
            let (rlead_e, rlead_c) = {
                let (e, c) = rem.leading().expect("nonzero remainder");
                (e.clone(), c.clone())
            };
            let e: Mono = rlead_e.iter().zip(&dlead_e).map(|(a, b)| a - b).collect();
            if e.iter().any(|&x| x < 0) {
                return None;
            }
            let (q, r) = (rlead_c.clone() / &dlead_c, rlead_c % &dlead_c);
            if !r.is_zero() || q.is_zero() {
                return None;
            }
            let t = LaurentPoly::monomial(self.vars, e, q);
            rem = rem.add(&t.mul(&den).neg());
            quot = quot.add(&t);
        }
        // Undo the normalizing shifts: self/div = (num/den) * x^(sn - sd).
        let delta: Mono = sn.iter().zip(&sd).map(|(a, b)| a - b).collect();
        Some(quot.shift(&delta))
    }

    pub fn neg(&self) -> LaurentPoly {
        LaurentPoly {
            vars: self.vars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let c_abs = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let monomial: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &p)| p != 0)
                .map(|(i, &p)| {
                    if p == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, p)
                    }
                })
                .collect();
            if monomial.is_empty() {
                write!(f, "{c_abs}")?;
            } else {
                if !c_abs.is_one() {
                    write!(f, "{c_abs}*")?;
                }
                write!(f, "{}", monomial.join("*"))?;
            }
        }
        Ok(())
    }
}

/// A seed: an exchange matrix together with the expressions of the current
/// cluster variables as Laurent polynomials in the initial cluster.
///
/// The frozen entries are the initial frozen symbols and never change.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seed {
    pub matrix: ExchangeMatrix,
    pub cluster: Vec<LaurentPoly>,
}

impl Seed {
    /// The initial seed, whose cluster is the list of coordinate symbols.
    pub fn initial(matrix: ExchangeMatrix) -> Self {
        let vars = matrix.size();
        let cluster = (0..vars).map(|i| LaurentPoly::symbol(vars, i)).collect();
        Seed { matrix, cluster }
    }

    /// Seed mutation at the 1-based mutable index `k`: replaces x_k by
    /// (prod x_i^[B_ik]+ + prod x_i^[-B_ik]+) / x_k via exact division.
    pub fn mutate(&self, k: usize) -> Result<Seed, ClusterError> {
        let n = self.matrix.n();
        if k == 0 || k > n {
            return Err(ClusterError::IndexOutOfRange(k, n));
        }
        let vars = self.matrix.size();
        let kk = k - 1;
        let mut m_plus = LaurentPoly::constant(vars, 1);
        let mut m_minus = LaurentPoly::constant(vars, 1);
        for i in 0..vars {
            let b = self.matrix.matrix().at(i, kk);
            let e = i64::try_from(b.abs()).expect("exchange entry exceeds i64");
            if b.is_positive() {
                m_plus = m_plus.mul(&self.cluster[i].pow(e as u64));
            } else if b.is_negative() {
                m_minus = m_minus.mul(&self.cluster[i].pow(e as u64));
            }
        }
        let numerator = m_plus.add(&m_minus);
        let new_var = numerator
            .div_exact(&self.cluster[kk])
            .ok_or(ClusterError::ExactDivisionFailure)?;
        let mut cluster = self.cluster.clone();
        cluster[kk] = new_var;
        Ok(Seed { matrix: self.matrix.mutate(k)?, cluster })
    }

    pub fn mutate_path(&self, path: &[usize]) -> Result<Seed, ClusterError> {
        let mut cur = self.clone();
        for &k in path {
            cur = cur.mutate(k)?;
        }
        Ok(cur)
    }

    /// Rewrites `f` (a Laurent polynomial in the initial cluster) as a
    /// Laurent polynomial in this seed's cluster.
    ///
    /// The initial symbols are re-expressed in the current cluster by
    /// replaying the reversed mutation path, then substituted into `f`;
    /// the final exact division fails with `NotLaurent` when `f` does not
    /// lie in the Laurent ring of this cluster.
    pub fn express_in_cluster(
        &self,
        f: &LaurentPoly,
        path_from_initial: &[usize],
    ) -> Result<LaurentPoly, ClusterError> {
        let vars = self.matrix.size();
        assert_eq!(f.vars(), vars);
        // Walk back from this seed to the initial one; the cluster of the
        // reversed walk expresses the initial variables in ours.
        let reversed: Vec<usize> = path_from_initial.iter().rev().copied().collect();
        let back = Seed::initial(self.matrix.clone()).mutate_path(&reversed)?;
        let initial_in_current = &back.cluster;

        // Clear denominators of f: f = P / x^D with P polynomial, D >= 0.
        let mins = f.min_exponents();
        let shift: Mono = mins.iter().map(|&x| if x < 0 { -x } else { 0 }).collect();
        let p = f.shift(&shift);
        let mut num = LaurentPoly::zero(vars);
        for (e, c) in p.terms() {
            let mut term = LaurentPoly::constant(vars, c.clone());
            for (i, &pow) in e.iter().enumerate() {
                debug_assert!(pow >= 0);
                term = term.mul(&initial_in_current[i].pow(pow as u64));
            }
            num = num.add(&term);
        }
        let mut den = LaurentPoly::constant(vars, 1);
        for (i, &pow) in shift.iter().enumerate() {
            den = den.mul(&initial_in_current[i].pow(pow as u64));
        }
        num.div_exact(&den).ok_or(ClusterError::NotLaurent)
    }
}

/// True when the constant coefficient of `f` (given in the initial cluster)
/// agrees across all the given seeds; each seed is paired with its mutation
/// path from the initial seed.
pub fn constant_term_check(
    f: &LaurentPoly,
    seeds: &[(Seed, Vec<usize>)],
) -> Result<bool, ClusterError> {
    let mut value: Option<BigInt> = None;
    for (seed, path) in seeds {
        let g = seed.express_in_cluster(f, path)?;
        let c = g.constant_term();
        match &value {
            None => value = Some(c),
            Some(v) if *v == c => {}
            Some(_) => return Ok(false),
        }
    }
    Ok(true)
}
