//! Dirichlet characters with exact root-of-unity values.
//!
//! A character value is stored as a fraction of a full turn, so sums are
//! evaluated in the cyclotomic ring Z[zeta_E] (coefficient vectors reduced
//! modulo the E-th cyclotomic polynomial) and a sum that is claimed to be
//! an integer is verified to reduce to a constant.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::ff::is_prime;
use super::ArithError;
use crate::hodge::{poly_div_exact, poly_mul};

/// A Dirichlet character of some modulus, tabulated on residues.
///
/// `turns[r]` is `Some((num, den))` with value exp(2 pi i num/den) when
/// gcd(r, modulus) = 1, `None` (value 0) otherwise.  All four defining
/// axioms are checked at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirichletCharacter {
    modulus: u64,
    turns: Vec<Option<(u64, u64)>>,
}

fn reduce_turn(num: u64, den: u64) -> (u64, u64) {
    let num = num % den;
    let g = num.gcd(&den);
    if num == 0 {
        (0, 1)
    } else {
        (num / g, den / g)
    }
}

fn add_turns(a: (u64, u64), b: (u64, u64)) -> (u64, u64) {
    let den = a.1.lcm(&b.1);
    reduce_turn(a.0 * (den / a.1) + b.0 * (den / b.1), den)
}

impl DirichletCharacter {
    fn new(modulus: u64, turns: Vec<Option<(u64, u64)>>) -> Self {
        let chi = DirichletCharacter { modulus, turns };
        chi.check_axioms();
        chi
    }

    pub fn trivial(modulus: u64) -> Self {
        let turns = (0..modulus)
            .map(|r| (r.gcd(&modulus) == 1).then_some((0u64, 1u64)))
            .collect();
        Self::new(modulus, turns)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn is_trivial(&self) -> bool {
        self.turns.iter().all(|t| matches!(t, None | Some((0, _))))
    }

    /// Value at an integer as a turn fraction; `None` encodes 0.
    pub fn turn(&self, a: u64) -> Option<(u64, u64)> {
        self.turns[(a % self.modulus) as usize]
    }

    /// Order of the value at `a` as a root of unity.
    pub fn value_order(&self, a: u64) -> Option<u64> {
        self.turn(a).map(|(_, den)| den)
    }

    /// Multiplicative order of the character.
    pub fn order(&self) -> u64 {
        self.turns
            .iter()
            .flatten()
            .fold(1u64, |acc, &(_, den)| acc.lcm(&den))
    }

    pub fn inverse(&self) -> Self {
        let turns = self
            .turns
            .iter()
            .map(|t| t.map(|(num, den)| reduce_turn(den - num, den)))
            .collect();
        Self::new(self.modulus, turns)
    }

    /// Real evaluation for characters of order dividing 2 (values in
    /// {-1, 0, 1}).
    pub fn value_i64(&self, a: u64) -> Option<i64> {
        match self.turn(a) {
            None => Some(0),
            Some((0, _)) => Some(1),
            Some((num, 2)) if num == 1 => Some(-1),
            _ => None,
        }
    }

    fn check_axioms(&self) {
        let n = self.modulus;
        assert!(n >= 1 && self.turns.len() == n as usize);
        for a in 0..n {
            let coprime = a.gcd(&n) == 1;
            assert_eq!(self.turns[a as usize].is_some(), coprime, "support axiom at {a}");
        }
        // Multiplicativity on the stored period implies it for all
        // integers, since the table is read modulo n.
        for a in 0..n {
            for b in 0..n {
                let ab = (a * b) % n;
                match (self.turn(a), self.turn(b), self.turn(ab)) {
                    (Some(x), Some(y), Some(z)) => {
                        assert_eq!(add_turns(x, y), z, "multiplicativity at {a},{b}");
                    }
                    (Some(_), Some(_), None) | (None, _, Some(_)) | (_, None, Some(_)) => {
                        panic!("support is not multiplicative at {a},{b}");
                    }
                    _ => {}
                }
            }
        }
    }
}

/// Cyclic decomposition of the unit group (Z/n)^x: a list of (generator,
/// order) pairs, each generator lifted to Z/n via the CRT.
fn unit_group_generators(n: u64) -> Vec<(u64, u64)> {
    if n == 1 {
        return Vec::new();
    }
    let mut parts = Vec::new(); // (prime power factor, generators of its unit group)
    let mut rest = n;
    let mut p = 2u64;
    while rest > 1 {
        if p * p > rest {
            p = rest;
        }
        if rest % p != 0 {
            p += 1;
            continue;
        }
        let mut pe = 1u64;
        while rest % p == 0 {
            rest /= p;
            pe *= p;
        }
        let local: Vec<(u64, u64)> = if p == 2 {
            match pe {
                2 => vec![],
                4 => vec![(3, 2)],
                // (Z/2^e)^x = <-1> x <5> for e >= 3.
                _ => vec![(pe - 1, 2), (5, pe / 4)],
            }
        } else {
            let phi = pe / p * (p - 1);
            let g = smallest_primitive_root(pe, phi);
            vec![(g, phi)]
        };
        parts.push((pe, local));
        p += 1;
    }
    // CRT-lift each local generator to Z/n: congruent to g modulo its own
    // factor and to 1 modulo the others.
    let mut out = Vec::new();
    for (pe, local) in &parts {
        let others = n / pe;
        for &(g, order) in local {
            let mut x = g % pe;
            while !(x % pe == g % pe && x % others == 1 % others) {
                x += pe;
                debug_assert!(x < n + pe, "CRT solution must exist below n");
            }
            out.push((x, order));
        }
    }
    out
}

fn smallest_primitive_root(pe: u64, phi: u64) -> u64 {
    let mut divisors = Vec::new();
    let mut d = 1;
    while d * d <= phi {
        if phi % d == 0 {
            divisors.push(d);
            divisors.push(phi / d);
        }
        d += 1;
    }
    'outer: for g in 2..pe {
        if g.gcd(&pe) != 1 {
            continue;
        }
        for &q in &divisors {
            if q < phi && q > 0 && phi % q == 0 && pow_mod(g, q, pe) == 1 {
                continue 'outer;
            }
        }
        if pow_mod(g, phi, pe) == 1 {
            return g;
        }
    }
    unreachable!("unit group of an odd prime power is cyclic")
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let mm = m as u128;
    let mut acc = 1u128 % mm;
    let mut bb = b as u128 % mm;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % mm;
        }
        bb = bb * bb % mm;
        e >>= 1;
    }
    acc as u64
}

/// All phi(n) Dirichlet characters of modulus n, in a deterministic order
/// (mixed-radix over the exponents on the cyclic generators).
pub fn dirichlet_group(n: u64) -> Vec<DirichletCharacter> {
    assert!(n >= 1);
    let gens = unit_group_generators(n);
    // Discrete logs: residue -> exponent vector over the generators.
    let mut dlog: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    let orders: Vec<u64> = gens.iter().map(|&(_, o)| o).collect();
    let total: u64 = orders.iter().product();
    let mut exps = vec![0u64; gens.len()];
    for _ in 0..total {
        let mut residue = 1u64 % n;
        for (i, &(g, _)) in gens.iter().enumerate() {
            residue = residue * pow_mod(g, exps[i], n) % n;
        }
        dlog.entry(residue).or_insert_with(|| exps.clone());
        // Increment mixed-radix counter.
        for i in 0..exps.len() {
            exps[i] += 1;
            if exps[i] < orders[i] {
                break;
            }
            exps[i] = 0;
        }
    }
    debug_assert_eq!(dlog.len() as u64, total, "unit group enumeration is exhaustive");

    let mut out = Vec::with_capacity(total as usize);
    let mut chi_exps = vec![0u64; gens.len()];
    for _ in 0..total {
        let turns: Vec<Option<(u64, u64)>> = (0..n)
            .map(|r| {
                if r.gcd(&n) != 1 {
                    return None;
                }
                let e = &dlog[&r];
                let mut turn = (0u64, 1u64);
                for i in 0..gens.len() {
                    let num = (chi_exps[i] * e[i]) % orders[i];
                    turn = add_turns(turn, reduce_turn(num, orders[i]));
                }
                Some(turn)
            })
            .collect();
        out.push(DirichletCharacter::new(n, turns));
        for i in 0..chi_exps.len() {
            chi_exps[i] += 1;
            if chi_exps[i] < orders[i] {
                break;
            }
            chi_exps[i] = 0;
        }
    }
    out
}

/// The multiset Dir*(n): all characters of every modulus dividing n.
pub fn dir_star(n: u64) -> Vec<DirichletCharacter> {
    assert!(n >= 1);
    let mut out = Vec::new();
    for d in 1..=n {
        if n % d == 0 {
            out.extend(dirichlet_group(d));
        }
    }
    out
}

/// The multiset X(d): characters of modulus c for c | 2d, c not | d, minus
/// the trivial character of modulus 2d.  Carries d - 1 elements and is
/// closed under inversion.
pub fn x_multiset(d: u64) -> Vec<DirichletCharacter> {
    assert!(d >= 1);
    let mut out = Vec::new();
    for c in 1..=2 * d {
        if (2 * d) % c == 0 && d % c != 0 {
            out.extend(dirichlet_group(c));
        }
    }
    let trivial_pos = out
        .iter()
        .position(|chi| chi.modulus() == 2 * d && chi.is_trivial())
        .expect("the trivial character of modulus 2d is present");
    out.remove(trivial_pos);
    debug_assert_eq!(out.len() as u64, d - 1);
    out
}

/// Exact accumulator for sums of roots of unity in Z[zeta_order].
pub struct CyclotomicSum {
    order: u64,
    coeffs: Vec<BigInt>,
}

impl CyclotomicSum {
    pub fn new(order: u64) -> Self {
        assert!(order >= 1);
        CyclotomicSum { order, coeffs: vec![BigInt::zero(); order as usize] }
    }

    /// Common order accommodating every character in the slice.
    pub fn common_order(chars: &[DirichletCharacter]) -> u64 {
        chars.iter().fold(1u64, |acc, chi| acc.lcm(&chi.order()))
    }

    pub fn add_turn(&mut self, turn: (u64, u64)) {
        let (num, den) = turn;
        assert!(self.order % den == 0, "turn denominator must divide the ring order");
        let idx = (num * (self.order / den)) % self.order;
        self.coeffs[idx as usize] += BigInt::one();
    }

    /// Reduces modulo the cyclotomic polynomial and returns the integer
    /// value, or `NonIntegerSum` when the sum is not rational.
    pub fn to_integer(&self) -> Result<BigInt, ArithError> {
        let phi = cyclotomic_polynomial(self.order);
        let rem = poly_rem(&self.coeffs, &phi);
        if rem.iter().skip(1).any(|c| !c.is_zero()) {
            return Err(ArithError::NonIntegerSum);
        }
        Ok(rem.first().cloned().unwrap_or_else(BigInt::zero))
    }
}

/// The n-th cyclotomic polynomial by recursive exact division of x^n - 1.
pub fn cyclotomic_polynomial(n: u64) -> Vec<BigInt> {
    if n == 1 {
        return vec![-BigInt::one(), BigInt::one()];
    }
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    let mut result = num;
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic_polynomial(d);
            result = poly_div_exact(&result, &phi_d).expect("cyclotomic division is exact");
        }
    }
    result
}

/// Remainder of an integer polynomial modulo a monic one.
fn poly_rem(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dd = den.iter().rposition(|c| !c.is_zero()).expect("nonzero modulus");
    assert!(den[dd].is_one(), "modulus must be monic");
    let mut rem = num.to_vec();
    while rem.len() > dd {
        let lead = rem.last().unwrap().clone();
        let top = rem.len() - 1;
        if !lead.is_zero() {
            for i in 0..dd {
                let sub = &lead * &den[i];
                rem[top - dd + i] -= sub;
            }
        }
        rem.pop();
    }
    rem
}

/// Sum of chi(q) over Dir(d): phi(d) when q = 1 mod d, else 0.
pub fn char_sum(d: u64, q: u64) -> Result<BigInt, ArithError> {
    let chars = dirichlet_group(d);
    let order = CyclotomicSum::common_order(&chars);
    let mut sum = CyclotomicSum::new(order);
    for chi in &chars {
        if let Some(turn) = chi.turn(q) {
            sum.add_turn(turn);
        }
    }
    sum.to_integer()
}

/// Sum of chi(q) over Dir*(n); always equals gcd(q - 1, n).
pub fn char_sum_star(n: u64, q: u64) -> Result<BigInt, ArithError> {
    let chars = dir_star(n);
    let order = CyclotomicSum::common_order(&chars);
    let mut sum = CyclotomicSum::new(order);
    for chi in &chars {
        if let Some(turn) = chi.turn(q) {
            sum.add_turn(turn);
        }
    }
    sum.to_integer()
}

/// Frobenius eigenvalue descriptor: the eigenvalue chi(p) * p^power.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenvalueDescriptor {
    pub character: DirichletCharacter,
    pub power: u32,
}

/// Frobenius eigenvalues on the cohomology of the rank-1 isolated variety
/// x x' = y^d + 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusRank1 {
    pub h0: Vec<EigenvalueDescriptor>,
    pub h1: Vec<EigenvalueDescriptor>,
    pub h2: Vec<EigenvalueDescriptor>,
}

/// Eigenvalue table for rank 1: H^0 = {1}, H^1 = {p},
/// H^2 = {p^2} + {chi(p) p : chi in X(d)}.
pub fn frobenius_rank1(d: u64, p: u64) -> Result<FrobeniusRank1, ArithError> {
    if !is_prime(p) {
        return Err(ArithError::NotPrime(p));
    }
    if d != 1 && (p == 2 || d % p == 0) {
        return Err(ArithError::PreconditionViolated(format!(
            "need p odd and p not dividing d, got p={p}, d={d}"
        )));
    }
    let trivial = DirichletCharacter::trivial(1);
    let mut h2 = vec![EigenvalueDescriptor { character: trivial.clone(), power: 2 }];
    for chi in x_multiset(d) {
        h2.push(EigenvalueDescriptor { character: chi, power: 1 });
    }
    Ok(FrobeniusRank1 {
        h0: vec![EigenvalueDescriptor { character: trivial.clone(), power: 0 }],
        h1: vec![EigenvalueDescriptor { character: trivial, power: 1 }],
        h2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi(n: u64) -> u64 {
        (1..=n).filter(|a| a.gcd(&n) == 1).count() as u64
    }

    #[test]
    fn group_sizes() {
        for n in 1..=60 {
            assert_eq!(dirichlet_group(n).len() as u64, phi(n), "Dir({n})");
            assert_eq!(dir_star(n).len() as u64, n, "Dir*({n})");
        }
    }

    #[test]
    fn dir_examples() {
        assert_eq!(dirichlet_group(1).len(), 1);
        assert!(dirichlet_group(1)[0].is_trivial());
        // (Z/4)^x = Z/2: trivial and one order-2 character.
        let dir4 = dirichlet_group(4);
        assert_eq!(dir4.len(), 2);
        assert_eq!(dir4.iter().filter(|c| c.is_trivial()).count(), 1);
        let nontrivial = dir4.iter().find(|c| !c.is_trivial()).unwrap();
        assert_eq!(nontrivial.value_i64(3), Some(-1));
        assert_eq!(nontrivial.value_i64(2), Some(0));
    }

    #[test]
    fn x_multiset_examples() {
        assert!(x_multiset(1).is_empty());
        // X(2): c | 4, c not | 2 forces c = 4; drop the trivial one.
        let x2 = x_multiset(2);
        assert_eq!(x2.len(), 1);
        assert_eq!(x2[0].modulus(), 4);
        assert!(!x2[0].is_trivial());
        for d in 1..=8 {
            assert_eq!(x_multiset(d).len() as u64, d - 1);
        }
    }

    #[test]
    fn x_multiset_closed_under_inversion() {
        for d in 1..=8u64 {
            let xs = x_multiset(d);
            for chi in &xs {
                let inv = chi.inverse();
                assert!(
                    xs.iter().any(|c| *c == inv),
                    "inverse of a modulus-{} character missing for d={d}",
                    chi.modulus()
                );
            }
        }
    }

    #[test]
    fn char_sum_mod_d() {
        for d in 1..=20u64 {
            for q in 1..=40u64 {
                let expected = if q % d == 1 || d == 1 { BigInt::from(phi(d)) } else { BigInt::zero() };
                assert_eq!(char_sum(d, q).unwrap(), expected, "d={d}, q={q}");
            }
        }
    }

    #[test]
    fn char_sum_star_is_gcd() {
        for n in 1..=30u64 {
            for q in 1..=50u64 {
                assert_eq!(
                    char_sum_star(n, q).unwrap(),
                    BigInt::from((q as i64 - 1).unsigned_abs().gcd(&n)),
                    "n={n}, q={q}"
                );
            }
        }
    }

    #[test]
    fn char_sum_star_all_ones_case() {
        // q = 1 mod n: all n characters evaluate to 1.
        assert_eq!(char_sum_star(6, 7).unwrap(), BigInt::from(6));
        assert_eq!(char_sum_star(6, 5).unwrap(), BigInt::from(2));
        assert_eq!(char_sum_star(1, 17).unwrap(), BigInt::one());
    }

    #[test]
    fn cyclotomic_polynomials() {
        use num_traits::ToPrimitive;
        let as_i64 = |v: Vec<BigInt>| -> Vec<i64> { v.iter().map(|c| c.to_i64().unwrap()).collect() };
        assert_eq!(as_i64(cyclotomic_polynomial(1)), vec![-1, 1]);
        assert_eq!(as_i64(cyclotomic_polynomial(2)), vec![1, 1]);
        assert_eq!(as_i64(cyclotomic_polynomial(4)), vec![1, 0, 1]);
        assert_eq!(as_i64(cyclotomic_polynomial(6)), vec![1, -1, 1]);
        assert_eq!(as_i64(cyclotomic_polynomial(12)), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn frobenius_rank1_shapes() {
        let f = frobenius_rank1(1, 5).unwrap();
        assert_eq!(f.h2.len(), 1);
        assert_eq!(f.h2[0].power, 2);

        // d = 3: H^2 carries p^2, the trivial-mod-2 eigenvalue p, and the
        // quadratic character of modulus 6 (the -3 Legendre symbol).
        let f = frobenius_rank1(3, 7).unwrap();
        assert_eq!(f.h2.len(), 3);
        let values: Vec<i64> = f.h2[1..]
            .iter()
            .map(|e| e.character.value_i64(7).unwrap())
            .collect();
        assert_eq!(values, vec![1, 1]); // 7 = 1 mod 6: both are +1
        let f = frobenius_rank1(3, 5).unwrap();
        let values: Vec<i64> = f.h2[1..]
            .iter()
            .map(|e| e.character.value_i64(5).unwrap())
            .collect();
        assert_eq!(values, vec![1, -1]); // 5 = 5 mod 6: Legendre(-3/5) = -1

        assert!(frobenius_rank1(3, 3).is_err());
        assert!(frobenius_rank1(2, 2).is_err());
        assert!(frobenius_rank1(1, 2).is_ok());
    }
}
