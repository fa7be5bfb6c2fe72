//! Finite fields F_q with q = p^a, represented as F_p[x] modulo the
//! lexicographically least monic irreducible polynomial of degree a.
//!
//! Elements are encoded as integers in 0..q whose base-p digits are the
//! polynomial coefficients; index 0 is the zero element, so 1..q runs over
//! the units of the additive encoding, i.e. the nonzero elements.

use super::ArithError;

/// Default cap on the extension degree.
pub const DEFAULT_DEGREE_CAP: u32 = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteField {
    p: u64,
    a: u32,
    q: u64,
    /// Coefficients c_0..c_(a-1) of the monic modulus x^a + sum c_i x^i.
    modulus: Vec<u64>,
}

/// Field element handle: the base-p digit encoding described above.
pub type Fe = u64;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Writes q as p^a for a prime p; `None` if q is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            let mut rest = q;
            let mut a = 0;
            while rest % p == 0 {
                rest /= p;
                a += 1;
            }
            return (rest == 1).then_some((p, a));
        }
        p += 1;
    }
    Some((q, 1))
}

/// Deterministic field of order p^a.
pub fn make_field(p: u64, a: u32) -> Result<FiniteField, ArithError> {
    if !is_prime(p) {
        return Err(ArithError::NotPrime(p));
    }
    if a == 0 || a > DEFAULT_DEGREE_CAP {
        return Err(ArithError::ExtensionTooLarge(a, DEFAULT_DEGREE_CAP));
    }
    let modulus = least_irreducible(p, a);
    let q = p.pow(a);
    Ok(FiniteField { p, a, q, modulus })
}

/// Field of prime-power order q.
pub fn make_field_of_order(q: u64) -> Result<FiniteField, ArithError> {
    let (p, a) = prime_power(q)
        .ok_or_else(|| ArithError::PreconditionViolated(format!("{q} is not a prime power")))?;
    make_field(p, a)
}

/// Smallest monic irreducible of degree a over F_p, ordering candidates by
/// the digit tuple (c_(a-1), ..., c_0).
fn least_irreducible(p: u64, a: u32) -> Vec<u64> {
    let total = p.pow(a);
    for key in 0..total {
        // Most significant digit first.
        let mut digits = Vec::with_capacity(a as usize);
        let mut k = key;
        for _ in 0..a {
            digits.push(k % p);
            k /= p;
        }
        digits.reverse(); // digits[i] = coefficient of x^(a-1-i)
        let coeffs: Vec<u64> = (0..a as usize).map(|i| digits[a as usize - 1 - i]).collect();
        if poly_is_irreducible(p, &coeffs) {
            return coeffs;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists")
}

/// Irreducibility of the monic polynomial x^deg + sum coeffs[i] x^i by
/// trial division over all monic divisors of degree <= deg/2.
fn poly_is_irreducible(p: u64, coeffs: &[u64]) -> bool {
    let deg = coeffs.len();
    if deg == 1 {
        return true;
    }
    let mut full = coeffs.to_vec();
    full.push(1); // monic leading coefficient
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for key in 0..count {
            let mut div = Vec::with_capacity(d + 1);
            let mut k = key;
            for _ in 0..d {
                div.push(k % p);
                k /= p;
            }
            div.push(1);
            if poly_rem_is_zero(p, &full, &div) {
                return false;
            }
        }
    }
    true
}

fn poly_rem_is_zero(p: u64, num: &[u64], den: &[u64]) -> bool {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    while rem.len() > dd {
        let lead = *rem.last().unwrap() % p;
        let shift = rem.len() - 1 - dd;
        if lead != 0 {
            for i in 0..=dd {
                let idx = shift + i;
                rem[idx] = (rem[idx] + (p - lead % p) * den[i]) % p;
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c % p == 0)
}

impl FiniteField {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.a
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> Fe {
        0
    }

    pub fn one(&self) -> Fe {
        1
    }

    /// Embedding of an integer via the prime subfield.
    pub fn from_u64(&self, k: u64) -> Fe {
        k % self.p
    }

    fn digits(&self, x: Fe) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.a as usize);
        let mut k = x;
        for _ in 0..self.a {
            out.push(k % self.p);
            k /= self.p;
        }
        out
    }

    fn encode(&self, digits: &[u64]) -> Fe {
        let mut out = 0;
        for &d in digits.iter().rev() {
            out = out * self.p + d % self.p;
        }
        out
    }

    pub fn add(&self, x: Fe, y: Fe) -> Fe {
        let (dx, dy) = (self.digits(x), self.digits(y));
        let sum: Vec<u64> = dx.iter().zip(&dy).map(|(a, b)| (a + b) % self.p).collect();
        self.encode(&sum)
    }

    pub fn neg(&self, x: Fe) -> Fe {
        let dx = self.digits(x);
        let out: Vec<u64> = dx.iter().map(|&a| (self.p - a) % self.p).collect();
        self.encode(&out)
    }

    pub fn mul(&self, x: Fe, y: Fe) -> Fe {
        if self.a == 1 {
            return (x as u128 * y as u128 % self.p as u128) as u64;
        }
        let (dx, dy) = (self.digits(x), self.digits(y));
        let deg = self.a as usize;
        let mut prod = vec![0u64; 2 * deg - 1];
        for (i, & a) in dx.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in dy.iter().enumerate() {
                prod[i + j] = (prod[i + j] + a * b) % self.p;
            }
        }
        // Reduce x^k for k >= deg via x^deg = -sum c_i x^i.
        for k in (deg..prod.len()).rev() {
            let lead = prod[k];
            if lead == 0 {
                continue;
            }
            prod[k] = 0;
            for (i, &c) in self.modulus.iter().enumerate() {
                let idx = k - deg + i;
                prod[idx] = (prod[idx] + lead * ((self.p - c % self.p) % self.p)) % self.p;
            }
        }
        self.encode(&prod[..deg])
    }

    pub fn pow(&self, x: Fe, mut e: u64) -> Fe {
        let mut base = x;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, x: Fe) -> Fe {
        assert!(x != 0, "inverse of zero");
        self.pow(x, self.q - 2)
    }

    /// All q elements; index 0 is zero.
    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        0..self.q
    }

    /// The q - 1 nonzero elements.
    pub fn units(&self) -> impl Iterator<Item = Fe> {
        1..self.q
    }
}
