//! Quasi-polynomial fitting of point-count samples.
//!
//! A count function realizable in the character ring restricts, on each
//! residue class of prime powers modulo some N, to an integer polynomial
//! in q.  The fit searches the smallest modulus N for which per-class
//! interpolation of bounded degree matches every sample, holding out at
//! least one sample per class as validation.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::count::PointCountSample;
use super::ArithError;

/// Per-residue-class integer polynomials in q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiPolynomial {
    pub modulus: u64,
    /// Residue class -> polynomial coefficients, ascending degree.
    pub classes: BTreeMap<u64, Vec<BigInt>>,
}

impl QuasiPolynomial {
    pub fn evaluate(&self, q: u64) -> Option<BigInt> {
        let poly = self.classes.get(&(q % self.modulus))?;
        let qq = BigInt::from(q);
        let mut acc = BigInt::zero();
        for c in poly.iter().rev() {
            acc = acc * &qq + c;
        }
        Some(acc)
    }

    /// Degree of the largest class polynomial.
    pub fn degree(&self) -> usize {
        self.classes
            .values()
            .map(|p| p.iter().rposition(|c| !c.is_zero()).unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}

/// Exact integer interpolation through the points; `None` when the
/// interpolating polynomial has non-integer coefficients.
fn interpolate(points: &[(u64, BigInt)]) -> Option<Vec<BigInt>> {
    let n = points.len();
    // Newton coefficients via divided differences.
    let xs: Vec<BigRational> = points.iter().map(|(q, _)| BigRational::from(BigInt::from(*q))).collect();
    let mut table: Vec<BigRational> =
        points.iter().map(|(_, c)| BigRational::from(c.clone())).collect();
    let mut newton = vec![table[0].clone()];
    for level in 1..n {
        for i in 0..n - level {
            let dx = &xs[i + level] - &xs[i];
            table[i] = (&table[i + 1] - &table[i]) / dx;
        }
        newton.push(table[0].clone());
    }
    // Expand the Newton form into monomial coefficients.
    let mut coeffs = vec![BigRational::zero(); n];
    let mut basis = vec![BigRational::one()]; // prod (x - x_i), expanded
    for (level, c) in newton.iter().enumerate() {
        for (i, b) in basis.iter().enumerate() {
            coeffs[i] += c * b;
        }
        if level + 1 < n {
            // basis *= (x - xs[level])
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (i, b) in basis.iter().enumerate() {
                next[i + 1] += b;
                next[i] -= b * &xs[level];
            }
            basis = next;
        }
    }
    coeffs
        .into_iter()
        .map(|c| c.denom().is_one().then(|| c.numer().clone()))
        .collect()
}

/// Finds the smallest modulus N <= `max_modulus` such that the samples in
/// every residue class mod N are matched by one integer polynomial of
/// degree <= `max_degree`, with at least one held-out sample per class.
///
/// Suspect samples are ignored.  Classes need >= max_degree + 2 samples to
/// be guaranteed a decision; thinner classes may reject a modulus that a
/// richer sample set would accept.
pub fn fit_quasi_polynomial(
    samples: &[PointCountSample],
    max_modulus: u64,
    max_degree: usize,
) -> Result<QuasiPolynomial, ArithError> {
    let usable: Vec<(u64, BigInt)> = samples
        .iter()
        .filter(|s| !s.suspect)
        .map(|s| (s.q, BigInt::from(s.count)))
        .collect();
    if usable.is_empty() {
        return Err(ArithError::NoFit);
    }
    'modulus: for n in 1..=max_modulus {
        let mut by_class: BTreeMap<u64, Vec<(u64, BigInt)>> = BTreeMap::new();
        for (q, c) in &usable {
            by_class.entry(q % n).or_default().push((*q, c.clone()));
        }
        let mut classes = BTreeMap::new();
        for (r, mut pts) in by_class {
            pts.sort_by_key(|(q, _)| *q);
            pts.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
            if pts.iter().map(|(q, _)| q).collect::<std::collections::BTreeSet<_>>().len()
                != pts.len()
            {
                // Contradictory duplicate q values.
                continue 'modulus;
            }
            if pts.len() < 2 {
                // Nothing can be held out.
                continue 'modulus;
            }
            let fit_len = (max_degree + 1).min(pts.len() - 1);
            let Some(poly) = interpolate(&pts[..fit_len]) else {
                continue 'modulus;
            };
            let candidate = QuasiPolynomial {
                modulus: n,
                classes: BTreeMap::from([(r, poly.clone())]),
            };
            if pts.iter().any(|(q, c)| candidate.evaluate(*q).as_ref() != Some(c)) {
                continue 'modulus;
            }
            classes.insert(r, poly);
        }
        return Ok(QuasiPolynomial { modulus: n, classes });
    }
    Err(ArithError::NoFit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::count::rank1_count;

    fn sample(q: u64, count: u128) -> PointCountSample {
        PointCountSample { q, count, suspect: false }
    }

    #[test]
    fn constant_samples() {
        let samples: Vec<_> = [2u64, 3, 5, 7].iter().map(|&q| sample(q, 42)).collect();
        let fit = fit_quasi_polynomial(&samples, 8, 3).unwrap();
        assert_eq!(fit.modulus, 1);
        assert_eq!(fit.classes[&0], vec![BigInt::from(42)]);
    }

    #[test]
    fn quartic_polynomial_fits_with_modulus_one() {
        let samples: Vec<_> = [3u64, 5, 7, 9, 11, 13]
            .iter()
            .map(|&q| sample(q, (q as u128).pow(4) + 1))
            .collect();
        let fit = fit_quasi_polynomial(&samples, 12, 4).unwrap();
        assert_eq!(fit.modulus, 1);
        let poly = &fit.classes[&0];
        assert_eq!(poly[0], BigInt::one());
        assert_eq!(poly[4], BigInt::one());
        assert!(poly[1].is_zero() && poly[2].is_zero() && poly[3].is_zero());
    }

    #[test]
    fn rank1_d3_needs_residue_classes() {
        // On odd prime powers the root-count c(q) of y^3 = -1 depends on
        // q mod 3 (odd q = 1 mod 3 forces q = 1 mod 6), so the minimal
        // modulus over these samples is 3.
        let qs = [3u64, 5, 7, 9, 11, 13, 17, 19, 23, 25, 27, 29, 31, 37, 41, 43];
        let samples: Vec<_> = qs.iter().map(|&q| sample(q, rank1_count(3, q).unwrap())).collect();
        let fit = fit_quasi_polynomial(&samples, 12, 2).unwrap();
        assert_eq!(fit.modulus, 3);
        // Class 1 mod 3: c = 3, count = q^2 + q + 1.
        assert_eq!(fit.classes[&1], vec![BigInt::one(), BigInt::one(), BigInt::one()]);
        // Classes 0 and 2 mod 3: c = 1, count = q^2 - q + 1.
        for r in [0u64, 2] {
            assert_eq!(
                fit.classes[&r],
                vec![BigInt::one(), BigInt::from(-1), BigInt::one()],
                "class {r}"
            );
        }
        // The fit validates on held-out prime powers.
        for q in [49u64, 53, 81] {
            assert_eq!(fit.evaluate(q).unwrap(), BigInt::from(rank1_count(3, q).unwrap()));
        }
    }

    #[test]
    fn suspect_samples_are_excluded() {
        let mut samples: Vec<_> = [3u64, 5, 7, 11].iter().map(|&q| sample(q, 7)).collect();
        samples.push(PointCountSample { q: 13, count: 999_999, suspect: true });
        let fit = fit_quasi_polynomial(&samples, 4, 1).unwrap();
        assert_eq!(fit.modulus, 1);
    }

    #[test]
    fn no_fit_is_reported() {
        // A function that is not a quasi-polynomial of low modulus/degree:
        // factorial-ish growth.
        let samples: Vec<_> =
            [2u64, 3, 5, 7, 11, 13].iter().map(|&q| sample(q, (1..=q as u128).product())).collect();
        assert_eq!(fit_quasi_polynomial(&samples, 3, 1).unwrap_err(), ArithError::NoFit);
    }
}
