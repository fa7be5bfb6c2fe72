//! Mixed Hodge tables and Poincare series.
//!
//! Only the Deligne summands on the (p,p) diagonal are stored: the
//! varieties in scope are of mixed Tate type.  Tables are rendered the way
//! the reference tables lay them out, columns H^0.. and one row per value
//! of k-p.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HodgeError {
    #[error("entry h^({k},({p},{p})) lies outside the allowed weight band")]
    WeightBand { k: usize, p: usize },
    #[error("invalid table JSON: {0}")]
    BadJson(String),
}

/// Dimensions h^(k,(p,p)) of the Deligne summands, indexed by (degree,
/// weight); zero entries are omitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HodgeTable {
    pub n: usize,
    pub m: usize,
    entries: BTreeMap<(usize, usize), u64>,
}

#[derive(Serialize, Deserialize)]
struct HodgeTableJson {
    n: usize,
    m: usize,
    entries: Vec<(usize, usize, u64)>,
}

impl HodgeTable {
    pub fn new(n: usize, m: usize) -> Self {
        HodgeTable { n, m, entries: BTreeMap::new() }
    }

    /// Total dimension of the variety, n + m.
    pub fn dimension(&self) -> usize {
        self.n + self.m
    }

    pub fn get(&self, k: usize, p: usize) -> u64 {
        self.entries.get(&(k, p)).copied().unwrap_or(0)
    }

    pub fn add(&mut self, k: usize, p: usize, value: u64) {
        if value == 0 {
            return;
        }
        *self.entries.entry((k, p)).or_insert(0) += value;
    }

    pub fn set(&mut self, k: usize, p: usize, value: u64) {
        if value == 0 {
            self.entries.remove(&(k, p));
        } else {
            self.entries.insert((k, p), value);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &u64)> {
        self.entries.iter()
    }

    /// Betti numbers b_k = sum_p h^(k,(p,p)) for k = 0..=n+m.
    pub fn betti(&self) -> Vec<u64> {
        let mut out = vec![0; self.dimension() + 1];
        for (&(k, _), &v) in &self.entries {
            if k < out.len() {
                out[k] += v;
            }
        }
        out
    }

    /// The top-weight diagonal h^(k,(k,k)) for k = 0..=n+m.
    pub fn standard_row(&self) -> Vec<u64> {
        (0..=self.dimension()).map(|k| self.get(k, k)).collect()
    }

    /// Checks 0 <= k <= n+m and ceil(k/2) <= p <= k on every entry.
    pub fn validate(&self) -> Result<(), HodgeError> {
        for (&(k, p), _) in &self.entries {
            if k > self.dimension() || p > k || 2 * p < k {
                return Err(HodgeError::WeightBand { k, p });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let entries = self.entries.iter().map(|(&(k, p), &v)| (k, p, v)).collect();
        serde_json::to_string_pretty(&HodgeTableJson { n: self.n, m: self.m, entries })
            .expect("serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, HodgeError> {
        let raw: HodgeTableJson =
            serde_json::from_str(text).map_err(|e| HodgeError::BadJson(e.to_string()))?;
        let mut table = HodgeTable::new(raw.n, raw.m);
        for (k, p, v) in raw.entries {
            table.add(k, p, v);
        }
        Ok(table)
    }

    /// Text rendering with columns H^0.. and rows indexed by k-p.  Within a
    /// row, zeros inside the nonzero support are printed and cells outside
    /// it stay blank.
    pub fn render(&self) -> String {
        let e = self.dimension();
        let max_s = self.entries.keys().map(|&(k, p)| k - p).max().unwrap_or(0);
        let mut cells: Vec<Vec<String>> = Vec::new();
        for s in 0..=max_s {
            let support: Vec<usize> = (0..=e).filter(|&k| k >= s && self.get(k, k - s) != 0).collect();
            let (lo, hi) = match (support.first(), support.last()) {
                (Some(&lo), Some(&hi)) => (lo, hi),
                _ => (1, 0),
            };
            cells.push(
                (0..=e)
                    .map(|k| {
                        if k >= lo && k <= hi && k >= s {
                            self.get(k, k - s).to_string()
                        } else {
                            String::new()
                        }
                    })
                    .collect(),
            );
        }
        let mut widths: Vec<usize> = (0..=e).map(|k| format!("H^{k}").len()).collect();
        for row in &cells {
            for (k, cell) in row.iter().enumerate() {
                widths[k] = widths[k].max(cell.len());
            }
        }
        let label_width = format!("k-p={max_s}").len();
        let mut out = String::new();
        out.push_str(&format!("{:label_width$}", ""));
        for k in 0..=e {
            out.push_str(&format!("  {:>width$}", format!("H^{k}"), width = widths[k]));
        }
        out.push('\n');
        for (s, row) in cells.iter().enumerate() {
            let label = if s == 0 { "k-p=0".to_string() } else { format!("{s:>label_width$}") };
            out.push_str(&format!("{label:label_width$}"));
            for (k, cell) in row.iter().enumerate() {
                out.push_str(&format!("  {:>width$}", cell, width = widths[k]));
            }
            out.push('\n');
        }
        out
    }
}

/// True iff h^(p+s,(p,p)) = h^(e-p+s,(e-p,e-p)) for all s and p, with
/// e = n + m: every k-p row of the table is palindromic about p = e/2.
pub fn curious_palindrome(table: &HodgeTable) -> bool {
    let e = table.dimension();
    // Collect the p-range to scan; mirrored indices may fall outside any
    // stored entry, in which case both sides must agree as zeros.
    for s in 0..=e {
        for p in 0..=e {
            let lhs = if p + s <= 2 * e { table.get(p + s, p) } else { 0 };
            let mirror_p = e - p;
            let rhs = if mirror_p + s <= 2 * e { table.get(mirror_p + s, mirror_p) } else { 0 };
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

/// Polynomial with nonnegative integer coefficients recording the graded
/// dimensions of a cohomology ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoincareSeries {
    pub coefficients: Vec<u64>,
}

impl PoincareSeries {
    pub fn from_coefficients(mut coefficients: Vec<u64>) -> Self {
        while coefficients.len() > 1 && *coefficients.last().unwrap() == 0 {
            coefficients.pop();
        }
        PoincareSeries { coefficients }
    }

    pub fn coefficient(&self, k: usize) -> u64 {
        self.coefficients.get(k).copied().unwrap_or(0)
    }
}

impl std::fmt::Display for PoincareSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        for (k, &c) in self.coefficients.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let part = match (k, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "t".to_string(),
                (1, c) => format!("{c}*t"),
                (k, 1) => format!("t^{k}"),
                (k, c) => format!("{c}*t^{k}"),
            };
            parts.push(part);
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Multiplies integer polynomials given by coefficient vectors.
pub(crate) fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    use num_traits::Zero;
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Exact division of integer polynomials; `None` if not divisible.
pub(crate) fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Option<Vec<BigInt>> {
    use num_traits::Zero;
    let deg = |p: &[BigInt]| p.iter().rposition(|c| !c.is_zero());
    let dd = deg(den)?;
    let Some(dn) = deg(num) else {
        return Some(vec![BigInt::zero()]);
    };
    if dn < dd {
        return None;
    }
    let mut rem: Vec<BigInt> = num.to_vec();
    let mut quot = vec![BigInt::zero(); dn - dd + 1];
    for k in (0..=dn - dd).rev() {
        let lead = rem[k + dd].clone();
        if lead.is_zero() {
            continue;
        }
        let (q, r) = num_integer::Integer::div_rem(&lead, &den[dd]);
        if !r.is_zero() {
            return None;
        }
        quot[k] = q.clone();
        for i in 0..=dd {
            let delta = &q * &den[i];
            rem[k + i] -= delta;
        }
    }
    if rem.iter().any(|c| !c.is_zero()) {
        return None;
    }
    Some(quot)
}
