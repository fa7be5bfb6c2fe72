//! Extended exchange matrices, matrix mutation, freezing and quivers.
//!
//! An extended exchange matrix is an (n+m) x n integer matrix whose top
//! n x n block is skew-symmetric.  Rows n..n+m are the frozen rows.  The
//! JSON wire format is `{"n": .., "m": .., "rows": [[..], ..]}` with n+m
//! rows of length n; mutable indices are 1-based at the interfaces.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::IntMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClusterError {
    #[error("mutable index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("principal part is not skew-symmetric at ({0},{1})")]
    NotSkewSymmetric(usize, usize),
    #[error("matrix has {got} rows, expected n+m = {want}")]
    BadShape { got: usize, want: usize },
    #[error("exact division failed: mutated cluster variable is not a Laurent polynomial")]
    ExactDivisionFailure,
    #[error("element is not a Laurent polynomial in the target cluster")]
    NotLaurent,
}

/// An (n+m) x n integer matrix with skew-symmetric principal part.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExchangeMatrix {
    n: usize,
    m: usize,
    mat: IntMatrix,
}

/// Serde mirror of the JSON wire format.
#[derive(Serialize, Deserialize)]
struct ExchangeMatrixJson {
    n: usize,
    m: usize,
    rows: Vec<Vec<i64>>,
}

impl ExchangeMatrix {
    /// Wraps an (n+m) x n matrix, checking the shape and skew-symmetry of
    /// the principal part.
    pub fn new(n: usize, m: usize, mat: IntMatrix) -> Result<Self, ClusterError> {
        if mat.rows() != n + m || mat.cols() != n {
            return Err(ClusterError::BadShape { got: mat.rows(), want: n + m });
        }
        for i in 0..n {
            for j in 0..n {
                if *mat.at(i, j) != -mat.at(j, i) {
                    return Err(ClusterError::NotSkewSymmetric(i + 1, j + 1));
                }
            }
        }
        Ok(ExchangeMatrix { n, m, mat })
    }

    pub fn from_i64_rows(n: usize, m: usize, rows: &[Vec<i64>]) -> Result<Self, ClusterError> {
        Self::new(n, m, IntMatrix::from_i64_rows(rows))
    }

    /// Principal-coefficient extension (B; Id_n) of a skew-symmetric B.
    pub fn principal(b: &IntMatrix) -> Result<Self, ClusterError> {
        let n = b.cols();
        Self::new(n, n, b.stack(&IntMatrix::identity(n)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn size(&self) -> usize {
        self.n + self.m
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.mat
    }

    /// Top n x n skew-symmetric block.
    pub fn principal_part(&self) -> IntMatrix {
        self.mat.submatrix(0..self.n, 0..self.n)
    }

    /// Bottom m x n frozen block.
    pub fn frozen_part(&self) -> IntMatrix {
        self.mat.submatrix(self.n..self.n + self.m, 0..self.n)
    }

    /// Matrix mutation in direction `k` (1-based mutable index).
    pub fn mutate(&self, k: usize) -> Result<ExchangeMatrix, ClusterError> {
        if k == 0 || k > self.n {
            return Err(ClusterError::IndexOutOfRange(k, self.n));
        }
        let k = k - 1;
        let pos = |x: &BigInt| if x.is_positive() { x.clone() } else { BigInt::zero() };
        let neg = |x: &BigInt| if x.is_negative() { x.clone() } else { BigInt::zero() };
        let out = IntMatrix::from_fn(self.size(), self.n, |i, j| {
            if i == k || j == k {
                -self.mat.at(i, j)
            } else {
                self.mat.at(i, j)
                    + pos(self.mat.at(i, k)) * pos(self.mat.at(k, j))
                    - neg(self.mat.at(i, k)) * neg(self.mat.at(k, j))
            }
        });
        Ok(ExchangeMatrix { n: self.n, m: self.m, mat: out })
    }

    pub fn mutate_path(&self, path: &[usize]) -> Result<ExchangeMatrix, ClusterError> {
        let mut cur = self.clone();
        for &k in path {
            cur = cur.mutate(k)?;
        }
        Ok(cur)
    }

    /// Keeps the columns indexed by `s` (1-based, strictly increasing) and
    /// freezes the remaining mutable indices.
    ///
    /// Row order of the result: surviving mutable indices in increasing
    /// order, then the newly frozen indices in increasing order, then the
    /// old frozen rows.  The returned permutation maps each new row index
    /// to the original row index it came from.
    pub fn freeze(&self, s: &[usize]) -> (ExchangeMatrix, Vec<usize>) {
        assert!(s.windows(2).all(|w| w[0] < w[1]), "s must be strictly increasing");
        assert!(s.iter().all(|&i| 1 <= i && i <= self.n), "s must be a subset of 1..=n");
        let keep: Vec<usize> = s.iter().map(|&i| i - 1).collect();
        let mut order: Vec<usize> = keep.clone();
        order.extend((0..self.n).filter(|i| !keep.contains(i)));
        order.extend(self.n..self.size());
        let n2 = keep.len();
        let m2 = self.size() - n2;
        let out = IntMatrix::from_fn(self.size(), n2, |i, j| {
            self.mat.at(order[i], keep[j]).clone()
        });
        (ExchangeMatrix { n: n2, m: m2, mat: out }, order)
    }

    /// Directed graph on the mutable indices with an edge i -> j whenever
    /// the (i,j) entry is positive.
    pub fn quiver(&self) -> Quiver {
        let mut edges = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                let w = self.mat.at(i, j);
                if w.is_positive() {
                    edges.push(QuiverEdge { from: i + 1, to: j + 1, weight: w.clone() });
                }
            }
        }
        Quiver { n: self.n, edges }
    }

    pub fn to_json(&self) -> String {
        let rows = (0..self.size())
            .map(|i| {
                (0..self.n)
                    .map(|j| {
                        i64::try_from(self.mat.at(i, j)).expect("entry exceeds i64 in JSON output")
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string_pretty(&ExchangeMatrixJson { n: self.n, m: self.m, rows })
            .expect("serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let raw: ExchangeMatrixJson =
            serde_json::from_str(text).map_err(|e| format!("invalid matrix JSON: {e}"))?;
        if raw.rows.len() != raw.n + raw.m {
            return Err(format!("expected {} rows, found {}", raw.n + raw.m, raw.rows.len()));
        }
        if raw.rows.iter().any(|r| r.len() != raw.n) {
            return Err(format!("every row must have length n = {}", raw.n));
        }
        ExchangeMatrix::from_i64_rows(raw.n, raw.m, &raw.rows).map_err(|e| e.to_string())
    }
}

/// Weighted directed edge of a quiver (1-based vertices).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuiverEdge {
    pub from: usize,
    pub to: usize,
    pub weight: BigInt,
}

/// Directed graph on vertices 1..=n with positively weighted edges and no
/// loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quiver {
    pub n: usize,
    pub edges: Vec<QuiverEdge>,
}

impl Quiver {
    pub fn is_edgeless(&self) -> bool {
        self.edges.is_empty()
    }

    /// Adjacency lists on 0-based vertices, weights dropped.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.from - 1].push(e.to - 1);
        }
        adj
    }

    /// Quiver with every edge reversed.
    pub fn reversed(&self) -> Quiver {
        Quiver {
            n: self.n,
            edges: self
                .edges
                .iter()
                .map(|e| QuiverEdge { from: e.to, to: e.from, weight: e.weight.clone() })
                .collect(),
        }
    }

    /// Vertex sets of the connected components of the underlying undirected
    /// graph, each sorted, in order of smallest vertex.
    pub fn undirected_components(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.from - 1].push(e.to - 1);
            adj[e.to - 1].push(e.from - 1);
        }
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp.iter().map(|v| v + 1).collect());
        }
        comps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn four_vertex_example() -> ExchangeMatrix {
        ExchangeMatrix::from_i64_rows(
            4,
            0,
            &[
                vec![0, -1, -1, -1],
                vec![1, 0, 1, -1],
                vec![1, -1, 0, 1],
                vec![1, 1, -1, 0],
            ],
        )
        .unwrap()
    }

    fn edge_set(q: &Quiver) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = q.edges.iter().map(|e| (e.from, e.to)).collect();
        e.sort_unstable();
        e
    }

    #[test]
    fn mutate_rank_two() {
        let b = ExchangeMatrix::from_i64_rows(2, 0, &[vec![0, 1], vec![-1, 0]]).unwrap();
        let b1 = b.mutate(1).unwrap();
        assert_eq!(
            b1,
            ExchangeMatrix::from_i64_rows(2, 0, &[vec![0, -1], vec![1, 0]]).unwrap()
        );
    }

    #[test]
    fn mutate_principal_rank_two() {
        let b = ExchangeMatrix::from_i64_rows(
            2,
            2,
            &[vec![0, 1], vec![-1, 0], vec![1, 0], vec![0, 1]],
        )
        .unwrap();
        let b1 = b.mutate(1).unwrap();
        assert_eq!(
            b1,
            ExchangeMatrix::from_i64_rows(
                2,
                2,
                &[vec![0, -1], vec![1, 0], vec![-1, 1], vec![0, 1]]
            )
            .unwrap()
        );
    }

    #[test]
    fn mutate_three_cycle_child() {
        // Freezing vertex 1 of the 4-vertex example leaves the cyclic
        // triangle 2 -> 3 -> 4 -> 2; mutating at 2 yields 3 -> 2, 2 -> 4.
        let b = four_vertex_example();
        let (child, _) = b.freeze(&[2, 3, 4]);
        assert_eq!(edge_set(&child.quiver()), vec![(1, 2), (2, 3), (3, 1)]);
        let mutated = child.mutate(1).unwrap();
        assert_eq!(edge_set(&mutated.quiver()), vec![(1, 3), (2, 1)]);
    }

    #[test]
    fn freeze_identity_and_empty() {
        let b = four_vertex_example();
        let (same, perm) = b.freeze(&[1, 2, 3, 4]);
        assert_eq!(same, b);
        assert_eq!(perm, vec![0, 1, 2, 3]);
        let (torus, _) = b.freeze(&[]);
        assert_eq!(torus.n(), 0);
        assert_eq!(torus.m(), 4);
        assert_eq!(torus.matrix().cols(), 0);
    }

    #[test]
    fn quiver_of_four_vertex_example() {
        let q = four_vertex_example().quiver();
        assert_eq!(
            edge_set(&q),
            vec![(2, 1), (2, 3), (3, 1), (3, 4), (4, 1), (4, 2)]
        );
    }

    #[test]
    fn quiver_edgeless_and_path() {
        let b = ExchangeMatrix::from_i64_rows(2, 0, &[vec![0, 0], vec![0, 0]]).unwrap();
        assert!(b.quiver().is_edgeless());
        let path = ExchangeMatrix::from_i64_rows(
            3,
            0,
            &[vec![0, 1, 0], vec![-1, 0, 1], vec![0, -1, 0]],
        )
        .unwrap();
        assert_eq!(edge_set(&path.quiver()), vec![(1, 2), (2, 3)]);
    }

    #[test]
    fn json_round_trip() {
        let b = four_vertex_example();
        let json = b.to_json();
        assert_eq!(ExchangeMatrix::from_json(&json).unwrap(), b);
        assert!(ExchangeMatrix::from_json("{\"n\":1,\"m\":0,\"rows\":[[1]]}").is_err());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ExchangeMatrix::from_i64_rows(2, 0, &[vec![0, 1]]).is_err());
        assert!(
            ExchangeMatrix::from_i64_rows(2, 0, &[vec![0, 1], vec![1, 0]]).is_err(),
            "non-skew principal part must be rejected"
        );
        let b = four_vertex_example();
        assert_eq!(b.mutate(5).unwrap_err(), ClusterError::IndexOutOfRange(5, 4));
        assert_eq!(b.mutate(0).unwrap_err(), ClusterError::IndexOutOfRange(0, 4));
    }
}
