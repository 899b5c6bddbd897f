//! Exact rational density arithmetic and small numeric helpers.

use crate::{Graph, NodeId, Rational};
use num::BigInt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DensityError {
    #[error("density of an empty node set is undefined")]
    EmptySet,
    #[error("node id {0} out of range")]
    OutOfRange(NodeId),
}

/// Exact density |E(S)|/|S| of an induced subgraph. Comparisons go through
/// exact rationals; no floating rounding can flip a threshold decision.
#[derive(Debug, Clone)]
pub struct Density {
    numerator: u64,
    denominator: u64,
}

// Equality by rational value (6/4 == 3/2), consistent with `Ord` below.
impl PartialEq for Density {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for Density {}

impl Density {
    /// Density from an edge count and a (positive) node count.
    pub fn new(edges: u64, nodes: u64) -> Result<Self, DensityError> {
        if nodes == 0 {
            return Err(DensityError::EmptySet);
        }
        Ok(Density {
            numerator: edges,
            denominator: nodes,
        })
    }

    pub fn zero() -> Self {
        Density {
            numerator: 0,
            denominator: 1,
        }
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    /// Exact rational value.
    pub fn value(&self) -> Rational {
        Rational::new(
            BigInt::from(self.numerator),
            BigInt::from(self.denominator),
        )
    }

    /// Approximate value for reporting only.
    pub fn to_f64(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

impl PartialOrd for Density {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Density {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Exact cross-multiplication in u128; no overflow for u64 inputs.
        let lhs = self.numerator as u128 * other.denominator as u128;
        let rhs = other.numerator as u128 * self.denominator as u128;
        lhs.cmp(&rhs)
    }
}

/// Number of edges of the subgraph induced by `s` (must be deduplicated).
pub fn induced_edge_count(g: &Graph, s: &[NodeId]) -> usize {
    let mut member = vec![false; g.n()];
    for &v in s {
        member[v] = true;
    }
    let mut count = 0;
    for &v in s {
        for &w in g.neighbors(v) {
            if member[w] && v < w {
                count += 1;
            }
        }
    }
    count
}

/// Exact density of the subgraph induced by the nonempty node set `s`.
pub fn induced_density(g: &Graph, s: &[NodeId]) -> Result<Density, DensityError> {
    if s.is_empty() {
        return Err(DensityError::EmptySet);
    }
    for &v in s {
        if v >= g.n() {
            return Err(DensityError::OutOfRange(v));
        }
    }
    let mut dedup = s.to_vec();
    dedup.sort_unstable();
    dedup.dedup();
    let edges = induced_edge_count(g, &dedup);
    Density::new(edges as u64, dedup.len() as u64)
}

/// Clamp `x` to the interval `[a, b]`: `a` if `x < a`, `b` if `x > b`.
pub fn clamp(x: i64, a: i64, b: i64) -> i64 {
    assert!(a <= b, "clamp requires a <= b (got a={a}, b={b})");
    x.max(a).min(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_edge_list;

    fn k4() -> Graph {
        load_edge_list("0 1\n0 2\n0 3\n1 2\n1 3\n2 3").unwrap().graph
    }

    #[test]
    fn k4_density() {
        let d = induced_density(&k4(), &[0, 1, 2, 3]).unwrap();
        assert_eq!((d.numerator(), d.denominator()), (6, 4));
        assert_eq!(d.to_f64(), 1.5);
    }

    #[test]
    fn singleton_density_zero() {
        let d = induced_density(&k4(), &[2]).unwrap();
        assert_eq!(d, Density::zero());
    }

    #[test]
    fn c5_density_one() {
        let g = load_edge_list("0 1\n1 2\n2 3\n3 4\n4 0").unwrap().graph;
        let d = induced_density(&g, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(d.cmp(&Density::new(1, 1).unwrap()), std::cmp::Ordering::Equal);
    }

    #[test]
    fn empty_set_errors() {
        assert_eq!(
            induced_density(&k4(), &[]).unwrap_err(),
            DensityError::EmptySet
        );
    }

    #[test]
    fn exact_comparison() {
        // 5/3 > 3/2 despite both rounding to 1.67 vs 1.5; and equal
        // cross-reduced fractions compare equal under Ord and Eq alike.
        assert!(Density::new(5, 3).unwrap() > Density::new(3, 2).unwrap());
        assert_eq!(
            Density::new(2, 4).unwrap().cmp(&Density::new(1, 2).unwrap()),
            std::cmp::Ordering::Equal
        );
        assert_eq!(Density::new(2, 4).unwrap(), Density::new(1, 2).unwrap());
    }

    #[test]
    fn clamp_table() {
        assert_eq!(clamp(5, 0, 3), 3);
        assert_eq!(clamp(-2, 0, 3), 0);
        assert_eq!(clamp(2, 0, 3), 2);
    }

    #[test]
    #[should_panic(expected = "clamp requires a <= b")]
    fn clamp_rejects_inverted_interval() {
        clamp(0, 3, 1);
    }
}
