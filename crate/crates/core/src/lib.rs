//! Graph-privacy toolkit: edge-differentially-private and locally-edge-DP
//! algorithms for k-core decomposition, low out-degree ordering, and densest
//! subgraph, plus a simulated local-model protocol runtime and exact
//! non-private oracles.
//!
//! Modules:
//! - [`graph`]: immutable undirected simple graphs and edge-list parsing.
//! - [`density`]: exact rational density arithmetic and numeric helpers.
//! - [`oracles`]: exact (non-private) core numbers, degeneracy, densest
//!   subgraph, and the Charikar peeling 2-approximation.
//! - [`noise`]: symmetric geometric sampling, the geometric mechanism, and
//!   labeled reproducible RNG streams.
//! - [`ledger`]: privacy-budget accountant (adaptive composition + group
//!   privacy) with exact rational totals.
//! - [`levels`]: parameters of the level data structure (groups, thresholds).
//! - [`transcript`]: local-model protocol transcripts.
//! - [`ledp`]: the LEDP level-structure algorithms (core decomposition,
//!   ordering, small-rounds variant, densest subgraph) and invariant checkers.
//! - [`mwu`]: central-model DP densest subgraph via multiplicative-weights
//!   load balancing.
//! - [`la`]: the generic locally-adjustable-algorithm framework and its DP
//!   and LEDP wrapping mechanisms.

pub mod density;
pub mod graph;
pub mod la;
pub mod ledger;
pub mod ledp;
pub mod levels;
pub mod mwu;
pub mod noise;
pub mod oracles;
pub mod transcript;

/// Node identifier: dense 0-based index into a graph's adjacency table.
pub type NodeId = usize;

/// Exact arbitrary-precision rational used for all threshold comparisons.
pub type Rational = num::BigRational;

pub use density::{clamp, Density};
pub use graph::Graph;
pub use ledger::BudgetLedger;
pub use levels::LevelParams;
pub use noise::{GeomParam, NoiseMode, RngStream, StreamLabel};
pub use transcript::Transcript;

/// Converts an `f64` to an exact rational. Finite doubles are dyadic
/// rationals, so this conversion is lossless.
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float required")
}

/// Rational upper bound on `x` accurate to 1e-9, for irrational quantities
/// (logarithms) that feed exact threshold comparisons.
pub fn rational_upper_approx(x: f64) -> Rational {
    use num::BigInt;
    let scale: i64 = 1_000_000_000;
    let num = (x * scale as f64).ceil() as i64;
    Rational::new(BigInt::from(num), BigInt::from(scale))
}
