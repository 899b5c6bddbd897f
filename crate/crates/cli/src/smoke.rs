//! Statistical edge-DP smoke test: run a core-decomposition protocol many
//! times on the built-in 3-node neighboring pair (path vs. triangle, which
//! differ in exactly the edge {0, 2}) and compare empirical outcome
//! distributions of a coarse projection (the multiset of final levels).

use crate::report::Algorithm;
use privgraph::graph::Graph;
use privgraph::ledp::{ledp_core_decomposition, ledp_core_decomposition_fast, LedpConfig};
use privgraph::{LevelParams, NoiseMode};
use serde::Serialize;
use std::collections::HashMap;

/// Floor below which the test refuses to run: ratio estimation needs
/// enough samples per outcome to make the e^epsilon bound meaningful.
pub const MIN_TRIALS: u64 = 100_000;

#[derive(Debug, Serialize)]
pub struct SmokeReport {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
    /// Number of distinct projected outcomes observed across both graphs.
    pub outcomes: usize,
    /// Max over outcomes of the (two-sided) empirical probability ratio.
    /// Zero counts get a 0.5 pseudo-count so one-sided outcomes register
    /// as large-but-finite ratios instead of being silently dropped.
    pub max_ratio: f64,
    /// The outcome attaining `max_ratio` (multiset of final levels).
    pub worst_outcome: Vec<usize>,
    /// e^epsilon with sampling-error slack.
    pub bound: f64,
    pub pass: bool,
}

/// The built-in edge-neighboring pair on 3 nodes.
fn neighboring_pair() -> (Graph, Graph) {
    let path = Graph::from_edges(3, &[(0, 1), (1, 2)]).expect("valid");
    let triangle = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).expect("valid");
    (path, triangle)
}

pub fn dp_smoke_test(
    algorithm: Algorithm,
    epsilon: f64,
    trials: u64,
    seed: u64,
    noiseless: bool,
) -> Result<SmokeReport, String> {
    if noiseless {
        return Err("noiseless runs are not private; the smoke test requires noise".into());
    }
    if trials < MIN_TRIALS {
        return Err(format!(
            "at least {MIN_TRIALS} trials are required for ratio estimation (got {trials})"
        ));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(format!("epsilon must be positive, got {epsilon}"));
    }
    let run = match algorithm {
        Algorithm::CoreLedp => ledp_core_decomposition,
        Algorithm::CoreLedpFast => ledp_core_decomposition_fast,
        _ => {
            return Err(
                "the smoke test supports core-ledp and core-ledp-fast only".into(),
            )
        }
    };

    let (g1, g2) = neighboring_pair();
    let params = LevelParams::new(3, 0.5, 0.25).expect("valid parameters");

    // Histogram of the projected outcome (sorted final levels) per graph.
    let mut hist: HashMap<Vec<usize>, [u64; 2]> = HashMap::new();
    for t in 0..trials {
        let cfg = LedpConfig::new(epsilon, seed.wrapping_add(t), NoiseMode::Noisy);
        for (side, g) in [&g1, &g2].into_iter().enumerate() {
            let res = run(g, &params, &cfg).expect("smoke run succeeds");
            let mut key = res.final_levels;
            key.sort_unstable();
            hist.entry(key).or_default()[side] += 1;
        }
    }

    let mut max_ratio = 0.0f64;
    let mut worst_outcome = Vec::new();
    for (key, &[a, b]) in &hist {
        // 0.5 pseudo-count keeps one-sided outcomes finite but penalized.
        let pa = (a as f64).max(0.5);
        let pb = (b as f64).max(0.5);
        let ratio = (pa / pb).max(pb / pa);
        if ratio > max_ratio {
            max_ratio = ratio;
            worst_outcome = key.clone();
        }
    }
    let bound = epsilon.exp() * 1.25;
    Ok(SmokeReport {
        algorithm,
        epsilon,
        trials,
        seed,
        outcomes: hist.len(),
        max_ratio,
        worst_outcome,
        bound,
        pass: max_ratio <= bound,
    })
}
