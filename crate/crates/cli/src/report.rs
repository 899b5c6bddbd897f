//! RunConfig/RunReport plumbing: execute one configured algorithm on a
//! loaded graph, attach oracle comparisons where the graph is small enough,
//! and recompute every reported error from the raw outputs.

use clap::ValueEnum;
use num::ToPrimitive;
use privgraph::density::induced_density;
use privgraph::graph::load_edge_list;
use privgraph::ledp::{
    ledp_core_decomposition, ledp_core_decomposition_fast, ledp_densest_subgraph,
    CoreDecompResult, LedpConfig,
};
use privgraph::mwu::{dp_densest, MwuConsts};
use privgraph::oracles::{
    degeneracy, exact_core_numbers, exact_densest_subgraph, orientation_outdegree,
    BRUTE_FORCE_CAP,
};
use privgraph::{Graph, LevelParams, NoiseMode, Rational};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Level-by-level LEDP core decomposition and ordering.
    CoreLedp,
    /// Small-rounds LEDP core decomposition (all groups in parallel).
    CoreLedpFast,
    /// LEDP densest subgraph via level-suffix peeling.
    DensestLedp,
    /// Central-model DP densest subgraph via multiplicative-weights loads.
    DensestDp,
    /// Low out-degree ordering and its realized max out-degree.
    Orient,
    /// Exact non-private oracles only.
    Oracle,
}

/// Echoed verbatim into the report; field names match the CLI flags.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub eta: f64,
    pub psi: f64,
    pub lambda: f64,
    pub seed: u64,
    pub noiseless: bool,
    pub strict_paper_estimate: bool,
    /// MWU constants (c0, c1, c2, c).
    pub consts: [f64; 4],
    pub input: String,
}

impl RunConfig {
    /// Parameter-range validation; runs before any graph is read.
    /// Violations are usage errors (exit code 2).
    pub fn validate(&self) -> Result<(), String> {
        if !(self.psi > 0.0 && self.psi < 1.0) {
            return Err(format!("--psi must lie in (0, 1), got {}", self.psi));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(format!("--epsilon must be positive, got {}", self.epsilon));
        }
        if self.algorithm == Algorithm::DensestDp {
            if !(self.eta > 0.0 && self.eta < 1.0 / 12.0) {
                return Err(format!(
                    "--eta must lie in (0, 1/12) for densest-dp, got {}",
                    self.eta
                ));
            }
            if self.epsilon > 1.0 {
                return Err(format!(
                    "--epsilon must be at most 1 for densest-dp, got {}",
                    self.epsilon
                ));
            }
        }
        if self.consts.iter().any(|&c| c.is_nan() || c <= 0.0) {
            return Err(format!("--c0/--c1/--c2/--c must be positive, got {:?}", self.consts));
        }
        Ok(())
    }
}

/// Raw algorithm outputs; unused fields are omitted from the JSON.
#[derive(Debug, Default, Serialize)]
pub struct Outputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_levels: Option<Vec<usize>>,
    /// Approximate core numbers, one per node.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimates: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ordering: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subgraph: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_outdegree: Option<usize>,
}

#[derive(Debug, Default, Serialize)]
pub struct OracleReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core_numbers: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degeneracy: Option<usize>,
    /// Exact D* as "edges/nodes", when n is within the brute-force cap.
    pub densest_density: Option<String>,
    pub densest_nodes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity_warning: Option<String>,
}

/// Errors recomputed from raw outputs against the exact oracles.
#[derive(Debug, Default, Serialize)]
pub struct ErrorReport {
    /// max over nodes with k(i) > 0 of estimate(i) / k(i).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_multiplicative: Option<f64>,
    /// max over all nodes of |estimate(i) - k(i)|.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_additive: Option<f64>,
}

#[derive(Debug, Default, Serialize)]
pub struct DensityReport {
    /// Exact induced density of the returned subgraph, as "edges/nodes".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub achieved: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub achieved_value: Option<f64>,
    /// Exact optimum D*, when within the brute-force cap.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal: Option<String>,
    /// The algorithm's own (noisy, corrected) density report.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reported: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub n: usize,
    pub m: usize,
    /// Original file ids of the dense internal node indices.
    pub node_ids: Vec<u64>,
    pub outputs: Outputs,
    pub oracle: OracleReport,
    pub errors: ErrorReport,
    pub density: DensityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_message_bits: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ledger: Option<serde_json::Value>,
    pub wall_ms: f64,
}

fn rational_str(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn mode(config: &RunConfig) -> NoiseMode {
    if config.noiseless {
        NoiseMode::Noiseless
    } else {
        NoiseMode::Noisy
    }
}

fn ledp_config(config: &RunConfig) -> LedpConfig {
    let mut c = LedpConfig::new(config.epsilon, config.seed, mode(config));
    c.strict_paper_estimate = config.strict_paper_estimate;
    c.debug_values = false;
    c
}

/// Core-number error fields, recomputed from raw estimates vs the exact
/// oracle (never carried through from the algorithm).
fn core_errors(estimates_exact: &[Rational], cores: &[usize]) -> ErrorReport {
    let mut max_mult: Option<f64> = None;
    let mut max_add: f64 = 0.0;
    for (est, &k) in estimates_exact.iter().zip(cores) {
        let est = est.to_f64().unwrap_or(f64::NAN);
        max_add = max_add.max((est - k as f64).abs());
        if k > 0 {
            let ratio = est / k as f64;
            max_mult = Some(max_mult.map_or(ratio, |m: f64| m.max(ratio)));
        }
    }
    ErrorReport {
        max_multiplicative: max_mult,
        max_additive: Some(max_add),
    }
}

fn densest_oracle(g: &Graph, oracle: &mut OracleReport, density: &mut DensityReport) {
    match exact_densest_subgraph(g) {
        Ok((nodes, d)) => {
            density.optimal = Some(rational_str(&d.value()));
            oracle.densest_density = Some(rational_str(&d.value()));
            oracle.densest_nodes = Some(nodes);
        }
        Err(e) => oracle.capacity_warning = Some(e.to_string()),
    }
}

fn core_report(
    g: &Graph,
    res: &CoreDecompResult,
    with_ordering: bool,
) -> (Outputs, OracleReport, ErrorReport) {
    let cores = exact_core_numbers(g);
    let errors = core_errors(&res.estimates.exact, &cores);
    let outputs = Outputs {
        final_levels: Some(res.final_levels.clone()),
        estimates: Some(res.estimates.values.clone()),
        ordering: with_ordering.then(|| res.ordering.clone()),
        ..Outputs::default()
    };
    let oracle = OracleReport {
        core_numbers: Some(cores),
        degeneracy: Some(degeneracy(g)),
        ..OracleReport::default()
    };
    (outputs, oracle, errors)
}

/// Executes the configured algorithm and assembles the report.
/// `validate()` must have been called first.
pub fn run(config: &RunConfig) -> anyhow::Result<RunReport> {
    use anyhow::Context;
    let start = std::time::Instant::now();
    let text = std::fs::read_to_string(&config.input)
        .with_context(|| format!("cannot read {}", config.input))?;
    let loaded = load_edge_list(&text).map_err(anyhow::Error::from)?;
    let g = loaded.graph;
    let params = LevelParams::with_eta(g.n(), config.psi, config.lambda, config.eta)
        .map_err(anyhow::Error::from)?;

    let mut outputs = Outputs::default();
    let mut oracle = OracleReport::default();
    let mut errors = ErrorReport::default();
    let mut density = DensityReport::default();
    let mut rounds = None;
    let mut max_message_bits = None;
    let mut ledger = None;

    match config.algorithm {
        Algorithm::CoreLedp | Algorithm::CoreLedpFast => {
            let cfg = ledp_config(config);
            let res = if config.algorithm == Algorithm::CoreLedp {
                ledp_core_decomposition(&g, &params, &cfg)
            } else {
                ledp_core_decomposition_fast(&g, &params, &cfg)
            }
            .map_err(anyhow::Error::from)?;
            let with_ordering = config.algorithm == Algorithm::CoreLedp;
            (outputs, oracle, errors) = core_report(&g, &res, with_ordering);
            rounds = Some(res.transcript.round_count());
            max_message_bits = Some(res.transcript.max_message_bits());
            ledger = serde_json::to_value(&res.ledger).ok();
        }
        Algorithm::DensestLedp => {
            let cfg = ledp_config(config);
            let res = ledp_densest_subgraph(&g, &params, &cfg, config.consts[3], config.noiseless)
                .map_err(anyhow::Error::from)?;
            if !res.nodes.is_empty() {
                let d = induced_density(&g, &res.nodes).map_err(anyhow::Error::from)?;
                density.achieved = Some(rational_str(&d.value()));
                density.achieved_value = d.value().to_f64();
            }
            density.reported = res.reported_density.to_f64();
            densest_oracle(&g, &mut oracle, &mut density);
            outputs.subgraph = Some(res.nodes);
            rounds = Some(res.transcript.round_count());
            max_message_bits = Some(res.transcript.max_message_bits());
            ledger = serde_json::to_value(&res.ledger).ok();
        }
        Algorithm::DensestDp => {
            let consts = MwuConsts {
                c0: config.consts[0],
                c1: config.consts[1],
                c2: config.consts[2],
                c: config.consts[3],
                zero_additive: config.noiseless,
            };
            let (nodes, dp_ledger) = dp_densest(
                &g,
                config.eta,
                config.epsilon,
                consts,
                mode(config),
                config.seed,
            )
            .map_err(anyhow::Error::from)?;
            if !nodes.is_empty() {
                let d = induced_density(&g, &nodes).map_err(anyhow::Error::from)?;
                density.achieved = Some(rational_str(&d.value()));
                density.achieved_value = d.value().to_f64();
            }
            densest_oracle(&g, &mut oracle, &mut density);
            outputs.subgraph = Some(nodes);
            ledger = serde_json::to_value(&dp_ledger).ok();
        }
        Algorithm::Orient => {
            let cfg = ledp_config(config);
            let res =
                ledp_core_decomposition(&g, &params, &cfg).map_err(anyhow::Error::from)?;
            let outdeg =
                orientation_outdegree(&g, &res.ordering).map_err(anyhow::Error::from)?;
            outputs.ordering = Some(res.ordering.clone());
            outputs.max_outdegree = Some(outdeg);
            oracle.degeneracy = Some(degeneracy(&g));
            rounds = Some(res.transcript.round_count());
            max_message_bits = Some(res.transcript.max_message_bits());
            ledger = serde_json::to_value(&res.ledger).ok();
        }
        Algorithm::Oracle => {
            oracle.core_numbers = Some(exact_core_numbers(&g));
            oracle.degeneracy = Some(degeneracy(&g));
            densest_oracle(&g, &mut oracle, &mut density);
            if g.n() > BRUTE_FORCE_CAP && oracle.capacity_warning.is_none() {
                oracle.capacity_warning =
                    Some(format!("densest oracle capped at n = {BRUTE_FORCE_CAP}"));
            }
        }
    }

    Ok(RunReport {
        config: config.clone(),
        n: g.n(),
        m: g.m(),
        node_ids: loaded.original_ids,
        outputs,
        oracle,
        errors,
        density,
        rounds,
        max_message_bits,
        ledger,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
