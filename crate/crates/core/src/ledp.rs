//! Simulated local-edge-DP protocols on the level data structure:
//! core decomposition + low out-degree ordering (Alg. 1/2), the
//! small-rounds variant (Alg. 3/4), the LEDP densest subgraph (Alg. 5),
//! and the degree-bound invariant checkers.
//!
//! The curator and the per-node local randomizers are simulated in one
//! process; the "bulletin board" is the [`Transcript`].

use crate::ledger::LedgerError;
use crate::levels::LevelParams;
use crate::noise::{NoiseMode, StreamLabel};
use crate::transcript::{Message, Round, Transcript};
use crate::{rational_from_f64, rational_upper_approx, BudgetLedger, Graph, NodeId, Rational};
use num::{BigInt, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LedpError {
    #[error("epsilon must be positive (got {0})")]
    BadEpsilon(f64),
    #[error("level parameters built for n = {params_n} used with graph of n = {graph_n}")]
    ParamsMismatch { params_n: usize, graph_n: usize },
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

/// Noise channels, one per logical randomizer family.
const CH_LEVEL_BIT: u8 = 0;
const CH_FAST_BIT: u8 = 1;
const CH_DENSEST_DEGREE: u8 = 2;

/// Run-time knobs shared by the LEDP protocols.
#[derive(Debug, Clone, Copy)]
pub struct LedpConfig {
    pub epsilon: f64,
    pub seed: u64,
    pub mode: NoiseMode,
    /// Use Alg. 2's literal divisor 4 ceil(log) instead of the semantic
    /// group size 2 ceil(log).
    pub strict_paper_estimate: bool,
    /// Record sampled noise magnitudes (debug only; breaks privacy).
    pub log_noise: bool,
    /// Keep the full per-round level history (for invariant tests).
    pub record_history: bool,
    /// Store message values in the transcript (debug-nonprivate replay).
    pub debug_values: bool,
}

impl LedpConfig {
    pub fn new(epsilon: f64, seed: u64, mode: NoiseMode) -> Self {
        LedpConfig {
            epsilon,
            seed,
            mode,
            strict_paper_estimate: false,
            log_noise: false,
            record_history: false,
            debug_values: true,
        }
    }
}

/// Approximate core numbers (2 + lambda)(1 + psi)^exponent, kept in both
/// exact rational and f64 form.
#[derive(Debug, Clone)]
pub struct CoreEstimates {
    pub exponents: Vec<usize>,
    pub exact: Vec<Rational>,
    pub values: Vec<f64>,
}

/// Output of Alg. 1 (and, minus the ordering, Alg. 3).
#[derive(Debug)]
pub struct CoreDecompResult {
    pub estimates: CoreEstimates,
    /// Low out-degree ordering: ascending final level, ties by node index.
    pub ordering: Vec<NodeId>,
    pub final_levels: Vec<usize>,
    pub transcript: Transcript,
    pub ledger: BudgetLedger,
    /// Largest |noise| drawn, when `log_noise` is set.
    pub max_noise_abs: Option<i64>,
    /// Per-round level arrays (including the initial all-zero array),
    /// when `record_history` is set.
    pub history: Option<Vec<Vec<usize>>>,
}

/// Output of Alg. 5.
#[derive(Debug)]
pub struct DsOutput {
    pub nodes: Vec<NodeId>,
    /// Reported noisy density W-hat/(2|S|) - c ln^3(n)/eps (exact rational;
    /// may be negative under noise).
    pub reported_density: Rational,
    pub transcript: Transcript,
    pub ledger: BudgetLedger,
    pub max_noise_abs: Option<i64>,
}

/// Per-call noise parameter eps/(8 ceil(log)^2) shared by Alg. 1/3/5.
fn per_call_b(epsilon: f64, params: &LevelParams) -> f64 {
    epsilon / (8.0 * (params.log_ceil * params.log_ceil) as f64)
}

fn per_call_eps_exact(epsilon: f64, params: &LevelParams) -> Rational {
    rational_from_f64(epsilon)
        / Rational::from_integer(BigInt::from(8 * params.log_ceil * params.log_ceil))
}

fn validate(g: &Graph, epsilon: f64, params: &LevelParams) -> Result<(), LedpError> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(LedpError::BadEpsilon(epsilon));
    }
    if params.n != g.n() {
        return Err(LedpError::ParamsMismatch {
            params_n: params.n,
            graph_n: g.n(),
        });
    }
    Ok(())
}

fn degenerate_core_result(g: &Graph, params: &LevelParams, epsilon: f64) -> CoreDecompResult {
    let estimates = estimate_core_numbers(&vec![0; g.n()], params, false);
    CoreDecompResult {
        estimates,
        ordering: (0..g.n()).collect(),
        final_levels: vec![0; g.n()],
        transcript: Transcript::new(),
        ledger: BudgetLedger::new(epsilon),
        max_noise_abs: None,
        history: None,
    }
}

/// Alg. 1: epsilon-LEDP core decomposition and ordering. Runs
/// total_levels - 1 one-bit rounds; at round r every node at level r
/// releases whether its noisy same-level neighbor count exceeds the group
/// threshold (1+psi)^{F(r)}, and the curator moves it up on a 1.
///
/// Degenerate n < 2 returns empty/zero outputs with no protocol rounds.
pub fn ledp_core_decomposition(
    g: &Graph,
    params: &LevelParams,
    config: &LedpConfig,
) -> Result<CoreDecompResult, LedpError> {
    validate(g, config.epsilon, params)?;
    if params.degenerate() {
        return Ok(degenerate_core_result(g, params, config.epsilon));
    }
    let n = g.n();
    let b = per_call_b(config.epsilon, params);
    let eps_per_call = per_call_eps_exact(config.epsilon, params);

    // Accounting of the privacy proof: each edge feeds two randomizers
    // per round at eps/(8 log^2 n) over the 4 log^2 n round bound; the
    // group factor 2 covers both endpoints. Total is exactly eps.
    let mut ledger = BudgetLedger::new(config.epsilon);
    ledger.charge(
        "alg1-level-bit",
        eps_per_call,
        params.total_levels as u64,
        2,
    )?;

    let mut levels = vec![0usize; n];
    let mut transcript = Transcript::new();
    let mut max_noise: i64 = 0;
    let mut history = config.record_history.then(|| vec![levels.clone()]);

    let move_min: Vec<i64> = (0..params.groups).map(|grp| params.move_min(grp)).collect();
    for r in 0..params.total_levels - 1 {
        let min = move_min[params.group_of(r)];
        let mut messages = Vec::new();
        let mut movers = Vec::new();
        for i in 0..n {
            if levels[i] != r {
                continue;
            }
            let u = g.neighbors(i).iter().filter(|&&j| levels[j] == r).count() as i64;
            let x = config
                .mode
                .draw(b, config.seed, StreamLabel::new(r as u32, i as u32, CH_LEVEL_BIT));
            if config.log_noise {
                max_noise = max_noise.max(x.abs());
            }
            let bit = (u + x >= min) as i64;
            if bit == 1 {
                movers.push(i);
            }
            messages.push(Message {
                node: i as u32,
                bits: 1,
                value: config.debug_values.then_some(bit),
            });
        }
        for i in movers {
            levels[i] += 1;
        }
        transcript.push_round(Round {
            round: r as u32,
            randomizer: "alg1-level-bit".into(),
            epsilon_per_call: b,
            messages,
        });
        if let Some(h) = history.as_mut() {
            h.push(levels.clone());
        }
    }

    let estimates = estimate_core_numbers(&levels, params, config.strict_paper_estimate);
    let ordering = level_ordering(&levels);
    Ok(CoreDecompResult {
        estimates,
        ordering,
        final_levels: levels,
        transcript,
        ledger,
        max_noise_abs: config.log_noise.then_some(max_noise),
        history,
    })
}

/// Alg. 2: per-node estimate (2+lambda)(1+psi)^exponent with exponent =
/// max(floor((L(i)+1)/divisor) - 1, 0). The semantic divisor is the group
/// size 2 ceil(log); `strict_paper` selects the literal 4 ceil(log).
pub fn estimate_core_numbers(
    final_levels: &[usize],
    params: &LevelParams,
    strict_paper: bool,
) -> CoreEstimates {
    let divisor = if strict_paper {
        4 * params.log_ceil
    } else {
        params.levels_per_group
    }
    .max(1);
    let exponents: Vec<usize> = final_levels
        .iter()
        .map(|&l| ((l + 1) / divisor).saturating_sub(1))
        .collect();
    let exact: Vec<Rational> = exponents
        .iter()
        .map(|&e| params.estimate_value(e))
        .collect();
    use num::ToPrimitive;
    let values = exact.iter().map(|r| r.to_f64().unwrap()).collect();
    CoreEstimates {
        exponents,
        exact,
        values,
    }
}

/// Ordering induced by final levels: ascending level, ties by node index.
pub fn level_ordering(final_levels: &[usize]) -> Vec<NodeId> {
    let mut order: Vec<NodeId> = (0..final_levels.len()).collect();
    order.sort_by_key(|&v| (final_levels[v], v));
    order
}

/// Shared engine for the small-rounds protocols (Alg. 3 and Alg. 5): all
/// `groups` level structures advance simultaneously through
/// levels_per_group - 1 rounds. `releases[g][r][i]` records the noisy
/// same-level count node i computed in group g at round r (None if i was
/// not at the current level).
struct FastRun {
    final_levels: Vec<Vec<usize>>, // [group][node]
    releases: Vec<Vec<Vec<Option<i64>>>>, // [group][round][node]
    max_noise: i64,
}

fn run_grouped_levels(
    g: &Graph,
    params: &LevelParams,
    config: &LedpConfig,
    channel: u8,
) -> FastRun {
    let n = g.n();
    let b = per_call_b(config.epsilon, params);
    let rounds = params.levels_per_group - 1;
    let mut levels: Vec<Vec<usize>> = vec![vec![0; n]; params.groups];
    let mut releases: Vec<Vec<Vec<Option<i64>>>> =
        vec![vec![vec![None; n]; rounds]; params.groups];
    let mut max_noise = 0i64;

    let move_min: Vec<i64> = (0..params.groups).map(|grp| params.move_min(grp)).collect();
    #[allow(clippy::needless_range_loop)] // parallel per-group/per-node arrays
    for r in 0..rounds {
        for grp in 0..params.groups {
            let min = move_min[grp];
            let lv = &levels[grp];
            let mut movers = Vec::new();
            for i in 0..n {
                if lv[i] != r {
                    continue;
                }
                let u = g.neighbors(i).iter().filter(|&&j| lv[j] == r).count() as i64;
                let x = config.mode.draw(
                    b,
                    config.seed,
                    StreamLabel::new(r as u32, i as u32, channel).with_aux(grp as u32),
                );
                if config.log_noise {
                    max_noise = max_noise.max(x.abs());
                }
                let noisy = u + x;
                releases[grp][r][i] = Some(noisy);
                if noisy >= min {
                    movers.push(i);
                }
            }
            let lv = &mut levels[grp];
            for i in movers {
                lv[i] += 1;
            }
        }
    }
    FastRun {
        final_levels: levels,
        releases,
        max_noise,
    }
}

/// Alg. 3: small-rounds epsilon-LEDP core decomposition. Round count is
/// levels_per_group - 1; each node releases a `groups`-bit vector per
/// round. Estimates come from Alg. 4.
pub fn ledp_core_decomposition_fast(
    g: &Graph,
    params: &LevelParams,
    config: &LedpConfig,
) -> Result<CoreDecompResult, LedpError> {
    validate(g, config.epsilon, params)?;
    if params.degenerate() {
        return Ok(degenerate_core_result(g, params, config.epsilon));
    }
    let n = g.n();
    let b = per_call_b(config.epsilon, params);

    let mut ledger = BudgetLedger::new(config.epsilon);
    // groups x levels_per_group calls per edge endpoint = 4 log^2 n, the
    // same worst-case bound as Alg. 1; totals exactly eps.
    ledger.charge(
        "alg3-bit-vector",
        per_call_eps_exact(config.epsilon, params),
        (params.groups * params.levels_per_group) as u64,
        2,
    )?;

    let run = run_grouped_levels(g, params, config, CH_FAST_BIT);

    // Rebuild the released bit-vectors A_i for the transcript: bit g is 1
    // iff node i moved up in group g at round r.
    let mut transcript = Transcript::new();
    let rounds = params.levels_per_group - 1;
    let move_min: Vec<i64> = (0..params.groups).map(|grp| params.move_min(grp)).collect();
    #[allow(clippy::needless_range_loop)] // parallel per-group/per-node arrays
    for r in 0..rounds {
        let mut messages = Vec::with_capacity(n);
        for i in 0..n {
            let mut vector: i64 = 0;
            #[allow(clippy::needless_range_loop)] // releases is indexed [group][round][node]
            for grp in 0..params.groups {
                if let Some(noisy) = run.releases[grp][r][i] {
                    let moved = noisy >= move_min[grp];
                    if moved && params.groups <= 63 {
                        vector |= 1 << grp;
                    }
                }
            }
            messages.push(Message {
                node: i as u32,
                bits: params.groups as u32,
                value: (config.debug_values && params.groups <= 63).then_some(vector),
            });
        }
        transcript.push_round(Round {
            round: r as u32,
            randomizer: "alg3-bit-vector".into(),
            epsilon_per_call: b,
            messages,
        });
    }

    // Alg. 4: exponent = largest group whose topmost level was reached.
    let top = params.levels_per_group - 1;
    let exponents: Vec<usize> = (0..n)
        .map(|i| {
            (0..params.groups)
                .rev()
                .find(|&grp| run.final_levels[grp][i] == top)
                .unwrap_or(0)
        })
        .collect();
    let exact: Vec<Rational> = exponents
        .iter()
        .map(|&e| params.estimate_value(e))
        .collect();
    use num::ToPrimitive;
    let values: Vec<f64> = exact.iter().map(|r| r.to_f64().unwrap()).collect();

    // The fast variant's per-node "final level" for reporting purposes is
    // its level in its highest successful group.
    let final_levels: Vec<usize> = (0..n)
        .map(|i| {
            let grp = (0..params.groups)
                .rev()
                .find(|&grp| run.final_levels[grp][i] == top)
                .unwrap_or(0);
            run.final_levels[grp][i]
        })
        .collect();
    let ordering = level_ordering(&final_levels);
    Ok(CoreDecompResult {
        estimates: CoreEstimates {
            exponents,
            exact,
            values,
        },
        ordering,
        final_levels,
        transcript,
        ledger,
        max_noise_abs: config.log_noise.then_some(run.max_noise),
        history: None,
    })
}

/// Alg. 5: epsilon-LEDP densest subgraph. Nodes release noisy same-level
/// degrees per group; the curator takes the largest group with a nonempty
/// top level and peels level suffixes Z_r, keeping the one maximizing the
/// noisy-degree-sum ratio. Returns (S, W-hat/(2|S|) - c ln^3(n)/eps).
///
/// `c` is the additive-correction constant ("sufficiently large c >= 1"
/// in the paper); pass `zero_additive` to drop the correction for
/// noiseless utility tests.
pub fn ledp_densest_subgraph(
    g: &Graph,
    params: &LevelParams,
    config: &LedpConfig,
    c: f64,
    zero_additive: bool,
) -> Result<DsOutput, LedpError> {
    validate(g, config.epsilon, params)?;
    if params.degenerate() {
        return Ok(DsOutput {
            nodes: (0..g.n()).collect(),
            reported_density: Rational::zero(),
            transcript: Transcript::new(),
            ledger: BudgetLedger::new(config.epsilon),
            max_noise_abs: None,
        });
    }
    let n = g.n();
    let b = per_call_b(config.epsilon, params);

    let mut ledger = BudgetLedger::new(config.epsilon);
    ledger.charge(
        "alg5-noisy-degree",
        per_call_eps_exact(config.epsilon, params),
        (params.groups * params.levels_per_group) as u64,
        2,
    )?;

    let run = run_grouped_levels(g, params, config, CH_DENSEST_DEGREE);

    let mut transcript = Transcript::new();
    let rounds = params.levels_per_group - 1;
    for r in 0..rounds {
        let mut messages = Vec::new();
        for i in 0..n {
            for grp in 0..params.groups {
                if let Some(noisy) = run.releases[grp][r][i] {
                    let bits = 65 - noisy.unsigned_abs().leading_zeros();
                    messages.push(Message {
                        node: i as u32,
                        bits,
                        value: config.debug_values.then_some(noisy),
                    });
                }
            }
        }
        transcript.push_round(Round {
            round: r as u32,
            randomizer: "alg5-noisy-degree".into(),
            epsilon_per_call: b,
            messages,
        });
    }

    // Largest group with a nonempty top level; fall back to group 0 (whose
    // round-0 suffix is the full node set) if none reached the top.
    let top = params.levels_per_group - 1;
    let grp = (0..params.groups)
        .rev()
        .find(|&grp| (0..n).any(|i| run.final_levels[grp][i] == top))
        .unwrap_or(0);

    // Peel level suffixes. Every node of Z_r = {i : final level >= r} was
    // at level r at round r, so its round-r release is its noisy degree
    // within Z_r; their sum is the noisy 2|E(Z_r)|.
    let mut best: Option<(Rational, Vec<NodeId>, i64)> = None;
    for r in 0..rounds {
        let members: Vec<NodeId> = (0..n).filter(|&i| run.final_levels[grp][i] >= r).collect();
        if members.is_empty() {
            break;
        }
        let w_hat: i64 = members
            .iter()
            .map(|&i| run.releases[grp][r][i].expect("member of Z_r released at round r"))
            .sum();
        let ratio = Rational::new(BigInt::from(w_hat), BigInt::from(members.len() as u64));
        if best.as_ref().is_none_or(|(b, _, _)| ratio > *b) {
            best = Some((ratio, members, w_hat));
        }
    }
    let (_, nodes, w_hat) = best.expect("round 0 suffix is nonempty for n >= 2");

    let correction = if zero_additive {
        Rational::zero()
    } else {
        rational_upper_approx(c * (n as f64).ln().powi(3)) / rational_from_f64(config.epsilon)
    };
    let reported_density =
        Rational::new(BigInt::from(w_hat), BigInt::from(2 * nodes.len() as u64)) - correction;

    Ok(DsOutput {
        nodes,
        reported_density,
        transcript,
        ledger,
        max_noise_abs: config.log_noise.then_some(run.max_noise),
    })
}

/// One invariant violation: `count` neighbors in the relevant suffix
/// against the allowed `bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub node: NodeId,
    pub count: usize,
    pub bound: f64,
}

/// Invariant 1 (Degree Upper Bound): a node at final level r < top has at
/// most (1+psi)^{F(r)} + slack neighbors at final level >= r.
pub fn check_invariant_degree_upper(
    g: &Graph,
    final_levels: &[usize],
    params: &LevelParams,
    slack: f64,
) -> Vec<Violation> {
    let mut violations = Vec::new();
    let slack_r = rational_from_f64(slack);
    for i in 0..g.n() {
        let r = final_levels[i];
        if r + 1 >= params.total_levels {
            continue;
        }
        let count = g
            .neighbors(i)
            .iter()
            .filter(|&&j| final_levels[j] >= r)
            .count();
        let bound = params.threshold(params.group_of(r)) + slack_r.clone();
        if Rational::from_integer(BigInt::from(count as u64)) > bound {
            use num::ToPrimitive;
            violations.push(Violation {
                node: i,
                count,
                bound: bound.to_f64().unwrap(),
            });
        }
    }
    violations
}

/// Invariant 2 (Degree Lower Bound): a node at final level r > 0 has at
/// least (1+psi)^{F(r-1)} - slack neighbors at final level >= r-1.
pub fn check_invariant_degree_lower(
    g: &Graph,
    final_levels: &[usize],
    params: &LevelParams,
    slack: f64,
) -> Vec<Violation> {
    let mut violations = Vec::new();
    let slack_r = rational_from_f64(slack);
    for i in 0..g.n() {
        let r = final_levels[i];
        if r == 0 {
            continue;
        }
        let count = g
            .neighbors(i)
            .iter()
            .filter(|&&j| final_levels[j] >= r - 1)
            .count();
        let bound = params.threshold(params.group_of(r - 1)) - slack_r.clone();
        if Rational::from_integer(BigInt::from(count as u64)) < bound {
            use num::ToPrimitive;
            violations.push(Violation {
                node: i,
                count,
                bound: bound.to_f64().unwrap(),
            });
        }
    }
    violations
}

/// Re-derives Alg. 1 outputs from a (debug-nonprivate) transcript alone:
/// estimates and ordering are post-processing of the released bits.
pub fn replay_core_decomposition(
    transcript: &Transcript,
    n: usize,
    params: &LevelParams,
    strict_paper: bool,
) -> (CoreEstimates, Vec<NodeId>) {
    let mut levels = vec![0usize; n];
    for (r, round) in transcript.rounds.iter().enumerate() {
        for msg in &round.messages {
            let i = msg.node as usize;
            if levels[i] == r && msg.value == Some(1) {
                levels[i] += 1;
            }
        }
    }
    let estimates = estimate_core_numbers(&levels, params, strict_paper);
    let ordering = level_ordering(&levels);
    (estimates, ordering)
}
