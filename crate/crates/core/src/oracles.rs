//! Exact, non-private oracles used as ground truth for utility tests:
//! min-degree peeling core numbers, degeneracy, brute-force densest
//! subgraph, and the Charikar peeling 2-approximation.

use crate::density::Density;
use crate::{Graph, NodeId};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("brute-force densest subgraph capped at n = {cap}; graph has n = {n} (use charikar_peel)")]
    TooLarge { n: usize, cap: usize },
    #[error("order is not a permutation of 0..n-1")]
    NotAPermutation,
}

/// Largest n for which the 2^n brute-force densest-subgraph oracle runs.
pub const BRUTE_FORCE_CAP: usize = 24;

/// Exact core numbers by iterative min-degree peeling (bucket queue).
/// `cores[v]` is the largest k such that v lies in a subgraph with minimum
/// induced degree >= k.
pub fn exact_core_numbers(g: &Graph) -> Vec<usize> {
    peel(g).1
}

/// Degeneracy ordering: the min-degree peeling removal order. Orienting
/// edges from earlier to later nodes in this order gives out-degrees of at
/// most the degeneracy.
pub fn degeneracy_ordering(g: &Graph) -> Vec<NodeId> {
    peel(g).0
}

/// Min-degree peeling: returns the removal order and the core numbers.
fn peel(g: &Graph) -> (Vec<NodeId>, Vec<usize>) {
    let n = g.n();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let max_deg = degree.iter().copied().max().unwrap_or(0);

    // Bucket sort nodes by degree.
    let mut bins: Vec<usize> = vec![0; max_deg + 2];
    for &d in &degree {
        bins[d + 1] += 1;
    }
    for i in 1..bins.len() {
        bins[i] += bins[i - 1];
    }
    let mut order: Vec<NodeId> = vec![0; n];
    let mut pos: Vec<usize> = vec![0; n];
    {
        let mut next = bins.clone();
        for v in 0..n {
            let p = next[degree[v]];
            order[p] = v;
            pos[v] = p;
            next[degree[v]] += 1;
        }
    }
    let mut bin_start = bins;

    let mut cores = degree.clone();
    let mut removed = vec![false; n];
    for i in 0..n {
        let v = order[i];
        removed[v] = true;
        cores[v] = degree[v];
        for &w in g.neighbors(v) {
            if removed[w] || degree[w] <= degree[v] {
                continue;
            }
            // Swap w down into the start of its degree bucket, then shrink.
            let dw = degree[w];
            let start = bin_start[dw];
            let u = order[start];
            if u != w {
                order.swap(pos[w], start);
                pos.swap(w, u);
            }
            bin_start[dw] += 1;
            degree[w] -= 1;
        }
    }
    // Core numbers are the running max of peel degrees along the order.
    let mut running = 0;
    for &v in &order {
        running = running.max(cores[v]);
        cores[v] = running;
    }
    (order, cores)
}

/// Degeneracy: the maximum core number (0 for the empty graph).
pub fn degeneracy(g: &Graph) -> usize {
    exact_core_numbers(g).into_iter().max().unwrap_or(0)
}

/// Brute-force densest subgraph over all nonempty subsets. Returns a
/// maximum-cardinality optimum. Capped at [`BRUTE_FORCE_CAP`] nodes.
pub fn exact_densest_subgraph(g: &Graph) -> Result<(Vec<NodeId>, Density), OracleError> {
    let n = g.n();
    if n > BRUTE_FORCE_CAP {
        return Err(OracleError::TooLarge {
            n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    if n == 0 {
        return Ok((Vec::new(), Density::zero()));
    }
    let edges = g.edges();
    let mut best_mask: u32 = 1;
    let mut best = Density::zero();
    for mask in 1u32..(1u32 << n) {
        let nodes = mask.count_ones() as u64;
        let mut internal = 0u64;
        for &(u, v) in &edges {
            if mask & (1 << u) != 0 && mask & (1 << v) != 0 {
                internal += 1;
            }
        }
        let d = Density::new(internal, nodes).unwrap();
        let better = d > best
            || (d == best && nodes > best_mask.count_ones() as u64);
        if better {
            best = d;
            best_mask = mask;
        }
    }
    let set: Vec<NodeId> = (0..n).filter(|&v| best_mask & (1 << v) != 0).collect();
    Ok((set, best))
}

/// Charikar peeling: repeatedly remove a minimum-degree node and keep the
/// best density seen among the remaining sets. 2-approximation of D*.
pub fn charikar_peel(g: &Graph) -> (Vec<NodeId>, Density) {
    let n = g.n();
    if n == 0 {
        return (Vec::new(), Density::zero());
    }
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut alive = vec![true; n];
    let mut edges_left = g.m() as u64;
    let mut removal_order: Vec<NodeId> = Vec::with_capacity(n);

    let mut best = Density::new(edges_left, n as u64).unwrap();
    let mut best_removed = 0usize;
    for step in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("alive node exists");
        alive[v] = false;
        removal_order.push(v);
        edges_left -= degree[v] as u64;
        for &w in g.neighbors(v) {
            if alive[w] {
                degree[w] -= 1;
            }
        }
        let remaining = n - step - 1;
        if remaining > 0 {
            let d = Density::new(edges_left, remaining as u64).unwrap();
            if d > best {
                best = d;
                best_removed = step + 1;
            }
        }
    }
    let removed: std::collections::HashSet<NodeId> =
        removal_order[..best_removed].iter().copied().collect();
    let set: Vec<NodeId> = (0..n).filter(|v| !removed.contains(v)).collect();
    (set, best)
}

/// Maximum out-degree when edges are oriented from earlier to later nodes
/// in `order` (Def. of a low out-degree ordering).
pub fn orientation_outdegree(g: &Graph, order: &[NodeId]) -> Result<usize, OracleError> {
    let n = g.n();
    if order.len() != n {
        return Err(OracleError::NotAPermutation);
    }
    let mut rank = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n || rank[v] != usize::MAX {
            return Err(OracleError::NotAPermutation);
        }
        rank[v] = i;
    }
    let mut max_out = 0;
    for v in 0..n {
        let out = g
            .neighbors(v)
            .iter()
            .filter(|&&w| rank[w] > rank[v])
            .count();
        max_out = max_out.max(out);
    }
    Ok(max_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::induced_density;
    use crate::graph::{erdos_renyi, load_edge_list};

    fn graph(text: &str) -> Graph {
        load_edge_list(text).unwrap().graph
    }

    /// Independent brute-force core-number oracle: k(v) = largest k such
    /// that v survives iterative pruning of nodes with degree < k.
    fn core_numbers_by_pruning(g: &Graph) -> Vec<usize> {
        let n = g.n();
        let mut cores = vec![0usize; n];
        for k in 1..=n {
            let mut alive = vec![true; n];
            loop {
                let mut changed = false;
                for v in 0..n {
                    if alive[v] {
                        let d = g.neighbors(v).iter().filter(|&&w| alive[w]).count();
                        if d < k {
                            alive[v] = false;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            for v in 0..n {
                if alive[v] {
                    cores[v] = k;
                }
            }
        }
        cores
    }

    #[test]
    fn triangle_cores() {
        assert_eq!(exact_core_numbers(&graph("0 1\n1 2\n0 2")), vec![2, 2, 2]);
    }

    #[test]
    fn path_cores() {
        assert_eq!(exact_core_numbers(&graph("0 1\n1 2")), vec![1, 1, 1]);
    }

    #[test]
    fn k5_cores() {
        let g = crate::graph::erdos_renyi(5, 1.1, 0); // p > 1 gives K5
        assert_eq!(exact_core_numbers(&g), vec![4; 5]);
        assert_eq!(degeneracy(&g), 4);
    }

    #[test]
    fn star_degeneracy_one() {
        let g = graph("0 1\n0 2\n0 3\n0 4\n0 5");
        assert_eq!(degeneracy(&g), 1);
    }

    #[test]
    fn empty_graph_degeneracy_zero() {
        assert_eq!(degeneracy(&Graph::edgeless(0)), 0);
    }

    #[test]
    fn peeling_matches_pruning_oracle_on_random_graphs() {
        for seed in 0..20 {
            let g = erdos_renyi(18, 0.25, seed);
            assert_eq!(
                exact_core_numbers(&g),
                core_numbers_by_pruning(&g),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn densest_k4_pendant() {
        let g = graph("0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n3 4");
        let (set, d) = exact_densest_subgraph(&g).unwrap();
        assert_eq!(set, vec![0, 1, 2, 3]);
        assert_eq!(d, Density::new(3, 2).unwrap());
    }

    #[test]
    fn densest_triangle_whole() {
        let (set, d) = exact_densest_subgraph(&graph("0 1\n1 2\n0 2")).unwrap();
        assert_eq!(set, vec![0, 1, 2]);
        assert_eq!(d, Density::new(1, 1).unwrap());
    }

    #[test]
    fn densest_single_edge() {
        let (set, d) = exact_densest_subgraph(&graph("0 1")).unwrap();
        assert_eq!(set, vec![0, 1]);
        assert_eq!(d, Density::new(1, 2).unwrap());
    }

    #[test]
    fn densest_cap_errors() {
        let g = Graph::edgeless(25);
        assert!(matches!(
            exact_densest_subgraph(&g),
            Err(OracleError::TooLarge { .. })
        ));
    }

    #[test]
    fn densest_beats_random_subsets() {
        use rand::{Rng, SeedableRng};
        let g = erdos_renyi(14, 0.3, 3);
        let (_, best) = exact_densest_subgraph(&g).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let s: Vec<NodeId> = (0..g.n()).filter(|_| rng.gen::<bool>()).collect();
            if !s.is_empty() {
                assert!(best >= induced_density(&g, &s).unwrap());
            }
        }
    }

    #[test]
    fn charikar_triangle_and_k4() {
        let (_, d) = charikar_peel(&graph("0 1\n1 2\n0 2"));
        assert_eq!(d, Density::new(1, 1).unwrap());
        let (_, d) = charikar_peel(&graph("0 1\n0 2\n0 3\n1 2\n1 3\n2 3"));
        assert_eq!(d, Density::new(3, 2).unwrap());
        let (_, d) = charikar_peel(&Graph::edgeless(4));
        assert_eq!(d, Density::zero());
    }

    #[test]
    fn charikar_is_two_approx_small() {
        for seed in 0..30 {
            let g = erdos_renyi(12, 0.3, 100 + seed);
            let (_, opt) = exact_densest_subgraph(&g).unwrap();
            let (_, got) = charikar_peel(&g);
            // got >= opt/2, exactly: 2*got >= opt.
            let doubled = Density::new(2 * got.numerator(), got.denominator()).unwrap();
            assert!(doubled >= opt, "seed {seed}");
        }
    }

    #[test]
    fn orientation_examples() {
        let tri = graph("0 1\n1 2\n0 2");
        assert_eq!(orientation_outdegree(&tri, &[0, 1, 2]).unwrap(), 2);
        let path = graph("0 1\n1 2");
        assert_eq!(orientation_outdegree(&path, &[0, 1, 2]).unwrap(), 1);
        assert_eq!(
            orientation_outdegree(&Graph::edgeless(3), &[2, 0, 1]).unwrap(),
            0
        );
        assert!(orientation_outdegree(&tri, &[0, 0, 1]).is_err());
        assert!(orientation_outdegree(&tri, &[0, 1]).is_err());
    }

    #[test]
    fn degeneracy_ordering_bounds_outdegree() {
        for seed in 0..5 {
            let g = erdos_renyi(200, 0.04, 40 + seed);
            let order = degeneracy_ordering(&g);
            let d = degeneracy(&g);
            assert!(orientation_outdegree(&g, &order).unwrap() <= d);
        }
    }

    #[test]
    fn core_sensitivity_one_per_edge_insertion() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for seed in 0..20 {
            let g = erdos_renyi(30, 0.1, 200 + seed);
            let before = exact_core_numbers(&g);
            // Pick a random absent edge.
            let (u, v) = loop {
                let u = rng.gen_range(0..g.n());
                let v = rng.gen_range(0..g.n());
                if u != v && !g.has_edge(u, v) {
                    break (u.min(v), u.max(v));
                }
            };
            let after = exact_core_numbers(&g.with_edge(u, v).unwrap());
            for w in 0..g.n() {
                let delta = after[w] as i64 - before[w] as i64;
                assert!((0..=1).contains(&delta), "node {w}: {delta}");
            }
        }
    }
}
