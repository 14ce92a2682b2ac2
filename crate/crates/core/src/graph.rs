//! Unbounded interactions graph, its islands, and island-restricted chains.
//!
//! Edge `(i, j)` of the graph stands for a divergent cumulative weight
//! `sum_n a_ij(n)`. Divergence of an infinite series is undecidable from
//! finite data, so edges are flagged by an explicit two-threshold heuristic
//! (absolute truncated mass, plus tail mass over the second half of the
//! window) unless the chain carries analytically-known declarations, which
//! take precedence. Islands are the strongly connected components of the
//! flagged digraph; for balanced asymmetric chains every weakly connected
//! component must be strongly connected, which the audit checks.

use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::error::Result;
use crate::flow::{aif_profile, FlowParams, FlowProfile, FlowVariant, FlowVerdict};
use crate::matrix::StochasticMatrix;

/// Two-threshold divergence heuristic: an edge is flagged unbounded when its
/// truncated mass reaches `tau_abs` and the second half of the window still
/// contributes at least `tau_tail`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRule {
    pub tau_abs: f64,
    pub tau_tail: f64,
}

impl Default for DivergenceRule {
    fn default() -> Self {
        Self { tau_abs: 1.0, tau_tail: 1.0 }
    }
}

/// How the unbounded flags of a graph were decided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum FlagSource {
    Numeric { rule: DivergenceRule },
    Declared,
    Manual,
}

/// Directed graph over agents with truncated interaction weights and
/// unbounded-edge flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionGraph {
    pub order: usize,
    pub start: usize,
    pub horizon: usize,
    /// Truncated weights `W_ij = sum_{n in [start, horizon)} a_ij(n)`,
    /// row-major.
    pub weights: Vec<f64>,
    /// Second-half contribution `W_ij(N) - W_ij(mid)`, row-major.
    pub tail_weights: Vec<f64>,
    /// Unbounded flags, row-major.
    pub flagged: Vec<bool>,
    pub flag_source: FlagSource,
}

impl InteractionGraph {
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.order + j]
    }

    pub fn is_flagged(&self, i: usize, j: usize) -> bool {
        self.flagged[i * self.order + j]
    }

    /// Graph from explicit flags, for hand-built cases; weights default to
    /// 1 on flagged edges.
    pub fn from_edges(order: usize, edges: &[(usize, usize)]) -> Self {
        let mut weights = vec![0.0; order * order];
        let mut flagged = vec![false; order * order];
        for &(i, j) in edges {
            weights[i * order + j] = 1.0;
            flagged[i * order + j] = true;
        }
        Self {
            order,
            start: 0,
            horizon: 0,
            tail_weights: weights.clone(),
            weights,
            flagged,
            flag_source: FlagSource::Manual,
        }
    }
}

/// Accumulates truncated interaction weights over `[start, n_end)` and flags
/// unbounded edges, either by the chain's analytic declarations or by the
/// numeric rule.
pub fn unbounded_graph(chain: &Chain, n_end: usize, rule: DivergenceRule) -> Result<InteractionGraph> {
    let s = chain.order();
    let start = chain.start();
    chain.check_range(start, n_end)?;
    let mid = start + (n_end - start) / 2;
    let mut weights = vec![0.0; s * s];
    let mut half = vec![0.0; s * s];
    for n in start..n_end {
        let a = chain.matrix_at(n)?;
        for i in 0..s {
            for j in 0..s {
                weights[i * s + j] += a.get(i, j);
            }
        }
        if n + 1 == mid {
            half.copy_from_slice(&weights);
        }
    }
    let tail_weights: Vec<f64> = weights.iter().zip(&half).map(|(w, h)| w - h).collect();
    let (flagged, flag_source) = match chain.declared_unbounded() {
        Some(edges) => {
            let mut flags = vec![false; s * s];
            for &(i, j) in edges {
                flags[i * s + j] = true;
            }
            (flags, FlagSource::Declared)
        }
        None => {
            let flags = weights
                .iter()
                .zip(&tail_weights)
                .map(|(&w, &t)| w >= rule.tau_abs && t >= rule.tau_tail)
                .collect();
            (flags, FlagSource::Numeric { rule })
        }
    };
    Ok(InteractionGraph { order: s, start, horizon: n_end, weights, tail_weights, flagged, flag_source })
}

/// Strongly connected components of the flagged digraph (the islands),
/// together with the weakly connected components and a per-component audit:
/// under balanced asymmetry every weak component must be strongly connected.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IslandPartition {
    /// Islands sorted by smallest member, members ascending.
    pub islands: Vec<Vec<usize>>,
    pub weak_components: Vec<Vec<usize>>,
    /// For each weak component, whether it coincides with one island.
    pub weak_strongly_connected: Vec<bool>,
}

impl IslandPartition {
    /// Single-island partition covering `0..order`, for restricting nothing.
    pub fn single(order: usize) -> Self {
        Self {
            islands: vec![(0..order).collect()],
            weak_components: vec![(0..order).collect()],
            weak_strongly_connected: vec![true],
        }
    }

    pub fn audit_passes(&self) -> bool {
        self.weak_strongly_connected.iter().all(|&b| b)
    }
}

/// Tarjan SCC over the flagged edges; self-loops are irrelevant to the
/// component structure.
pub fn islands(graph: &InteractionGraph) -> IslandPartition {
    let s = graph.order;
    let adjacency: Vec<Vec<usize>> = (0..s)
        .map(|i| (0..s).filter(|&j| j != i && graph.is_flagged(i, j)).collect())
        .collect();

    struct Tarjan<'a> {
        adjacency: &'a [Vec<usize>],
        index: usize,
        stack: Vec<usize>,
        on_stack: Vec<bool>,
        idx: Vec<Option<usize>>,
        low: Vec<usize>,
        comps: Vec<Vec<usize>>,
    }
    fn strongconnect(v: usize, st: &mut Tarjan<'_>) {
        st.idx[v] = Some(st.index);
        st.low[v] = st.index;
        st.index += 1;
        st.stack.push(v);
        st.on_stack[v] = true;
        for &w in &st.adjacency[v] {
            if st.idx[w].is_none() {
                strongconnect(w, st);
                st.low[v] = st.low[v].min(st.low[w]);
            } else if st.on_stack[w] {
                st.low[v] = st.low[v].min(st.idx[w].expect("visited"));
            }
        }
        if st.low[v] == st.idx[v].expect("set above") {
            let mut comp = Vec::new();
            loop {
                let w = st.stack.pop().expect("stack underflow");
                st.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            st.comps.push(comp);
        }
    }
    let mut st = Tarjan {
        adjacency: &adjacency,
        index: 0,
        stack: Vec::new(),
        on_stack: vec![false; s],
        idx: vec![None; s],
        low: vec![0; s],
        comps: Vec::new(),
    };
    for v in 0..s {
        if st.idx[v].is_none() {
            strongconnect(v, &mut st);
        }
    }
    let mut islands = st.comps;
    islands.sort_by_key(|c| c[0]);

    // Weak components: union-find ignoring direction.
    let mut parent: Vec<usize> = (0..s).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..s {
        for &j in &adjacency[i] {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut weak: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; s];
    for i in 0..s {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(idx) => weak[idx].push(i),
            None => {
                root_of[r] = Some(weak.len());
                weak.push(vec![i]);
            }
        }
    }
    let weak_strongly_connected = weak
        .iter()
        .map(|w| islands.iter().any(|island| island == w))
        .collect();
    IslandPartition { islands, weak_components: weak, weak_strongly_connected }
}

/// Zeroes cross-island entries, moving the removed row mass onto the
/// diagonal so every step stays stochastic. By the island definition the
/// removed mass has finite cumulative sum, so the result is an
/// l1-approximation of the input chain.
pub fn island_restricted_chain(chain: &Chain, partition: &IslandPartition) -> Chain {
    let s = chain.order();
    let mut island_of = vec![0usize; s];
    for (idx, island) in partition.islands.iter().enumerate() {
        for &i in island {
            island_of[i] = idx;
        }
    }
    let inner = chain.clone();
    let island_of_for_edges = island_of.clone();
    let restricted = Chain::from_fn(s, chain.start(), chain.end(), move |n| {
        let a = inner.matrix_at(n)?;
        let mut entries = Vec::with_capacity(s * s);
        for i in 0..s {
            let row = a.row(i);
            let mut removed = 0.0;
            let mut new_row = vec![0.0; s];
            for j in 0..s {
                if island_of[i] == island_of[j] {
                    new_row[j] = row[j];
                } else {
                    removed += row[j];
                }
            }
            new_row[i] += removed;
            entries.extend(new_row);
        }
        Ok(StochasticMatrix::trusted(s, entries))
    });
    match chain.declared_unbounded() {
        Some(edges) => {
            let kept: Vec<(usize, usize)> = edges
                .iter()
                .copied()
                .filter(|&(i, j)| island_of_for_edges[i] == island_of_for_edges[j])
                .collect();
            restricted.with_declared_unbounded(kept)
        }
        None => restricted,
    }
}

/// Principal submatrix chain over `members`; rows must already be stochastic
/// on the block, which island restriction guarantees.
pub fn island_subchain(chain: &Chain, members: &[usize]) -> Chain {
    let inner = chain.clone();
    let members: Vec<usize> = members.to_vec();
    let k = members.len();
    Chain::from_fn(k, chain.start(), chain.end(), move |n| {
        let a = inner.matrix_at(n)?;
        let mut entries = Vec::with_capacity(k * k);
        for &i in &members {
            for &j in &members {
                entries.push(a.get(i, j));
            }
        }
        Ok(StochasticMatrix::trusted(k, entries))
    })
}

/// Flow verdict for one island.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IslandFlow {
    pub members: Vec<usize>,
    pub verdict: FlowVerdict,
    /// Full profile for islands of size at least 2.
    pub profile: Option<FlowProfile>,
}

/// Runs the flow profile on each island of the restricted chain. Islands of
/// size 1 satisfy the property vacuously.
pub fn per_island_aif(
    chain: &Chain,
    partition: &IslandPartition,
    n_end: usize,
    variant: FlowVariant,
    params: &FlowParams,
) -> Result<Vec<IslandFlow>> {
    let restricted = island_restricted_chain(chain, partition);
    partition
        .islands
        .iter()
        .map(|members| {
            if members.len() == 1 {
                return Ok(IslandFlow {
                    members: members.clone(),
                    verdict: FlowVerdict::TriviallySatisfied,
                    profile: None,
                });
            }
            let sub = island_subchain(&restricted, members);
            let profile = aif_profile(&sub, n_end, variant, params)?;
            Ok(IslandFlow {
                members: members.clone(),
                verdict: profile.verdict.clone(),
                profile: Some(profile),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::l1_distance;

    fn constant(rows: &[Vec<f64>]) -> Chain {
        Chain::constant(StochasticMatrix::validate(rows, 1e-12).unwrap())
    }

    #[test]
    fn constant_positive_chain_flags_complete_graph() {
        let chain = constant(&[
            vec![0.4, 0.3, 0.3],
            vec![0.3, 0.4, 0.3],
            vec![0.3, 0.3, 0.4],
        ]);
        let g = unbounded_graph(&chain, 100, DivergenceRule::default()).unwrap();
        assert!(g.flagged.iter().all(|&f| f));
        let p = islands(&g);
        assert_eq!(p.islands, vec![vec![0, 1, 2]]);
        assert!(p.audit_passes());
    }

    #[test]
    fn geometric_edge_is_not_flagged() {
        // a_12(n) = 2^-n converges; the tail rule keeps the edge out even
        // though the absolute mass passes 1.
        let chain = Chain::from_fn(2, 0, None, |n| {
            let d = 0.5_f64.powi(n as i32);
            StochasticMatrix::validate(&[vec![1.0 - d, d], vec![0.0, 1.0]], 1e-12)
        });
        let g = unbounded_graph(&chain, 100, DivergenceRule::default()).unwrap();
        assert!(!g.is_flagged(0, 1));
        assert!(g.weight(0, 1) <= 2.0);
        assert!(g.tail_weights[1] < 1.0);
        assert!(g.is_flagged(0, 0));
        assert!(g.is_flagged(1, 1));
    }

    #[test]
    fn block_diagonal_chain_keeps_edges_inside_blocks() {
        let chain = constant(&[
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.5],
            vec![0.0, 0.0, 0.5, 0.5],
        ]);
        let g = unbounded_graph(&chain, 50, DivergenceRule::default()).unwrap();
        let p = islands(&g);
        assert_eq!(p.islands, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(p.weak_components.len(), 2);
        assert!(p.audit_passes());
    }

    #[test]
    fn single_directed_edge_fails_the_audit() {
        let g = InteractionGraph::from_edges(2, &[(0, 1)]);
        let p = islands(&g);
        assert_eq!(p.islands, vec![vec![0], vec![1]]);
        assert_eq!(p.weak_components, vec![vec![0, 1]]);
        assert_eq!(p.weak_strongly_connected, vec![false]);
        assert!(!p.audit_passes());
    }

    #[test]
    fn two_disjoint_bidirectional_pairs_are_two_islands() {
        let g = InteractionGraph::from_edges(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]);
        let p = islands(&g);
        assert_eq!(p.islands, vec![vec![0, 1], vec![2, 3]]);
        assert!(p.audit_passes());
    }

    #[test]
    fn declared_edges_override_numeric_rule() {
        let chain = constant(&[vec![1.0, 0.0], vec![0.0, 1.0]])
            .with_declared_unbounded(vec![(0, 1), (1, 0)]);
        let g = unbounded_graph(&chain, 10, DivergenceRule::default()).unwrap();
        assert!(g.is_flagged(0, 1) && g.is_flagged(1, 0));
        assert!(!g.is_flagged(0, 0));
        assert_eq!(g.flag_source, FlagSource::Declared);
    }

    #[test]
    fn restriction_leaves_block_diagonal_chains_unchanged() {
        let chain = constant(&[
            vec![0.5, 0.5, 0.0],
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        let partition = IslandPartition {
            islands: vec![vec![0, 1], vec![2]],
            weak_components: vec![vec![0, 1], vec![2]],
            weak_strongly_connected: vec![true, true],
        };
        let restricted = island_restricted_chain(&chain, &partition);
        let d = l1_distance(&chain, &restricted, 20).unwrap();
        assert_eq!(d.total(), 0.0);
    }

    #[test]
    fn restriction_of_geometric_cross_mass_is_l1_close() {
        let s = 2;
        let chain = Chain::from_fn(2, 0, None, |n| {
            let d = 0.5_f64.powi(n as i32).min(0.5);
            StochasticMatrix::validate(&[vec![1.0 - d, d], vec![d, 1.0 - d]], 1e-12)
        });
        let partition = IslandPartition {
            islands: vec![vec![0], vec![1]],
            weak_components: vec![vec![0], vec![1]],
            weak_strongly_connected: vec![true, true],
        };
        let restricted = island_restricted_chain(&chain, &partition);
        let d = l1_distance(&chain, &restricted, 60).unwrap();
        assert!(d.total() <= 2.0 * s as f64);
        // Restricted rows are stochastic: diagonal absorbed the cross mass.
        let m = restricted.matrix_at(0).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn per_island_flow_on_decoupled_blocks_diverges() {
        let chain = constant(&[
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.5],
            vec![0.0, 0.0, 0.5, 0.5],
        ]);
        let g = unbounded_graph(&chain, 60, DivergenceRule::default()).unwrap();
        let p = islands(&g);
        let flows =
            per_island_aif(&chain, &p, 60, FlowVariant::Full, &FlowParams::default()).unwrap();
        assert_eq!(flows.len(), 2);
        assert!(flows
            .iter()
            .all(|f| matches!(f.verdict, FlowVerdict::DivergentTrend { .. })));
    }

    #[test]
    fn singleton_island_is_trivially_satisfied() {
        let chain = constant(&[
            vec![0.5, 0.5, 0.0],
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        let g = unbounded_graph(&chain, 40, DivergenceRule::default()).unwrap();
        let p = islands(&g);
        let flows =
            per_island_aif(&chain, &p, 40, FlowVariant::Full, &FlowParams::default()).unwrap();
        assert!(matches!(flows[1].verdict, FlowVerdict::TriviallySatisfied));
    }

    #[test]
    fn swap_pair_island_flow_is_bounded() {
        let swap = constant(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let p = IslandPartition::single(2);
        let flows =
            per_island_aif(&swap, &p, 50, FlowVariant::Full, &FlowParams::default()).unwrap();
        assert!(matches!(flows[0].verdict, FlowVerdict::BoundedFlowWitness { .. }));
    }
}
