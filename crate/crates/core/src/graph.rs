//! Directed communication graphs, bounded-confidence pruning, reachability
//! and Erdős–Rényi generation.
//!
//! Node indices are 0-based in the API. Edge `(i, j)` means node `i`
//! receives information from node `j`. Graph files use 1-based indices.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dst::{jousselme_distance, BodyOfEvidence, DstError};

/// Regeneration attempts for a connected ER graph.
pub const MAX_CONNECT_ATTEMPTS: u64 = 1000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("edge probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("no connected graph after {0} attempts")]
    NotConnected(u64),
    #[error(transparent)]
    Dst(#[from] DstError),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DirectedGraph {
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
}

impl DirectedGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            incoming: vec![Vec::new(); n],
            outgoing: vec![Vec::new(); n],
        }
    }

    /// Graph from directed edges `(receiver, sender)`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::empty(n);
        for &(i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    /// Graph where every listed pair communicates in both directions.
    pub fn from_mutual_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Self::empty(n);
        for &(i, j) in pairs {
            g.add_edge(i, j)?;
            g.add_edge(j, i)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    g.incoming[i].push(j);
                    g.outgoing[j].push(i);
                }
            }
        }
        g
    }

    /// Adds `i ← j`. Duplicate edges are ignored.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<(), GraphError> {
        self.check(i)?;
        self.check(j)?;
        if i == j {
            return Err(GraphError::SelfLoop(i));
        }
        if let Err(pos) = self.incoming[i].binary_search(&j) {
            self.incoming[i].insert(pos, j);
            let pos = self.outgoing[j].binary_search(&i).unwrap_err();
            self.outgoing[j].insert(pos, i);
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.incoming.len()
    }

    pub fn edge_count(&self) -> usize {
        self.incoming.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.incoming
            .get(i)
            .is_some_and(|n| n.binary_search(&j).is_ok())
    }

    /// Nodes `i` receives from, ascending.
    pub fn neighbors(&self, i: usize) -> Result<&[usize], GraphError> {
        self.check(i)?;
        Ok(&self.incoming[i])
    }

    /// Nodes that receive from `j`, ascending.
    pub fn listeners(&self, j: usize) -> Result<&[usize], GraphError> {
        self.check(j)?;
        Ok(&self.outgoing[j])
    }

    /// Directed edges `(receiver, sender)` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.incoming
            .iter()
            .enumerate()
            .flat_map(|(i, n)| n.iter().map(move |&j| (i, j)))
    }

    /// Unordered pairs `{i, j}` with at least one direction present, `i < j`.
    pub fn undirected_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<_> = self.edges().map(|(i, j)| (i.min(j), i.max(j))).collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    /// Nodes reachable from `i` along the direction information flows,
    /// including `i`.
    pub fn out_component(&self, i: usize) -> Result<Vec<usize>, GraphError> {
        self.check(i)?;
        Ok(reach(&self.outgoing, i))
    }

    /// Nodes whose information reaches `i`, including `i`.
    pub fn in_component(&self, i: usize) -> Result<Vec<usize>, GraphError> {
        self.check(i)?;
        Ok(reach(&self.incoming, i))
    }

    /// Weak connectivity.
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in self.incoming[v].iter().chain(&self.outgoing[v]) {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }

    /// Keeps `i ← j` iff the opinions are within `epsilon[i]` of each other.
    pub fn prune(
        &self,
        opinions: &[BodyOfEvidence],
        epsilon: &[f64],
    ) -> Result<PrunedView, GraphError> {
        let n = self.node_count();
        for len in [opinions.len(), epsilon.len()] {
            if len != n {
                return Err(GraphError::LengthMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        let mut view = PrunedView::with_capacity(n, self.edge_count());
        for i in 0..n {
            for &j in &self.incoming[i] {
                if jousselme_distance(&opinions[i], &opinions[j])? <= epsilon[i] {
                    view.targets.push(j);
                }
            }
            view.close_row();
        }
        Ok(view)
    }

    /// Prune with a caller-supplied distance, e.g. a precomputed matrix.
    pub fn prune_with(
        &self,
        epsilon: &[f64],
        mut distance: impl FnMut(usize, usize) -> f64,
    ) -> PrunedView {
        let mut view = PrunedView::with_capacity(self.node_count(), self.edge_count());
        for (i, ns) in self.incoming.iter().enumerate() {
            view.targets
                .extend(ns.iter().copied().filter(|&j| distance(i, j) <= epsilon[i]));
            view.close_row();
        }
        view
    }

    fn check(&self, node: usize) -> Result<(), GraphError> {
        if node >= self.node_count() {
            return Err(GraphError::NodeOutOfRange {
                node,
                n: self.node_count(),
            });
        }
        Ok(())
    }
}

fn reach(adjacency: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut seen = vec![false; adjacency.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    (0..adjacency.len()).filter(|&v| seen[v]).collect()
}

/// The edges that survive bounded-confidence pruning at one step, stored
/// row by row in one flat buffer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrunedView {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl PrunedView {
    pub(crate) fn with_capacity(n: usize, edges: usize) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        Self {
            offsets,
            targets: Vec::with_capacity(edges),
        }
    }

    /// Finish the current row; neighbors pushed since the last call belong to it.
    pub(crate) fn close_row(&mut self) {
        self.offsets.push(self.targets.len());
    }

    pub(crate) fn push(&mut self, j: usize) {
        self.targets.push(j);
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |i| self.neighbors(i).iter().map(move |&j| (i, j)))
    }

    pub fn as_graph(&self) -> DirectedGraph {
        let mut g = DirectedGraph::empty(self.node_count());
        for (i, j) in self.edges() {
            g.add_edge(i, j)
                .expect("pruned edges come from a valid graph");
        }
        g
    }
}

/// `G(n, p)` with mutual links, seeded ChaCha8.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<DirectedGraph, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = DirectedGraph::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                g.add_edge(i, j)?;
                g.add_edge(j, i)?;
            }
        }
    }
    Ok(g)
}

/// Regenerates with `seed, seed + 1, …` until the graph is connected.
/// Returns the graph and the seed that produced it.
pub fn erdos_renyi_connected(
    n: usize,
    p: f64,
    seed: u64,
) -> Result<(DirectedGraph, u64), GraphError> {
    for attempt in 0..MAX_CONNECT_ATTEMPTS {
        let s = seed.wrapping_add(attempt);
        let g = erdos_renyi(n, p, s)?;
        if g.is_connected() {
            return Ok((g, s));
        }
    }
    Err(GraphError::NotConnected(MAX_CONNECT_ATTEMPTS))
}

/// `{"n": N, "edges": [[i, j], …]}` with 1-based mutual pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl GraphJson {
    pub fn to_graph(&self) -> Result<DirectedGraph, GraphError> {
        let mut pairs = Vec::with_capacity(self.edges.len());
        for &[i, j] in &self.edges {
            for v in [i, j] {
                if v == 0 || v > self.n {
                    return Err(GraphError::NodeOutOfRange { node: v, n: self.n });
                }
            }
            pairs.push((i - 1, j - 1));
        }
        DirectedGraph::from_mutual_pairs(self.n, &pairs)
    }
}

impl From<&DirectedGraph> for GraphJson {
    fn from(g: &DirectedGraph) -> Self {
        GraphJson {
            n: g.node_count(),
            edges: g
                .undirected_pairs()
                .into_iter()
                .map(|(i, j)| [i + 1, j + 1])
                .collect(),
        }
    }
}
