//! Log-degree-penalized density score and greedy heap peeling.
//!
//! Every edge `(u, v)` carries the weight `w_v = 1 / ln(d_v + c)` of its
//! merchant, with `d_v` the merchant degree in the graph being peeled. The
//! density of a vertex set `S` is the total weight of the edges inside `S`
//! divided by `|S|`. Popular merchants contribute little, so fraud accounts
//! cannot hide a dense block by also buying from popular shops.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::bigraph::{BipartiteGraph, NodeRef, Side};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest `|U| + |V|` accepted by [`brute_force_densest`].
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityParams<T> {
    c: T,
}

impl<T: Scalar> DensityParams<T> {
    pub const DEFAULT_C: f64 = 5.0;

    /// `c` must exceed 1 so that `ln(d + c) > 0` for every degree.
    pub fn new(c: T) -> Result<Self> {
        if c.is_finite() && c > T::one() {
            Ok(DensityParams { c })
        } else {
            Err(Error::Config(format!("density constant c must be finite and > 1, got {c}")))
        }
    }

    pub fn c(&self) -> T {
        self.c
    }
}

impl<T: Scalar> Default for DensityParams<T> {
    fn default() -> Self {
        DensityParams {
            c: T::lit(Self::DEFAULT_C),
        }
    }
}

/// Per-merchant edge weights, frozen for one peeling run.
#[derive(Debug, Clone, PartialEq)]
pub struct MerchantWeights<T>(Vec<T>);

impl<T: Scalar> MerchantWeights<T> {
    /// Wraps precomputed weights; all entries must be finite and positive.
    pub fn from_vec(weights: Vec<T>) -> Result<Self> {
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w > T::zero())) {
            return Err(Error::Config(format!("merchant weight {bad} is not finite and positive")));
        }
        Ok(MerchantWeights(weights))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, merchant: u32) -> T {
        self.0[merchant as usize]
    }
}

pub fn merchant_edge_weights<T: Scalar>(graph: &BipartiteGraph, params: &DensityParams<T>) -> MerchantWeights<T> {
    MerchantWeights(
        graph
            .degrees(Side::Merchant)
            .into_iter()
            .map(|d| T::one() / (T::from_count(d) + params.c).ln())
            .collect(),
    )
}

/// Weighted edge mass inside `subset` divided by its size; 0 for an empty set.
pub fn density_score<T: Scalar>(graph: &BipartiteGraph, subset: &[NodeRef], weights: &MerchantWeights<T>) -> T {
    let mut in_merchants = vec![false; graph.n_merchants()];
    let mut users = Vec::new();
    for node in subset {
        match node.side {
            Side::User => users.push(node.index),
            Side::Merchant => in_merchants[node.index as usize] = true,
        }
    }
    users.sort_unstable();
    users.dedup();
    let size = users.len() + in_merchants.iter().filter(|&&b| b).count();
    if size == 0 {
        return T::zero();
    }
    let mass: T = users
        .iter()
        .flat_map(|&u| graph.user_neighbors(u))
        .filter(|&&v| in_merchants[v as usize])
        .map(|&v| weights.get(v))
        .sum();
    mass / T::from_count(size)
}

/// A vertex set together with its density score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredBlock<T> {
    /// Sorted: users first, then merchants.
    pub members: Vec<NodeRef>,
    pub score: T,
}

impl<T: Scalar> ScoredBlock<T> {
    pub fn users(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.iter().filter(|n| n.side == Side::User).map(|n| n.index)
    }

    pub fn merchants(&self) -> impl Iterator<Item = u32> + '_ {
        self.members.iter().filter(|n| n.side == Side::Merchant).map(|n| n.index)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Which key decides the next node to peel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeelPriority {
    /// Weighted marginal contribution: the edge mass the node would take
    /// with it. This is the greedy step that matches the density score.
    #[default]
    Weighted,
    /// Plain current degree.
    Degree,
}

/// Operation counts of one peeling run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PeelStats {
    pub heap_pushes: usize,
    pub heap_pops: usize,
    pub stale_pops: usize,
    /// Neighbor contribution updates caused by removals.
    pub priority_updates: usize,
    pub removed: usize,
}

/// Full greedy peeling trace.
#[derive(Debug, Clone)]
pub struct PeelSequence<T> {
    /// Non-isolated nodes of the input, users first; this is the starting set.
    pub start: Vec<NodeRef>,
    /// Nodes in removal order until two remain.
    pub removal_order: Vec<NodeRef>,
    /// `scores[k]` is the density after the first `k` removals.
    pub scores: Vec<T>,
    /// Number of removals of the densest prefix (earliest on ties).
    pub best_removed: usize,
    pub stats: PeelStats,
}

impl<T: Scalar> PeelSequence<T> {
    /// The set left after `k` removals.
    pub fn prefix(&self, k: usize) -> Vec<NodeRef> {
        let mut gone: Vec<NodeRef> = self.removal_order[..k].to_vec();
        gone.sort_unstable();
        self.start
            .iter()
            .copied()
            .filter(|n| gone.binary_search(n).is_err())
            .collect()
    }

    pub fn best_block(&self) -> ScoredBlock<T> {
        ScoredBlock {
            members: self.prefix(self.best_removed),
            score: self.scores[self.best_removed],
        }
    }
}

#[derive(Clone, Copy)]
struct HeapEntry<T> {
    key: T,
    node: u32,
}

impl<T: Scalar> PartialEq for HeapEntry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for HeapEntry<T> {}

impl<T: Scalar> PartialOrd for HeapEntry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for HeapEntry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .partial_cmp(&other.key)
            .unwrap_or(Ordering::Equal)
            .then(self.node.cmp(&other.node))
    }
}

/// Greedy peeling from the non-isolated part of `graph` down to two nodes,
/// always removing the node with the smallest key (lowest index on ties).
///
/// Isolated nodes are skipped up front: they have zero contribution, would
/// be removed first, and never belong to a densest prefix.
///
/// Uses a lazy min-heap: one push per key change, stale entries discarded
/// on pop.
pub fn peel_sequence<T: Scalar>(
    graph: &BipartiteGraph,
    weights: &MerchantWeights<T>,
    priority: PeelPriority,
) -> Result<PeelSequence<T>> {
    if graph.edge_count() == 0 {
        return Err(Error::NothingToPeel);
    }
    assert_eq!(weights.len(), graph.n_merchants(), "one weight per merchant");

    let nu = graph.n_users();
    let n = graph.n_nodes();
    let to_ref = |g: usize| {
        if g < nu {
            NodeRef::user(g as u32)
        } else {
            NodeRef::merchant((g - nu) as u32)
        }
    };

    let mut alive = vec![false; n];
    let mut degree = vec![0u32; n];
    // weighted marginal contribution of each node
    let mut contrib = vec![T::zero(); n];
    for u in 0..nu {
        let nbrs = graph.user_neighbors(u as u32);
        degree[u] = nbrs.len() as u32;
        contrib[u] = nbrs.iter().map(|&v| weights.get(v)).sum();
    }
    for v in 0..graph.n_merchants() {
        let d = graph.merchant_neighbors(v as u32).len();
        degree[nu + v] = d as u32;
        contrib[nu + v] = T::from_count(d) * weights.get(v as u32);
    }

    let key = |contrib: &[T], degree: &[u32], g: usize| match priority {
        PeelPriority::Weighted => contrib[g],
        PeelPriority::Degree => T::from_count(degree[g] as usize),
    };

    let mut stats = PeelStats::default();
    let mut heap = BinaryHeap::new();
    let mut start = Vec::new();
    for g in 0..n {
        if degree[g] > 0 {
            alive[g] = true;
            start.push(to_ref(g));
            heap.push(Reverse(HeapEntry {
                key: key(&contrib, &degree, g),
                node: g as u32,
            }));
            stats.heap_pushes += 1;
        }
    }

    let mut mass: T = (nu..n).map(|g| contrib[g]).sum();
    let mut edges_left = graph.edge_count();
    let mut remaining = start.len();
    let mut scores = Vec::with_capacity(remaining.saturating_sub(1));
    scores.push(mass / T::from_count(remaining));
    let mut best_removed = 0;
    let mut removal_order = Vec::with_capacity(remaining.saturating_sub(2));

    while remaining > 2 {
        let Reverse(HeapEntry { key: k, node }) = heap.pop().expect("heap holds every live node");
        stats.heap_pops += 1;
        let x = node as usize;
        if !alive[x] || k != key(&contrib, &degree, x) {
            stats.stale_pops += 1;
            continue;
        }
        alive[x] = false;
        remaining -= 1;
        stats.removed += 1;
        removal_order.push(to_ref(x));
        mass -= contrib[x];
        edges_left -= degree[x] as usize;

        if x < nu {
            for &v in graph.user_neighbors(x as u32) {
                let y = nu + v as usize;
                if !alive[y] {
                    continue;
                }
                degree[y] -= 1;
                contrib[y] = T::from_count(degree[y] as usize) * weights.get(v);
                heap.push(Reverse(HeapEntry {
                    key: key(&contrib, &degree, y),
                    node: y as u32,
                }));
                stats.priority_updates += 1;
                stats.heap_pushes += 1;
            }
        } else {
            let w = weights.get((x - nu) as u32);
            for &u in graph.merchant_neighbors((x - nu) as u32) {
                let y = u as usize;
                if !alive[y] {
                    continue;
                }
                degree[y] -= 1;
                contrib[y] = if degree[y] == 0 { T::zero() } else { contrib[y] - w };
                heap.push(Reverse(HeapEntry {
                    key: key(&contrib, &degree, y),
                    node: y as u32,
                }));
                stats.priority_updates += 1;
                stats.heap_pushes += 1;
            }
        }
        contrib[x] = T::zero();
        degree[x] = 0;

        if edges_left == 0 || mass < T::zero() {
            mass = T::zero();
        }
        let score = mass / T::from_count(remaining);
        scores.push(score);
        if beats(score, scores[best_removed]) {
            best_removed = scores.len() - 1;
        }
    }

    Ok(PeelSequence {
        start,
        removal_order,
        scores,
        best_removed,
        stats,
    })
}

/// `a > b` beyond accumulated rounding; near-equal scores count as ties.
fn beats<T: Scalar>(a: T, b: T) -> bool {
    a - b > b.abs() * T::epsilon() * T::lit(1024.0)
}

/// Densest block found by weighted greedy peeling.
pub fn peel_densest<T: Scalar>(graph: &BipartiteGraph, weights: &MerchantWeights<T>) -> Result<ScoredBlock<T>> {
    peel_densest_by(graph, weights, PeelPriority::Weighted)
}

pub fn peel_densest_by<T: Scalar>(
    graph: &BipartiteGraph,
    weights: &MerchantWeights<T>,
    priority: PeelPriority,
) -> Result<ScoredBlock<T>> {
    Ok(peel_sequence(graph, weights, priority)?.best_block())
}

/// Exact densest vertex set by enumerating all `2^(|U|+|V|)` subsets.
/// Reference implementation for tests; refuses graphs above
/// [`BRUTE_FORCE_LIMIT`] nodes.
pub fn brute_force_densest<T: Scalar>(graph: &BipartiteGraph, weights: &MerchantWeights<T>) -> Result<ScoredBlock<T>> {
    let nu = graph.n_users();
    let n = graph.n_nodes();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            nodes: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if graph.edge_count() == 0 {
        return Err(Error::NothingToPeel);
    }
    let edges: Vec<(u32, T)> = graph
        .edges()
        .map(|(u, v)| ((1u32 << u) | (1u32 << (nu + v as usize)), weights.get(v)))
        .collect();

    let mut best_mask = 0u32;
    let mut best = T::zero();
    for mask in 1u32..(1u32 << n) {
        let mut mass = T::zero();
        for &(em, w) in &edges {
            if mask & em == em {
                mass += w;
            }
        }
        let score = mass / T::from_count(mask.count_ones() as usize);
        if beats(score, best) {
            best = score;
            best_mask = mask;
        }
    }
    let members = (0..n)
        .filter(|&g| best_mask >> g & 1 == 1)
        .map(|g| {
            if g < nu {
                NodeRef::user(g as u32)
            } else {
                NodeRef::merchant((g - nu) as u32)
            }
        })
        .collect();
    Ok(ScoredBlock { members, score: best })
}
