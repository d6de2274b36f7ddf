//! Iterated dense-block detection with automatic truncation.
//!
//! Each round freezes merchant weights on the residual graph, peels out the
//! densest block, records it and deletes the block's internal edges. Once
//! `k_max` blocks are found (or no edges remain) the block list is cut at
//! the truncating point: the interior index where the second difference of
//! the score sequence is smallest, i.e. right before the scores fall off.

use crate::bigraph::{BipartiteGraph, Side};
use crate::density::{merchant_edge_weights, peel_densest_by, DensityParams, MerchantWeights, PeelPriority, ScoredBlock};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectConfig<T> {
    pub density: DensityParams<T>,
    /// Upper bound on rounds.
    pub k_max: usize,
    /// Cut the block list at the truncating point; otherwise keep all found.
    pub truncate: bool,
    pub priority: PeelPriority,
}

impl<T: Scalar> DetectConfig<T> {
    pub const DEFAULT_K_MAX: usize = 30;

    /// Keeps exactly the first `k` blocks (no truncation).
    pub fn fixed_k(density: DensityParams<T>, k: usize) -> Self {
        DetectConfig {
            density,
            k_max: k,
            truncate: false,
            priority: PeelPriority::Weighted,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::Config("k_max must be at least 1".into()));
        }
        Ok(())
    }
}

impl<T: Scalar> Default for DetectConfig<T> {
    fn default() -> Self {
        DetectConfig {
            density: DensityParams::default(),
            k_max: Self::DEFAULT_K_MAX,
            truncate: true,
            priority: PeelPriority::Weighted,
        }
    }
}

/// Blocks in detection order. Their internal edge sets are pairwise
/// disjoint; their node sets may overlap.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DensityTrace<T> {
    pub blocks: Vec<ScoredBlock<T>>,
}

impl<T: Scalar> DensityTrace<T> {
    pub fn scores(&self) -> Vec<T> {
        self.blocks.iter().map(|b| b.score).collect()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection<T> {
    pub trace: DensityTrace<T>,
    /// Number of leading blocks kept.
    pub kept: usize,
    /// Union of kept blocks, sorted.
    pub users: Vec<u32>,
    pub merchants: Vec<u32>,
}

impl<T: Scalar> Detection<T> {
    pub fn kept_blocks(&self) -> &[ScoredBlock<T>] {
        &self.trace.blocks[..self.kept]
    }

    /// Sum of kept block scores.
    pub fn objective(&self) -> T {
        self.kept_blocks().iter().map(|b| b.score).sum()
    }
}

pub fn detect_blocks<T: Scalar>(graph: &BipartiteGraph, config: &DetectConfig<T>) -> Detection<T> {
    let priority = config.priority;
    detect_blocks_with(graph, config, |g, w| peel_densest_by(g, w, priority))
}

/// [`detect_blocks`] with a caller-supplied per-round block finder, e.g. an
/// exact search on small graphs.
pub fn detect_blocks_with<T, F>(graph: &BipartiteGraph, config: &DetectConfig<T>, mut find: F) -> Detection<T>
where
    T: Scalar,
    F: FnMut(&BipartiteGraph, &MerchantWeights<T>) -> Result<ScoredBlock<T>>,
{
    let mut blocks = Vec::new();
    let mut residual = graph.clone();
    while blocks.len() < config.k_max && residual.edge_count() > 0 {
        let weights = merchant_edge_weights(&residual, &config.density);
        let block = find(&residual, &weights).expect("residual graph has edges");
        let next = residual.remove_edges(&block.members);
        debug_assert!(next.edge_count() < residual.edge_count(), "every block removes an edge");
        residual = next;
        blocks.push(block);
    }
    let trace = DensityTrace { blocks };
    let kept = if config.truncate {
        truncating_point(&trace.scores())
    } else {
        trace.len()
    };

    let mut in_users = vec![false; graph.n_users()];
    let mut in_merchants = vec![false; graph.n_merchants()];
    for node in trace.blocks[..kept].iter().flat_map(|b| &b.members) {
        match node.side {
            Side::User => in_users[node.index as usize] = true,
            Side::Merchant => in_merchants[node.index as usize] = true,
        }
    }
    Detection {
        trace,
        kept,
        users: flagged(&in_users),
        merchants: flagged(&in_merchants),
    }
}

fn flagged(flags: &[bool]) -> Vec<u32> {
    flags
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(i, _)| i as u32)
        .collect()
}

/// `out[i - 1] = s[i+1] - 2 s[i] + s[i-1]` for interior positions
/// `i = 1..len-1` (0-based), so `out[0]` belongs to block 2.
pub fn second_difference<T: Scalar>(scores: &[T]) -> Result<Vec<T>> {
    if scores.len() < 3 {
        return Err(Error::TooShort(scores.len()));
    }
    let two = T::lit(2.0);
    Ok(scores.windows(3).map(|w| w[2] - two * w[1] + w[0]).collect())
}

/// Number of blocks to keep: the 1-based index of the smallest second
/// difference (lowest on ties), or every block when fewer than three exist.
pub fn truncating_point<T: Scalar>(scores: &[T]) -> usize {
    match second_difference(scores) {
        Ok(d2) => {
            let mut best = 0;
            for (i, &x) in d2.iter().enumerate() {
                if x < d2[best] {
                    best = i;
                }
            }
            best + 2
        }
        Err(_) => scores.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigraph::NodeRef;
    use crate::density::brute_force_densest;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn second_difference_examples() {
        let d = second_difference(&[10.0, 9.0, 3.0, 2.9, 2.8]).unwrap();
        assert_eq!(d.len(), 3);
        assert_relative_eq!(d[0], -5.0, epsilon = 1e-12);
        assert_relative_eq!(d[1], 5.9, epsilon = 1e-12);
        assert_relative_eq!(d[2], 0.0, epsilon = 1e-12);
        assert_eq!(second_difference(&[3.0, 2.0, 1.0]).unwrap(), vec![0.0]);
        assert_eq!(second_difference(&[1.0, 1.0, 1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(second_difference(&[5.0, 4.0]), Err(Error::TooShort(2))));
    }

    #[test]
    fn truncating_point_examples() {
        assert_eq!(truncating_point(&[10.0, 9.0, 3.0, 2.9, 2.8]), 2);
        assert_eq!(truncating_point(&[5.0, 4.0]), 2);
        assert_eq!(truncating_point(&[1.0f64, 1.0, 1.0, 1.0]), 2);
        assert_eq!(truncating_point::<f64>(&[]), 0);
        assert_eq!(truncating_point(&[3.0]), 1);
    }

    fn complete(users: std::ops::Range<u32>, merchants: std::ops::Range<u32>) -> Vec<(u32, u32)> {
        users.flat_map(|u| merchants.clone().map(move |v| (u, v))).collect()
    }

    /// Two disjoint K_{4,4} (users 0..8, merchants 0..8) plus 20 sparse
    /// edges among 40 other nodes (users 8..28, merchants 8..28). With
    /// `bridge`, one extra edge ties noise user 8 to merchant 4 so the two
    /// blocks no longer have identical scores.
    fn two_blocks_and_noise(bridge: bool) -> BipartiteGraph {
        let mut edges = complete(0..4, 0..4);
        edges.extend(complete(4..8, 4..8));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut noise = Vec::new();
        while noise.len() < 20 {
            let e = (rng.random_range(8..28), rng.random_range(8..28));
            if !noise.contains(&e) {
                noise.push(e);
            }
        }
        edges.extend(noise);
        if bridge {
            edges.push((8, 4));
        }
        BipartiteGraph::from_edges(28, 28, edges).unwrap().0
    }

    fn covers_both_blocks(det: &Detection<f64>) -> bool {
        (0..8).all(|i| det.users.contains(&i) && det.merchants.contains(&i))
    }

    #[test]
    fn identical_blocks_tie_into_one_union_block() {
        // both K44 score 16 w / 8 with w = 1/ln 9; the union scores the same
        // and the larger prefix wins the tie
        let g = two_blocks_and_noise(false);
        let det = detect_blocks(&g, &DetectConfig::<f64>::default());
        let first = &det.trace.blocks[0];
        assert_eq!(first.len(), 16);
        assert_relative_eq!(first.score, 2.0 / 9f64.ln(), epsilon = 1e-12);
        assert!(covers_both_blocks(&det));
    }

    #[test]
    fn finds_both_planted_blocks() {
        let g = two_blocks_and_noise(true);
        let det = detect_blocks(&g, &DetectConfig::<f64>::default());
        assert_eq!(det.kept, 2);
        assert!(covers_both_blocks(&det));
        let blocks = det.kept_blocks();
        assert_eq!(blocks[0].members.iter().map(|n| n.index).max(), Some(3));
        assert_eq!(blocks[0].len(), 8);
        assert_eq!(blocks[1].len(), 8);
        // block 1 untouched: 16 edges at 1/ln 9; block 2: merchant 4 has degree 5
        let ln9 = 9f64.ln();
        assert_relative_eq!(blocks[0].score, 2.0 / ln9, epsilon = 1e-12);
        assert_relative_eq!(blocks[1].score, (12.0 / ln9 + 4.0 / 10f64.ln()) / 8.0, epsilon = 1e-12);
        let d2 = second_difference(&det.trace.scores()).unwrap();
        assert!(d2[0] < 0.0 && d2[1..].iter().all(|&x| x > d2[0]));
    }

    #[test]
    fn edgeless_graph_gives_empty_trace() {
        let det = detect_blocks(&BipartiteGraph::empty(4, 4), &DetectConfig::<f64>::default());
        assert!(det.trace.is_empty());
        assert_eq!(det.kept, 0);
        assert!(det.users.is_empty() && det.merchants.is_empty());
    }

    #[test]
    fn fixed_k_one_is_single_densest_block() {
        let g = two_blocks_and_noise(true);
        let cfg = DetectConfig::fixed_k(DensityParams::<f64>::default(), 1);
        let det = detect_blocks(&g, &cfg);
        assert_eq!(det.trace.len(), 1);
        assert_eq!(det.kept, 1);
        let w = merchant_edge_weights(&g, &cfg.density);
        assert_eq!(det.trace.blocks[0], crate::density::peel_densest(&g, &w).unwrap());
    }

    #[test]
    fn rounds_remove_disjoint_edge_sets() {
        let g = two_blocks_and_noise(true);
        let cfg = DetectConfig {
            truncate: false,
            ..DetectConfig::<f64>::default()
        };
        let det = detect_blocks(&g, &cfg);
        // replay the rounds and check every original edge is removed at most once
        let mut residual = g.clone();
        let mut removed = 0;
        for b in &det.trace.blocks {
            let next = residual.remove_edges(&b.members);
            removed += residual.edge_count() - next.edge_count();
            residual = next;
        }
        assert!(removed <= g.edge_count());
        assert_eq!(residual.edge_count(), 0);
        assert!(det.kept <= cfg.k_max);
    }

    #[test]
    fn exact_rounds_give_non_increasing_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..30 {
            let nu = rng.random_range(2..8);
            let nv = rng.random_range(2..8);
            let edges: Vec<(u32, u32)> = complete(0..nu, 0..nv).into_iter().filter(|_| rng.random_bool(0.5)).collect();
            let g = BipartiteGraph::from_edges(nu as usize, nv as usize, edges).unwrap().0;
            let cfg = DetectConfig {
                truncate: false,
                ..DetectConfig::<f64>::default()
            };
            let det = detect_blocks_with(&g, &cfg, brute_force_densest);
            for pair in det.trace.scores().windows(2) {
                assert!(pair[1] <= pair[0] + 1e-12, "{pair:?}");
            }
        }
    }

    #[test]
    fn overlapping_nodes_are_merged() {
        // user 0 belongs to a K_{1,3}-ish star and a second block via another merchant set
        let mut edges = complete(0..3, 0..3);
        edges.extend(complete(0..1, 3..4));
        edges.extend(complete(3..5, 3..4));
        let g = BipartiteGraph::from_edges(5, 4, edges).unwrap().0;
        let cfg = DetectConfig {
            truncate: false,
            ..DetectConfig::<f64>::default()
        };
        let det = detect_blocks(&g, &cfg);
        let mut users: Vec<u32> = det.trace.blocks.iter().flat_map(|b| b.users()).collect();
        users.sort_unstable();
        users.dedup();
        assert_eq!(det.users, users);
        assert!(det.trace.blocks.iter().all(|b| !b.members.is_empty()));
        let _ = NodeRef::user(0);
    }
}
