//! Parallel sample→detect ensemble with majority voting.
//!
//! Each of the `N` tasks is a pure function of the shared graph, the config
//! and its own derived seed, and votes are merged by integer addition, so
//! the tally does not depend on the worker count or on scheduling.

use rayon::prelude::*;
use serde::Serialize;

use crate::bigraph::BipartiteGraph;
use crate::detect::{detect_blocks, DetectConfig};
use crate::error::{Error, Result};
use crate::sampling::SamplerKind;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig<T> {
    pub sampler: SamplerKind,
    /// `N`, the number of sampled subgraphs.
    pub num_samples: usize,
    /// `T`, the vote threshold.
    pub threshold: usize,
    pub detect: DetectConfig<T>,
    pub master_seed: u64,
    pub workers: usize,
}

impl<T: Scalar> EnsembleConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        self.detect.validate()?;
        if self.num_samples == 0 {
            return Err(Error::Config("number of samples must be at least 1".into()));
        }
        check_threshold(self.threshold, self.num_samples)?;
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// `R = S * N`: how often each element is covered on average.
    pub fn repetition_rate(&self) -> f64 {
        self.sampler.ratio() * self.num_samples as f64
    }
}

fn check_threshold(threshold: usize, num_samples: usize) -> Result<()> {
    if threshold == 0 || threshold > num_samples {
        return Err(Error::Config(format!(
            "vote threshold must be in 1..={num_samples}, got {threshold}"
        )));
    }
    Ok(())
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-sample seeds; entry `i` depends only on `(master_seed, i)`.
pub fn derive_seeds(master_seed: u64, n: usize) -> Vec<u64> {
    (0..n as u64)
        .map(|i| mix64(master_seed.wrapping_add((i + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15))))
        .collect()
}

/// Per-node vote counts over all sampled subgraphs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VoteTally {
    pub user_votes: Vec<u32>,
    pub merchant_votes: Vec<u32>,
    pub num_samples: usize,
}

impl VoteTally {
    pub fn new(n_users: usize, n_merchants: usize, num_samples: usize) -> Self {
        VoteTally {
            user_votes: vec![0; n_users],
            merchant_votes: vec![0; n_merchants],
            num_samples,
        }
    }

    /// Adds one vote per listed node.
    pub fn add(&mut self, users: &[u32], merchants: &[u32]) {
        for &u in users {
            self.user_votes[u as usize] += 1;
        }
        for &v in merchants {
            self.merchant_votes[v as usize] += 1;
        }
    }

    /// `hist[k]` = number of user nodes with exactly `k` votes, `k = 0..=N`.
    pub fn user_histogram(&self) -> Vec<usize> {
        histogram(&self.user_votes, self.num_samples)
    }

    pub fn merchant_histogram(&self) -> Vec<usize> {
        histogram(&self.merchant_votes, self.num_samples)
    }
}

fn histogram(votes: &[u32], n: usize) -> Vec<usize> {
    let mut h = vec![0; n + 1];
    for &v in votes {
        h[v as usize] += 1;
    }
    h
}

/// What one sampled subgraph contributed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSummary {
    pub seed: u64,
    pub users: usize,
    pub merchants: usize,
    pub edges: usize,
    pub blocks_found: usize,
    pub blocks_kept: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub tally: VoteTally,
    pub samples: Vec<SampleSummary>,
}

impl EnsembleRun {
    pub fn mean_blocks_kept(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.blocks_kept).sum::<usize>() as f64 / self.samples.len() as f64
    }
}

struct SampleVotes {
    summary: SampleSummary,
    users: Vec<u32>,
    merchants: Vec<u32>,
}

fn run_one<T: Scalar>(graph: &BipartiteGraph, config: &EnsembleConfig<T>, seed: u64) -> Result<SampleVotes> {
    let sub = config.sampler.sample(graph, seed)?;
    let det = detect_blocks(&sub.graph, &config.detect);
    // union per subgraph: a node in several blocks still gets one vote
    let users = det.users.iter().map(|&u| sub.user_map[u as usize]).collect();
    let merchants = det.merchants.iter().map(|&v| sub.merchant_map[v as usize]).collect();
    Ok(SampleVotes {
        summary: SampleSummary {
            seed,
            users: sub.graph.n_users(),
            merchants: sub.graph.n_merchants(),
            edges: sub.graph.edge_count(),
            blocks_found: det.trace.len(),
            blocks_kept: det.kept,
        },
        users,
        merchants,
    })
}

/// Samples `N` subgraphs, detects blocks on each and tallies one vote per
/// detected original node per subgraph.
pub fn run_ensemble<T: Scalar>(graph: &BipartiteGraph, config: &EnsembleConfig<T>) -> Result<EnsembleRun> {
    config.validate()?;
    if graph.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let seeds = derive_seeds(config.master_seed, config.num_samples);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<SampleVotes> = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(index, &seed)| {
                run_one(graph, config, seed).map_err(|e| Error::Sample {
                    index,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut tally = VoteTally::new(graph.n_users(), graph.n_merchants(), config.num_samples);
    let mut samples = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        tally.add(&o.users, &o.merchants);
        samples.push(o.summary);
    }
    Ok(EnsembleRun { tally, samples })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MvaResult {
    pub users: Vec<u32>,
    pub merchants: Vec<u32>,
}

/// Accepts every node with at least `threshold` votes.
pub fn apply_mva(tally: &VoteTally, threshold: usize) -> Result<MvaResult> {
    check_threshold(threshold, tally.num_samples)?;
    let pick = |votes: &[u32]| {
        votes
            .iter()
            .enumerate()
            .filter(|(_, &c)| c as usize >= threshold)
            .map(|(i, _)| i as u32)
            .collect()
    };
    Ok(MvaResult {
        users: pick(&tally.user_votes),
        merchants: pick(&tally.merchant_votes),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigraph::Side;
    use proptest::prelude::*;

    #[test]
    fn seeds_are_stable_and_prefix_consistent() {
        assert_eq!(derive_seeds(42, 1), derive_seeds(42, 1));
        let short = derive_seeds(42, 10);
        let long = derive_seeds(42, 11);
        assert_eq!(short[..], long[..10]);
        let mut uniq = derive_seeds(42, 1000);
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), 1000);
    }

    #[test]
    fn one_bit_master_change_changes_every_seed() {
        for bit in 0..64 {
            let a = derive_seeds(0x1234_5678_9abc_def0, 64);
            let b = derive_seeds(0x1234_5678_9abc_def0 ^ (1 << bit), 64);
            assert!(a.iter().zip(&b).all(|(x, y)| x != y), "bit {bit}");
        }
    }

    #[test]
    fn mva_examples() {
        let tally = VoteTally {
            user_votes: vec![3, 1, 0, 2],
            merchant_votes: vec![],
            num_samples: 3,
        };
        assert_eq!(apply_mva(&tally, 2).unwrap().users, vec![0, 3]);
        assert_eq!(apply_mva(&tally, 1).unwrap().users, vec![0, 1, 3]);
        assert_eq!(apply_mva(&tally, 3).unwrap().users, vec![0]);
        assert!(apply_mva(&tally, 4).is_err());
        assert!(apply_mva(&tally, 0).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = EnsembleConfig::<f64> {
            sampler: SamplerKind::Res { ratio: 0.1 },
            num_samples: 80,
            threshold: 8,
            detect: DetectConfig::default(),
            master_seed: 7,
            workers: 1,
        };
        assert!(cfg.validate().is_ok());
        assert!((cfg.repetition_rate() - 8.0).abs() < 1e-12);
        cfg.threshold = 81;
        assert!(cfg.validate().is_err());
        cfg.threshold = 8;
        cfg.workers = 0;
        assert!(cfg.validate().is_err());
        cfg.workers = 1;
        cfg.sampler = SamplerKind::Ons {
            side: Side::Merchant,
            ratio: 0.0,
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn empty_graph_is_rejected() {
        let cfg = EnsembleConfig::<f64> {
            sampler: SamplerKind::Res { ratio: 0.5 },
            num_samples: 2,
            threshold: 1,
            detect: DetectConfig::default(),
            master_seed: 0,
            workers: 1,
        };
        assert!(run_ensemble(&BipartiteGraph::empty(3, 3), &cfg).is_err());
    }

    proptest! {
        #[test]
        fn mva_is_anti_monotone(votes in prop::collection::vec(0u32..=10, 0..50), t in 1usize..10) {
            let tally = VoteTally { user_votes: votes.clone(), merchant_votes: votes, num_samples: 10 };
            let hi = apply_mva(&tally, t + 1).unwrap();
            let lo = apply_mva(&tally, t).unwrap();
            prop_assert!(hi.users.iter().all(|u| lo.users.contains(u)));
            prop_assert!(hi.merchants.iter().all(|v| lo.merchants.contains(v)));
        }

        #[test]
        fn tally_merge_order_is_irrelevant(
            batches in prop::collection::vec(prop::collection::btree_set(0u32..20, 0..20), 1..10),
            rot in 0usize..10,
        ) {
            let lists: Vec<Vec<u32>> = batches.into_iter().map(|s| s.into_iter().collect()).collect();
            let mut a = VoteTally::new(20, 20, lists.len());
            for l in &lists { a.add(l, l); }
            let mut b = VoteTally::new(20, 20, lists.len());
            let k = rot % lists.len();
            for l in lists[k..].iter().chain(&lists[..k]).rev() { b.add(l, l); }
            prop_assert_eq!(&a, &b);
            prop_assert!(a.user_votes.iter().all(|&v| v as usize <= lists.len()));
        }
    }
}
