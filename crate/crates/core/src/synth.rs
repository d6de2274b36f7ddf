//! Planted-block benchmark graphs with ground truth.
//!
//! Background users buy from a Poisson number of distinct merchants chosen
//! uniformly. Each planted block is a random dense bipartite patch between a
//! disjoint group of users and merchants. Fraud users additionally camouflage
//! with edges to merchants picked in proportion to their background degree.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::Serialize;

use crate::bigraph::{BipartiteGraph, NodeLabels};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockSpec {
    pub users: usize,
    pub merchants: usize,
    /// Probability of each internal (user, merchant) pair.
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SynthConfig {
    pub n_users: usize,
    pub n_merchants: usize,
    pub background_avg_user_degree: f64,
    pub blocks: Vec<BlockSpec>,
    /// Camouflage edges per fraud user, as a fraction of its block degree.
    pub camouflage_prob: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// 2000 users, 500 merchants, average background degree 2, three 50×20
    /// blocks at density 0.8 and camouflage 0.2.
    pub fn standard(seed: u64) -> Self {
        SynthConfig {
            n_users: 2000,
            n_merchants: 500,
            background_avg_user_degree: 2.0,
            blocks: vec![
                BlockSpec {
                    users: 50,
                    merchants: 20,
                    prob: 0.8,
                };
                3
            ],
            camouflage_prob: 0.2,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_users == 0 || self.n_merchants == 0 {
            return bad("users and merchants must be positive".into());
        }
        if !(self.background_avg_user_degree.is_finite() && self.background_avg_user_degree >= 0.0) {
            return bad(format!("invalid average degree {}", self.background_avg_user_degree));
        }
        if !(0.0..=1.0).contains(&self.camouflage_prob) {
            return bad(format!("camouflage must be in [0, 1], got {}", self.camouflage_prob));
        }
        for b in &self.blocks {
            if b.users == 0 || b.merchants == 0 {
                return bad("blocks need at least one user and one merchant".into());
            }
            if !(b.prob > 0.0 && b.prob <= 1.0) {
                return bad(format!("block edge probability must be in (0, 1], got {}", b.prob));
            }
        }
        let bu: usize = self.blocks.iter().map(|b| b.users).sum();
        let bv: usize = self.blocks.iter().map(|b| b.merchants).sum();
        if bu > self.n_users || bv > self.n_merchants {
            return bad(format!(
                "blocks need {bu} users and {bv} merchants but only {} and {} exist",
                self.n_users, self.n_merchants
            ));
        }
        if self.n_users > u32::MAX as usize || self.n_merchants > u32::MAX as usize {
            return bad("graph too large".into());
        }
        Ok(())
    }

    /// Overrides fields from `key=value` pairs (`users`, `merchants`,
    /// `avg_degree`, `blocks`, `camouflage`, `seed`).
    pub fn apply_pairs(&mut self, pairs: &BTreeMap<String, String>) -> Result<()> {
        for (k, v) in pairs {
            match k.as_str() {
                "users" => self.n_users = parse_field(k, v)?,
                "merchants" => self.n_merchants = parse_field(k, v)?,
                "avg_degree" => self.background_avg_user_degree = parse_field(k, v)?,
                "blocks" => self.blocks = parse_blocks(v)?,
                "camouflage" => self.camouflage_prob = parse_field(k, v)?,
                "seed" => self.seed = parse_field(k, v)?,
                other => return Err(Error::Config(format!("unknown generator key {other:?}"))),
            }
        }
        Ok(())
    }

    /// `key=value` lines accepted back by [`apply_pairs`](Self::apply_pairs).
    pub fn to_pairs_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "users={}", self.n_users);
        let _ = writeln!(s, "merchants={}", self.n_merchants);
        let _ = writeln!(s, "avg_degree={}", self.background_avg_user_degree);
        let _ = writeln!(s, "blocks={}", format_blocks(&self.blocks));
        let _ = writeln!(s, "camouflage={}", self.camouflage_prob);
        let _ = writeln!(s, "seed={}", self.seed);
        s
    }
}

fn parse_field<F: FromStr>(key: &str, value: &str) -> Result<F> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

/// Parses `COUNTxUSERSxMERCHANTSxPROB` groups separated by commas, e.g.
/// `3x50x20x0.8`. An empty string means no blocks.
pub fn parse_blocks(spec: &str) -> Result<Vec<BlockSpec>> {
    let mut out = Vec::new();
    for group in spec.split(',').map(str::trim).filter(|g| !g.is_empty()) {
        let parts: Vec<&str> = group.split('x').collect();
        if parts.len() != 4 {
            return Err(Error::Config(format!(
                "block spec {group:?} is not COUNTxUSERSxMERCHANTSxPROB"
            )));
        }
        let count: usize = parse_field("block count", parts[0])?;
        let block = BlockSpec {
            users: parse_field("block users", parts[1])?,
            merchants: parse_field("block merchants", parts[2])?,
            prob: parse_field("block probability", parts[3])?,
        };
        out.extend(std::iter::repeat_n(block, count));
    }
    Ok(out)
}

fn format_blocks(blocks: &[BlockSpec]) -> String {
    let mut groups: Vec<(usize, BlockSpec)> = Vec::new();
    for b in blocks {
        match groups.last_mut() {
            Some((n, last)) if last == b => *n += 1,
            _ => groups.push((1, *b)),
        }
    }
    groups
        .iter()
        .map(|(n, b)| format!("{n}x{}x{}x{}", b.users, b.merchants, b.prob))
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    /// Sorted fraud user ids.
    pub fraud_users: Vec<u32>,
    pub fraud_merchants: Vec<u32>,
    /// Block of each user, `None` for background users.
    pub user_block: Vec<Option<usize>>,
    pub merchant_block: Vec<Option<usize>>,
}

impl GroundTruth {
    pub fn block_users(&self, block: usize) -> Vec<u32> {
        members(&self.user_block, block)
    }

    pub fn block_merchants(&self, block: usize) -> Vec<u32> {
        members(&self.merchant_block, block)
    }

    pub fn is_fraud_user(&self, u: u32) -> bool {
        self.user_block[u as usize].is_some()
    }
}

fn members(assign: &[Option<usize>], block: usize) -> Vec<u32> {
    assign
        .iter()
        .enumerate()
        .filter(|(_, b)| **b == Some(block))
        .map(|(i, _)| i as u32)
        .collect()
}

#[derive(Debug, Clone)]
pub struct SynthGraph {
    pub graph: BipartiteGraph,
    pub truth: GroundTruth,
    /// Edges inside each planted block, before camouflage.
    pub block_edges: Vec<usize>,
}

impl SynthGraph {
    /// `u<i>` / `m<j>` labels.
    pub fn labels(&self) -> NodeLabels {
        NodeLabels::new(
            (0..self.graph.n_users()).map(|i| format!("u{i}")).collect(),
            (0..self.graph.n_merchants()).map(|j| format!("m{j}")).collect(),
        )
        .expect("generated labels are unique")
    }
}

pub fn generate(config: &SynthConfig) -> Result<SynthGraph> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (nu, nv) = (config.n_users, config.n_merchants);

    // random placement of block members
    let mut user_perm: Vec<u32> = (0..nu as u32).collect();
    user_perm.shuffle(&mut rng);
    let mut merchant_perm: Vec<u32> = (0..nv as u32).collect();
    merchant_perm.shuffle(&mut rng);
    let mut user_block = vec![None; nu];
    let mut merchant_block = vec![None; nv];
    let mut groups = Vec::with_capacity(config.blocks.len());
    let (mut pu, mut pv) = (0, 0);
    for (b, spec) in config.blocks.iter().enumerate() {
        let us = user_perm[pu..pu + spec.users].to_vec();
        let vs = merchant_perm[pv..pv + spec.merchants].to_vec();
        pu += spec.users;
        pv += spec.merchants;
        for &u in &us {
            user_block[u as usize] = Some(b);
        }
        for &v in &vs {
            merchant_block[v as usize] = Some(b);
        }
        groups.push((us, vs));
    }

    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut background_degree = vec![0u32; nv];
    if config.background_avg_user_degree > 0.0 {
        let poisson = Poisson::new(config.background_avg_user_degree)
            .map_err(|e| Error::Config(format!("average degree: {e}")))?;
        for (u, block) in user_block.iter().enumerate() {
            if block.is_some() {
                continue;
            }
            let k = (poisson.sample(&mut rng) as usize).min(nv);
            for v in index::sample(&mut rng, nv, k) {
                edges.push((u as u32, v as u32));
                background_degree[v] += 1;
            }
        }
    }

    let mut block_edges = Vec::with_capacity(groups.len());
    let mut fraud_degree = vec![0usize; nu];
    for (spec, (us, vs)) in config.blocks.iter().zip(&groups) {
        let mut count = 0;
        for &u in us {
            for &v in vs {
                if rng.random_bool(spec.prob) {
                    edges.push((u, v));
                    fraud_degree[u as usize] += 1;
                    count += 1;
                }
            }
        }
        block_edges.push(count);
    }

    if config.camouflage_prob > 0.0 {
        let popular = WeightedIndex::new(background_degree.iter().map(|&d| d as f64)).ok();
        for (us, _) in &groups {
            for &u in us {
                let k = (config.camouflage_prob * fraud_degree[u as usize] as f64).ceil() as usize;
                for _ in 0..k {
                    let v = match &popular {
                        Some(dist) => dist.sample(&mut rng),
                        None => rng.random_range(0..nv),
                    };
                    edges.push((u, v as u32));
                }
            }
        }
    }

    let (graph, _) = BipartiteGraph::from_edges(nu, nv, edges)?;
    let truth = GroundTruth {
        fraud_users: (0..nu as u32).filter(|&u| user_block[u as usize].is_some()).collect(),
        fraud_merchants: (0..nv as u32).filter(|&v| merchant_block[v as usize].is_some()).collect(),
        user_block,
        merchant_block,
    };
    Ok(SynthGraph {
        graph,
        truth,
        block_edges,
    })
}
