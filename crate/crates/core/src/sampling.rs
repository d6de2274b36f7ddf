//! Seeded bipartite subgraph samplers.
//!
//! * RES keeps a uniform subset of edges plus their endpoints.
//! * ONS keeps a uniform subset of one side with all incident edges.
//! * TNS keeps uniform subsets of both sides and their induced subgraph.
//!
//! Sample sizes are `ceil(ratio * n)`, drawn without replacement from a
//! ChaCha8 stream seeded by the caller.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bigraph::{BipartiteGraph, SampledSubgraph, Side};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum SamplerKind {
    Res { ratio: f64 },
    Ons { side: Side, ratio: f64 },
    Tns { ratio_u: f64, ratio_v: f64 },
}

impl SamplerKind {
    /// The headline sample ratio `S`; for TNS the user-side ratio.
    pub fn ratio(&self) -> f64 {
        match *self {
            SamplerKind::Res { ratio } | SamplerKind::Ons { ratio, .. } => ratio,
            SamplerKind::Tns { ratio_u, .. } => ratio_u,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SamplerKind::Res { .. } => "res",
            SamplerKind::Ons { .. } => "ons",
            SamplerKind::Tns { .. } => "tns",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SamplerKind::Res { ratio } | SamplerKind::Ons { ratio, .. } => check_ratio(ratio),
            SamplerKind::Tns { ratio_u, ratio_v } => check_ratio(ratio_u).and(check_ratio(ratio_v)),
        }
    }

    pub fn sample(&self, graph: &BipartiteGraph, seed: u64) -> Result<SampledSubgraph> {
        match *self {
            SamplerKind::Res { ratio } => sample_res(graph, ratio, seed),
            SamplerKind::Ons { side, ratio } => sample_ons(graph, side, ratio, seed),
            SamplerKind::Tns { ratio_u, ratio_v } => sample_tns(graph, ratio_u, ratio_v, seed),
        }
    }
}

fn check_ratio(ratio: f64) -> Result<()> {
    if ratio > 0.0 && ratio <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("sample ratio must be in (0, 1], got {ratio}")))
    }
}

/// `ceil(ratio * n)`, treating products within rounding noise of an integer
/// as that integer, clamped to `1..=n`.
pub fn sample_size(ratio: f64, n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let x = ratio * n as f64;
    let nearest = x.round();
    let k = if (x - nearest).abs() <= 1e-9 * x.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    (k as usize).clamp(1, n)
}

/// `k` distinct indices from `0..n`, ascending. Consumes no randomness when
/// `k == n`.
fn choose(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<u32> {
    if k >= n {
        return (0..n as u32).collect();
    }
    let mut picked: Vec<u32> = index::sample(rng, n, k).into_iter().map(|i| i as u32).collect();
    picked.sort_unstable();
    picked
}

pub fn sample_res(graph: &BipartiteGraph, ratio: f64, seed: u64) -> Result<SampledSubgraph> {
    check_ratio(ratio)?;
    let m = graph.edge_count();
    if m == 0 {
        return Err(Error::NoEdges);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = choose(&mut rng, m, sample_size(ratio, m));
    let edges: Vec<(u32, u32)> = picked.iter().map(|&e| graph.edge_at(e as usize)).collect();

    let mut user_map: Vec<u32> = edges.iter().map(|e| e.0).collect();
    user_map.dedup(); // edges are in user order
    let mut merchant_map: Vec<u32> = edges.iter().map(|e| e.1).collect();
    merchant_map.sort_unstable();
    merchant_map.dedup();

    let mut merchant_local = vec![u32::MAX; graph.n_merchants()];
    for (i, &v) in merchant_map.iter().enumerate() {
        merchant_local[v as usize] = i as u32;
    }
    let mut local_user = 0u32;
    let mut pairs = Vec::with_capacity(edges.len());
    for (i, &(u, v)) in edges.iter().enumerate() {
        if i > 0 && edges[i - 1].0 != u {
            local_user += 1;
        }
        pairs.push((local_user, merchant_local[v as usize]));
    }
    let sub = BipartiteGraph::from_sorted_unique(user_map.len(), merchant_map.len(), &pairs);
    Ok(SampledSubgraph {
        graph: sub,
        user_map,
        merchant_map,
        seed,
    })
}

pub fn sample_ons(graph: &BipartiteGraph, side: Side, ratio: f64, seed: u64) -> Result<SampledSubgraph> {
    check_ratio(ratio)?;
    let n = graph.side_len(side);
    if n == 0 {
        return Err(Error::EmptySide(side));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = choose(&mut rng, n, sample_size(ratio, n));

    let mut other: Vec<u32> = picked
        .iter()
        .flat_map(|&i| match side {
            Side::User => graph.user_neighbors(i),
            Side::Merchant => graph.merchant_neighbors(i),
        })
        .copied()
        .collect();
    other.sort_unstable();
    other.dedup();

    let mut sub = match side {
        Side::User => graph.induced_subgraph(&picked, &other)?,
        Side::Merchant => graph.induced_subgraph(&other, &picked)?,
    };
    sub.seed = seed;
    Ok(sub)
}

/// Merchants are drawn before users from the same stream, so with
/// `ratio_u = 1` the merchant choice matches [`sample_ons`] on the merchant
/// side under the same seed.
pub fn sample_tns(graph: &BipartiteGraph, ratio_u: f64, ratio_v: f64, seed: u64) -> Result<SampledSubgraph> {
    check_ratio(ratio_u)?;
    check_ratio(ratio_v)?;
    let (nu, nv) = (graph.n_users(), graph.n_merchants());
    if nu == 0 {
        return Err(Error::EmptySide(Side::User));
    }
    if nv == 0 {
        return Err(Error::EmptySide(Side::Merchant));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let merchants = choose(&mut rng, nv, sample_size(ratio_v, nv));
    let users = choose(&mut rng, nu, sample_size(ratio_u, nu));
    let mut sub = graph.induced_subgraph(&users, &merchants)?;
    sub.seed = seed;
    Ok(sub)
}
