//! Bipartite user/merchant graph stored as a pair of mirrored CSR arrays.
//!
//! Users and merchants are addressed by dense `u32` indices. External labels
//! live in [`NodeLabels`], next to the graph rather than inside it, so that
//! sampled subgraphs and residual graphs can share one label table.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    User,
    Merchant,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::User => Side::Merchant,
            Side::Merchant => Side::User,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::User => f.write_str("user"),
            Side::Merchant => f.write_str("merchant"),
        }
    }
}

/// A vertex on either side. Orders users before merchants, then by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeRef {
    pub side: Side,
    pub index: u32,
}

impl NodeRef {
    pub fn user(index: u32) -> Self {
        NodeRef { side: Side::User, index }
    }

    pub fn merchant(index: u32) -> Self {
        NodeRef { side: Side::Merchant, index }
    }
}

/// Simple bipartite graph. Immutable once built; every derived graph is a
/// fresh value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    user_offsets: Vec<usize>,
    user_adj: Vec<u32>,
    merchant_offsets: Vec<usize>,
    merchant_adj: Vec<u32>,
}

impl BipartiteGraph {
    pub fn empty(n_users: usize, n_merchants: usize) -> Self {
        BipartiteGraph {
            user_offsets: vec![0; n_users + 1],
            user_adj: Vec::new(),
            merchant_offsets: vec![0; n_merchants + 1],
            merchant_adj: Vec::new(),
        }
    }

    /// Builds a graph from `(user, merchant)` pairs. Duplicate pairs collapse
    /// to one edge; the number collapsed is returned alongside.
    pub fn from_edges<I>(n_users: usize, n_merchants: usize, edges: I) -> Result<(Self, usize)>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for (u, v) in edges {
            check_index(Side::User, u as usize, n_users)?;
            check_index(Side::Merchant, v as usize, n_merchants)?;
            pairs.push((u, v));
        }
        let raw = pairs.len();
        pairs.sort_unstable();
        pairs.dedup();
        let duplicates = raw - pairs.len();
        Ok((Self::from_sorted_unique(n_users, n_merchants, &pairs), duplicates))
    }

    /// `pairs` must be sorted, deduplicated and in range.
    pub(crate) fn from_sorted_unique(n_users: usize, n_merchants: usize, pairs: &[(u32, u32)]) -> Self {
        let mut user_offsets = vec![0usize; n_users + 1];
        let mut merchant_offsets = vec![0usize; n_merchants + 1];
        for &(u, v) in pairs {
            user_offsets[u as usize + 1] += 1;
            merchant_offsets[v as usize + 1] += 1;
        }
        for i in 0..n_users {
            user_offsets[i + 1] += user_offsets[i];
        }
        for j in 0..n_merchants {
            merchant_offsets[j + 1] += merchant_offsets[j];
        }
        let user_adj: Vec<u32> = pairs.iter().map(|&(_, v)| v).collect();
        // users arrive in ascending order, so each merchant list comes out sorted
        let mut merchant_adj = vec![0u32; pairs.len()];
        let mut cursor = merchant_offsets.clone();
        for &(u, v) in pairs {
            merchant_adj[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        BipartiteGraph {
            user_offsets,
            user_adj,
            merchant_offsets,
            merchant_adj,
        }
    }

    pub fn n_users(&self) -> usize {
        self.user_offsets.len() - 1
    }

    pub fn n_merchants(&self) -> usize {
        self.merchant_offsets.len() - 1
    }

    pub fn side_len(&self, side: Side) -> usize {
        match side {
            Side::User => self.n_users(),
            Side::Merchant => self.n_merchants(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_users() + self.n_merchants()
    }

    pub fn edge_count(&self) -> usize {
        self.user_adj.len()
    }

    pub fn user_neighbors(&self, u: u32) -> &[u32] {
        let u = u as usize;
        &self.user_adj[self.user_offsets[u]..self.user_offsets[u + 1]]
    }

    pub fn merchant_neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.merchant_adj[self.merchant_offsets[v]..self.merchant_offsets[v + 1]]
    }

    pub fn neighbors(&self, node: NodeRef) -> &[u32] {
        match node.side {
            Side::User => self.user_neighbors(node.index),
            Side::Merchant => self.merchant_neighbors(node.index),
        }
    }

    pub fn degree(&self, node: NodeRef) -> usize {
        self.neighbors(node).len()
    }

    pub fn degrees(&self, side: Side) -> Vec<usize> {
        let offsets = match side {
            Side::User => &self.user_offsets,
            Side::Merchant => &self.merchant_offsets,
        };
        offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        (u as usize) < self.n_users() && self.user_neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges in ascending `(user, merchant)` order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n_users() as u32).flat_map(move |u| self.user_neighbors(u).iter().map(move |&v| (u, v)))
    }

    /// The `e`-th edge in [`edges`](Self::edges) order.
    pub fn edge_at(&self, e: usize) -> (u32, u32) {
        assert!(e < self.edge_count(), "edge {e} out of range");
        let u = self.user_offsets.partition_point(|&off| off <= e) - 1;
        (u as u32, self.user_adj[e])
    }

    /// Subgraph induced by the given user and merchant index sets. Local ids
    /// follow ascending original id.
    pub fn induced_subgraph(&self, users: &[u32], merchants: &[u32]) -> Result<SampledSubgraph> {
        let user_map = normalize_subset(Side::User, users, self.n_users())?;
        let merchant_map = normalize_subset(Side::Merchant, merchants, self.n_merchants())?;

        let mut merchant_local = vec![u32::MAX; self.n_merchants()];
        for (local, &orig) in merchant_map.iter().enumerate() {
            merchant_local[orig as usize] = local as u32;
        }
        let mut pairs = Vec::new();
        for (lu, &u) in user_map.iter().enumerate() {
            for &v in self.user_neighbors(u) {
                let lv = merchant_local[v as usize];
                if lv != u32::MAX {
                    pairs.push((lu as u32, lv));
                }
            }
        }
        // rows visited in order, merchant ids remapped monotonically: already sorted
        let graph = BipartiteGraph::from_sorted_unique(user_map.len(), merchant_map.len(), &pairs);
        Ok(SampledSubgraph {
            graph,
            user_map,
            merchant_map,
            seed: 0,
        })
    }

    /// Drops every edge with both endpoints in `subset`. Node sets are kept,
    /// so removed blocks may leave isolated nodes behind.
    pub fn remove_edges(&self, subset: &[NodeRef]) -> BipartiteGraph {
        if subset.is_empty() {
            return self.clone();
        }
        let mut in_users = vec![false; self.n_users()];
        let mut in_merchants = vec![false; self.n_merchants()];
        for node in subset {
            match node.side {
                Side::User => in_users[node.index as usize] = true,
                Side::Merchant => in_merchants[node.index as usize] = true,
            }
        }
        let kept: Vec<(u32, u32)> = self
            .edges()
            .filter(|&(u, v)| !(in_users[u as usize] && in_merchants[v as usize]))
            .collect();
        BipartiteGraph::from_sorted_unique(self.n_users(), self.n_merchants(), &kept)
    }
}

fn check_index(side: Side, index: usize, len: usize) -> Result<()> {
    if index < len {
        Ok(())
    } else {
        Err(Error::OutOfRange { side, index, len })
    }
}

fn normalize_subset(side: Side, subset: &[u32], len: usize) -> Result<Vec<u32>> {
    let mut out = subset.to_vec();
    for &i in &out {
        check_index(side, i as usize, len)?;
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// A subgraph with local→original id maps for both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledSubgraph {
    pub graph: BipartiteGraph,
    pub user_map: Vec<u32>,
    pub merchant_map: Vec<u32>,
    pub seed: u64,
}

impl SampledSubgraph {
    pub fn original(&self, node: NodeRef) -> NodeRef {
        let index = match node.side {
            Side::User => self.user_map[node.index as usize],
            Side::Merchant => self.merchant_map[node.index as usize],
        };
        NodeRef { side: node.side, index }
    }

    /// Inverse of [`original`](Self::original); `None` if the node was not sampled.
    pub fn local(&self, node: NodeRef) -> Option<NodeRef> {
        let map = match node.side {
            Side::User => &self.user_map,
            Side::Merchant => &self.merchant_map,
        };
        map.binary_search(&node.index).ok().map(|i| NodeRef {
            side: node.side,
            index: i as u32,
        })
    }

    /// Edges translated back to original ids.
    pub fn original_edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.graph
            .edges()
            .map(|(u, v)| (self.user_map[u as usize], self.merchant_map[v as usize]))
    }
}

/// External string labels for both sides, indexed by dense id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeLabels {
    users: Vec<String>,
    merchants: Vec<String>,
    user_index: HashMap<String, u32>,
    merchant_index: HashMap<String, u32>,
}

impl NodeLabels {
    pub fn new(users: Vec<String>, merchants: Vec<String>) -> Result<Self> {
        let user_index = index_labels(Side::User, &users)?;
        let merchant_index = index_labels(Side::Merchant, &merchants)?;
        Ok(NodeLabels {
            users,
            merchants,
            user_index,
            merchant_index,
        })
    }

    pub fn label(&self, node: NodeRef) -> &str {
        match node.side {
            Side::User => &self.users[node.index as usize],
            Side::Merchant => &self.merchants[node.index as usize],
        }
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn merchants(&self) -> &[String] {
        &self.merchants
    }

    pub fn lookup(&self, side: Side, label: &str) -> Option<u32> {
        match side {
            Side::User => self.user_index.get(label).copied(),
            Side::Merchant => self.merchant_index.get(label).copied(),
        }
    }

    /// Returns the id for `label`, assigning the next free one on first sight.
    fn intern(&mut self, side: Side, label: &str) -> u32 {
        let (index, list) = match side {
            Side::User => (&mut self.user_index, &mut self.users),
            Side::Merchant => (&mut self.merchant_index, &mut self.merchants),
        };
        if let Some(&id) = index.get(label) {
            return id;
        }
        let id = list.len() as u32;
        list.push(label.to_owned());
        index.insert(label.to_owned(), id);
        id
    }
}

fn index_labels(side: Side, labels: &[String]) -> Result<HashMap<String, u32>> {
    let mut map = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if map.insert(l.clone(), i as u32).is_some() {
            return Err(Error::Config(format!("duplicate {side} label {l:?}")));
        }
    }
    Ok(map)
}

#[derive(Debug, Clone)]
pub struct ParsedEdgeList {
    pub graph: BipartiteGraph,
    pub labels: NodeLabels,
    /// Edge lines that repeated an earlier `(user, merchant)` pair.
    pub duplicate_edges: usize,
}

/// Reads `user<TAB>merchant` lines. `#` lines and blank lines are skipped;
/// labels get dense ids in order of first appearance.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<ParsedEdgeList> {
    let mut labels = NodeLabels::default();
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected 2 non-empty tab-separated fields, found {}", fields.len()),
            });
        }
        let u = labels.intern(Side::User, fields[0]);
        let v = labels.intern(Side::Merchant, fields[1]);
        pairs.push((u, v));
    }
    let (graph, duplicate_edges) = BipartiteGraph::from_edges(labels.users.len(), labels.merchants.len(), pairs)?;
    Ok(ParsedEdgeList {
        graph,
        labels,
        duplicate_edges,
    })
}

/// Writes the edge-list format read by [`parse_edge_list`]. Isolated nodes
/// have no line and do not survive a round trip.
pub fn write_edge_list<W: Write>(graph: &BipartiteGraph, labels: &NodeLabels, mut out: W) -> Result<()> {
    for (u, v) in graph.edges() {
        writeln!(out, "{}\t{}", labels.users[u as usize], labels.merchants[v as usize])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a ground-truth file: one user label per line, `#` comments and
/// blank lines ignored.
pub fn read_label_file<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let label = line.trim_end_matches(['\r', '\n']);
        if label.trim().is_empty() || label.starts_with('#') {
            continue;
        }
        out.push(label.to_owned());
    }
    Ok(out)
}
