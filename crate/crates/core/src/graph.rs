//! Undirected actor/shared-link graph with interned node labels.

use alloc::borrow::ToOwned;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;
use serde::{Deserialize, Serialize};

use crate::record::Dataset;

/// Dense node handle, `0..node_count`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Actor,
    Link,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Actor => "actor",
            NodeKind::Link => "link",
        }
    }

    pub fn parse(text: &str) -> Option<NodeKind> {
        match text {
            "actor" => Some(NodeKind::Actor),
            "link" => Some(NodeKind::Link),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub label: String,
    pub kind: NodeKind,
}

/// Undirected edge with `u < v`; `weight` is the number of shares collapsed into it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("self-loop on node {0:?}")]
    SelfLoop(String),
    #[error("duplicate {kind} node {label:?}", kind = .0.as_str(), label = .1)]
    DuplicateNode(NodeKind, String),
}

/// Compressed sparse adjacency of a simple undirected graph.
///
/// Each node's neighbor slice is sorted ascending; `edge_ids` runs parallel to
/// `targets` so every incidence knows which undirected edge it belongs to.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    edge_ids: Vec<u32>,
    edge_count: usize,
}

impl Adjacency {
    /// `edges` must be free of self-loops and duplicates; the edge id of
    /// `edges[i]` is `i`.
    pub fn from_edges(node_count: usize, edges: &[(u32, u32)]) -> Self {
        let mut degree = alloc::vec![0usize; node_count];
        for &(u, v) in edges {
            debug_assert!(u != v, "self-loop");
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            let last = *offsets.last().unwrap();
            offsets.push(last + d);
        }
        let total = offsets[node_count];
        let mut targets = alloc::vec![0u32; total];
        let mut edge_ids = alloc::vec![0u32; total];
        let mut cursor: Vec<usize> = offsets[..node_count].to_vec();
        for (id, &(u, v)) in edges.iter().enumerate() {
            for (a, b) in [(u, v), (v, u)] {
                let slot = cursor[a as usize];
                targets[slot] = b;
                edge_ids[slot] = id as u32;
                cursor[a as usize] += 1;
            }
        }
        let mut adj = Adjacency {
            offsets,
            targets,
            edge_ids,
            edge_count: edges.len(),
        };
        adj.sort_slices();
        adj
    }

    fn sort_slices(&mut self) {
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for u in 0..self.node_count() {
            let range = self.offsets[u]..self.offsets[u + 1];
            let t = &self.targets[range.clone()];
            if t.windows(2).all(|w| w[0] < w[1]) {
                continue;
            }
            pairs.clear();
            pairs.extend(
                t.iter()
                    .copied()
                    .zip(self.edge_ids[range.clone()].iter().copied()),
            );
            pairs.sort_unstable();
            for (i, (t, e)) in pairs.iter().enumerate() {
                self.targets[range.start + i] = *t;
                self.edge_ids[range.start + i] = *e;
            }
        }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn degree(&self, u: u32) -> usize {
        self.offsets[u as usize + 1] - self.offsets[u as usize]
    }

    #[inline]
    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.targets[self.offsets[u as usize]..self.offsets[u as usize + 1]]
    }

    /// Edge ids aligned with [`Adjacency::neighbors`].
    #[inline]
    pub fn incident_edges(&self, u: u32) -> &[u32] {
        &self.edge_ids[self.offsets[u as usize]..self.offsets[u as usize + 1]]
    }

    /// Id of the edge `{u, v}`, if present.
    pub fn edge_between(&self, u: u32, v: u32) -> Option<u32> {
        let nbrs = self.neighbors(u);
        nbrs.binary_search(&v)
            .ok()
            .map(|i| self.incident_edges(u)[i])
    }
}

/// Bipartite-by-construction actor/link graph.
///
/// Arbitrary simple graphs can also be assembled through [`GraphBuilder`]; the
/// metrics never rely on bipartiteness.
#[derive(Clone, Debug)]
pub struct ActorLinkGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    adjacency: Adjacency,
    index: HashMap<(NodeKind, String), NodeId>,
}

impl ActorLinkGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Edges sorted by `(u, v)`; an edge's position is its id in [`Adjacency`].
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    pub fn node(&self, id: NodeId) -> Result<&Node, GraphError> {
        self.nodes
            .get(id.index())
            .ok_or(GraphError::UnknownNode(id))
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.nodes[id.index()].label
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id.index()].kind
    }

    pub fn find(&self, kind: NodeKind, label: &str) -> Option<NodeId> {
        self.index.get(&(kind, label.to_owned())).copied()
    }

    /// Unweighted neighbor count.
    pub fn degree(&self, id: NodeId) -> Result<usize, GraphError> {
        self.node(id)?;
        Ok(self.adjacency.degree(id.0))
    }

    /// Sum of share counts over incident edges.
    pub fn weighted_degree(&self, id: NodeId) -> Result<u64, GraphError> {
        self.node(id)?;
        Ok(self
            .adjacency
            .incident_edges(id.0)
            .iter()
            .map(|&e| u64::from(self.edges[e as usize].weight))
            .sum())
    }

    pub fn edge_weight(&self, a: NodeId, b: NodeId) -> Option<u32> {
        if a.index() >= self.node_count() || b.index() >= self.node_count() {
            return None;
        }
        self.adjacency
            .edge_between(a.0, b.0)
            .map(|e| self.edges[e as usize].weight)
    }

    /// `2m / n`.
    pub fn average_degree(&self) -> Result<f64, GraphError> {
        if self.nodes.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        Ok(2.0 * self.edges.len() as f64 / self.nodes.len() as f64)
    }

    /// Induced subgraph on `members`. Returns the subgraph and, for each of
    /// its node ids, the id in `self`.
    pub fn induced_subgraph(&self, members: &[NodeId]) -> (ActorLinkGraph, Vec<NodeId>) {
        let mut local = alloc::vec![u32::MAX; self.node_count()];
        let mut b = GraphBuilder::with_capacity(members.len());
        let mut parent = Vec::with_capacity(members.len());
        for &m in members {
            let node = &self.nodes[m.index()];
            local[m.index()] = b.intern(node.kind, &node.label).0;
            parent.push(m);
        }
        for e in &self.edges {
            let (lu, lv) = (local[e.u.index()], local[e.v.index()]);
            if lu != u32::MAX && lv != u32::MAX {
                b.add_weighted(NodeId(lu), NodeId(lv), e.weight)
                    .expect("parent graph has no self-loops");
            }
        }
        (b.finish(), parent)
    }
}

/// Accumulates nodes and weighted edges; parallel edges merge by summing weights.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    nodes: Vec<Node>,
    index: HashMap<(NodeKind, String), NodeId>,
    weights: HashMap<(u32, u32), u32>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(nodes: usize) -> Self {
        GraphBuilder {
            nodes: Vec::with_capacity(nodes),
            index: HashMap::with_capacity(nodes),
            weights: HashMap::new(),
        }
    }

    /// Returns the existing id for `(kind, label)` or allocates the next one.
    pub fn intern(&mut self, kind: NodeKind, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(&(kind, label.to_owned())) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            id,
            label: label.to_owned(),
            kind,
        });
        self.index.insert((kind, label.to_owned()), id);
        id
    }

    /// Like [`GraphBuilder::intern`] but fails if the node already exists.
    pub fn add_node(&mut self, kind: NodeKind, label: &str) -> Result<NodeId, GraphError> {
        if self.index.contains_key(&(kind, label.to_owned())) {
            return Err(GraphError::DuplicateNode(kind, label.to_owned()));
        }
        Ok(self.intern(kind, label))
    }

    pub fn add_weighted(&mut self, a: NodeId, b: NodeId, weight: u32) -> Result<(), GraphError> {
        let n = self.nodes.len();
        for id in [a, b] {
            if id.index() >= n {
                return Err(GraphError::UnknownNode(id));
            }
        }
        if a == b {
            return Err(GraphError::SelfLoop(self.nodes[a.index()].label.clone()));
        }
        let key = (a.0.min(b.0), a.0.max(b.0));
        *self.weights.entry(key).or_insert(0) += weight;
        Ok(())
    }

    pub fn add_edge(&mut self, a: NodeId, b: NodeId) -> Result<(), GraphError> {
        self.add_weighted(a, b, 1)
    }

    pub fn finish(self) -> ActorLinkGraph {
        let mut pairs: Vec<((u32, u32), u32)> = self.weights.into_iter().collect();
        pairs.sort_unstable();
        let endpoints: Vec<(u32, u32)> = pairs.iter().map(|&(k, _)| k).collect();
        let adjacency = Adjacency::from_edges(self.nodes.len(), &endpoints);
        let edges = pairs
            .into_iter()
            .map(|((u, v), weight)| Edge {
                u: NodeId(u),
                v: NodeId(v),
                weight,
            })
            .collect();
        ActorLinkGraph {
            nodes: self.nodes,
            edges,
            adjacency,
            index: self.index,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildOptions {
    /// Lowercase URL scheme and host before interning link labels.
    pub normalize_urls: bool,
}

/// Lowercases the scheme and host of `scheme://[userinfo@]host[:port]/...`;
/// path, query and fragment stay untouched.
pub fn normalize_url(url: &str) -> String {
    let Some(sep) = url.find("://") else {
        return url.to_owned();
    };
    let (scheme, rest) = (&url[..sep], &url[sep + 3..]);
    let authority_end = rest.find(['/', '?', '#']).unwrap_or(rest.len());
    let (authority, tail) = rest.split_at(authority_end);
    let host_start = authority.rfind('@').map_or(0, |i| i + 1);
    let mut out = String::with_capacity(url.len());
    out.push_str(&scheme.to_ascii_lowercase());
    out.push_str("://");
    out.push_str(&authority[..host_start]);
    out.push_str(&authority[host_start..].to_ascii_lowercase());
    out.push_str(tail);
    out
}

/// One actor node per distinct `account_name` that shared a link, one link
/// node per distinct `link_original` string, one edge per distinct pair
/// weighted by how many records carried it.
pub fn build_graph(dataset: &Dataset, options: BuildOptions) -> Result<ActorLinkGraph, GraphError> {
    let mut b = GraphBuilder::new();
    for record in &dataset.records {
        let Some(link) = record.link_original.as_deref() else {
            continue;
        };
        let actor = b.intern(NodeKind::Actor, &record.account_name);
        let link = if options.normalize_urls {
            b.intern(NodeKind::Link, &normalize_url(link))
        } else {
            b.intern(NodeKind::Link, link)
        };
        b.add_edge(actor, link)?;
    }
    if b.weights.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    Ok(b.finish())
}
