//! Connected components and per-component summaries.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{ActorLinkGraph, Adjacency, NodeId, NodeKind};
use crate::metrics::{
    self, argmax_by_label, closeness_exact, closeness_sampled, BetweennessMode, Closeness,
    MetricsError,
};
use crate::parallel::Workers;

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    /// Returns `false` if `a` and `b` were already joined.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        true
    }
}

/// Node sets of the components, largest first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentPartition {
    pub component_of: Vec<u32>,
    pub components: Vec<Vec<NodeId>>,
}

impl ComponentPartition {
    /// Groups nodes by raw component label, sorts members ascending and orders
    /// components by size descending, ties by `min_key` of their members.
    fn from_labels<K: Ord>(labels: &[u32], min_key: impl Fn(NodeId) -> K) -> Self {
        let n = labels.len();
        let mut slot = vec![u32::MAX; n];
        let mut groups: Vec<Vec<NodeId>> = Vec::new();
        for (v, &l) in labels.iter().enumerate() {
            let s = &mut slot[l as usize];
            if *s == u32::MAX {
                *s = groups.len() as u32;
                groups.push(Vec::new());
            }
            groups[*s as usize].push(NodeId(v as u32));
        }
        let mut keyed: Vec<(K, Vec<NodeId>)> = groups
            .into_iter()
            .map(|g| {
                let k = g.iter().map(|&v| min_key(v)).min().expect("non-empty");
                (k, g)
            })
            .collect();
        keyed.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));
        let components: Vec<Vec<NodeId>> = keyed.into_iter().map(|(_, g)| g).collect();
        let mut component_of = vec![0u32; n];
        for (i, c) in components.iter().enumerate() {
            for v in c {
                component_of[v.index()] = i as u32;
            }
        }
        ComponentPartition {
            component_of,
            components,
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

fn labels_union_find(adj: &Adjacency) -> Vec<u32> {
    let mut uf = UnionFind::new(adj.node_count());
    for u in 0..adj.node_count() as u32 {
        for &v in adj.neighbors(u) {
            if u < v {
                uf.union(u, v);
            }
        }
    }
    (0..adj.node_count() as u32).map(|v| uf.find(v)).collect()
}

fn labels_bfs(adj: &Adjacency) -> Vec<u32> {
    let n = adj.node_count();
    let mut label = vec![u32::MAX; n];
    let mut queue = Vec::new();
    for s in 0..n as u32 {
        if label[s as usize] != u32::MAX {
            continue;
        }
        label[s as usize] = s;
        queue.clear();
        queue.push(s);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            for &w in adj.neighbors(v) {
                if label[w as usize] == u32::MAX {
                    label[w as usize] = s;
                    queue.push(w);
                }
            }
        }
    }
    label
}

/// Components by union-find; ties ordered by smallest node id.
pub fn components_union_find(adj: &Adjacency) -> ComponentPartition {
    ComponentPartition::from_labels(&labels_union_find(adj), |v| v)
}

/// Components by breadth-first search; ties ordered by smallest node id.
pub fn components_bfs(adj: &Adjacency) -> ComponentPartition {
    ComponentPartition::from_labels(&labels_bfs(adj), |v| v)
}

/// Components of a labeled graph; equal-sized components are ordered by their
/// smallest `(label, kind)`.
pub fn connected_components(graph: &ActorLinkGraph) -> ComponentPartition {
    ComponentPartition::from_labels(&labels_union_find(graph.adjacency()), |v| {
        (graph.label(v), graph.kind(v))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum DistanceMode {
    Exact,
    /// BFS from `pairs` sources drawn uniformly with replacement.
    Sampled {
        pairs: usize,
        seed: u64,
    },
}

/// Mean shortest-path length over connected unordered pairs; `None` when there
/// are no such pairs.
pub fn average_distance(adj: &Adjacency, mode: DistanceMode) -> Option<f64> {
    let n = adj.node_count();
    let mut bfs = metrics::Bfs::new(n);
    let mut sum = 0u64;
    let mut count = 0u64;
    let mut visit = |s: u32| {
        bfs.run(adj, s, |_, d| {
            sum += u64::from(d);
            count += 1;
        })
    };
    match mode {
        DistanceMode::Exact => (0..n as u32).for_each(&mut visit),
        DistanceMode::Sampled { pairs, seed } => {
            if n == 0 {
                return None;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..pairs {
                visit(rng.random_range(0..n as u32));
            }
        }
    }
    (count > 0).then(|| sum as f64 / count as f64)
}

/// Knobs for [`summarize_component`] and [`top_components_report`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SummaryOptions {
    /// `None` picks exact up to `exact_distance_limit` nodes, then samples.
    pub distance: Option<DistanceMode>,
    pub exact_distance_limit: usize,
    pub sampled_sources: usize,
    /// Above this many nodes closeness and betweenness are pivot-sampled.
    pub sampled_centrality_limit: usize,
    pub pivots: usize,
    pub seed: u64,
    /// Divide degree by the component's `n - 1` instead of the whole graph's.
    pub local_n: bool,
    pub workers: Workers,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions {
            distance: None,
            exact_distance_limit: 10_000,
            sampled_sources: 256,
            sampled_centrality_limit: 50_000,
            pivots: 256,
            seed: 0,
            local_n: false,
            workers: Workers::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralNode {
    pub label: String,
    pub kind: NodeKind,
    pub degree: usize,
    pub degree_centrality: f64,
    pub closeness: Option<Closeness>,
    pub betweenness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub order_rank: usize,
    pub node_count: usize,
    pub edge_count: usize,
    pub avg_distance: Option<f64>,
    pub avg_distance_mode: DistanceMode,
    /// Component-local degree-centrality argmax.
    pub max_central_node: CentralNode,
    pub closeness_argmax: String,
    pub betweenness_argmax: String,
    /// Whether the degree, closeness and betweenness argmaxes are one node.
    pub argmax_agree: bool,
    pub centrality_mode: BetweennessMode,
}

/// Summarizes `members` (one component of `graph`). `order_rank` is 1 for the largest.
pub fn summarize_component(
    graph: &ActorLinkGraph,
    members: &[NodeId],
    order_rank: usize,
    options: &SummaryOptions,
) -> Result<ComponentSummary, MetricsError> {
    let (sub, _) = graph.induced_subgraph(members);
    let adj = sub.adjacency();
    let s = sub.node_count();

    let distance_mode = options
        .distance
        .unwrap_or(if s <= options.exact_distance_limit {
            DistanceMode::Exact
        } else {
            DistanceMode::Sampled {
                pairs: options.sampled_sources,
                seed: options.seed,
            }
        });
    let avg_distance = average_distance(adj, distance_mode);

    let denom_n = if options.local_n {
        s
    } else {
        graph.node_count()
    };
    let degree_centrality = |d: usize| {
        if denom_n > 1 {
            d as f64 / (denom_n - 1) as f64
        } else {
            0.0
        }
    };

    let sampled = s > options.sampled_centrality_limit && options.pivots < s;
    let centrality_mode = if sampled {
        BetweennessMode::Sampled {
            pivots: options.pivots,
            seed: options.seed,
        }
    } else {
        BetweennessMode::Exact
    };
    let closeness: Vec<Option<Closeness>> = if sampled {
        let all: Vec<u32> = (0..s as u32).collect();
        closeness_sampled(adj, &all, options.pivots, options.seed)
    } else {
        closeness_exact(adj, options.workers)
    };
    let betweenness = metrics::node_betweenness(adj, centrality_mode, options.workers)?;

    let label = |i: usize| sub.label(NodeId(i as u32));
    let by_degree = argmax_by_label((0..s).map(|u| Some(adj.degree(u as u32) as f64)), label)
        .expect("component is non-empty");
    let by_closeness =
        argmax_by_label(closeness.iter().map(|c| c.map(|c| c.raw)), label).unwrap_or(by_degree);
    let by_betweenness =
        argmax_by_label(betweenness.iter().map(|&b| Some(b)), label).unwrap_or(by_degree);

    let top = NodeId(by_degree as u32);
    let degree = adj.degree(top.0);
    Ok(ComponentSummary {
        order_rank,
        node_count: s,
        edge_count: sub.edge_count(),
        avg_distance,
        avg_distance_mode: distance_mode,
        max_central_node: CentralNode {
            label: sub.label(top).into(),
            kind: sub.kind(top),
            degree,
            degree_centrality: degree_centrality(degree),
            closeness: closeness[by_degree],
            betweenness: betweenness[by_degree],
        },
        closeness_argmax: label(by_closeness).into(),
        betweenness_argmax: label(by_betweenness).into(),
        argmax_agree: by_degree == by_closeness && by_degree == by_betweenness,
        centrality_mode,
    })
}

/// Summaries of the `k` largest components (all of them when `k` exceeds the count).
pub fn top_components_report(
    graph: &ActorLinkGraph,
    k: usize,
    options: &SummaryOptions,
) -> Result<Vec<ComponentSummary>, MetricsError> {
    let partition = connected_components(graph);
    partition
        .components
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, members)| summarize_component(graph, members, i + 1, options))
        .collect()
}

/// Orders two partitions' components identically for comparison.
pub fn same_partition(a: &ComponentPartition, b: &ComponentPartition) -> bool {
    let canon = |p: &ComponentPartition| {
        let mut c = p.components.clone();
        c.sort_by(|x, y| match y.len().cmp(&x.len()) {
            Ordering::Equal => x[0].cmp(&y[0]),
            o => o,
        });
        c
    };
    canon(a) == canon(b)
}
