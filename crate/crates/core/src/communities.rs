//! Girvan-Newman community detection.
//!
//! Each round recomputes edge betweenness on the working graph and removes the
//! single highest edge, until the working graph has `target_k` components or
//! the removal budget runs out.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::components::connected_components;
use crate::graph::{ActorLinkGraph, Adjacency, NodeId, NodeKind};
use crate::metrics::{accumulate, draw_pivots, BetweennessMode, MetricsError, Target};
use crate::parallel::Workers;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    #[default]
    LargestComponent,
    WholeGraph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GirvanNewmanConfig {
    pub scope: Scope,
    pub target_k: usize,
    /// `None` allows removing every edge.
    pub max_removals: Option<usize>,
    pub betweenness: BetweennessMode,
    pub workers: Workers,
}

impl GirvanNewmanConfig {
    pub fn new(target_k: usize) -> Self {
        GirvanNewmanConfig {
            scope: Scope::LargestComponent,
            target_k,
            max_removals: None,
            betweenness: BetweennessMode::Exact,
            workers: Workers::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CommunityError {
    #[error("target_k must be at least 2, got {0}")]
    TargetTooSmall(usize),
    #[error("graph is empty")]
    EmptyGraph,
    #[error("input node set is not connected")]
    DisconnectedInput,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovedEdge {
    /// Endpoint labels, lexicographically ordered.
    pub edge: (String, String),
    pub edge_betweenness: f64,
    pub components_after: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeadActor {
    pub label: String,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunityPartition {
    pub scope: Scope,
    pub target_k: usize,
    /// `false` when the removal budget ran out first.
    pub target_reached: bool,
    pub betweenness_mode: BetweennessMode,
    /// Node ids of the input graph, largest community first, members ascending.
    pub communities: Vec<Vec<NodeId>>,
    pub removal_log: Vec<RemovedEdge>,
    /// Highest-degree actor of each community, if it has one.
    pub lead_actor_per_community: Vec<Option<LeadActor>>,
    /// Newman modularity of the final partition on the analyzed subgraph.
    pub modularity: f64,
}

impl CommunityPartition {
    /// `community_of[v]` for every node id of the input graph, `None` outside the scope.
    pub fn assignment(&self, node_count: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; node_count];
        for (i, c) in self.communities.iter().enumerate() {
            for v in c {
                out[v.index()] = Some(i);
            }
        }
        out
    }
}

pub fn girvan_newman(
    graph: &ActorLinkGraph,
    config: &GirvanNewmanConfig,
) -> Result<CommunityPartition, CommunityError> {
    if graph.node_count() == 0 {
        return Err(CommunityError::EmptyGraph);
    }
    match config.scope {
        Scope::WholeGraph => {
            let all: Vec<NodeId> = (0..graph.node_count() as u32).map(NodeId).collect();
            run(graph, &all, config)
        }
        Scope::LargestComponent => {
            let partition = connected_components(graph);
            run(graph, &partition.components[0], config)
        }
    }
}

/// Runs on a caller-chosen node set that must induce a connected subgraph.
pub fn girvan_newman_connected(
    graph: &ActorLinkGraph,
    members: &[NodeId],
    config: &GirvanNewmanConfig,
) -> Result<CommunityPartition, CommunityError> {
    if members.is_empty() {
        return Err(CommunityError::EmptyGraph);
    }
    let (sub, _) = graph.induced_subgraph(members);
    if connected_components(&sub).len() != 1 {
        return Err(CommunityError::DisconnectedInput);
    }
    run(graph, members, config)
}

fn run(
    graph: &ActorLinkGraph,
    members: &[NodeId],
    config: &GirvanNewmanConfig,
) -> Result<CommunityPartition, CommunityError> {
    if config.target_k < 2 {
        return Err(CommunityError::TargetTooSmall(config.target_k));
    }
    let (sub, parent) = graph.induced_subgraph(members);
    let adj = sub.adjacency();
    let n = sub.node_count();
    let m = sub.edge_count();
    let max_removals = config.max_removals.unwrap_or(m);

    let mut alive = vec![true; m];
    let mut labels = live_components(adj, &alive);
    let mut components = count_labels(&labels);
    let mut log = Vec::new();
    let mut rng = match config.betweenness {
        BetweennessMode::Sampled { seed, .. } => ChaCha8Rng::seed_from_u64(seed),
        BetweennessMode::Exact => ChaCha8Rng::seed_from_u64(0),
    };
    let all_sources: Vec<u32> = (0..n as u32).collect();

    while components < config.target_k && log.len() < max_removals && log.len() < m {
        let sources = match config.betweenness {
            BetweennessMode::Exact => all_sources.clone(),
            BetweennessMode::Sampled { pivots, .. } => draw_pivots(&mut rng, n, pivots)?,
        };
        let scores = accumulate(adj, Some(&alive), &sources, Target::Edges, config.workers);
        let e = pick_edge(&sub, &alive, &scores);
        alive[e] = false;
        let edge = sub.edges()[e];
        if !reachable(adj, &alive, edge.u.0, edge.v.0) {
            components += 1;
        }
        let (a, b) = ordered_labels(&sub, e);
        log.push(RemovedEdge {
            edge: (a.into(), b.into()),
            edge_betweenness: scores[e],
            components_after: components,
        });
    }
    if !log.is_empty() {
        labels = live_components(adj, &alive);
    }

    // Group, order by size descending then smallest label.
    let mut groups: Vec<Vec<u32>> = Vec::new();
    let mut slot = vec![u32::MAX; n];
    for (v, &l) in labels.iter().enumerate() {
        let l = l as usize;
        if slot[l] == u32::MAX {
            slot[l] = groups.len() as u32;
            groups.push(Vec::new());
        }
        groups[slot[l] as usize].push(v as u32);
    }
    let min_label = |g: &Vec<u32>| g.iter().map(|&v| sub.label(NodeId(v))).min().unwrap();
    groups.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then_with(|| min_label(a).cmp(min_label(b)))
    });

    let lead_actor_per_community = groups
        .iter()
        .map(|g| {
            g.iter()
                .filter(|&&v| sub.kind(NodeId(v)) == NodeKind::Actor)
                .max_by(|&&a, &&b| {
                    adj.degree(a)
                        .cmp(&adj.degree(b))
                        .then_with(|| sub.label(NodeId(b)).cmp(sub.label(NodeId(a))))
                })
                .map(|&v| LeadActor {
                    label: sub.label(NodeId(v)).into(),
                    degree: adj.degree(v),
                })
        })
        .collect();

    let modularity = modularity(adj, &groups);
    let communities = groups
        .into_iter()
        .map(|g| {
            let mut ids: Vec<NodeId> = g.into_iter().map(|v| parent[v as usize]).collect();
            ids.sort_unstable();
            ids
        })
        .collect();

    Ok(CommunityPartition {
        scope: config.scope,
        target_k: config.target_k,
        target_reached: components >= config.target_k,
        betweenness_mode: config.betweenness,
        communities,
        removal_log: log,
        lead_actor_per_community,
        modularity,
    })
}

fn ordered_labels(g: &ActorLinkGraph, e: usize) -> (&str, &str) {
    let edge = g.edges()[e];
    let (a, b) = (g.label(edge.u), g.label(edge.v));
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Highest-scoring live edge; scores within `1e-9` relative of the maximum tie
/// and go to the lexicographically smallest label pair.
fn pick_edge(g: &ActorLinkGraph, alive: &[bool], scores: &[f64]) -> usize {
    let best = scores
        .iter()
        .zip(alive)
        .filter(|(_, &a)| a)
        .map(|(&s, _)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * best.abs().max(1.0);
    (0..scores.len())
        .filter(|&e| alive[e] && scores[e] >= best - tol)
        .min_by(
            |&a, &b| match ordered_labels(g, a).cmp(&ordered_labels(g, b)) {
                Ordering::Equal => a.cmp(&b),
                o => o,
            },
        )
        .expect("at least one live edge")
}

fn live_components(adj: &Adjacency, alive: &[bool]) -> Vec<u32> {
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
            for (&w, &e) in adj.neighbors(v).iter().zip(adj.incident_edges(v)) {
                if alive[e as usize] && label[w as usize] == u32::MAX {
                    label[w as usize] = s;
                    queue.push(w);
                }
            }
        }
    }
    label
}

fn count_labels(labels: &[u32]) -> usize {
    labels
        .iter()
        .enumerate()
        .filter(|&(v, &l)| v as u32 == l)
        .count()
}

fn reachable(adj: &Adjacency, alive: &[bool], from: u32, to: u32) -> bool {
    let mut seen = vec![false; adj.node_count()];
    let mut stack = vec![from];
    seen[from as usize] = true;
    while let Some(v) = stack.pop() {
        if v == to {
            return true;
        }
        for (&w, &e) in adj.neighbors(v).iter().zip(adj.incident_edges(v)) {
            if alive[e as usize] && !seen[w as usize] {
                seen[w as usize] = true;
                stack.push(w);
            }
        }
    }
    false
}

/// `Q = Σ_c [ L_c / m - (D_c / 2m)^2 ]` on the unweighted graph.
pub fn modularity(adj: &Adjacency, groups: &[Vec<u32>]) -> f64 {
    let m = adj.edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let mut community = vec![usize::MAX; adj.node_count()];
    for (i, g) in groups.iter().enumerate() {
        for &v in g {
            community[v as usize] = i;
        }
    }
    let mut q = 0.0;
    for (i, g) in groups.iter().enumerate() {
        let mut internal = 0usize;
        let mut degree = 0usize;
        for &v in g {
            degree += adj.degree(v);
            internal += adj
                .neighbors(v)
                .iter()
                .filter(|&&w| community[w as usize] == i && w > v)
                .count();
        }
        let share = degree as f64 / (2.0 * m);
        q += internal as f64 / m - share * share;
    }
    q
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedMember {
    pub label: String,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunitySummary {
    pub index: usize,
    pub size: usize,
    pub internal_edges: usize,
    pub top_actors: Vec<RankedMember>,
    pub top_links: Vec<RankedMember>,
}

/// Per-community size, internal edge count and the ten highest-degree actors
/// and links, degrees taken in `graph`.
pub fn community_summary(
    partition: &CommunityPartition,
    graph: &ActorLinkGraph,
) -> Vec<CommunitySummary> {
    let assignment = partition.assignment(graph.node_count());
    let adj = graph.adjacency();
    let mut summaries: Vec<CommunitySummary> = partition
        .communities
        .iter()
        .enumerate()
        .map(|(index, members)| {
            let internal_edges = members
                .iter()
                .map(|v| {
                    adj.neighbors(v.0)
                        .iter()
                        .filter(|&&w| w > v.0 && assignment[w as usize] == Some(index))
                        .count()
                })
                .sum();
            let top = |kind: NodeKind| {
                let mut ranked: Vec<RankedMember> = members
                    .iter()
                    .filter(|&&v| graph.kind(v) == kind)
                    .map(|&v| RankedMember {
                        label: graph.label(v).into(),
                        degree: adj.degree(v.0),
                    })
                    .collect();
                ranked.sort_by(|a, b| b.degree.cmp(&a.degree).then_with(|| a.label.cmp(&b.label)));
                ranked.truncate(10);
                ranked
            };
            CommunitySummary {
                index,
                size: members.len(),
                internal_edges,
                top_actors: top(NodeKind::Actor),
                top_links: top(NodeKind::Link),
            }
        })
        .collect();
    summaries.sort_by(|a, b| b.size.cmp(&a.size).then(a.index.cmp(&b.index)));
    summaries
}
