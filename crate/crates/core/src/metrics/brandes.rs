//! Brandes dependency accumulation on unweighted graphs.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::graph::Adjacency;
use crate::parallel::{sum_over_sources, Workers};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum BetweennessMode {
    #[default]
    Exact,
    /// Accumulate from `pivots` uniformly drawn sources and rescale by `n / pivots`.
    Sampled { pivots: usize, seed: u64 },
}

const UNSEEN: u32 = u32::MAX;

pub(crate) struct Scratch {
    dist: Vec<u32>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<u32>,
}

impl Scratch {
    pub(crate) fn new(n: usize) -> Self {
        Scratch {
            dist: vec![UNSEEN; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::new(),
        }
    }
}

#[derive(Clone, Copy)]
pub(crate) enum Target {
    Nodes,
    Edges,
}

/// Adds the dependencies of source `s` into `acc` (indexed by node or by edge
/// id). Edges with `alive[e] == false` are treated as absent.
pub(crate) fn single_source(
    adj: &Adjacency,
    alive: Option<&[bool]>,
    s: u32,
    scratch: &mut Scratch,
    target: Target,
    acc: &mut [f64],
) {
    let Scratch {
        dist,
        sigma,
        delta,
        order,
    } = scratch;
    let live = |e: u32| alive.is_none_or(|a| a[e as usize]);

    order.clear();
    dist[s as usize] = 0;
    sigma[s as usize] = 1.0;
    order.push(s);
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        let dv = dist[v as usize];
        for (&w, &e) in adj.neighbors(v).iter().zip(adj.incident_edges(v)) {
            if !live(e) {
                continue;
            }
            let w = w as usize;
            if dist[w] == UNSEEN {
                dist[w] = dv + 1;
                order.push(w as u32);
            }
            if dist[w] == dv + 1 {
                sigma[w] += sigma[v as usize];
            }
        }
    }

    for &w in order.iter().rev() {
        let wi = w as usize;
        let coeff = (1.0 + delta[wi]) / sigma[wi];
        let dw = dist[wi];
        for (&v, &e) in adj.neighbors(w).iter().zip(adj.incident_edges(w)) {
            if !live(e) || dist[v as usize].wrapping_add(1) != dw {
                continue;
            }
            let c = sigma[v as usize] * coeff;
            if let Target::Edges = target {
                acc[e as usize] += c;
            }
            delta[v as usize] += c;
        }
        if let Target::Nodes = target {
            if w != s {
                acc[wi] += delta[wi];
            }
        }
    }

    for &v in order.iter() {
        let v = v as usize;
        dist[v] = UNSEEN;
        sigma[v] = 0.0;
        delta[v] = 0.0;
    }
}

/// Sorted pivot set for `mode`: every node for exact, a seeded uniform sample
/// without replacement otherwise.
pub fn pivot_sources(node_count: usize, mode: BetweennessMode) -> Result<Vec<u32>, MetricsError> {
    match mode {
        BetweennessMode::Exact => Ok((0..node_count as u32).collect()),
        BetweennessMode::Sampled { pivots, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            draw_pivots(&mut rng, node_count, pivots)
        }
    }
}

pub(crate) fn draw_pivots(
    rng: &mut ChaCha8Rng,
    node_count: usize,
    pivots: usize,
) -> Result<Vec<u32>, MetricsError> {
    if pivots > node_count || pivots == 0 {
        return Err(MetricsError::PivotsExceedNodes {
            pivots,
            nodes: node_count,
        });
    }
    let mut picked: Vec<u32> = index::sample(rng, node_count, pivots)
        .into_iter()
        .map(|i| i as u32)
        .collect();
    picked.sort_unstable();
    Ok(picked)
}

/// Raw betweenness over unordered pairs, accumulated from `sources` and
/// rescaled by `n / |sources|`.
pub(crate) fn accumulate(
    adj: &Adjacency,
    alive: Option<&[bool]>,
    sources: &[u32],
    target: Target,
    workers: Workers,
) -> Vec<f64> {
    let n = adj.node_count();
    let len = match target {
        Target::Nodes => n,
        Target::Edges => adj.edge_count(),
    };
    let mut total = sum_over_sources(
        sources,
        len,
        workers,
        || Scratch::new(n),
        |scratch, block, acc| {
            for &s in block {
                single_source(adj, alive, s, scratch, target, acc);
            }
        },
    );
    if !sources.is_empty() {
        // Every unordered pair is seen from both endpoints.
        let factor = (n as f64 / sources.len() as f64) * 0.5;
        total.iter_mut().for_each(|x| *x *= factor);
    }
    total
}

/// Raw node betweenness `B(v) = Σ_{s<t, s≠v≠t} σ_st(v)/σ_st`.
pub fn node_betweenness(
    adj: &Adjacency,
    mode: BetweennessMode,
    workers: Workers,
) -> Result<Vec<f64>, MetricsError> {
    let sources = pivot_sources(adj.node_count(), mode)?;
    Ok(accumulate(adj, None, &sources, Target::Nodes, workers))
}

/// Raw edge betweenness indexed by edge id.
pub fn edge_betweenness(
    adj: &Adjacency,
    mode: BetweennessMode,
    workers: Workers,
) -> Result<Vec<f64>, MetricsError> {
    if adj.edge_count() == 0 {
        return Err(MetricsError::EmptyGraph);
    }
    let sources = pivot_sources(adj.node_count(), mode)?;
    Ok(accumulate(adj, None, &sources, Target::Edges, workers))
}

/// `raw / ((n-1)(n-2)/2)`; zero when `n < 3`.
pub fn normalize_node_betweenness(raw: f64, n: usize) -> f64 {
    if n < 3 {
        return 0.0;
    }
    let pairs = (n as f64 - 1.0) * (n as f64 - 2.0) / 2.0;
    raw / pairs
}
