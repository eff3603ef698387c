use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::Adjacency;
use crate::parallel::{map_items, Workers};

/// `raw = 1 / Σ d(v, u)` over the node's component; `normalized = (|comp| - 1) · raw`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Closeness {
    pub raw: f64,
    pub normalized: f64,
}

impl Closeness {
    fn from_sum(distance_sum: f64, reached: usize) -> Option<Closeness> {
        if reached == 0 || distance_sum <= 0.0 {
            return None;
        }
        let raw = 1.0 / distance_sum;
        Some(Closeness {
            raw,
            normalized: reached as f64 * raw,
        })
    }
}

/// Reusable BFS buffers.
pub(crate) struct Bfs {
    dist: Vec<u32>,
    queue: Vec<u32>,
}

impl Bfs {
    pub(crate) fn new(n: usize) -> Self {
        Bfs {
            dist: vec![u32::MAX; n],
            queue: Vec::new(),
        }
    }

    /// Visits `s`'s component; calls `visit(node, distance)` for every reached
    /// node other than `s`.
    pub(crate) fn run(&mut self, adj: &Adjacency, s: u32, mut visit: impl FnMut(u32, u32)) {
        self.queue.clear();
        self.queue.push(s);
        self.dist[s as usize] = 0;
        let mut head = 0;
        while head < self.queue.len() {
            let v = self.queue[head];
            head += 1;
            let d = self.dist[v as usize];
            if v != s {
                visit(v, d);
            }
            for &w in adj.neighbors(v) {
                if self.dist[w as usize] == u32::MAX {
                    self.dist[w as usize] = d + 1;
                    self.queue.push(w);
                }
            }
        }
        for &v in &self.queue {
            self.dist[v as usize] = u32::MAX;
        }
    }
}

/// Exact closeness by one BFS per node. Singletons get `None`.
pub fn closeness_exact(adj: &Adjacency, workers: Workers) -> Vec<Option<Closeness>> {
    let n = adj.node_count();
    let nodes: Vec<u32> = (0..n as u32).collect();
    map_items(
        &nodes,
        workers,
        || Bfs::new(n),
        |bfs, v| {
            let mut sum = 0u64;
            let mut reached = 0usize;
            bfs.run(adj, v, |_, d| {
                sum += u64::from(d);
                reached += 1;
            });
            Closeness::from_sum(sum as f64, reached)
        },
    )
}

/// Closeness for the members of one connected component, estimating each
/// distance sum as `|C| / |S| · Σ_{s∈S} d(s, v)` over `pivots` sampled sources.
/// Falls back to exact sums when `pivots >= |C|`. Output is aligned with `members`.
pub fn closeness_sampled(
    adj: &Adjacency,
    members: &[u32],
    pivots: usize,
    seed: u64,
) -> Vec<Option<Closeness>> {
    let n = adj.node_count();
    let size = members.len();
    if size < 2 {
        return vec![None; size];
    }
    let mut bfs = Bfs::new(n);
    let mut sums = vec![0u64; n];
    let sources: Vec<u32> = if pivots >= size {
        members.to_vec()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked: Vec<u32> = index::sample(&mut rng, size, pivots.max(1))
            .into_iter()
            .map(|i| members[i])
            .collect();
        picked.sort_unstable();
        picked
    };
    for &s in &sources {
        bfs.run(adj, s, |v, d| sums[v as usize] += u64::from(d));
    }
    let scale = size as f64 / sources.len() as f64;
    members
        .iter()
        .map(|&v| Closeness::from_sum(sums[v as usize] as f64 * scale, size - 1))
        .collect()
}
