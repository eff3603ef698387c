//! Brute-force reference implementations for small graphs.

use coordnet_core::{ActorLinkGraph, GraphBuilder, NodeId, NodeKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const INF: u32 = u32::MAX;

/// Graph whose node `i` is the actor labeled `n{i:02}`.
pub fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> ActorLinkGraph {
    let mut b = GraphBuilder::new();
    let ids: Vec<NodeId> = (0..n)
        .map(|i| b.add_node(NodeKind::Actor, &format!("n{i:02}")).unwrap())
        .collect();
    for &(u, v) in edges {
        b.add_edge(ids[u], ids[v]).unwrap();
    }
    b.finish()
}

/// Erdős–Rényi G(n, p) edge list from a seeded stream.
pub fn gnp(n: usize, p: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Plain adjacency matrix of `graph`.
pub fn matrix(graph: &ActorLinkGraph) -> Vec<Vec<bool>> {
    let n = graph.node_count();
    let mut m = vec![vec![false; n]; n];
    for e in graph.edges() {
        m[e.u.index()][e.v.index()] = true;
        m[e.v.index()][e.u.index()] = true;
    }
    m
}

/// All-pairs hop distances by Floyd–Warshall.
pub fn floyd_warshall(m: &[Vec<bool>]) -> Vec<Vec<u32>> {
    let n = m.len();
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if m[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != INF && d[k][j] != INF && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Every shortest path from `s` to `t`, as node sequences.
pub fn shortest_paths(m: &[Vec<bool>], d: &[Vec<u32>], s: usize, t: usize) -> Vec<Vec<usize>> {
    fn walk(
        m: &[Vec<bool>],
        d: &[Vec<u32>],
        t: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let cur = *path.last().unwrap();
        if cur == t {
            out.push(path.clone());
            return;
        }
        for w in 0..m.len() {
            if m[cur][w] && d[w][t] != INF && d[w][t] + 1 == d[cur][t] {
                path.push(w);
                walk(m, d, t, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    if d[s][t] != INF {
        walk(m, d, t, &mut vec![s], &mut out);
    }
    out
}

/// Node and edge betweenness by enumerating shortest paths over unordered pairs.
/// Edge values are keyed by `(min, max)` node index.
pub fn betweenness(m: &[Vec<bool>]) -> (Vec<f64>, std::collections::BTreeMap<(usize, usize), f64>) {
    let n = m.len();
    let d = floyd_warshall(m);
    let mut nodes = vec![0.0; n];
    let mut edges = std::collections::BTreeMap::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if x && i < j {
                edges.insert((i, j), 0.0);
            }
        }
    }
    for s in 0..n {
        for t in s + 1..n {
            let paths = shortest_paths(m, &d, s, t);
            if paths.is_empty() {
                continue;
            }
            let share = 1.0 / paths.len() as f64;
            for p in &paths {
                for &v in &p[1..p.len() - 1] {
                    nodes[v] += share;
                }
                for w in p.windows(2) {
                    *edges.get_mut(&(w[0].min(w[1]), w[0].max(w[1]))).unwrap() += share;
                }
            }
        }
    }
    (nodes, edges)
}

/// `(Σ distances, reachable count)` from each node, self excluded.
pub fn distance_sums(d: &[Vec<u32>]) -> Vec<(u64, usize)> {
    d.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|&(j, &x)| j != i && x != INF)
                .fold((0u64, 0usize), |(s, c), (_, &x)| (s + u64::from(x), c + 1))
        })
        .collect()
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Hop distances from `s` by a plain queue BFS over the matrix.
pub fn bfs_distances(m: &[Vec<bool>], s: usize) -> Vec<u32> {
    let mut d = vec![INF; m.len()];
    let mut queue = std::collections::VecDeque::from([s]);
    d[s] = 0;
    while let Some(v) = queue.pop_front() {
        for (w, &adjacent) in m[v].iter().enumerate() {
            if adjacent && d[w] == INF {
                d[w] = d[v] + 1;
                queue.push_back(w);
            }
        }
    }
    d
}

/// Connected graph on `n` nodes: a random spanning tree plus G(n, p) extras.
pub fn connected_graph(n: usize, p: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut edges: std::collections::BTreeSet<(usize, usize)> =
        (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    edges.extend(gnp(n, p, seed));
    edges.into_iter().collect()
}
