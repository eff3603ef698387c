//! Degree, closeness and betweenness centrality.

mod brandes;
mod closeness;

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use brandes::{
    edge_betweenness, node_betweenness, normalize_node_betweenness, pivot_sources, BetweennessMode,
};
pub use closeness::{closeness_exact, closeness_sampled, Closeness};

pub(crate) use brandes::{accumulate, draw_pivots, Target};
pub(crate) use closeness::Bfs;

use crate::graph::{ActorLinkGraph, NodeId};
use crate::parallel::Workers;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("graph is empty")]
    EmptyGraph,
    #[error("degree centrality needs at least two nodes")]
    SingleNode,
    #[error("{pivots} pivots requested but the graph has {nodes} nodes")]
    PivotsExceedNodes { pivots: usize, nodes: usize },
    #[error("column {0:?} has not been computed")]
    ColumnNotComputed(Column),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetweennessScore {
    pub raw: f64,
    pub normalized: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralityRow {
    pub node: NodeId,
    pub degree: usize,
    pub degree_centrality: f64,
    pub closeness: Option<Closeness>,
    pub betweenness: Option<BetweennessScore>,
}

/// Per-node centralities for one graph. Rows are in node-id order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralityTable {
    /// Denominator basis for degree centrality (`degree / (n - 1)`).
    pub graph_node_count: usize,
    pub rows: Vec<CentralityRow>,
    pub closeness_computed: bool,
    pub betweenness_mode: Option<BetweennessMode>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    Degree,
    DegreeCentrality,
    Closeness,
    ClosenessNormalized,
    Betweenness,
    BetweennessNormalized,
}

/// Degree and `degree / (n - 1)` for every node. `n` defaults to the graph's
/// own node count; pass `full_graph_nodes` to keep a parent graph's
/// denominator when `graph` is a subgraph.
pub fn degree_centrality(
    graph: &ActorLinkGraph,
    full_graph_nodes: Option<usize>,
) -> Result<CentralityTable, MetricsError> {
    let n = full_graph_nodes.unwrap_or(graph.node_count());
    match n {
        0 => return Err(MetricsError::EmptyGraph),
        1 => return Err(MetricsError::SingleNode),
        _ => {}
    }
    let adj = graph.adjacency();
    let denom = (n - 1) as f64;
    let rows = (0..graph.node_count() as u32)
        .map(|u| {
            let degree = adj.degree(u);
            CentralityRow {
                node: NodeId(u),
                degree,
                degree_centrality: degree as f64 / denom,
                closeness: None,
                betweenness: None,
            }
        })
        .collect();
    Ok(CentralityTable {
        graph_node_count: n,
        rows,
        closeness_computed: false,
        betweenness_mode: None,
    })
}

impl CentralityTable {
    /// Fills the closeness column with exact per-component values.
    pub fn fill_closeness(&mut self, graph: &ActorLinkGraph, workers: Workers) {
        let values = closeness_exact(graph.adjacency(), workers);
        for (row, c) in self.rows.iter_mut().zip(values) {
            row.closeness = c;
        }
        self.closeness_computed = true;
    }

    /// Fills the betweenness column; normalization uses the graph's own node count.
    pub fn fill_betweenness(
        &mut self,
        graph: &ActorLinkGraph,
        mode: BetweennessMode,
        workers: Workers,
    ) -> Result<(), MetricsError> {
        let raw = node_betweenness(graph.adjacency(), mode, workers)?;
        let n = graph.node_count();
        for (row, b) in self.rows.iter_mut().zip(raw) {
            row.betweenness = Some(BetweennessScore {
                raw: b,
                normalized: normalize_node_betweenness(b, n),
            });
        }
        self.betweenness_mode = Some(mode);
        Ok(())
    }

    pub fn is_computed(&self, column: Column) -> bool {
        match column {
            Column::Degree | Column::DegreeCentrality => true,
            Column::Closeness | Column::ClosenessNormalized => self.closeness_computed,
            Column::Betweenness | Column::BetweennessNormalized => self.betweenness_mode.is_some(),
        }
    }

    /// Value of `column` for a row; `None` where the column does not apply
    /// (closeness of a singleton) or is not computed.
    pub fn value(&self, row: &CentralityRow, column: Column) -> Option<f64> {
        match column {
            Column::Degree => Some(row.degree as f64),
            Column::DegreeCentrality => Some(row.degree_centrality),
            Column::Closeness => row.closeness.map(|c| c.raw),
            Column::ClosenessNormalized => row.closeness.map(|c| c.normalized),
            Column::Betweenness => row.betweenness.map(|b| b.raw),
            Column::BetweennessNormalized => row.betweenness.map(|b| b.normalized),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedNode {
    pub node: NodeId,
    pub label: String,
    pub value: f64,
}

/// The `k` highest values of `column`, ties broken by ascending label.
pub fn top_k(
    table: &CentralityTable,
    graph: &ActorLinkGraph,
    column: Column,
    k: usize,
) -> Result<Vec<RankedNode>, MetricsError> {
    if !table.is_computed(column) {
        return Err(MetricsError::ColumnNotComputed(column));
    }
    let mut ranked: Vec<(NodeId, f64)> = table
        .rows
        .iter()
        .filter_map(|row| table.value(row, column).map(|v| (row.node, v)))
        .collect();
    ranked.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| graph.label(a.0).cmp(graph.label(b.0)))
            .then_with(|| a.0.cmp(&b.0))
    });
    ranked.truncate(k);
    Ok(ranked
        .into_iter()
        .map(|(node, value)| RankedNode {
            node,
            label: graph.label(node).into(),
            value,
        })
        .collect())
}

/// `(degree, degree_centrality)` pairs ordered by degree descending, then label.
pub fn scatter_rows(table: &CentralityTable, graph: &ActorLinkGraph) -> Vec<(usize, f64)> {
    let mut rows: Vec<&CentralityRow> = table.rows.iter().collect();
    rows.sort_by(|a, b| {
        b.degree
            .cmp(&a.degree)
            .then_with(|| graph.label(a.node).cmp(graph.label(b.node)))
            .then_with(|| a.node.cmp(&b.node))
    });
    rows.iter()
        .map(|r| (r.degree, r.degree_centrality))
        .collect()
}

/// Index of the largest value, ties within `1e-9` relative going to the smaller
/// label. `None` entries are skipped.
pub fn argmax_by_label<'a>(
    values: impl Iterator<Item = Option<f64>>,
    label: impl Fn(usize) -> &'a str,
) -> Option<usize> {
    let values: Vec<Option<f64>> = values.collect();
    let best = values
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return None;
    }
    let tol = 1e-9 * best.abs().max(1.0);
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_some_and(|v| v >= best - tol))
        .map(|(i, _)| i)
        .min_by(|&a, &b| match label(a).cmp(label(b)) {
            Ordering::Equal => a.cmp(&b),
            o => o,
        })
}
