//! JSON and CSV report files.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use coordnet_core::communities::{
    community_summary, CommunityPartition, CommunitySummary, LeadActor, RemovedEdge, Scope,
};
use coordnet_core::components::ComponentSummary;
use coordnet_core::metrics::{BetweennessMode, CentralityTable};
use coordnet_core::record::IngestReport;
use coordnet_core::stats::{DistributionReport, HistogramBin, LinkCategoryCrossTab, LinkCount};
use coordnet_core::{ActorLinkGraph, NodeId, NodeKind};

/// Pretty JSON with a trailing newline; parent directories are created.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut w =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> anyhow::Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(io::BufReader::new(file))
        .with_context(|| format!("parsing {}", path.display()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub source_files: Vec<String>,
    #[serde(flatten)]
    pub report: IngestReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentralityJsonRow {
    pub label: String,
    pub kind: NodeKind,
    pub degree: usize,
    pub degree_centrality: f64,
    pub closeness_raw: Option<f64>,
    pub closeness_normalized: Option<f64>,
    pub betweenness_raw: Option<f64>,
    pub betweenness_normalized: Option<f64>,
}

/// Rows in the order of `order` (node ids), or table order when `None`.
pub fn centrality_rows(
    table: &CentralityTable,
    graph: &ActorLinkGraph,
    order: Option<&[NodeId]>,
) -> Vec<CentralityJsonRow> {
    let row = |r: &coordnet_core::metrics::CentralityRow| CentralityJsonRow {
        label: graph.label(r.node).to_owned(),
        kind: graph.kind(r.node),
        degree: r.degree,
        degree_centrality: r.degree_centrality,
        closeness_raw: r.closeness.map(|c| c.raw),
        closeness_normalized: r.closeness.map(|c| c.normalized),
        betweenness_raw: r.betweenness.map(|b| b.raw),
        betweenness_normalized: r.betweenness.map(|b| b.normalized),
    };
    match order {
        Some(ids) => ids.iter().map(|id| row(&table.rows[id.index()])).collect(),
        None => table.rows.iter().map(row).collect(),
    }
}

/// `degree,degree_centrality` rows, full float precision.
pub fn write_scatter<W: Write>(rows: &[(usize, f64)], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["degree", "degree_centrality"])?;
    for (d, c) in rows {
        w.write_record([d.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scatter<R: Read>(input: R) -> anyhow::Result<Vec<(usize, f64)>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push((rec[0].parse()?, rec[1].parse()?));
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentsReport {
    pub node_count: usize,
    pub edge_count: usize,
    pub component_count: usize,
    pub components: Vec<ComponentSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRef {
    pub label: String,
    pub kind: NodeKind,
}

/// `communities.json`; members are stored by label so the file can be read
/// back against the same `graph.bin`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommunitiesFile {
    pub scope: Scope,
    pub target_k: usize,
    pub target_reached: bool,
    pub betweenness_mode: BetweennessMode,
    pub modularity: f64,
    pub communities: Vec<Vec<NodeRef>>,
    pub lead_actor_per_community: Vec<Option<LeadActor>>,
    pub summary: Vec<CommunitySummary>,
    pub removal_log: Vec<RemovedEdge>,
}

impl CommunitiesFile {
    pub fn new(partition: &CommunityPartition, graph: &ActorLinkGraph) -> Self {
        CommunitiesFile {
            scope: partition.scope,
            target_k: partition.target_k,
            target_reached: partition.target_reached,
            betweenness_mode: partition.betweenness_mode,
            modularity: partition.modularity,
            communities: partition
                .communities
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|&v| NodeRef {
                            label: graph.label(v).to_owned(),
                            kind: graph.kind(v),
                        })
                        .collect()
                })
                .collect(),
            lead_actor_per_community: partition.lead_actor_per_community.clone(),
            summary: community_summary(partition, graph),
            removal_log: partition.removal_log.clone(),
        }
    }

    /// Resolves labels against `graph`.
    pub fn to_partition(&self, graph: &ActorLinkGraph) -> anyhow::Result<CommunityPartition> {
        let mut communities = Vec::with_capacity(self.communities.len());
        for c in &self.communities {
            let mut ids = Vec::with_capacity(c.len());
            for n in c {
                match graph.find(n.kind, &n.label) {
                    Some(id) => ids.push(id),
                    None => bail!(
                        "community member {:?} ({}) is not in the graph",
                        n.label,
                        n.kind.as_str()
                    ),
                }
            }
            communities.push(ids);
        }
        Ok(CommunityPartition {
            scope: self.scope,
            target_k: self.target_k,
            target_reached: self.target_reached,
            betweenness_mode: self.betweenness_mode,
            communities,
            removal_log: self.removal_log.clone(),
            lead_actor_per_community: self.lead_actor_per_community.clone(),
            modularity: self.modularity,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<Vec<HistogramBin>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actors: Option<DistributionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub types: Option<DistributionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub countries: Option<DistributionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sponsors: Option<DistributionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub words: Option<DistributionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub links: Option<LinkCategoryCrossTab>,
}

/// Two-column `url,count` file, the urlcheck input format.
pub fn write_links_csv<W: Write>(links: &[LinkCount], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["url", "count"])?;
    for l in links {
        w.write_record([l.url.as_str(), l.count.to_string().as_str()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `url,count` rows in file order. A header row is skipped when its
/// second cell is not a number.
pub fn read_links_csv<R: Read>(input: R) -> anyhow::Result<Vec<LinkCount>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let url = rec.get(0).unwrap_or("").trim();
        let count = rec.get(1).map(str::trim).unwrap_or("");
        match count.parse::<u64>() {
            Ok(count) if !url.is_empty() => out.push(LinkCount {
                url: url.to_owned(),
                count,
            }),
            _ if i == 0 => {}
            _ => bail!("links file row {}: expected url,count", i + 1),
        }
    }
    Ok(out)
}

/// `key,weight` rows for word-cloud tools.
pub fn write_weights_csv<W: Write>(report: &DistributionReport, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["key", "weight"])?;
    for e in &report.entries {
        w.write_record([e.key.as_str(), e.count.to_string().as_str()])?;
    }
    w.flush()?;
    Ok(())
}
