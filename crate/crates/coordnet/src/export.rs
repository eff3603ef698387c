//! Gephi node/edge CSV and GEXF 1.2 output.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use coordnet_core::communities::CommunityPartition;
use coordnet_core::{ActorLinkGraph, GraphBuilder, NodeId, NodeKind};

pub const NODE_HEADER: [&str; 5] = ["Id", "Label", "kind", "community", "degree"];
pub const EDGE_HEADER: [&str; 3] = ["Source", "Target", "Weight"];
pub const NODES_FILE: &str = "nodes.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const GEXF_NAMESPACE: &str = "http://gexf.net/1.2";

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("{path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum ImportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
    #[error("unknown node kind {0:?}")]
    Kind(String),
    #[error("edge references unknown id {0:?}")]
    UnknownId(String),
    #[error("bad weight {0:?}")]
    Weight(String),
    #[error(transparent)]
    Graph(#[from] coordnet_core::graph::GraphError),
}

/// One exported node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRow {
    pub id: String,
    pub label: String,
    pub kind: NodeKind,
    pub community: Option<usize>,
    pub degree: usize,
}

/// One exported edge; `source` is the actor side of an actor–link edge.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct EdgeRow {
    pub source: String,
    pub target: String,
    pub weight: u32,
}

/// Node and edge rows in file order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GephiTables {
    pub nodes: Vec<NodeRow>,
    pub edges: Vec<EdgeRow>,
}

/// File Id per node: the label, prefixed with `actor:` / `link:` only when an
/// actor and a link share that label.
pub fn node_ids(graph: &ActorLinkGraph) -> Vec<String> {
    graph
        .nodes()
        .iter()
        .map(|n| {
            let other = match n.kind {
                NodeKind::Actor => NodeKind::Link,
                NodeKind::Link => NodeKind::Actor,
            };
            if graph.find(other, &n.label).is_some() {
                format!("{}:{}", n.kind.as_str(), n.label)
            } else {
                n.label.clone()
            }
        })
        .collect()
}

/// Builds the rows. With a partition, only its nodes (and edges between them)
/// are kept and the community column is filled.
pub fn gephi_tables(graph: &ActorLinkGraph, partition: Option<&CommunityPartition>) -> GephiTables {
    let ids = node_ids(graph);
    let community = partition.map(|p| p.assignment(graph.node_count()));
    let keep = |v: NodeId| community.as_ref().is_none_or(|c| c[v.index()].is_some());
    let mut nodes: Vec<NodeRow> = graph
        .nodes()
        .iter()
        .filter(|n| keep(n.id))
        .map(|n| NodeRow {
            id: ids[n.id.index()].clone(),
            label: n.label.clone(),
            kind: n.kind,
            community: community.as_ref().and_then(|c| c[n.id.index()]),
            degree: graph.adjacency().degree(n.id.0),
        })
        .collect();
    nodes.sort_by(|a, b| a.id.cmp(&b.id));
    let mut edges: Vec<EdgeRow> = graph
        .edges()
        .iter()
        .filter(|e| keep(e.u) && keep(e.v))
        .map(|e| {
            let (a, b) = (&ids[e.u.index()], &ids[e.v.index()]);
            let actor_first = match (graph.kind(e.u), graph.kind(e.v)) {
                (NodeKind::Actor, NodeKind::Link) => true,
                (NodeKind::Link, NodeKind::Actor) => false,
                _ => a <= b,
            };
            let (source, target) = if actor_first { (a, b) } else { (b, a) };
            EdgeRow {
                source: source.clone(),
                target: target.clone(),
                weight: e.weight,
            }
        })
        .collect();
    edges.sort();
    GephiTables { nodes, edges }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

pub fn write_nodes_csv<W: Write>(rows: &[NodeRow], out: W) -> csv::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(NODE_HEADER)?;
    for r in rows {
        let community = r.community.map(|c| c.to_string()).unwrap_or_default();
        w.write_record([
            r.id.as_str(),
            r.label.as_str(),
            r.kind.as_str(),
            community.as_str(),
            r.degree.to_string().as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_edges_csv<W: Write>(rows: &[EdgeRow], out: W) -> csv::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(EDGE_HEADER)?;
    for r in rows {
        w.write_record([
            r.source.as_str(),
            r.target.as_str(),
            r.weight.to_string().as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GephiFiles {
    pub nodes_file: PathBuf,
    pub edges_file: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>, ExportError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| ExportError::IoFailure {
            path: path.to_owned(),
            source,
        })
}

fn csv_failure(path: &Path, err: csv::Error) -> ExportError {
    ExportError::IoFailure {
        path: path.to_owned(),
        source: err.into(),
    }
}

/// Writes `nodes.csv` and `edges.csv` into `out_dir`, creating it if needed.
pub fn export_gephi(
    graph: &ActorLinkGraph,
    partition: Option<&CommunityPartition>,
    out_dir: &Path,
) -> Result<GephiFiles, ExportError> {
    fs::create_dir_all(out_dir).map_err(|source| ExportError::IoFailure {
        path: out_dir.to_owned(),
        source,
    })?;
    let tables = gephi_tables(graph, partition);
    let nodes_file = out_dir.join(NODES_FILE);
    let edges_file = out_dir.join(EDGES_FILE);
    write_nodes_csv(&tables.nodes, create(&nodes_file)?)
        .map_err(|e| csv_failure(&nodes_file, e))?;
    write_edges_csv(&tables.edges, create(&edges_file)?)
        .map_err(|e| csv_failure(&edges_file, e))?;
    Ok(GephiFiles {
        nodes_file,
        edges_file,
    })
}

/// XML-escapes text for attribute values. Characters XML 1.0 cannot carry
/// become U+FFFD.
fn xml_attr(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\t' => out.push_str("&#9;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c if (c as u32) < 0x20 || c == '\u{fffe}' || c == '\u{ffff}' => {
                out.push(char::REPLACEMENT_CHARACTER)
            }
            c => out.push(c),
        }
    }
    out
}

/// Renders the same rows as [`gephi_tables`] as a GEXF 1.2 document.
pub fn gexf_string(graph: &ActorLinkGraph, partition: Option<&CommunityPartition>) -> String {
    let tables = gephi_tables(graph, partition);
    let mut x = String::new();
    x.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(x, "<gexf xmlns=\"{GEXF_NAMESPACE}\" version=\"1.2\">");
    x.push_str("  <meta>\n    <creator>coordnet</creator>\n  </meta>\n");
    x.push_str("  <graph defaultedgetype=\"undirected\" mode=\"static\">\n");
    x.push_str("    <attributes class=\"node\" mode=\"static\">\n");
    x.push_str("      <attribute id=\"kind\" title=\"kind\" type=\"string\"/>\n");
    x.push_str("      <attribute id=\"community\" title=\"community\" type=\"integer\"/>\n");
    x.push_str("      <attribute id=\"degree\" title=\"degree\" type=\"integer\"/>\n");
    x.push_str("    </attributes>\n");
    let _ = writeln!(x, "    <nodes count=\"{}\">", tables.nodes.len());
    for n in &tables.nodes {
        let _ = writeln!(
            x,
            "      <node id=\"{}\" label=\"{}\">",
            xml_attr(&n.id),
            xml_attr(&n.label)
        );
        x.push_str("        <attvalues>\n");
        let _ = writeln!(
            x,
            "          <attvalue for=\"kind\" value=\"{}\"/>",
            n.kind.as_str()
        );
        if let Some(c) = n.community {
            let _ = writeln!(x, "          <attvalue for=\"community\" value=\"{c}\"/>");
        }
        let _ = writeln!(
            x,
            "          <attvalue for=\"degree\" value=\"{}\"/>",
            n.degree
        );
        x.push_str("        </attvalues>\n      </node>\n");
    }
    x.push_str("    </nodes>\n");
    let _ = writeln!(x, "    <edges count=\"{}\">", tables.edges.len());
    for (i, e) in tables.edges.iter().enumerate() {
        let _ = writeln!(
            x,
            "      <edge id=\"{i}\" source=\"{}\" target=\"{}\" weight=\"{}\"/>",
            xml_attr(&e.source),
            xml_attr(&e.target),
            e.weight
        );
    }
    x.push_str("    </edges>\n  </graph>\n</gexf>\n");
    x
}

pub fn export_gexf(
    graph: &ActorLinkGraph,
    partition: Option<&CommunityPartition>,
    out_file: &Path,
) -> Result<PathBuf, ExportError> {
    if let Some(dir) = out_file.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| ExportError::IoFailure {
            path: dir.to_owned(),
            source,
        })?;
    }
    let mut w = create(out_file)?;
    w.write_all(gexf_string(graph, partition).as_bytes())
        .and_then(|_| w.flush())
        .map_err(|source| ExportError::IoFailure {
            path: out_file.to_owned(),
            source,
        })?;
    Ok(out_file.to_owned())
}

/// Reads Gephi CSV files back into a graph (node order follows the file).
pub fn import_gephi<N: Read, E: Read>(nodes: N, edges: E) -> Result<ActorLinkGraph, ImportError> {
    let mut b = GraphBuilder::new();
    let mut by_id: HashMap<String, NodeId> = HashMap::new();
    let mut r = csv::Reader::from_reader(nodes);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != NODE_HEADER {
        return Err(ImportError::Header(header));
    }
    for row in r.records() {
        let row = row?;
        let kind = NodeKind::parse(&row[2]).ok_or_else(|| ImportError::Kind(row[2].to_owned()))?;
        let id = b.add_node(kind, &row[1])?;
        by_id.insert(row[0].to_owned(), id);
    }
    let mut r = csv::Reader::from_reader(edges);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != EDGE_HEADER {
        return Err(ImportError::Header(header));
    }
    for row in r.records() {
        let row = row?;
        let lookup = |s: &str| {
            by_id
                .get(s)
                .copied()
                .ok_or_else(|| ImportError::UnknownId(s.to_owned()))
        };
        let (u, v) = (lookup(&row[0])?, lookup(&row[1])?);
        let weight = row[2]
            .parse()
            .map_err(|_| ImportError::Weight(row[2].to_owned()))?;
        b.add_weighted(u, v, weight)?;
    }
    Ok(b.finish())
}
