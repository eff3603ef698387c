//! `graph.bin`: a versioned binary snapshot of an [`ActorLinkGraph`].
//!
//! All integers are little-endian.
//!
//! ```text
//! magic      8 bytes  "CNETGRPH"
//! version    u32      1
//! nodes      u64      node count
//!   kind     u8       0 = actor, 1 = link
//!   len      u32      label length in bytes
//!   label    [u8]     UTF-8
//! edges      u64      edge count
//!   u        u32      smaller endpoint id
//!   v        u32      larger endpoint id
//!   weight   u32      share count
//! ```
//!
//! Node ids are positions in the node list. Edges are sorted by `(u, v)`.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use coordnet_core::graph::GraphError;
use coordnet_core::{ActorLinkGraph, GraphBuilder, NodeId, NodeKind};

pub const MAGIC: &[u8; 8] = b"CNETGRPH";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a graph snapshot")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn kind_byte(kind: NodeKind) -> u8 {
    match kind {
        NodeKind::Actor => 0,
        NodeKind::Link => 1,
    }
}

pub fn write_snapshot<W: Write>(graph: &ActorLinkGraph, out: W) -> io::Result<()> {
    let mut w = BufWriter::new(out);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(graph.node_count() as u64).to_le_bytes())?;
    for node in graph.nodes() {
        w.write_all(&[kind_byte(node.kind)])?;
        w.write_all(&(node.label.len() as u32).to_le_bytes())?;
        w.write_all(node.label.as_bytes())?;
    }
    w.write_all(&(graph.edge_count() as u64).to_le_bytes())?;
    for e in graph.edges() {
        w.write_all(&e.u.0.to_le_bytes())?;
        w.write_all(&e.v.0.to_le_bytes())?;
        w.write_all(&e.weight.to_le_bytes())?;
    }
    w.flush()
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    let mut b = [0; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_snapshot<R: Read>(input: R) -> Result<ActorLinkGraph, SnapshotError> {
    let mut r = BufReader::new(input);
    let mut magic = [0; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(SnapshotError::UnsupportedVersion(version));
    }
    let n = read_u64(&mut r)?;
    if n > u64::from(u32::MAX) {
        return Err(SnapshotError::Corrupt(format!("node count {n}")));
    }
    let mut b = GraphBuilder::with_capacity(n as usize);
    let mut label = Vec::new();
    for _ in 0..n {
        let mut kind = [0; 1];
        r.read_exact(&mut kind)?;
        let kind = match kind[0] {
            0 => NodeKind::Actor,
            1 => NodeKind::Link,
            k => return Err(SnapshotError::Corrupt(format!("node kind {k}"))),
        };
        let len = read_u32(&mut r)? as usize;
        label.resize(len, 0);
        r.read_exact(&mut label)?;
        let text = std::str::from_utf8(&label)
            .map_err(|_| SnapshotError::Corrupt("label is not UTF-8".into()))?;
        b.add_node(kind, text)?;
    }
    let m = read_u64(&mut r)?;
    let mut previous = None;
    for _ in 0..m {
        let u = read_u32(&mut r)?;
        let v = read_u32(&mut r)?;
        let weight = read_u32(&mut r)?;
        if u64::from(v) >= n || u >= v || weight == 0 || previous >= Some((u, v)) {
            return Err(SnapshotError::Corrupt(format!("edge ({u}, {v}, {weight})")));
        }
        previous = Some((u, v));
        b.add_weighted(NodeId(u), NodeId(v), weight)?;
    }
    if r.read(&mut [0; 1])? != 0 {
        return Err(SnapshotError::Corrupt("trailing bytes".into()));
    }
    Ok(b.finish())
}

pub fn save(graph: &ActorLinkGraph, path: &Path) -> io::Result<()> {
    write_snapshot(graph, File::create(path)?)
}

pub fn load(path: &Path) -> Result<ActorLinkGraph, SnapshotError> {
    read_snapshot(File::open(path)?)
}
