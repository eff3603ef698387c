//! Structural checker for GEXF 1.2 documents, following the element and
//! attribute rules of the published 1.2 schema for the subset a static graph
//! uses (meta, node attributes, nodes, edges).

use std::collections::{BTreeMap, BTreeSet};

use roxmltree::{Document, Node};

pub const NS: &str = "http://gexf.net/1.2";

/// `(id, label, kind, community, degree)`.
pub type NodeTuple = (String, String, String, Option<String>, String);
/// `(source, target, weight)`.
pub type EdgeTuple = (String, String, String);

fn elements<'a, 'input>(node: Node<'a, 'input>) -> impl Iterator<Item = Node<'a, 'input>> {
    node.children().filter(|c| c.is_element())
}

fn check_attrs(node: Node, allowed: &[&str], required: &[&str]) -> Result<(), String> {
    let tag = node.tag_name().name();
    for a in node.attributes() {
        if a.namespace().is_none() && !allowed.contains(&a.name()) {
            return Err(format!("<{tag}> has undeclared attribute {:?}", a.name()));
        }
    }
    for r in required {
        if node.attribute(*r).is_none() {
            return Err(format!("<{tag}> lacks required attribute {r:?}"));
        }
    }
    Ok(())
}

fn expect_name(node: Node, name: &str) -> Result<(), String> {
    if node.tag_name().namespace() != Some(NS) {
        return Err(format!(
            "<{}> is outside the GEXF 1.2 namespace",
            node.tag_name().name()
        ));
    }
    if node.tag_name().name() != name {
        return Err(format!(
            "expected <{name}>, found <{}>",
            node.tag_name().name()
        ));
    }
    Ok(())
}

fn check_value(kind: &str, value: &str) -> Result<(), String> {
    let ok = match kind {
        "integer" => value.parse::<i32>().is_ok(),
        "long" => value.parse::<i64>().is_ok(),
        "float" | "double" => value.parse::<f64>().is_ok(),
        "boolean" => matches!(value, "true" | "false" | "1" | "0"),
        _ => true,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("value {value:?} is not a valid {kind}"))
    }
}

fn check_count(node: Node, actual: usize) -> Result<(), String> {
    if let Some(c) = node.attribute("count") {
        let c: usize = c.parse().map_err(|_| format!("bad count {c:?}"))?;
        if c != actual {
            return Err(format!(
                "<{}> count {c} but {actual} children",
                node.tag_name().name()
            ));
        }
    }
    Ok(())
}

/// Validates `text` and returns its node and edge content.
pub fn validate(text: &str) -> Result<(Vec<NodeTuple>, Vec<EdgeTuple>), String> {
    let doc = Document::parse(text).map_err(|e| format!("not well-formed: {e}"))?;
    let root = doc.root_element();
    expect_name(root, "gexf")?;
    check_attrs(root, &["version"], &["version"])?;
    if root.attribute("version") != Some("1.2") {
        return Err("version must be 1.2".into());
    }

    let mut top = elements(root).peekable();
    if top.peek().is_some_and(|n| n.tag_name().name() == "meta") {
        let meta = top.next().unwrap();
        expect_name(meta, "meta")?;
        check_attrs(meta, &["lastmodifieddate"], &[])?;
        for child in elements(meta) {
            if !["creator", "keywords", "description"].contains(&child.tag_name().name()) {
                return Err(format!(
                    "<meta> cannot contain <{}>",
                    child.tag_name().name()
                ));
            }
        }
    }
    let graph = top.next().ok_or("missing <graph>")?;
    expect_name(graph, "graph")?;
    if let Some(extra) = top.next() {
        return Err(format!(
            "unexpected <{}> after <graph>",
            extra.tag_name().name()
        ));
    }
    check_attrs(
        graph,
        &[
            "defaultedgetype",
            "mode",
            "timeformat",
            "idtype",
            "start",
            "end",
            "timerepresentation",
        ],
        &[],
    )?;
    if let Some(t) = graph.attribute("defaultedgetype") {
        if !["directed", "undirected", "mutual"].contains(&t) {
            return Err(format!("bad defaultedgetype {t:?}"));
        }
    }
    if let Some(m) = graph.attribute("mode") {
        if !["static", "dynamic"].contains(&m) {
            return Err(format!("bad mode {m:?}"));
        }
    }

    let mut node_attrs: BTreeMap<String, (String, String)> = BTreeMap::new();
    let mut sections = elements(graph).peekable();
    while sections
        .peek()
        .is_some_and(|n| n.tag_name().name() == "attributes")
    {
        let attrs = sections.next().unwrap();
        expect_name(attrs, "attributes")?;
        check_attrs(attrs, &["class", "mode", "start", "end"], &["class"])?;
        let class = attrs.attribute("class").unwrap();
        if !["node", "edge"].contains(&class) {
            return Err(format!("bad attributes class {class:?}"));
        }
        for a in elements(attrs) {
            expect_name(a, "attribute")?;
            check_attrs(a, &["id", "title", "type"], &["id", "title", "type"])?;
            let ty = a.attribute("type").unwrap();
            if ![
                "integer",
                "long",
                "double",
                "float",
                "boolean",
                "liststring",
                "string",
                "anyURI",
            ]
            .contains(&ty)
            {
                return Err(format!("bad attribute type {ty:?}"));
            }
            if class == "node" {
                let id = a.attribute("id").unwrap().to_owned();
                let title = a.attribute("title").unwrap().to_owned();
                node_attrs.insert(id, (title, ty.to_owned()));
            }
        }
    }

    let nodes_el = sections.next().ok_or("missing <nodes>")?;
    expect_name(nodes_el, "nodes")?;
    check_attrs(nodes_el, &["count"], &[])?;
    let mut ids = BTreeSet::new();
    let mut nodes = Vec::new();
    for n in elements(nodes_el) {
        expect_name(n, "node")?;
        check_attrs(n, &["id", "label", "pid", "start", "end"], &["id"])?;
        let id = n.attribute("id").unwrap().to_owned();
        if !ids.insert(id.clone()) {
            return Err(format!("duplicate node id {id:?}"));
        }
        let mut values: BTreeMap<String, String> = BTreeMap::new();
        for child in elements(n) {
            expect_name(child, "attvalues")?;
            for v in elements(child) {
                expect_name(v, "attvalue")?;
                check_attrs(v, &["for", "value", "start", "end"], &["for", "value"])?;
                let key = v.attribute("for").unwrap();
                let value = v.attribute("value").unwrap();
                let (title, ty) = node_attrs
                    .get(key)
                    .ok_or_else(|| format!("attvalue for undeclared attribute {key:?}"))?;
                check_value(ty, value)?;
                values.insert(title.clone(), value.to_owned());
            }
        }
        nodes.push((
            id,
            n.attribute("label").unwrap_or("").to_owned(),
            values.get("kind").cloned().unwrap_or_default(),
            values.get("community").cloned(),
            values.get("degree").cloned().unwrap_or_default(),
        ));
    }
    check_count(nodes_el, nodes.len())?;

    let edges_el = sections.next().ok_or("missing <edges>")?;
    expect_name(edges_el, "edges")?;
    check_attrs(edges_el, &["count"], &[])?;
    if let Some(extra) = sections.next() {
        return Err(format!(
            "unexpected <{}> after <edges>",
            extra.tag_name().name()
        ));
    }
    let mut edge_ids = BTreeSet::new();
    let mut edges = Vec::new();
    for e in elements(edges_el) {
        expect_name(e, "edge")?;
        check_attrs(
            e,
            &[
                "id", "source", "target", "type", "label", "weight", "start", "end",
            ],
            &["id", "source", "target"],
        )?;
        let id = e.attribute("id").unwrap();
        if !edge_ids.insert(id.to_owned()) {
            return Err(format!("duplicate edge id {id:?}"));
        }
        let (s, t) = (
            e.attribute("source").unwrap(),
            e.attribute("target").unwrap(),
        );
        for end in [s, t] {
            if !ids.contains(end) {
                return Err(format!("edge {id} references unknown node {end:?}"));
            }
        }
        let weight = e.attribute("weight").unwrap_or("1");
        check_value("float", weight)?;
        if elements(e).next().is_some() {
            return Err(format!("edge {id} has unexpected children"));
        }
        edges.push((s.to_owned(), t.to_owned(), weight.to_owned()));
    }
    check_count(edges_el, edges.len())?;
    Ok((nodes, edges))
}
