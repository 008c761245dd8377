//! PTML, the XML process-tree exchange format.
//!
//! ```xml
//! <ptml>
//!   <processTree id="…" name="…" root="ROOT-ID">
//!     <sequence id="…" name=""/>
//!     <manualTask id="…" name="a"/>
//!     <automaticTask id="…" name=""/>
//!     <parentsNode id="…" sourceId="PARENT" targetId="CHILD"/>
//!   </processTree>
//! </ptml>
//! ```
//!
//! Node elements are `sequence`, `xor`, `and`, `xorLoop`, `manualTask`
//! (activity, label in `name`) and `automaticTask` (τ). Child order is the
//! document order of the `parentsNode` edges.

use std::collections::{HashMap, HashSet};
use std::io::Cursor;

use quick_xml::events::{BytesDecl, BytesStart, Event};
use quick_xml::{Reader, Writer};
use thiserror::Error;

use super::{Node, Operator, ProcessTree};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PtmlError {
    #[error("malformed PTML: {0}")]
    MalformedPtml(String),
    #[error("unknown PTML node kind `{0}`")]
    UnknownNodeKind(String),
    #[error("edge `{edge}` references missing node `{missing}`")]
    DanglingEdge { edge: String, missing: String },
}

fn node_id(index: usize) -> String {
    format!("00000000-0000-4000-8000-{index:012x}")
}

/// Emits canonical PTML. Node ids are assigned in pre-order, so equal trees
/// produce byte-identical output.
pub fn serialize_ptml(tree: &ProcessTree) -> Vec<u8> {
    fn collect<'a>(node: &'a Node, nodes: &mut Vec<&'a Node>, edges: &mut Vec<(usize, usize)>) -> usize {
        let me = nodes.len();
        nodes.push(node);
        for child in node.children() {
            let child_id = collect(child, nodes, edges);
            edges.push((me, child_id));
        }
        me
    }
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    collect(&tree.root, &mut nodes, &mut edges);
    // Edges grouped by parent, children in order.
    edges.sort_by_key(|&(parent, _)| parent);

    let mut writer = Writer::new_with_indent(Cursor::new(Vec::new()), b' ', 2);
    let write = |writer: &mut Writer<Cursor<Vec<u8>>>, event: Event| {
        writer.write_event(event).expect("writing to memory cannot fail");
    };
    write(&mut writer, Event::Decl(BytesDecl::new("1.0", Some("UTF-8"), None)));
    write(&mut writer, Event::Start(BytesStart::new("ptml")));
    let root_id = node_id(0);
    write(
        &mut writer,
        Event::Start(BytesStart::new("processTree").with_attributes([
            ("id", "00000000-0000-4000-8000-ffffffffffff"),
            ("name", "process tree"),
            ("root", root_id.as_str()),
        ])),
    );
    for (index, node) in nodes.iter().enumerate() {
        let (tag, name) = match node {
            Node::Operator { op, .. } => (
                match op {
                    Operator::Sequence => "sequence",
                    Operator::Choice => "xor",
                    Operator::Parallel => "and",
                    Operator::Loop => "xorLoop",
                },
                "",
            ),
            Node::Activity(label) => ("manualTask", label.as_str()),
            Node::Tau => ("automaticTask", ""),
        };
        let id = node_id(index);
        write(
            &mut writer,
            Event::Empty(BytesStart::new(tag).with_attributes([("id", id.as_str()), ("name", name)])),
        );
    }
    for (index, (parent, child)) in edges.iter().enumerate() {
        let id = node_id(nodes.len() + index);
        let source = node_id(*parent);
        let target = node_id(*child);
        write(
            &mut writer,
            Event::Empty(BytesStart::new("parentsNode").with_attributes([
                ("id", id.as_str()),
                ("sourceId", source.as_str()),
                ("targetId", target.as_str()),
            ])),
        );
    }
    write(&mut writer, Event::End(quick_xml::events::BytesEnd::new("processTree")));
    write(&mut writer, Event::End(quick_xml::events::BytesEnd::new("ptml")));
    let mut out = writer.into_inner().into_inner();
    out.push(b'\n');
    out
}

enum Kind {
    Op(Operator),
    Activity(String),
    Tau,
}

fn attributes(element: &BytesStart) -> Result<HashMap<String, String>, PtmlError> {
    let mut out = HashMap::new();
    for attr in element.attributes() {
        let attr = attr.map_err(|e| PtmlError::MalformedPtml(e.to_string()))?;
        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
        let value = attr
            .unescape_value()
            .map_err(|e| PtmlError::MalformedPtml(e.to_string()))?
            .into_owned();
        out.insert(key, value);
    }
    Ok(out)
}

pub fn parse_ptml(input: &[u8]) -> Result<ProcessTree, PtmlError> {
    let mut reader = Reader::from_reader(input);
    let mut buf = Vec::new();
    let mut root_attr: Option<String> = None;
    let mut kinds: HashMap<String, Kind> = HashMap::new();
    let mut edges: Vec<(String, String, String)> = Vec::new();
    let mut in_tree = false;
    let mut saw_tree = false;
    let mut depth = 0usize;

    loop {
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| PtmlError::MalformedPtml(e.to_string()))?;
        let (element, is_start) = match &event {
            Event::Start(e) => (e.clone(), true),
            Event::Empty(e) => (e.clone(), false),
            Event::End(e) => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| PtmlError::MalformedPtml("unbalanced end tag".into()))?;
                if e.local_name().as_ref() == b"processTree" {
                    in_tree = false;
                }
                buf.clear();
                continue;
            }
            Event::Eof => break,
            _ => {
                buf.clear();
                continue;
            }
        };
        if is_start {
            depth += 1;
        }
        let tag = String::from_utf8_lossy(element.local_name().as_ref()).into_owned();
        let attrs = attributes(&element)?;
        match tag.as_str() {
            "ptml" => {}
            "processTree" => {
                if saw_tree {
                    return Err(PtmlError::MalformedPtml("more than one processTree".into()));
                }
                saw_tree = true;
                in_tree = is_start;
                root_attr = attrs.get("root").cloned();
            }
            _ if !in_tree => {}
            "parentsNode" => {
                let get = |key: &str| {
                    attrs
                        .get(key)
                        .cloned()
                        .ok_or_else(|| PtmlError::MalformedPtml(format!("parentsNode without {key}")))
                };
                let id = attrs.get("id").cloned().unwrap_or_default();
                edges.push((id, get("sourceId")?, get("targetId")?));
            }
            _ => {
                let kind = match tag.as_str() {
                    "sequence" => Kind::Op(Operator::Sequence),
                    "xor" => Kind::Op(Operator::Choice),
                    "and" => Kind::Op(Operator::Parallel),
                    "xorLoop" => Kind::Op(Operator::Loop),
                    "manualTask" => match attrs.get("name") {
                        Some(name) if !name.is_empty() => Kind::Activity(name.clone()),
                        _ => return Err(PtmlError::MalformedPtml("manualTask without a name".into())),
                    },
                    "automaticTask" => Kind::Tau,
                    other => return Err(PtmlError::UnknownNodeKind(other.to_string())),
                };
                let id = attrs
                    .get("id")
                    .cloned()
                    .ok_or_else(|| PtmlError::MalformedPtml(format!("<{tag}> without id")))?;
                if kinds.insert(id.clone(), kind).is_some() {
                    return Err(PtmlError::MalformedPtml(format!("duplicate node id `{id}`")));
                }
            }
        }
        buf.clear();
    }
    if !saw_tree {
        return Err(PtmlError::MalformedPtml("no processTree element".into()));
    }

    let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut has_parent: HashSet<&str> = HashSet::new();
    for (id, source, target) in &edges {
        for end in [source, target] {
            if !kinds.contains_key(end) {
                return Err(PtmlError::DanglingEdge {
                    edge: id.clone(),
                    missing: end.clone(),
                });
            }
        }
        if !has_parent.insert(target) {
            return Err(PtmlError::MalformedPtml(format!("node `{target}` has more than one parent")));
        }
        children.entry(source).or_default().push(target);
    }

    let root = match root_attr {
        Some(root) => {
            if !kinds.contains_key(&root) {
                return Err(PtmlError::MalformedPtml(format!("root `{root}` is not a node")));
            }
            root
        }
        None => {
            let mut orphans = kinds.keys().filter(|id| !has_parent.contains(id.as_str()));
            match (orphans.next(), orphans.next()) {
                (Some(root), None) => root.clone(),
                _ => return Err(PtmlError::MalformedPtml("cannot determine the root node".into())),
            }
        }
    };

    fn build(
        id: &str,
        kinds: &HashMap<String, Kind>,
        children: &HashMap<&str, Vec<&str>>,
        visited: &mut HashSet<String>,
    ) -> Result<Node, PtmlError> {
        if !visited.insert(id.to_string()) {
            return Err(PtmlError::MalformedPtml(format!("cycle through node `{id}`")));
        }
        let kids = children.get(id).map(Vec::as_slice).unwrap_or_default();
        match &kinds[id] {
            Kind::Op(op) => Ok(Node::Operator {
                op: *op,
                children: kids
                    .iter()
                    .map(|kid| build(kid, kinds, children, visited))
                    .collect::<Result<_, _>>()?,
            }),
            Kind::Activity(_) | Kind::Tau if !kids.is_empty() => {
                Err(PtmlError::MalformedPtml(format!("leaf `{id}` has children")))
            }
            Kind::Activity(label) => Ok(Node::Activity(label.clone())),
            Kind::Tau => Ok(Node::Tau),
        }
    }
    let mut visited = HashSet::new();
    let root = build(&root, &kinds, &children, &mut visited)?;
    if visited.len() != kinds.len() {
        return Err(PtmlError::MalformedPtml("nodes unreachable from the root".into()));
    }
    Ok(ProcessTree::new(root))
}
