//! JSON shape of trees:
//! `{"kind": "sequence|xor|and|loop|activity|tau", "label": "...", "children": [...]}`.
//! `label` is present only on activities, `children` only on operators.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Node, NodePath, Operator, ProcessTree};

#[derive(Serialize, Deserialize)]
struct WireNode {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    children: Option<Vec<WireNode>>,
}

impl From<&Node> for WireNode {
    fn from(node: &Node) -> Self {
        match node {
            Node::Tau => WireNode {
                kind: "tau".into(),
                label: None,
                children: None,
            },
            Node::Activity(label) => WireNode {
                kind: "activity".into(),
                label: Some(label.clone()),
                children: None,
            },
            Node::Operator { op, children } => WireNode {
                kind: op.wire_name().into(),
                label: None,
                children: Some(children.iter().map(WireNode::from).collect()),
            },
        }
    }
}

impl TryFrom<WireNode> for Node {
    type Error = String;

    fn try_from(wire: WireNode) -> Result<Self, Self::Error> {
        let op = match wire.kind.as_str() {
            "tau" => return Ok(Node::Tau),
            "activity" => {
                return match wire.label {
                    Some(label) if !label.is_empty() => Ok(Node::Activity(label)),
                    _ => Err("activity node requires a non-empty label".into()),
                }
            }
            kind => Operator::from_wire_name(kind).ok_or_else(|| format!("unknown node kind `{kind}`"))?,
        };
        let children = wire
            .children
            .unwrap_or_default()
            .into_iter()
            .map(Node::try_from)
            .collect::<Result<_, _>>()?;
        Ok(Node::Operator { op, children })
    }
}

impl Operator {
    pub fn from_wire_name(name: &str) -> Option<Operator> {
        Operator::ALL.into_iter().find(|op| op.wire_name() == name)
    }
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        WireNode::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Node::try_from(WireNode::deserialize(deserializer)?).map_err(D::Error::custom)
    }
}

impl Serialize for ProcessTree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.root.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProcessTree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Node::deserialize(deserializer).map(ProcessTree::new)
    }
}

impl Serialize for NodePath {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NodePath {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Vec::<usize>::deserialize(deserializer).map(NodePath)
    }
}
