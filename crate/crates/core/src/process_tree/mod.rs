//! Process trees: rooted, ordered trees whose inner nodes are control-flow
//! operators and whose leaves are activities or the silent step τ.
//!
//! A tree is a plain value. Every editing operation returns a new tree and
//! leaves its input untouched, so trees can be kept in an undo history or
//! shared across threads without coordination.

mod edit;
mod json;
mod notation;
mod ptml;
mod semantics;
mod validate;

use std::collections::BTreeSet;
use std::fmt;

pub use edit::{EditError, InsertPosition, NewNode, ShiftDirection};
pub use notation::NotationError;
pub use ptml::{parse_ptml, serialize_ptml, PtmlError};
pub use semantics::{LanguageError, DEFAULT_LANGUAGE_CAP, MAX_ENUMERATION_LENGTH};
pub use validate::{Severity, Violation, ViolationCode};

/// The four control-flow operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    /// Children execute left to right.
    Sequence,
    /// Exactly one child executes.
    Choice,
    /// All children execute, interleaved in any order.
    Parallel,
    /// `do (redo do)*` over exactly two children.
    Loop,
}

impl Operator {
    pub const ALL: [Operator; 4] = [
        Operator::Sequence,
        Operator::Choice,
        Operator::Parallel,
        Operator::Loop,
    ];

    /// Short textual symbol, as used by common process-mining toolkits.
    pub fn symbol(self) -> &'static str {
        match self {
            Operator::Sequence => "->",
            Operator::Choice => "X",
            Operator::Parallel => "+",
            Operator::Loop => "*",
        }
    }

    /// Name used on the JSON wire.
    pub fn wire_name(self) -> &'static str {
        match self {
            Operator::Sequence => "sequence",
            Operator::Choice => "xor",
            Operator::Parallel => "and",
            Operator::Loop => "loop",
        }
    }
}

/// A node of a process tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Operator { op: Operator, children: Vec<Node> },
    Activity(String),
    Tau,
}

impl Node {
    pub fn activity(label: impl Into<String>) -> Node {
        Node::Activity(label.into())
    }

    pub fn operator(op: Operator, children: Vec<Node>) -> Node {
        Node::Operator { op, children }
    }

    pub fn sequence(children: Vec<Node>) -> Node {
        Node::operator(Operator::Sequence, children)
    }

    pub fn choice(children: Vec<Node>) -> Node {
        Node::operator(Operator::Choice, children)
    }

    pub fn parallel(children: Vec<Node>) -> Node {
        Node::operator(Operator::Parallel, children)
    }

    pub fn looped(body: Node, redo: Node) -> Node {
        Node::operator(Operator::Loop, vec![body, redo])
    }

    pub fn children(&self) -> &[Node] {
        match self {
            Node::Operator { children, .. } => children,
            _ => &[],
        }
    }

    pub fn is_leaf(&self) -> bool {
        !matches!(self, Node::Operator { .. })
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            Node::Activity(label) => Some(label),
            _ => None,
        }
    }

    /// Number of nodes in this subtree, including itself.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Node::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(Node::depth).max().unwrap_or(0)
    }

    fn collect_labels<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Node::Activity(label) => {
                out.insert(label);
            }
            Node::Tau => {}
            Node::Operator { children, .. } => {
                for child in children {
                    child.collect_labels(out);
                }
            }
        }
    }
}

/// Address of a node: child indices walked from the root. Empty is the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn root() -> NodePath {
        NodePath(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, index: usize) -> NodePath {
        let mut indices = self.0.clone();
        indices.push(index);
        NodePath(indices)
    }

    pub fn parent(&self) -> Option<NodePath> {
        let (_, init) = self.0.split_last()?;
        Some(NodePath(init.to_vec()))
    }

    /// True if `self` is `other` or lies below it.
    pub fn starts_with(&self, other: &NodePath) -> bool {
        self.0.starts_with(&other.0)
    }

    /// Longest common prefix of two paths.
    pub fn common_ancestor(&self, other: &NodePath) -> NodePath {
        NodePath(
            self.0
                .iter()
                .zip(&other.0)
                .take_while(|(a, b)| a == b)
                .map(|(a, _)| *a)
                .collect(),
        )
    }
}

impl From<Vec<usize>> for NodePath {
    fn from(indices: Vec<usize>) -> Self {
        NodePath(indices)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, index) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{index}")?;
        }
        write!(f, "]")
    }
}

/// A rooted process tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProcessTree {
    pub root: Node,
}

impl ProcessTree {
    pub fn new(root: Node) -> Self {
        ProcessTree { root }
    }

    pub fn get(&self, path: &NodePath) -> Option<&Node> {
        let mut node = &self.root;
        for &index in &path.0 {
            node = node.children().get(index)?;
        }
        Some(node)
    }

    pub(crate) fn get_mut(&mut self, path: &NodePath) -> Option<&mut Node> {
        let mut node = &mut self.root;
        for &index in &path.0 {
            node = match node {
                Node::Operator { children, .. } => children.get_mut(index)?,
                _ => return None,
            };
        }
        Some(node)
    }

    /// Returns a copy with the subtree at `path` replaced by `replacement`.
    pub fn replace(&self, path: &NodePath, replacement: Node) -> Option<ProcessTree> {
        let mut tree = self.clone();
        *tree.get_mut(path)? = replacement;
        Some(tree)
    }

    /// All activity labels occurring on leaves, sorted.
    pub fn activities(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.root.collect_labels(&mut out);
        out
    }

    /// Paths of all nodes in pre-order.
    pub fn paths(&self) -> Vec<NodePath> {
        fn walk(node: &Node, path: NodePath, out: &mut Vec<NodePath>) {
            out.push(path.clone());
            for (i, child) in node.children().iter().enumerate() {
                walk(child, path.child(i), out);
            }
        }
        let mut out = Vec::new();
        walk(&self.root, NodePath::root(), &mut out);
        out
    }
}

impl From<Node> for ProcessTree {
    fn from(root: Node) -> Self {
        ProcessTree { root }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Tau => write!(f, "tau"),
            Node::Activity(label) => {
                write!(f, "'")?;
                for c in label.chars() {
                    if c == '\'' || c == '\\' {
                        write!(f, "\\")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, "'")
            }
            Node::Operator { op, children } => {
                write!(f, "{}(", op.symbol())?;
                for (i, child) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{child}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for ProcessTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_are_preorder() {
        let tree: ProcessTree = "->(a, X(b, c), d)".parse().unwrap();
        let paths: Vec<String> = tree.paths().iter().map(|p| p.to_string()).collect();
        assert_eq!(paths, ["[]", "[0]", "[1]", "[1,0]", "[1,1]", "[2]"]);
    }

    #[test]
    fn common_ancestor() {
        let a = NodePath(vec![1, 0, 2]);
        let b = NodePath(vec![1, 1]);
        assert_eq!(a.common_ancestor(&b), NodePath(vec![1]));
        assert_eq!(a.common_ancestor(&NodePath::root()), NodePath::root());
    }

    #[test]
    fn replace_leaves_original() {
        let tree: ProcessTree = "->(a, b)".parse().unwrap();
        let changed = tree.replace(&NodePath(vec![1]), Node::Tau).unwrap();
        assert_eq!(tree.to_string(), "->('a', 'b')");
        assert_eq!(changed.to_string(), "->('a', tau)");
        assert!(tree.replace(&NodePath(vec![3]), Node::Tau).is_none());
    }

    #[test]
    fn activities_sorted() {
        let tree: ProcessTree = "+(c, *(a, tau), b)".parse().unwrap();
        assert_eq!(tree.activities().into_iter().collect::<Vec<_>>(), ["a", "b", "c"]);
    }
}
