//! Editor operations. Each returns a new tree; the input is never modified.
//! Edits do not repair arity problems they introduce, [`ProcessTree::validate`]
//! reports those.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Node, NodePath, Operator, ProcessTree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EditError {
    #[error("no node at path {0}")]
    InvalidPath(NodePath),
    #[error("cannot insert below leaf at {0}")]
    BelowLeaf(NodePath),
    #[error("cannot insert a sibling of the root")]
    LeftOfRoot,
    #[error("the root cannot be removed")]
    CannotRemoveRoot,
    #[error("node at {0} has no sibling in that direction")]
    NoSibling(NodePath),
    #[error("node at {0} is not a leaf")]
    NotALeaf(NodePath),
    #[error("activity labels must be non-empty")]
    EmptyLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InsertPosition {
    Left,
    Right,
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftDirection {
    Left,
    Right,
}

/// What to insert: an empty operator, an activity, or τ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NewNode {
    Operator(Operator),
    Activity(String),
    Tau,
}

impl NewNode {
    fn into_node(self) -> Result<Node, EditError> {
        Ok(match self {
            NewNode::Operator(op) => Node::Operator {
                op,
                children: Vec::new(),
            },
            NewNode::Activity(label) if label.is_empty() => return Err(EditError::EmptyLabel),
            NewNode::Activity(label) => Node::Activity(label),
            NewNode::Tau => Node::Tau,
        })
    }
}

fn children_of<'a>(tree: &'a mut ProcessTree, parent: &NodePath, target: &NodePath) -> Result<&'a mut Vec<Node>, EditError> {
    match tree.get_mut(parent) {
        Some(Node::Operator { children, .. }) => Ok(children),
        _ => Err(EditError::InvalidPath(target.clone())),
    }
}

impl ProcessTree {
    pub fn insert_node(&self, anchor: &NodePath, position: InsertPosition, new: NewNode) -> Result<ProcessTree, EditError> {
        let anchor_node = self.get(anchor).ok_or_else(|| EditError::InvalidPath(anchor.clone()))?;
        let node = new.into_node()?;
        let mut tree = self.clone();
        match position {
            InsertPosition::Below => {
                if anchor_node.is_leaf() {
                    return Err(EditError::BelowLeaf(anchor.clone()));
                }
                children_of(&mut tree, anchor, anchor)?.push(node);
            }
            InsertPosition::Left | InsertPosition::Right => {
                let (&index, _) = anchor.0.split_last().ok_or(EditError::LeftOfRoot)?;
                let parent = anchor.parent().expect("non-root path has a parent");
                let at = if position == InsertPosition::Left { index } else { index + 1 };
                children_of(&mut tree, &parent, anchor)?.insert(at, node);
            }
        }
        Ok(tree)
    }

    pub fn remove_subtree(&self, target: &NodePath) -> Result<ProcessTree, EditError> {
        if self.get(target).is_none() {
            return Err(EditError::InvalidPath(target.clone()));
        }
        let (&index, _) = target.0.split_last().ok_or(EditError::CannotRemoveRoot)?;
        let parent = target.parent().expect("non-root path has a parent");
        let mut tree = self.clone();
        children_of(&mut tree, &parent, target)?.remove(index);
        Ok(tree)
    }

    pub fn shift_subtree(&self, target: &NodePath, direction: ShiftDirection) -> Result<ProcessTree, EditError> {
        if self.get(target).is_none() {
            return Err(EditError::InvalidPath(target.clone()));
        }
        let Some((&index, _)) = target.0.split_last() else {
            return Err(EditError::NoSibling(target.clone()));
        };
        let parent = target.parent().expect("non-root path has a parent");
        let mut tree = self.clone();
        let siblings = children_of(&mut tree, &parent, target)?;
        let other = match direction {
            ShiftDirection::Left => index.checked_sub(1),
            ShiftDirection::Right => Some(index + 1).filter(|&i| i < siblings.len()),
        }
        .ok_or_else(|| EditError::NoSibling(target.clone()))?;
        siblings.swap(index, other);
        Ok(tree)
    }

    /// Relabels a leaf. Applied to τ it turns the leaf into an activity.
    pub fn set_label(&self, target: &NodePath, label: &str) -> Result<ProcessTree, EditError> {
        if label.is_empty() {
            return Err(EditError::EmptyLabel);
        }
        let mut tree = self.clone();
        match tree.get_mut(target) {
            None => Err(EditError::InvalidPath(target.clone())),
            Some(Node::Operator { .. }) => Err(EditError::NotALeaf(target.clone())),
            Some(leaf) => {
                *leaf = Node::Activity(label.to_string());
                Ok(tree)
            }
        }
    }
}
