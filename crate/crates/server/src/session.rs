//! One interactive modelling session: a log, its variants, the current
//! tree, the set of explicitly added variants and a linear undo history.
//!
//! Every operation either succeeds completely or leaves the session as it
//! was. Operations build the new state in locals and assign at the end.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use arbor_core::alignment::{conformance_report, fits_net, Verdict, DEFAULT_MAX_EXPANDED};
use arbor_core::event_log::{extract_variants, list_activities, parse_xes, ActivityStat, EventLog, TraceVariant};
use arbor_core::incremental::{add_trace, AddedTraceSet};
use arbor_core::inductive_miner::discover_from_variants;
use arbor_core::petri_net::{serialize_pnml, LabeledPetriNet};
use arbor_core::process_tree::{
    parse_ptml, serialize_ptml, InsertPosition, NewNode, NodePath, Operator, ProcessTree, Severity, ShiftDirection,
    Violation,
};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

pub const DEFAULT_HISTORY_CAP: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub tree: Option<ProcessTree>,
    pub added_variant_ids: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub log: Option<Arc<EventLog>>,
    pub variants: Arc<Vec<TraceVariant>>,
    pub tree: Option<ProcessTree>,
    pub added_variant_ids: BTreeSet<usize>,
    pub accepted_flags: BTreeMap<usize, Verdict>,
    pub history: Vec<Snapshot>,
    pub history_cursor: usize,
    pub history_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TreeEdit {
    Insert {
        path: NodePath,
        position: InsertPosition,
        node: NodeSpec,
    },
    Remove {
        path: NodePath,
    },
    Shift {
        path: NodePath,
        direction: ShiftDirection,
    },
    SetLabel {
        path: NodePath,
        label: String,
    },
}

/// New node in an insert edit, in the tree wire shape without children.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl NodeSpec {
    fn to_new_node(&self) -> Result<NewNode, ServiceError> {
        match self.kind.as_str() {
            "activity" => match &self.label {
                Some(label) => Ok(NewNode::Activity(label.clone())),
                None => Err(ServiceError::BadRequest("activity node needs a label".into())),
            },
            "tau" => Ok(NewNode::Tau),
            kind => Operator::from_wire_name(kind)
                .map(NewNode::Operator)
                .ok_or_else(|| ServiceError::BadRequest(format!("unknown node kind `{kind}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Ptml,
    Pnml,
}

fn structural_errors(tree: &ProcessTree) -> Vec<Violation> {
    tree.validate()
        .into_iter()
        .filter(|v| v.severity == Severity::Error)
        .collect()
}

impl Session {
    pub fn new(session_id: impl Into<String>) -> Self {
        Session::with_history_cap(session_id, DEFAULT_HISTORY_CAP)
    }

    pub fn with_history_cap(session_id: impl Into<String>, history_cap: usize) -> Self {
        Session {
            session_id: session_id.into(),
            log: None,
            variants: Arc::new(Vec::new()),
            tree: None,
            added_variant_ids: BTreeSet::new(),
            accepted_flags: BTreeMap::new(),
            history: vec![Snapshot {
                tree: None,
                added_variant_ids: BTreeSet::new(),
            }],
            history_cursor: 0,
            history_cap: history_cap.max(1),
        }
    }

    pub fn can_undo(&self) -> bool {
        self.history_cursor > 0
    }

    pub fn can_redo(&self) -> bool {
        self.history_cursor + 1 < self.history.len()
    }

    fn unknown_flags(&self) -> BTreeMap<usize, Verdict> {
        self.variants.iter().map(|v| (v.variant_id, Verdict::Unknown)).collect()
    }

    fn variant(&self, id: usize) -> Result<&TraceVariant, ServiceError> {
        self.variants.get(id).ok_or(ServiceError::UnknownVariant(id))
    }

    /// Checks the selection and returns it sorted and deduplicated.
    fn selection(&self, ids: &[usize]) -> Result<BTreeSet<usize>, ServiceError> {
        if self.log.is_none() {
            return Err(ServiceError::NoLog);
        }
        if ids.is_empty() {
            return Err(ServiceError::EmptySelection);
        }
        for &id in ids {
            self.variant(id)?;
        }
        Ok(ids.iter().copied().collect())
    }

    fn flags_for(&self, tree: &ProcessTree) -> Result<BTreeMap<usize, Verdict>, ServiceError> {
        Ok(conformance_report(tree, &self.variants)?.into_iter().collect())
    }

    fn commit(&mut self, tree: Option<ProcessTree>, added: BTreeSet<usize>, flags: BTreeMap<usize, Verdict>) {
        self.history.truncate(self.history_cursor + 1);
        self.history.push(Snapshot {
            tree: tree.clone(),
            added_variant_ids: added.clone(),
        });
        if self.history.len() > self.history_cap {
            let excess = self.history.len() - self.history_cap;
            self.history.drain(..excess);
        }
        self.history_cursor = self.history.len() - 1;
        self.tree = tree;
        self.added_variant_ids = added;
        self.accepted_flags = flags;
    }

    pub fn upload_log(&mut self, bytes: &[u8], source_name: &str) -> Result<&[TraceVariant], ServiceError> {
        let log = parse_xes(bytes, source_name)?;
        let mut fresh = Session::with_history_cap(self.session_id.clone(), self.history_cap);
        fresh.variants = Arc::new(extract_variants(&log));
        fresh.log = Some(Arc::new(log));
        fresh.accepted_flags = fresh.unknown_flags();
        *self = fresh;
        Ok(&self.variants)
    }

    pub fn discover(&mut self, ids: &[usize]) -> Result<&ProcessTree, ServiceError> {
        let selection = self.selection(ids)?;
        let tree = discover_from_variants(selection.iter().map(|&id| &self.variants[id]))?;
        let flags = self.flags_for(&tree)?;
        self.commit(Some(tree), selection, flags);
        Ok(self.tree.as_ref().expect("just set"))
    }

    pub fn extend(&mut self, ids: &[usize]) -> Result<&ProcessTree, ServiceError> {
        let selection = self.selection(ids)?;
        let mut tree = self.tree.clone().ok_or(ServiceError::NoModel)?;
        let errors = structural_errors(&tree);
        if !errors.is_empty() {
            return Err(ServiceError::InvalidTree(errors));
        }
        let net = LabeledPetriNet::from_tree(&tree)?;
        let mut added: AddedTraceSet = BTreeSet::new();
        for &id in &self.added_variant_ids {
            let activities = &self.variant(id)?.activities;
            if !fits_net(&net, activities, DEFAULT_MAX_EXPANDED)? {
                return Err(ServiceError::InconsistentModel(id));
            }
            added.insert(activities.clone());
        }
        for &id in &selection {
            let activities = &self.variants[id].activities;
            tree = add_trace(&tree, &added, activities)?;
            added.insert(activities.clone());
        }
        let flags = self.flags_for(&tree)?;
        let ids: BTreeSet<usize> = self.added_variant_ids.union(&selection).copied().collect();
        self.commit(Some(tree), ids, flags);
        Ok(self.tree.as_ref().expect("just set"))
    }

    pub fn edit(&mut self, edit: &TreeEdit) -> Result<&ProcessTree, ServiceError> {
        let tree = self.tree.as_ref().ok_or(ServiceError::NoModel)?;
        let edited = match edit {
            TreeEdit::Insert { path, position, node } => tree.insert_node(path, *position, node.to_new_node()?)?,
            TreeEdit::Remove { path } => tree.remove_subtree(path)?,
            TreeEdit::Shift { path, direction } => tree.shift_subtree(path, *direction)?,
            TreeEdit::SetLabel { path, label } => tree.set_label(path, label)?,
        };
        let flags = self.unknown_flags();
        self.commit(Some(edited), self.added_variant_ids.clone(), flags);
        Ok(self.tree.as_ref().expect("just set"))
    }

    pub fn conformance(&mut self) -> Result<&BTreeMap<usize, Verdict>, ServiceError> {
        let tree = self.tree.as_ref().ok_or(ServiceError::NoModel)?;
        let errors = structural_errors(tree);
        if !errors.is_empty() {
            return Err(ServiceError::InvalidTree(errors));
        }
        self.accepted_flags = self.flags_for(tree)?;
        Ok(&self.accepted_flags)
    }

    fn restore(&mut self, cursor: usize) {
        let snapshot = self.history[cursor].clone();
        self.history_cursor = cursor;
        self.tree = snapshot.tree;
        self.added_variant_ids = snapshot.added_variant_ids;
        self.accepted_flags = self.unknown_flags();
    }

    pub fn undo(&mut self) -> Result<(), ServiceError> {
        if !self.can_undo() {
            return Err(ServiceError::NothingToUndo);
        }
        self.restore(self.history_cursor - 1);
        Ok(())
    }

    pub fn redo(&mut self) -> Result<(), ServiceError> {
        if !self.can_redo() {
            return Err(ServiceError::NothingToRedo);
        }
        self.restore(self.history_cursor + 1);
        Ok(())
    }

    pub fn import_tree(&mut self, ptml: &[u8]) -> Result<&ProcessTree, ServiceError> {
        let tree = parse_ptml(ptml)?;
        let flags = self.unknown_flags();
        self.commit(Some(tree), BTreeSet::new(), flags);
        Ok(self.tree.as_ref().expect("just set"))
    }

    pub fn export(&self, format: ExportFormat) -> Result<Vec<u8>, ServiceError> {
        let tree = self.tree.as_ref().ok_or(ServiceError::NoModel)?;
        match format {
            ExportFormat::Ptml => Ok(serialize_ptml(tree)),
            ExportFormat::Pnml => Ok(serialize_pnml(&LabeledPetriNet::from_tree(tree)?)),
        }
    }

    pub fn activities(&self) -> Result<Vec<ActivityStat>, ServiceError> {
        let log = self.log.as_ref().ok_or(ServiceError::NoLog)?;
        Ok(list_activities(log, self.tree.as_ref()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOG: &str = r#"<log>
        <trace><string key="concept:name" value="1"/>
          <event><string key="concept:name" value="a"/></event>
          <event><string key="concept:name" value="b"/></event></trace>
        <trace><string key="concept:name" value="2"/>
          <event><string key="concept:name" value="a"/></event>
          <event><string key="concept:name" value="b"/></event></trace>
        <trace><string key="concept:name" value="3"/>
          <event><string key="concept:name" value="a"/></event>
          <event><string key="concept:name" value="c"/></event>
          <event><string key="concept:name" value="b"/></event></trace>
        <trace><string key="concept:name" value="4"/>
          <event><string key="concept:name" value="b"/></event></trace>
      </log>"#;

    fn loaded() -> Session {
        let mut session = Session::new("s");
        session.upload_log(LOG.as_bytes(), "test.xes").unwrap();
        session
    }

    #[test]
    fn upload_ranks_variants() {
        let session = loaded();
        assert_eq!(session.variants.len(), 3);
        assert_eq!(session.variants[0].case_count, 2);
        assert!(session.accepted_flags.values().all(|v| *v == Verdict::Unknown));
    }

    #[test]
    fn discover_then_extend_marks_added_accepted() {
        let mut session = loaded();
        session.discover(&[0]).unwrap();
        assert_eq!(session.accepted_flags[&0], Verdict::Accepted);
        assert_eq!(session.accepted_flags[&1], Verdict::Rejected);
        session.extend(&[2, 1]).unwrap();
        for id in &session.added_variant_ids {
            assert_eq!(session.accepted_flags[id], Verdict::Accepted);
        }
        assert_eq!(session.history.len(), 3);
    }

    #[test]
    fn edit_breaking_added_variant_blocks_extend() {
        let mut session = loaded();
        session.discover(&[0]).unwrap();
        session
            .edit(&TreeEdit::SetLabel {
                path: NodePath(vec![1]),
                label: "z".into(),
            })
            .unwrap();
        assert!(session.accepted_flags.values().all(|v| *v == Verdict::Unknown));
        let before = session.clone();
        assert!(matches!(session.extend(&[1]), Err(ServiceError::InconsistentModel(0))));
        assert_eq!(session, before);
    }

    #[test]
    fn undo_redo_and_truncation() {
        let mut session = loaded();
        session.discover(&[0]).unwrap();
        let discovered = session.tree.clone();
        session.extend(&[1]).unwrap();
        let extended = (session.tree.clone(), session.added_variant_ids.clone());
        session.undo().unwrap();
        assert_eq!(session.tree, discovered);
        assert_eq!(session.added_variant_ids, [0].into());
        session.redo().unwrap();
        assert_eq!((session.tree.clone(), session.added_variant_ids.clone()), extended);
        session.undo().unwrap();
        session.extend(&[2]).unwrap();
        assert!(matches!(session.redo(), Err(ServiceError::NothingToRedo)));
        session.undo().unwrap();
        session.undo().unwrap();
        assert!(matches!(session.undo(), Err(ServiceError::NothingToUndo)));
    }

    #[test]
    fn history_is_capped() {
        let mut session = Session::with_history_cap("s", 3);
        session.upload_log(LOG.as_bytes(), "t").unwrap();
        for _ in 0..5 {
            session.discover(&[0]).unwrap();
        }
        assert_eq!(session.history.len(), 3);
        assert_eq!(session.history_cursor, 2);
    }

    #[test]
    fn export_requires_model() {
        let session = loaded();
        assert!(matches!(session.export(ExportFormat::Ptml), Err(ServiceError::NoModel)));
    }

    #[test]
    fn import_export_round_trip() {
        let mut session = loaded();
        session.discover(&[0, 1]).unwrap();
        let ptml = session.export(ExportFormat::Ptml).unwrap();
        let tree = session.tree.clone();
        session.import_tree(&ptml).unwrap();
        assert_eq!(session.tree, tree);
        assert!(session.added_variant_ids.is_empty());
    }
}
