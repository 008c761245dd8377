//! Incremental discovery: extend a tree so that it accepts one more trace
//! while still accepting every trace added before.
//!
//! The new trace is aligned against the tree. The subtree covering all
//! deviations (the lowest common ancestor of the nodes touched by log moves
//! and visible model moves) is the repair scope. Every added trace, new one
//! included, is cut into the segments it spends inside that scope; the
//! scope is rediscovered from those segments with the inductive miner and
//! spliced back. If the spliced tree does not accept all traces, the scope
//! widens to its parent, up to rediscovering the whole tree, which always
//! succeeds.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::alignment::{align, align_with, fits_net, AlignError, AlignOptions, Alignment, MoveKind, DEFAULT_MAX_EXPANDED};
use crate::inductive_miner::{discover, MineError};
use crate::petri_net::{LabeledPetriNet, NetError};
use crate::process_tree::{NodePath, ProcessTree, Severity, Violation};

/// Traces explicitly added to a model so far.
pub type AddedTraceSet = BTreeSet<Vec<String>>;

#[derive(Debug, Error, PartialEq)]
pub enum ExtendError {
    #[error("tree is not valid: {0:?}")]
    InvalidTree(Vec<Violation>),
    #[error("previously added trace {0:?} is not accepted by the model")]
    InconsistentInput(Vec<String>),
    #[error("trace is already accepted by the model")]
    TraceFits,
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error(transparent)]
    Mine(#[from] MineError),
}

impl From<NetError> for ExtendError {
    fn from(err: NetError) -> Self {
        match err {
            NetError::InvalidTree(violations) => ExtendError::InvalidTree(violations),
            other => ExtendError::Align(AlignError::Net(other)),
        }
    }
}

/// Result of [`extend`] with the bookkeeping behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    pub tree: ProcessTree,
    /// Scope located from the alignment; `None` if the trace already fit.
    pub initial_scope: Option<NodePath>,
    /// Subtree that was finally replaced; `None` if nothing changed.
    pub replaced: Option<NodePath>,
    /// Number of splice attempts, including the successful one.
    pub attempts: usize,
}

fn check_valid(tree: &ProcessTree) -> Result<(), ExtendError> {
    let errors: Vec<_> = tree
        .validate()
        .into_iter()
        .filter(|v| v.severity == Severity::Error)
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(ExtendError::InvalidTree(errors))
    }
}

fn fits(net: &LabeledPetriNet, trace: &[String]) -> Result<bool, AlignError> {
    fits_net(net, trace, DEFAULT_MAX_EXPANDED)
}

/// Lowest common ancestor of every node an alignment deviates on. Visible
/// model moves touch their leaf; a log move touches the nodes of the model
/// moves around it.
fn scope_of(net: &LabeledPetriNet, alignment: &Alignment) -> NodePath {
    let moves = &alignment.moves;
    let origin = |i: usize| moves[i].transition.map(|t| net.transition(t).origin.clone());
    let mut scope: Option<NodePath> = None;
    let mut touch = |path: NodePath| {
        scope = Some(match scope.take() {
            None => path,
            Some(current) => current.common_ancestor(&path),
        });
    };
    for (i, mv) in moves.iter().enumerate() {
        match mv.kind {
            MoveKind::Synchronous => {}
            MoveKind::ModelMove => {
                let t = mv.transition.expect("model moves fire a transition");
                if !net.transition(t).is_silent() {
                    touch(net.transition(t).origin.clone());
                }
            }
            MoveKind::LogMove => {
                let before = (0..i).rev().find_map(origin);
                let after = (i + 1..moves.len()).find_map(origin);
                if before.is_none() && after.is_none() {
                    touch(NodePath::root());
                }
                for path in before.into_iter().chain(after) {
                    touch(path);
                }
            }
        }
    }
    scope.unwrap_or_default()
}

/// Cuts an aligned trace into the sub-traces it executes inside the
/// subtree at `scope`, one per entry/exit traversal. Log moves inside a
/// traversal belong to it; log moves between traversals become a prefix of
/// the next traversal or, failing that, a suffix of the previous one.
fn segments(net: &LabeledPetriNet, alignment: &Alignment, scope: &NodePath) -> Vec<Vec<String>> {
    let internal: Vec<usize> = net
        .places
        .iter()
        .enumerate()
        .filter(|(_, p)| p.owner.as_ref().is_some_and(|o| o.starts_with(scope)))
        .map(|(i, _)| i)
        .collect();
    let mut marking = net.initial_marking();
    let mut done: Vec<Vec<String>> = Vec::new();
    let mut open: Option<Vec<String>> = None;
    let mut pending: Vec<String> = Vec::new();
    let mut just_closed: Option<usize> = None;

    for mv in &alignment.moves {
        let Some(t) = mv.transition else {
            let activity = mv.log_activity.clone().expect("log moves carry an activity");
            match open.as_mut() {
                Some(segment) => segment.push(activity),
                None => pending.push(activity),
            }
            continue;
        };
        let transition = net.transition(t);
        marking = net.fire(&marking, t).expect("alignment fires enabled transitions");
        if transition.origin.starts_with(scope) {
            let segment = open.get_or_insert_with(|| std::mem::take(&mut pending));
            if mv.kind == MoveKind::Synchronous {
                segment.push(mv.log_activity.clone().expect("synchronous moves carry an activity"));
            }
            if internal.iter().all(|&p| marking.0[p] == 0) {
                done.push(open.take().expect("segment is open"));
                just_closed = Some(done.len() - 1);
            }
        } else if !transition.is_silent() {
            if let Some(k) = just_closed.take() {
                done[k].append(&mut pending);
            }
            pending.clear();
        }
    }
    if let Some(k) = just_closed {
        done[k].append(&mut pending);
    }
    done
}

/// Path of the smallest subtree covering every deviation of the trace.
pub fn locate_deviation_scope<S: AsRef<str>>(model: &ProcessTree, new_trace: &[S]) -> Result<NodePath, ExtendError> {
    check_valid(model)?;
    let net = LabeledPetriNet::from_tree(model)?;
    let alignment = align(&net, new_trace)?;
    if alignment.is_fitting() {
        return Err(ExtendError::TraceFits);
    }
    Ok(scope_of(&net, &alignment))
}

/// Extends `model` so it accepts `new_trace` and everything in
/// `previously_added`. Returns the model unchanged if it already accepts
/// the new trace.
pub fn add_trace<S: AsRef<str>>(
    model: &ProcessTree,
    previously_added: &AddedTraceSet,
    new_trace: &[S],
) -> Result<ProcessTree, ExtendError> {
    extend(model, previously_added, new_trace).map(|e| e.tree)
}

pub fn extend<S: AsRef<str>>(
    model: &ProcessTree,
    previously_added: &AddedTraceSet,
    new_trace: &[S],
) -> Result<Extension, ExtendError> {
    check_valid(model)?;
    let new_trace: Vec<String> = new_trace.iter().map(|a| a.as_ref().to_string()).collect();
    let net = LabeledPetriNet::from_tree(model)?;

    let mut previous_alignments = Vec::with_capacity(previously_added.len());
    for trace in previously_added {
        let options = AlignOptions {
            cost_bound: Some(0),
            ..AlignOptions::default()
        };
        match align_with(&net, trace, &options)? {
            Some(alignment) => previous_alignments.push(alignment),
            None => return Err(ExtendError::InconsistentInput(trace.clone())),
        }
    }

    let alignment = align(&net, &new_trace)?;
    if alignment.is_fitting() {
        return Ok(Extension {
            tree: model.clone(),
            initial_scope: None,
            replaced: None,
            attempts: 0,
        });
    }

    let mut all_traces = previously_added.clone();
    all_traces.insert(new_trace);
    let initial_scope = scope_of(&net, &alignment);
    let mut scope = initial_scope.clone();
    let mut attempts = 0;

    while !scope.is_root() {
        attempts += 1;
        let sublog: BTreeSet<Vec<String>> = previous_alignments
            .iter()
            .chain(std::iter::once(&alignment))
            .flat_map(|a| segments(&net, a, &scope))
            .collect();
        if !sublog.is_empty() {
            let replacement = discover(&sublog)?;
            let candidate = model
                .replace(&scope, replacement.root)
                .expect("scope is a path of the model");
            let candidate_net = LabeledPetriNet::from_tree(&candidate)?;
            let mut accepted = true;
            for trace in &all_traces {
                if !fits(&candidate_net, trace)? {
                    accepted = false;
                    break;
                }
            }
            if accepted {
                return Ok(Extension {
                    tree: candidate,
                    initial_scope: Some(initial_scope),
                    replaced: Some(scope),
                    attempts,
                });
            }
        }
        scope = scope.parent().expect("non-root scope has a parent");
    }

    attempts += 1;
    let tree = discover(&all_traces)?;
    debug_assert!({
        let rediscovered = LabeledPetriNet::from_tree(&tree)?;
        all_traces.iter().all(|t| fits(&rediscovered, t).unwrap_or(false))
    });
    Ok(Extension {
        tree,
        initial_scope: Some(initial_scope),
        replaced: Some(NodePath::root()),
        attempts,
    })
}
