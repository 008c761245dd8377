//! Optimal alignments of a trace against a workflow net.
//!
//! The search runs over the synchronous product: states are pairs of a net
//! marking and a position in the trace. From each state the search may
//! fire a transition together with the next trace activity (synchronous
//! move), fire a transition alone (model move), or consume the next
//! activity alone (log move). Log moves and visible model moves cost 1,
//! synchronous moves and silent model moves cost 0. An alignment is a
//! cheapest path from `(initial marking, 0)` to `(final marking, |trace|)`.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_log::TraceVariant;
use crate::petri_net::{LabeledPetriNet, Marking, NetError, TransitionId};
use crate::process_tree::ProcessTree;

/// Default cap on expanded search states.
pub const DEFAULT_MAX_EXPANDED: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum AlignError {
    #[error("alignment search expanded more than {0} states")]
    SearchBudgetExceeded(usize),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Synchronous,
    LogMove,
    ModelMove,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub kind: MoveKind,
    pub log_activity: Option<String>,
    pub transition: Option<TransitionId>,
}

impl Move {
    /// Cost under the standard unit cost function.
    pub fn cost(&self, net: &LabeledPetriNet) -> u32 {
        match (self.kind, self.transition) {
            (MoveKind::Synchronous, _) => 0,
            (MoveKind::LogMove, _) => 1,
            (MoveKind::ModelMove, Some(t)) if net.transition(t).is_silent() => 0,
            (MoveKind::ModelMove, _) => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub moves: Vec<Move>,
    pub cost: u32,
}

impl Alignment {
    /// The trace side: activities of synchronous and log moves, in order.
    pub fn log_projection(&self) -> Vec<&str> {
        self.moves.iter().filter_map(|m| m.log_activity.as_deref()).collect()
    }

    /// The model side: the fired transitions, in order.
    pub fn model_projection(&self) -> Vec<TransitionId> {
        self.moves.iter().filter_map(|m| m.transition).collect()
    }

    pub fn is_fitting(&self) -> bool {
        self.cost == 0
    }
}

#[derive(Debug, Clone)]
pub struct AlignOptions {
    pub max_expanded: usize,
    /// Use the missing-label heuristic. Off gives plain Dijkstra.
    pub heuristic: bool,
    /// Give up on paths costlier than this; the search then reports `None`.
    pub cost_bound: Option<u32>,
}

impl Default for AlignOptions {
    fn default() -> Self {
        AlignOptions {
            max_expanded: DEFAULT_MAX_EXPANDED,
            heuristic: true,
            cost_bound: None,
        }
    }
}

struct SearchNode {
    marking: Marking,
    pos: usize,
    g: u32,
    parent: Option<usize>,
    kind: MoveKind,
    transition: Option<TransitionId>,
}

/// Tie-break rank among equal-f entries: synchronous first, log moves last.
fn rank(net: &LabeledPetriNet, kind: MoveKind, transition: Option<TransitionId>) -> u8 {
    match kind {
        MoveKind::Synchronous => 0,
        MoveKind::ModelMove if transition.is_some_and(|t| net.transition(t).is_silent()) => 1,
        MoveKind::ModelMove => 2,
        MoveKind::LogMove => 3,
    }
}

/// Computes a cost-minimal alignment.
pub fn align<S: AsRef<str>>(net: &LabeledPetriNet, trace: &[S]) -> Result<Alignment, AlignError> {
    Ok(align_with(net, trace, &AlignOptions::default())?.expect("unbounded search always finds an alignment"))
}

/// Like [`align`], with explicit options. Returns `Ok(None)` only when
/// `cost_bound` is set and every alignment costs more than the bound.
pub fn align_with<S: AsRef<str>>(
    net: &LabeledPetriNet,
    trace: &[S],
    options: &AlignOptions,
) -> Result<Option<Alignment>, AlignError> {
    let trace: Vec<&str> = trace.iter().map(AsRef::as_ref).collect();
    let n = trace.len();
    let labels = net.labels();
    // missing[i]: activities in trace[i..] that no transition carries; each
    // forces a log move.
    let mut missing = vec![0u32; n + 1];
    for i in (0..n).rev() {
        missing[i] = missing[i + 1] + u32::from(!labels.contains(trace[i]));
    }
    let h = |pos: usize| if options.heuristic { missing[pos] } else { 0 };
    let bound = options.cost_bound.unwrap_or(u32::MAX);
    if h(0) > bound {
        return Ok(None);
    }

    let final_marking = net.final_marking();
    let mut nodes: Vec<SearchNode> = Vec::new();
    let mut best: HashMap<(Marking, usize), usize> = HashMap::new();
    let mut closed: Vec<bool> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut expanded = 0usize;

    let start = SearchNode {
        marking: net.initial_marking(),
        pos: 0,
        g: 0,
        parent: None,
        kind: MoveKind::Synchronous,
        transition: None,
    };
    best.insert((start.marking.clone(), 0), 0);
    nodes.push(start);
    closed.push(false);
    heap.push(Reverse((h(0), 0u8, seq, 0usize)));

    while let Some(Reverse((_, _, _, idx))) = heap.pop() {
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        let (marking, pos, g) = (nodes[idx].marking.clone(), nodes[idx].pos, nodes[idx].g);
        if pos == n && marking == final_marking {
            return Ok(Some(reconstruct(net, &trace, &nodes, idx)));
        }
        expanded += 1;
        if expanded > options.max_expanded {
            return Err(AlignError::SearchBudgetExceeded(options.max_expanded));
        }

        let mut successors: Vec<(Marking, usize, u32, MoveKind, Option<TransitionId>)> = Vec::new();
        for t in net.enabled(&marking) {
            let next = net.fire(&marking, t)?;
            match &net.transition(t).label {
                None => successors.push((next, pos, 0, MoveKind::ModelMove, Some(t))),
                Some(label) => {
                    if pos < n && trace[pos] == label {
                        successors.push((next.clone(), pos + 1, 0, MoveKind::Synchronous, Some(t)));
                    }
                    successors.push((next, pos, 1, MoveKind::ModelMove, Some(t)));
                }
            }
        }
        if pos < n {
            successors.push((marking.clone(), pos + 1, 1, MoveKind::LogMove, None));
        }

        for (next_marking, next_pos, cost, kind, transition) in successors {
            let next_g = g + cost;
            let f = next_g + h(next_pos);
            if f > bound {
                continue;
            }
            let candidate = SearchNode {
                marking: next_marking,
                pos: next_pos,
                g: next_g,
                parent: Some(idx),
                kind,
                transition,
            };
            let key = (candidate.marking.clone(), next_pos);
            let target = match best.entry(key) {
                Entry::Occupied(mut slot) => {
                    let existing = *slot.get();
                    if closed[existing] || nodes[existing].g <= next_g {
                        continue;
                    }
                    // Re-open under a fresh index; the stale entry is skipped
                    // because its index is closed below.
                    closed[existing] = true;
                    let fresh = nodes.len();
                    slot.insert(fresh);
                    fresh
                }
                Entry::Vacant(slot) => {
                    let fresh = nodes.len();
                    slot.insert(fresh);
                    fresh
                }
            };
            nodes.push(candidate);
            closed.push(false);
            seq += 1;
            heap.push(Reverse((f, rank(net, kind, transition), seq, target)));
        }
    }
    Ok(None)
}

fn reconstruct(net: &LabeledPetriNet, trace: &[&str], nodes: &[SearchNode], goal: usize) -> Alignment {
    let mut moves = Vec::new();
    let mut cursor = goal;
    while let Some(parent) = nodes[cursor].parent {
        let node = &nodes[cursor];
        let log_activity = match node.kind {
            MoveKind::ModelMove => None,
            _ => Some(trace[nodes[parent].pos].to_string()),
        };
        moves.push(Move {
            kind: node.kind,
            log_activity,
            transition: node.transition,
        });
        cursor = parent;
    }
    moves.reverse();
    let cost = moves.iter().map(|m| m.cost(net)).sum();
    debug_assert_eq!(cost, nodes[goal].g);
    Alignment { moves, cost }
}

/// Whether the trace fits the net, i.e. an alignment of cost 0 exists.
pub fn fits_net<S: AsRef<str>>(net: &LabeledPetriNet, trace: &[S], max_expanded: usize) -> Result<bool, AlignError> {
    let options = AlignOptions {
        max_expanded,
        heuristic: true,
        cost_bound: Some(0),
    };
    Ok(align_with(net, trace, &options)?.is_some())
}

/// Whether the tree's net aligns with the trace at cost 0.
pub fn is_fitting<S: AsRef<str>>(tree: &ProcessTree, trace: &[S]) -> Result<bool, AlignError> {
    let net = LabeledPetriNet::from_tree(tree)?;
    fits_net(&net, trace, DEFAULT_MAX_EXPANDED)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Accepted,
    Rejected,
    /// The search budget ran out before a verdict was reached.
    Unknown,
}

impl Verdict {
    pub fn from_fit(result: Result<bool, AlignError>) -> Verdict {
        match result {
            Ok(true) => Verdict::Accepted,
            Ok(false) => Verdict::Rejected,
            Err(_) => Verdict::Unknown,
        }
    }
}

/// Checks every variant against the tree, in parallel. The result is
/// ordered by variant id.
pub fn conformance_report(tree: &ProcessTree, variants: &[TraceVariant]) -> Result<Vec<(usize, Verdict)>, AlignError> {
    conformance_report_with_budget(tree, variants, DEFAULT_MAX_EXPANDED)
}

pub fn conformance_report_with_budget(
    tree: &ProcessTree,
    variants: &[TraceVariant],
    max_expanded: usize,
) -> Result<Vec<(usize, Verdict)>, AlignError> {
    let net = LabeledPetriNet::from_tree(tree)?;
    let mut report: Vec<(usize, Verdict)> = variants
        .par_iter()
        .map(|v| (v.variant_id, Verdict::from_fit(fits_net(&net, &v.activities, max_expanded))))
        .collect();
    report.sort_by_key(|(id, _)| *id);
    Ok(report)
}
