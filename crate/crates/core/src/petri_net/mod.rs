//! Labeled Petri nets in workflow-net form, built from process trees.

mod build;
mod pnml;

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::process_tree::NodePath;

pub use pnml::serialize_pnml;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaceId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionId(pub usize);

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("transition {0:?} is not enabled")]
    NotEnabled(TransitionId),
    #[error("tree is not valid: {0:?}")]
    InvalidTree(Vec<crate::process_tree::Violation>),
    #[error("reachability exploration exceeded {0} states")]
    BudgetExceeded(usize),
}

#[derive(Debug, Clone)]
pub struct Place {
    pub name: String,
    /// Tree node whose translation created this place. `None` for the
    /// net's source and sink.
    pub owner: Option<NodePath>,
}

#[derive(Debug, Clone)]
pub struct Transition {
    pub name: String,
    /// Activity label; `None` for silent transitions.
    pub label: Option<String>,
    /// Tree node this transition was generated for: the leaf itself, or the
    /// operator for routing transitions.
    pub origin: NodePath,
    pub preset: Vec<PlaceId>,
    pub postset: Vec<PlaceId>,
}

impl Transition {
    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arc {
    Input(PlaceId, TransitionId),
    Output(TransitionId, PlaceId),
}

/// A workflow net: unique source and sink place, every node on a path
/// from source to sink.
#[derive(Debug, Clone)]
pub struct LabeledPetriNet {
    pub places: Vec<Place>,
    pub transitions: Vec<Transition>,
    pub source: PlaceId,
    pub sink: PlaceId,
}

/// Token counts indexed by place.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking(pub Vec<u32>);

impl Marking {
    pub fn tokens(&self, place: PlaceId) -> u32 {
        self.0[place.0]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl fmt::Debug for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let marked: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(p, &n)| if n == 1 { format!("p{p}") } else { format!("{n}·p{p}") })
            .collect();
        write!(f, "[{}]", marked.join(", "))
    }
}

impl LabeledPetriNet {
    pub fn place(&self, id: PlaceId) -> &Place {
        &self.places[id.0]
    }

    pub fn transition(&self, id: TransitionId) -> &Transition {
        &self.transitions[id.0]
    }

    pub fn transition_ids(&self) -> impl Iterator<Item = TransitionId> {
        (0..self.transitions.len()).map(TransitionId)
    }

    pub fn arcs(&self) -> BTreeSet<Arc> {
        let mut arcs = BTreeSet::new();
        for (t, transition) in self.transitions.iter().enumerate() {
            for &p in &transition.preset {
                arcs.insert(Arc::Input(p, TransitionId(t)));
            }
            for &p in &transition.postset {
                arcs.insert(Arc::Output(TransitionId(t), p));
            }
        }
        arcs
    }

    /// Distinct visible labels.
    pub fn labels(&self) -> BTreeSet<&str> {
        self.transitions.iter().filter_map(|t| t.label.as_deref()).collect()
    }

    pub fn initial_marking(&self) -> Marking {
        let mut tokens = vec![0; self.places.len()];
        tokens[self.source.0] = 1;
        Marking(tokens)
    }

    pub fn final_marking(&self) -> Marking {
        let mut tokens = vec![0; self.places.len()];
        tokens[self.sink.0] = 1;
        Marking(tokens)
    }

    pub fn is_enabled(&self, marking: &Marking, t: TransitionId) -> bool {
        self.transitions[t.0].preset.iter().all(|&p| marking.0[p.0] > 0)
    }

    /// Transitions enabled in `marking`, in id order.
    pub fn enabled(&self, marking: &Marking) -> Vec<TransitionId> {
        self.transition_ids().filter(|&t| self.is_enabled(marking, t)).collect()
    }

    pub fn fire(&self, marking: &Marking, t: TransitionId) -> Result<Marking, NetError> {
        if !self.is_enabled(marking, t) {
            return Err(NetError::NotEnabled(t));
        }
        let mut next = marking.clone();
        let transition = &self.transitions[t.0];
        for &p in &transition.preset {
            next.0[p.0] -= 1;
        }
        for &p in &transition.postset {
            next.0[p.0] += 1;
        }
        Ok(next)
    }

    /// Checks the workflow-net shape: the source has no incoming arc, the
    /// sink no outgoing arc, and every place and transition lies on a path
    /// from source to sink.
    pub fn is_workflow_net(&self) -> bool {
        let n_places = self.places.len();
        let node_count = n_places + self.transitions.len();
        // Graph nodes: places 0..n_places, transitions after.
        let mut forward = vec![Vec::new(); node_count];
        let mut backward = vec![Vec::new(); node_count];
        for arc in self.arcs() {
            let (from, to) = match arc {
                Arc::Input(p, t) => (p.0, n_places + t.0),
                Arc::Output(t, p) => (n_places + t.0, p.0),
            };
            forward[from].push(to);
            backward[to].push(from);
        }
        if !backward[self.source.0].is_empty() || !forward[self.sink.0].is_empty() {
            return false;
        }
        let reach = |start: usize, edges: &Vec<Vec<usize>>| {
            let mut seen = vec![false; node_count];
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(n) = stack.pop() {
                for &m in &edges[n] {
                    if !seen[m] {
                        seen[m] = true;
                        stack.push(m);
                    }
                }
            }
            seen
        };
        let from_source = reach(self.source.0, &forward);
        let to_sink = reach(self.sink.0, &backward);
        from_source.iter().zip(&to_sink).all(|(a, b)| *a && *b)
    }

    /// Label sequences of all firing sequences from the initial to the final
    /// marking whose visible length is at most `max_len`. Explores
    /// (marking, word) pairs breadth-first and fails once more than `cap`
    /// pairs have been visited.
    pub fn visible_language(&self, max_len: usize, cap: usize) -> Result<BTreeSet<Vec<String>>, NetError> {
        let final_marking = self.final_marking();
        let mut seen: HashSet<(Marking, Vec<usize>)> = HashSet::new();
        let mut queue = VecDeque::new();
        let start = (self.initial_marking(), Vec::new());
        seen.insert(start.clone());
        queue.push_back(start);
        let mut words = BTreeSet::new();
        while let Some((marking, word)) = queue.pop_front() {
            if marking == final_marking {
                words.insert(word.clone());
            }
            for t in self.enabled(&marking) {
                let mut next_word = word.clone();
                if self.transitions[t.0].label.is_some() {
                    if word.len() == max_len {
                        continue;
                    }
                    next_word.push(t.0);
                }
                let next = (self.fire(&marking, t)?, next_word);
                if seen.insert(next.clone()) {
                    if seen.len() > cap {
                        return Err(NetError::BudgetExceeded(cap));
                    }
                    queue.push_back(next);
                }
            }
        }
        Ok(words
            .into_iter()
            .map(|w| {
                w.into_iter()
                    .map(|t| self.transitions[t].label.clone().expect("visible"))
                    .collect()
            })
            .collect())
    }
}
