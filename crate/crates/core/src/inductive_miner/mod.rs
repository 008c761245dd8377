//! Inductive Miner: discovers a process tree whose language contains every
//! input trace.
//!
//! The miner recursively looks for a cut of the directly-follows graph, in
//! the order exclusive choice, sequence, parallel, loop. A cut splits the
//! traces into one sub-log per part and each sub-log is mined on its own.
//! Empty traces make the current node optional (`×(…, τ)`), and when no cut
//! exists the node falls through to a flower `↺(×(a₁, …, aₖ), τ)` that
//! accepts any non-empty sequence over its alphabet.

mod cuts;
mod dfg;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::event_log::TraceVariant;
use crate::process_tree::{Node, ProcessTree};

pub use dfg::{build_dfg, Dfg};
use dfg::Graph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MineError {
    #[error("no traces to discover from")]
    EmptyInput,
    #[error("no variants selected")]
    EmptySelection,
}

type SubLog<'a> = BTreeSet<Vec<&'a str>>;

/// Discovers a tree from a set of traces. Only the distinct sequences
/// matter; multiplicities are ignored.
pub fn discover<T, S>(traces: impl IntoIterator<Item = T>) -> Result<ProcessTree, MineError>
where
    T: AsRef<[S]>,
    S: AsRef<str>,
{
    let owned: Vec<Vec<String>> = traces
        .into_iter()
        .map(|t| t.as_ref().iter().map(|a| a.as_ref().to_string()).collect())
        .collect();
    if owned.is_empty() {
        return Err(MineError::EmptyInput);
    }
    let log: SubLog = owned.iter().map(|t| t.iter().map(String::as_str).collect()).collect();
    Ok(ProcessTree::new(mine(&log)))
}

/// Discovers a tree from the activity sequences of selected variants.
pub fn discover_from_variants<'a>(variants: impl IntoIterator<Item = &'a TraceVariant>) -> Result<ProcessTree, MineError> {
    let traces: Vec<&[String]> = variants.into_iter().map(|v| v.activities.as_slice()).collect();
    if traces.is_empty() {
        return Err(MineError::EmptySelection);
    }
    discover(traces)
}

fn mine(log: &SubLog) -> Node {
    if log.iter().all(Vec::is_empty) {
        return Node::Tau;
    }
    if log.contains(&Vec::new()) {
        let rest: SubLog = log.iter().filter(|t| !t.is_empty()).cloned().collect();
        return Node::choice(vec![mine(&rest), Node::Tau]);
    }
    if log.len() == 1 {
        let trace = log.first().expect("non-empty");
        if trace.len() == 1 {
            return Node::activity(trace[0]);
        }
    }

    let graph = Graph::new(log);
    let names = &graph.names;
    let member_sets = |parts: &[Vec<usize>]| -> Vec<BTreeSet<&str>> {
        parts
            .iter()
            .map(|p| p.iter().map(|&i| names[i]).collect())
            .collect()
    };

    if let Some(parts) = cuts::exclusive_choice(&graph) {
        let parts = member_sets(&parts);
        let children = parts
            .iter()
            .map(|part| {
                let sub: SubLog = log.iter().filter(|t| part.contains(t[0])).cloned().collect();
                mine(&sub)
            })
            .collect();
        return Node::choice(children);
    }

    if let Some(parts) = cuts::sequence(&graph) {
        let parts = member_sets(&parts);
        let mut sublogs: Vec<SubLog> = vec![SubLog::new(); parts.len()];
        for trace in log {
            let mut rest = trace.as_slice();
            for (part, sub) in parts.iter().zip(sublogs.iter_mut()) {
                let len = rest.iter().take_while(|a| part.contains(*a)).count();
                sub.insert(rest[..len].to_vec());
                rest = &rest[len..];
            }
            debug_assert!(rest.is_empty(), "sequence cut must consume every trace");
        }
        return Node::sequence(sublogs.iter().map(mine).collect());
    }

    if let Some(parts) = cuts::parallel(&graph) {
        let parts = member_sets(&parts);
        let children = parts
            .iter()
            .map(|part| {
                let sub: SubLog = log
                    .iter()
                    .map(|t| t.iter().copied().filter(|a| part.contains(a)).collect())
                    .collect();
                mine(&sub)
            })
            .collect();
        return Node::parallel(children);
    }

    if let Some((body, redo)) = cuts::looping(&graph) {
        let body: BTreeSet<&str> = body.iter().map(|&i| names[i]).collect();
        let redo = member_sets(&redo);
        let mut body_log = SubLog::new();
        let mut redo_logs = vec![SubLog::new(); redo.len()];
        for trace in log {
            for run in trace.chunk_by(|a, b| body.contains(a) == body.contains(b)) {
                if body.contains(run[0]) {
                    body_log.insert(run.to_vec());
                } else {
                    let k = redo.iter().position(|p| p.contains(run[0])).expect("redo activity");
                    redo_logs[k].insert(run.to_vec());
                }
            }
        }
        let redo_node = if redo_logs.len() == 1 {
            mine(&redo_logs[0])
        } else {
            Node::choice(redo_logs.iter().map(mine).collect())
        };
        return Node::looped(mine(&body_log), redo_node);
    }

    flower(names)
}

fn flower(alphabet: &[&str]) -> Node {
    let body = match alphabet {
        [single] => Node::activity(*single),
        _ => Node::choice(alphabet.iter().map(|a| Node::activity(*a)).collect()),
    };
    Node::looped(body, Node::Tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mined(traces: &[&[&str]]) -> String {
        discover(traces.iter().map(|t| t.to_vec())).unwrap().to_string()
    }

    #[test]
    fn base_cases() {
        assert_eq!(mined(&[&["a"]]), "'a'");
        assert_eq!(mined(&[&[]]), "tau");
        assert_eq!(mined(&[&["a"], &[]]), "X('a', tau)");
    }

    #[test]
    fn parallel() {
        assert_eq!(mined(&[&["a", "b"], &["b", "a"]]), "+('a', 'b')");
    }

    #[test]
    fn sequence_then_choice() {
        assert_eq!(mined(&[&["a", "b"], &["a", "c"]]), "->('a', X('b', 'c'))");
        assert_eq!(mined(&[&["a", "b"]]), "->('a', 'b')");
    }

    #[test]
    fn loops() {
        assert_eq!(mined(&[&["a"], &["a", "b", "a"]]), "*('a', 'b')");
        assert_eq!(mined(&[&["a", "a"]]), "*('a', tau)");
    }

    #[test]
    fn optional_step_in_sequence() {
        assert_eq!(mined(&[&["a", "b", "c"], &["a", "c"]]), "->('a', X('b', tau), 'c')");
    }

    #[test]
    fn flower_fallback() {
        // No cut separates these.
        let tree = discover([vec!["a", "b", "c"], vec!["c", "a"], vec!["b", "b"], vec!["c", "b", "a", "a"]]).unwrap();
        for t in [vec!["a", "b", "c"], vec!["c", "a"], vec!["b", "b"], vec!["c", "b", "a", "a"]] {
            assert!(tree.accepts(&t).unwrap(), "{tree} rejects {t:?}");
        }
    }

    #[test]
    fn duplicates_are_ignored() {
        let once = discover([vec!["a", "b"]]).unwrap();
        let twice = discover([vec!["a", "b"], vec!["a", "b"]]).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn empty_input() {
        assert_eq!(discover(Vec::<Vec<String>>::new()), Err(MineError::EmptyInput));
        assert_eq!(discover_from_variants([]), Err(MineError::EmptySelection));
    }
}
