use std::collections::BTreeSet;

use serde::Serialize;

/// Directly-follows graph of a set of traces.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Dfg {
    pub activities: BTreeSet<String>,
    pub edges: BTreeSet<(String, String)>,
    pub start_activities: BTreeSet<String>,
    pub end_activities: BTreeSet<String>,
    pub contains_empty_trace: bool,
}

pub fn build_dfg<T, S>(traces: impl IntoIterator<Item = T>) -> Dfg
where
    T: AsRef<[S]>,
    S: AsRef<str>,
{
    let mut dfg = Dfg::default();
    for trace in traces {
        let trace = trace.as_ref();
        let Some((first, last)) = trace.first().zip(trace.last()) else {
            dfg.contains_empty_trace = true;
            continue;
        };
        dfg.start_activities.insert(first.as_ref().to_string());
        dfg.end_activities.insert(last.as_ref().to_string());
        for activity in trace {
            dfg.activities.insert(activity.as_ref().to_string());
        }
        for pair in trace.windows(2) {
            dfg.edges
                .insert((pair[0].as_ref().to_string(), pair[1].as_ref().to_string()));
        }
    }
    dfg
}

/// Indexed form of a DFG used by cut detection.
pub(super) struct Graph<'a> {
    pub names: Vec<&'a str>,
    pub follows: Vec<Vec<bool>>,
    pub start: Vec<bool>,
    pub end: Vec<bool>,
}

impl<'a> Graph<'a> {
    pub fn new(traces: &BTreeSet<Vec<&'a str>>) -> Self {
        let names: Vec<&str> = traces
            .iter()
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index = |a: &str| names.binary_search(&a).expect("activity is in the alphabet");
        let n = names.len();
        let mut graph = Graph {
            follows: vec![vec![false; n]; n],
            start: vec![false; n],
            end: vec![false; n],
            names: names.clone(),
        };
        for trace in traces {
            if let (Some(first), Some(last)) = (trace.first(), trace.last()) {
                graph.start[index(first)] = true;
                graph.end[index(last)] = true;
            }
            for pair in trace.windows(2) {
                graph.follows[index(pair[0])][index(pair[1])] = true;
            }
        }
        graph
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// `reach[a][b]`: a non-empty path leads from `a` to `b`.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        let mut reach = self.follows.clone();
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        reach
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_trace() {
        let dfg = build_dfg([vec!["a", "b"]]);
        assert_eq!(dfg.edges, [("a".to_string(), "b".to_string())].into());
        assert_eq!(dfg.start_activities, strings(&["a"]));
        assert_eq!(dfg.end_activities, strings(&["b"]));
        assert!(!dfg.contains_empty_trace);
    }

    #[test]
    fn both_orders() {
        let dfg = build_dfg([vec!["a", "b"], vec!["b", "a"]]);
        assert_eq!(dfg.edges.len(), 2);
        assert_eq!(dfg.start_activities, strings(&["a", "b"]));
        assert_eq!(dfg.end_activities, strings(&["a", "b"]));
    }

    #[test]
    fn empty_trace_only() {
        let dfg = build_dfg([Vec::<&str>::new()]);
        assert!(dfg.activities.is_empty());
        assert!(dfg.contains_empty_trace);
    }
}
