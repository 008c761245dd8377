//! Random models, random traces and brute-force reference implementations
//! used to cross-check `arbor-core` in property tests and the acceptance
//! suite.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt::Write as _;

use arbor_core::petri_net::LabeledPetriNet;
use arbor_core::process_tree::{Node, Operator, ProcessTree};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

pub const ALPHABET: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

fn leaf_count(node: &Node) -> usize {
    if node.is_leaf() {
        1
    } else {
        node.children().iter().map(leaf_count).sum()
    }
}

/// Random valid tree with at most `max_leaves` leaves and depth at most
/// `max_depth`, labels drawn from the first `alphabet` letters.
pub fn random_tree<R: Rng>(rng: &mut R, alphabet: usize, max_depth: usize, max_leaves: usize) -> ProcessTree {
    ProcessTree::new(random_node(rng, alphabet, max_depth, max_leaves.max(1)))
}

fn random_node<R: Rng>(rng: &mut R, alphabet: usize, depth: usize, budget: usize) -> Node {
    if depth <= 1 || budget < 2 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.15) {
            Node::Tau
        } else {
            Node::activity(ALPHABET[rng.gen_range(0..alphabet)])
        };
    }
    let op = *Operator::ALL.choose(rng).expect("operators");
    let arity = match op {
        Operator::Loop => 2,
        _ => rng.gen_range(2..=budget.min(3)),
    };
    // Every child gets one leaf, the rest of the budget is spread randomly.
    let mut budgets = vec![1; arity];
    for _ in arity..budget {
        if rng.gen_bool(0.6) {
            budgets[rng.gen_range(0..arity)] += 1;
        }
    }
    let children = budgets
        .into_iter()
        .map(|b| random_node(rng, alphabet, depth - 1, b))
        .collect();
    Node::operator(op, children)
}

/// Proptest strategy for valid trees, shrinking towards smaller trees.
pub fn arb_tree(alphabet: usize, max_depth: u32, max_leaves: usize) -> impl Strategy<Value = ProcessTree> {
    let leaf = prop_oneof![
        5 => (0..alphabet).prop_map(|i| Node::activity(ALPHABET[i])),
        1 => Just(Node::Tau),
    ];
    leaf.prop_recursive(max_depth.saturating_sub(1), max_leaves as u32, 3, |inner| {
        prop_oneof![
            (
                prop::sample::select(vec![Operator::Sequence, Operator::Choice, Operator::Parallel]),
                prop::collection::vec(inner.clone(), 2..=3),
            )
                .prop_map(|(op, children)| Node::operator(op, children)),
            (inner.clone(), inner).prop_map(|(body, redo)| Node::looped(body, redo)),
        ]
    })
    .prop_filter("too many leaves", move |node| leaf_count(node) <= max_leaves)
    .prop_map(ProcessTree::new)
}

/// Proptest strategy for traces over the first `alphabet` letters.
pub fn arb_trace(alphabet: usize, max_len: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec((0..alphabet).prop_map(|i| ALPHABET[i].to_string()), 0..=max_len)
}

/// Random firing sequence from the initial to the final marking, as its
/// label sequence. Walks that run longer than `max_len` visible steps are
/// retried; `None` after repeated failure.
pub fn sample_trace<R: Rng>(net: &LabeledPetriNet, rng: &mut R, max_len: usize) -> Option<Vec<String>> {
    let final_marking = net.final_marking();
    for _ in 0..50 {
        let mut marking = net.initial_marking();
        let mut word = Vec::new();
        let mut steps = 0;
        loop {
            if marking == final_marking {
                return Some(word);
            }
            let enabled = net.enabled(&marking);
            let Some(&t) = enabled.choose(rng) else { break };
            if let Some(label) = &net.transition(t).label {
                word.push(label.clone());
            }
            marking = net.fire(&marking, t).expect("enabled");
            steps += 1;
            if word.len() > max_len || steps > 8 * max_len + 32 {
                break;
            }
        }
    }
    None
}

/// Up to `count` distinct traces of the tree, in random order.
pub fn sample_variants<R: Rng>(tree: &ProcessTree, rng: &mut R, count: usize, max_len: usize) -> Vec<Vec<String>> {
    let net = LabeledPetriNet::from_tree(tree).expect("valid tree");
    let mut seen = BTreeSet::new();
    for _ in 0..count * 10 {
        if seen.len() == count {
            break;
        }
        if let Some(trace) = sample_trace(&net, rng, max_len) {
            seen.insert(trace);
        }
    }
    let mut variants: Vec<_> = seen.into_iter().collect();
    variants.shuffle(rng);
    variants
}

/// Up to `max_variants` distinct uniformly random traces of length 0..=`max_len`.
pub fn random_trace_set<R: Rng>(rng: &mut R, alphabet: usize, max_variants: usize, max_len: usize) -> BTreeSet<Vec<String>> {
    let possible: usize = (0..=max_len as u32)
        .map(|len| alphabet.saturating_pow(len))
        .fold(0, usize::saturating_add);
    let wanted = rng.gen_range(1..=max_variants.min(possible));
    let mut traces = BTreeSet::new();
    while traces.len() < wanted {
        let len = rng.gen_range(0..=max_len);
        traces.insert((0..len).map(|_| ALPHABET[rng.gen_range(0..alphabet)].to_string()).collect());
    }
    traces
}

/// Optimal alignment cost by uniform-cost search over every
/// (marking, trace position) state, with unit costs for log moves and
/// visible model moves.
pub fn exhaustive_alignment_cost<S: AsRef<str>>(net: &LabeledPetriNet, trace: &[S]) -> u32 {
    let final_marking = net.final_marking().0;
    let mut best: HashMap<(Vec<u32>, usize), u32> = HashMap::new();
    let mut frontier = BinaryHeap::new();
    let start = (net.initial_marking().0, 0usize);
    best.insert(start.clone(), 0);
    frontier.push(Reverse((0u32, start.1, start.0)));
    while let Some(Reverse((cost, pos, tokens))) = frontier.pop() {
        if best.get(&(tokens.clone(), pos)).is_some_and(|&c| c < cost) {
            continue;
        }
        if pos == trace.len() && tokens == final_marking {
            return cost;
        }
        let mut next = Vec::new();
        if pos < trace.len() {
            next.push((cost + 1, pos + 1, tokens.clone()));
        }
        let marking = arbor_core::petri_net::Marking(tokens.clone());
        for t in net.enabled(&marking) {
            let after = net.fire(&marking, t).expect("enabled").0;
            match &net.transition(t).label {
                None => next.push((cost, pos, after)),
                Some(label) => {
                    if pos < trace.len() && trace[pos].as_ref() == label {
                        next.push((cost, pos + 1, after.clone()));
                    }
                    next.push((cost + 1, pos, after));
                }
            }
        }
        for (c, p, m) in next {
            let key = (m, p);
            if best.get(&key).is_none_or(|&old| c < old) {
                best.insert(key.clone(), c);
                frontier.push(Reverse((c, key.1, key.0)));
            }
        }
    }
    unreachable!("the final marking of a tree net is always reachable")
}

fn lcs(a: &[String], b: &[String]) -> usize {
    let mut row = vec![0; b.len() + 1];
    for x in a {
        let mut diagonal = 0;
        for (j, y) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if x == y { diagonal + 1 } else { above.max(row[j]) };
            diagonal = above;
        }
    }
    row[b.len()]
}

/// Optimal alignment cost from the tree's language alone: the cheapest
/// insert/delete edit distance from the trace to any word of the tree.
/// A word longer than `2 * |trace| + shortest` can never be optimal, so a
/// bounded enumeration suffices. `None` if that bound exceeds `max_len` or
/// the enumeration is too large.
pub fn language_alignment_cost(tree: &ProcessTree, trace: &[String], max_len: usize) -> Option<u32> {
    let language = tree.enumerate_language_with_cap(max_len, 2_000_000).ok()?;
    let shortest = language.iter().map(Vec::len).min()?;
    let bound = 2 * trace.len() + shortest;
    if bound > max_len {
        return None;
    }
    language
        .iter()
        .filter(|w| w.len() <= bound)
        .map(|w| (trace.len() + w.len() - 2 * lcs(trace, w)) as u32)
        .min()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// One case for [`write_xes`]: case id and `(activity, timestamp)` events.
pub type XesCase = (String, Vec<(String, Option<String>)>);

/// Minimal XES document with `concept:name` and optional `time:timestamp`
/// per event.
pub fn write_xes(cases: &[XesCase]) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<log xes.version=\"1.0\">\n");
    for (case_id, events) in cases {
        out.push_str("  <trace>\n");
        let _ = writeln!(out, "    <string key=\"concept:name\" value=\"{}\"/>", escape(case_id));
        for (activity, timestamp) in events {
            out.push_str("    <event>\n");
            let _ = writeln!(out, "      <string key=\"concept:name\" value=\"{}\"/>", escape(activity));
            if let Some(ts) = timestamp {
                let _ = writeln!(out, "      <date key=\"time:timestamp\" value=\"{}\"/>", escape(ts));
            }
            out.push_str("    </event>\n");
        }
        out.push_str("  </trace>\n");
    }
    out.push_str("</log>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn oracles_agree_on_small_cases() {
        let tree: ProcessTree = "->(a, X(b, c), d)".parse().unwrap();
        let net = LabeledPetriNet::from_tree(&tree).unwrap();
        let trace: Vec<String> = ["a", "c", "c", "d"].iter().map(|s| s.to_string()).collect();
        assert_eq!(exhaustive_alignment_cost(&net, &trace), 1);
        assert_eq!(language_alignment_cost(&tree, &trace, 12), Some(1));
        assert_eq!(exhaustive_alignment_cost(&net, &[] as &[String]), 3);
    }

    #[test]
    fn random_trees_respect_limits() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let tree = random_tree(&mut rng, 5, 5, 10);
            assert!(tree.is_valid());
            assert!(tree.root.depth() <= 5);
            assert!(leaf_count(&tree.root) <= 10);
        }
    }

    #[test]
    fn sampled_traces_are_accepted() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let tree = random_tree(&mut rng, 5, 4, 8);
            for trace in sample_variants(&tree, &mut rng, 4, 10) {
                assert!(tree.accepts(&trace).unwrap(), "{tree} rejects {trace:?}");
            }
        }
    }

    #[test]
    fn xes_writer_escapes() {
        let xes = write_xes(&[("c<1>".into(), vec![("A & B".into(), None)])]);
        assert!(xes.contains("c&lt;1&gt;"));
        assert!(xes.contains("A &amp; B"));
    }
}
