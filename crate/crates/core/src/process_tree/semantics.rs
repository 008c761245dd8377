//! Language of a process tree.
//!
//! Two independent routes are provided. [`ProcessTree::accepts`] simulates
//! the tree as a state machine over execution states of its nodes and
//! decides membership of one trace. [`ProcessTree::enumerate_language`]
//! builds the bounded language bottom-up from set operations (union,
//! concatenation, shuffle, bounded Kleene iteration). Tests cross-check them.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use thiserror::Error;

use super::{Node, Operator, ProcessTree, Violation};

/// Longest words [`ProcessTree::enumerate_language`] will produce.
pub const MAX_ENUMERATION_LENGTH: usize = 12;

/// Default cap on intermediate words built during enumeration.
pub const DEFAULT_LANGUAGE_CAP: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum LanguageError {
    #[error("tree is not valid: {0:?}")]
    InvalidTree(Vec<Violation>),
    #[error("maximum length {0} exceeds the supported bound of {MAX_ENUMERATION_LENGTH}")]
    LengthTooLarge(usize),
    #[error("language enumeration exceeded {0} intermediate words")]
    BudgetExceeded(usize),
}

fn check(tree: &ProcessTree) -> Result<(), LanguageError> {
    let errors: Vec<_> = tree
        .validate()
        .into_iter()
        .filter(|v| v.severity == super::Severity::Error)
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(LanguageError::InvalidTree(errors))
    }
}

/// Execution state of a node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Run {
    Init,
    Done,
    Seq(usize, Box<Run>),
    Xor(usize, Box<Run>),
    And(Vec<Run>),
    Do(Box<Run>),
    Redo(Box<Run>),
}

/// Successor states of `node` in state `run`, each tagged with the visible
/// label it emits (`None` for silent steps).
fn steps<'t>(node: &'t Node, run: &Run, out: &mut Vec<(Option<&'t str>, Run)>) {
    let children = node.children();
    match run {
        Run::Done => {}
        Run::Init => match node {
            Node::Activity(label) => out.push((Some(label), Run::Done)),
            Node::Tau => out.push((None, Run::Done)),
            Node::Operator { op, children } => match op {
                Operator::Sequence => out.push((None, Run::Seq(0, Box::new(Run::Init)))),
                Operator::Choice => {
                    for k in 0..children.len() {
                        out.push((None, Run::Xor(k, Box::new(Run::Init))));
                    }
                }
                Operator::Parallel => out.push((None, Run::And(vec![Run::Init; children.len()]))),
                Operator::Loop => out.push((None, Run::Do(Box::new(Run::Init)))),
            },
        },
        Run::Seq(i, inner) => {
            if **inner == Run::Done {
                if i + 1 < children.len() {
                    out.push((None, Run::Seq(i + 1, Box::new(Run::Init))));
                } else {
                    out.push((None, Run::Done));
                }
            } else {
                wrap(&children[*i], inner, out, |r| Run::Seq(*i, Box::new(r)));
            }
        }
        Run::Xor(k, inner) => {
            if **inner == Run::Done {
                out.push((None, Run::Done));
            } else {
                wrap(&children[*k], inner, out, |r| Run::Xor(*k, Box::new(r)));
            }
        }
        Run::And(runs) => {
            if runs.iter().all(|r| *r == Run::Done) {
                out.push((None, Run::Done));
            }
            for (i, r) in runs.iter().enumerate() {
                wrap(&children[i], r, out, |r| {
                    let mut next = runs.clone();
                    next[i] = r;
                    Run::And(next)
                });
            }
        }
        Run::Do(inner) => {
            if **inner == Run::Done {
                out.push((None, Run::Done));
                out.push((None, Run::Redo(Box::new(Run::Init))));
            } else {
                wrap(&children[0], inner, out, |r| Run::Do(Box::new(r)));
            }
        }
        Run::Redo(inner) => {
            if **inner == Run::Done {
                out.push((None, Run::Do(Box::new(Run::Init))));
            } else {
                wrap(&children[1], inner, out, |r| Run::Redo(Box::new(r)));
            }
        }
    }
}

fn wrap<'t>(
    child: &'t Node,
    run: &Run,
    out: &mut Vec<(Option<&'t str>, Run)>,
    rebuild: impl Fn(Run) -> Run,
) {
    let mut inner = Vec::new();
    steps(child, run, &mut inner);
    out.extend(inner.into_iter().map(|(label, r)| (label, rebuild(r))));
}

type Word = Vec<u32>;

struct Enumerator {
    max_len: usize,
    cap: usize,
    built: usize,
}

impl Enumerator {
    fn count(&mut self, n: usize) -> Result<(), LanguageError> {
        self.built += n;
        if self.built > self.cap {
            Err(LanguageError::BudgetExceeded(self.cap))
        } else {
            Ok(())
        }
    }

    fn concat(&mut self, left: &BTreeSet<Word>, right: &BTreeSet<Word>) -> Result<BTreeSet<Word>, LanguageError> {
        let mut out = BTreeSet::new();
        for u in left {
            for v in right {
                if u.len() + v.len() <= self.max_len {
                    let mut w = u.clone();
                    w.extend_from_slice(v);
                    out.insert(w);
                }
            }
            self.count(right.len())?;
        }
        Ok(out)
    }

    fn shuffle(&mut self, left: &BTreeSet<Word>, right: &BTreeSet<Word>) -> Result<BTreeSet<Word>, LanguageError> {
        fn interleave(u: &[u32], v: &[u32], prefix: &mut Word, out: &mut BTreeSet<Word>) {
            match (u.split_first(), v.split_first()) {
                (None, None) => {
                    out.insert(prefix.clone());
                }
                (first_u, first_v) => {
                    if let Some((x, rest)) = first_u {
                        prefix.push(*x);
                        interleave(rest, v, prefix, out);
                        prefix.pop();
                    }
                    if let Some((y, rest)) = first_v {
                        prefix.push(*y);
                        interleave(u, rest, prefix, out);
                        prefix.pop();
                    }
                }
            }
        }
        let mut out = BTreeSet::new();
        for u in left {
            for v in right {
                if u.len() + v.len() <= self.max_len {
                    interleave(u, v, &mut Vec::new(), &mut out);
                }
            }
            self.count(right.len())?;
            if out.len() > self.cap {
                return Err(LanguageError::BudgetExceeded(self.cap));
            }
        }
        Ok(out)
    }

    fn language(&mut self, node: &Node, labels: &HashMap<&str, u32>) -> Result<BTreeSet<Word>, LanguageError> {
        let result = match node {
            Node::Tau => BTreeSet::from([Vec::new()]),
            Node::Activity(label) => {
                if self.max_len == 0 {
                    BTreeSet::new()
                } else {
                    BTreeSet::from([vec![labels[label.as_str()]]])
                }
            }
            Node::Operator { op, children } => {
                let mut parts = Vec::with_capacity(children.len());
                for child in children {
                    parts.push(self.language(child, labels)?);
                }
                match op {
                    Operator::Choice => parts.into_iter().flatten().collect(),
                    Operator::Sequence | Operator::Parallel => {
                        let mut parts = parts.into_iter();
                        let mut acc = parts.next().unwrap_or_default();
                        for part in parts {
                            acc = if *op == Operator::Sequence {
                                self.concat(&acc, &part)?
                            } else {
                                self.shuffle(&acc, &part)?
                            };
                        }
                        acc
                    }
                    Operator::Loop => {
                        let body = &parts[0];
                        let redo_body = self.concat(&parts[1], body)?;
                        let mut acc = body.clone();
                        let mut frontier = body.clone();
                        while !frontier.is_empty() {
                            let next = self.concat(&frontier, &redo_body)?;
                            frontier = next.into_iter().filter(|w| !acc.contains(w)).collect();
                            acc.extend(frontier.iter().cloned());
                        }
                        acc
                    }
                }
            }
        };
        self.count(result.len())?;
        Ok(result)
    }
}

impl ProcessTree {
    /// Whether `trace` is in the language of this tree.
    pub fn accepts<S: AsRef<str>>(&self, trace: &[S]) -> Result<bool, LanguageError> {
        check(self)?;
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        let start = (Run::Init, 0usize);
        seen.insert(start.clone());
        queue.push_back(start);
        let mut successors = Vec::new();
        while let Some((run, pos)) = queue.pop_front() {
            if run == Run::Done && pos == trace.len() {
                return Ok(true);
            }
            successors.clear();
            steps(&self.root, &run, &mut successors);
            for (label, next) in successors.drain(..) {
                let next_pos = match label {
                    None => pos,
                    Some(label) if trace.get(pos).is_some_and(|a| a.as_ref() == label) => pos + 1,
                    Some(_) => continue,
                };
                let state = (next, next_pos);
                if !seen.contains(&state) {
                    seen.insert(state.clone());
                    queue.push_back(state);
                }
            }
        }
        Ok(false)
    }

    /// Every word of the language with length at most `max_len`.
    pub fn enumerate_language(&self, max_len: usize) -> Result<BTreeSet<Vec<String>>, LanguageError> {
        self.enumerate_language_with_cap(max_len, DEFAULT_LANGUAGE_CAP)
    }

    pub fn enumerate_language_with_cap(
        &self,
        max_len: usize,
        cap: usize,
    ) -> Result<BTreeSet<Vec<String>>, LanguageError> {
        check(self)?;
        if max_len > MAX_ENUMERATION_LENGTH {
            return Err(LanguageError::LengthTooLarge(max_len));
        }
        let names: Vec<&str> = self.activities().into_iter().collect();
        let labels: HashMap<&str, u32> = names.iter().enumerate().map(|(i, n)| (*n, i as u32)).collect();
        let mut enumerator = Enumerator { max_len, cap, built: 0 };
        let words = enumerator.language(&self.root, &labels)?;
        Ok(words
            .into_iter()
            .map(|w| w.into_iter().map(|i| names[i as usize].to_string()).collect())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(s: &str) -> ProcessTree {
        s.parse().unwrap()
    }

    fn lang(s: &str, n: usize) -> BTreeSet<String> {
        tree(s)
            .enumerate_language(n)
            .unwrap()
            .into_iter()
            .map(|w| w.concat())
            .collect()
    }

    fn set(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn parallel_any_order() {
        assert!(tree("+(a, b)").accepts(&["b", "a"]).unwrap());
        assert!(tree("+(a, b)").accepts(&["a", "b"]).unwrap());
        assert!(!tree("+(a, b)").accepts(&["a"]).unwrap());
    }

    #[test]
    fn loop_must_close_with_do() {
        let t = tree("*(a, b)");
        assert!(!t.accepts(&["a", "b"]).unwrap());
        assert!(t.accepts(&["a", "b", "a"]).unwrap());
        assert!(t.accepts(&["a"]).unwrap());
        assert!(!t.accepts::<&str>(&[]).unwrap());
    }

    #[test]
    fn optional_middle() {
        let t = tree("->(a, X(b, tau), c)");
        assert!(t.accepts(&["a", "c"]).unwrap());
        assert!(t.accepts(&["a", "b", "c"]).unwrap());
        assert!(!t.accepts(&["a", "b"]).unwrap());
        // Brute-force play-out: the language up to length 3 is exactly {ac, abc}.
        assert_eq!(lang("->(a, X(b, tau), c)", 3), set(&["ac", "abc"]));
    }

    #[test]
    fn leaves() {
        assert!(tree("tau").accepts::<&str>(&[]).unwrap());
        assert_eq!(lang("a", 2), set(&["a"]));
        assert_eq!(lang("tau", 2), set(&[""]));
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(lang("X(a, tau)", 2), set(&["", "a"]));
        assert_eq!(lang("+(a, b)", 2), set(&["ab", "ba"]));
        assert_eq!(lang("*(a, b)", 5), set(&["a", "aba", "ababa"]));
    }

    #[test]
    fn silent_loops_terminate() {
        assert_eq!(lang("*(tau, tau)", 3), set(&[""]));
        assert!(tree("*(tau, tau)").accepts::<&str>(&[]).unwrap());
        assert_eq!(lang("*(tau, a)", 2), set(&["", "a", "aa"]));
        assert!(tree("*(*(tau, a), tau)").accepts(&["a", "a", "a"]).unwrap());
    }

    #[test]
    fn single_child_operator_is_transparent() {
        assert_eq!(lang("->(X(a))", 3), set(&["a"]));
        assert!(tree("+(a)").accepts(&["a"]).unwrap());
    }

    #[test]
    fn errors() {
        assert!(matches!(tree("*(a)").accepts(&["a"]), Err(LanguageError::InvalidTree(_))));
        assert!(matches!(tree("a").enumerate_language(13), Err(LanguageError::LengthTooLarge(13))));
        assert!(matches!(
            tree("+(a, b, c, d, e, f)").enumerate_language_with_cap(6, 100),
            Err(LanguageError::BudgetExceeded(100))
        ));
    }
}
