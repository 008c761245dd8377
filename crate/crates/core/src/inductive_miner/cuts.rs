//! Cut detection on the directly-follows graph. Each detector returns the
//! partition of activity indices, or `None` when no cut of that kind exists.

use super::dfg::Graph;

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let parent = self.0[x];
        if parent == x {
            x
        } else {
            let root = self.find(parent);
            self.0[x] = root;
            root
        }
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller index as representative for determinism.
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }

    /// Classes ordered by their smallest member, members ascending.
    fn classes(mut self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for x in 0..n {
            let root = self.find(x);
            if slot[root] == usize::MAX {
                slot[root] = classes.len();
                classes.push(Vec::new());
            }
            classes[slot[root]].push(x);
        }
        classes
    }
}

/// Connected components of the graph with directions ignored.
pub(super) fn exclusive_choice(graph: &Graph) -> Option<Vec<Vec<usize>>> {
    let n = graph.len();
    let mut uf = UnionFind::new(n);
    for a in 0..n {
        for b in 0..n {
            if graph.follows[a][b] {
                uf.union(a, b);
            }
        }
    }
    let classes = uf.classes();
    (classes.len() > 1).then_some(classes)
}

/// Groups activities that are mutually reachable or mutually unreachable,
/// then orders the groups so that every activity reaches every activity of
/// later groups and none of earlier ones.
pub(super) fn sequence(graph: &Graph) -> Option<Vec<Vec<usize>>> {
    let n = graph.len();
    let reach = graph.reachability();
    let mut uf = UnionFind::new(n);
    for a in 0..n {
        for b in (a + 1)..n {
            if reach[a][b] == reach[b][a] {
                uf.union(a, b);
            }
        }
    }
    let groups = uf.classes();
    if groups.len() < 2 {
        return None;
    }
    // Sources first: order by how many other groups reach each group.
    let reaches = |x: &[usize], y: &[usize]| x.iter().any(|&a| y.iter().any(|&b| reach[a][b]));
    let mut keyed: Vec<(usize, &Vec<usize>)> = groups
        .iter()
        .map(|g| (groups.iter().filter(|other| *other != g && reaches(other, g)).count(), g))
        .collect();
    keyed.sort();
    let ordered: Vec<Vec<usize>> = keyed.into_iter().map(|(_, g)| g.clone()).collect();
    for (i, earlier) in ordered.iter().enumerate() {
        for later in &ordered[i + 1..] {
            for &a in earlier {
                for &b in later {
                    if !reach[a][b] || reach[b][a] {
                        return None;
                    }
                }
            }
        }
    }
    Some(ordered)
}

/// Components of the graph linking activities that are not in both-way
/// direct succession. Components without a start or an end activity are
/// folded into the first complete component.
pub(super) fn parallel(graph: &Graph) -> Option<Vec<Vec<usize>>> {
    let n = graph.len();
    let mut uf = UnionFind::new(n);
    for a in 0..n {
        for b in (a + 1)..n {
            if !(graph.follows[a][b] && graph.follows[b][a]) {
                uf.union(a, b);
            }
        }
    }
    let classes = uf.classes();
    if classes.len() < 2 {
        return None;
    }
    let complete = |c: &Vec<usize>| c.iter().any(|&a| graph.start[a]) && c.iter().any(|&a| graph.end[a]);
    let (mut good, partial): (Vec<_>, Vec<_>) = classes.into_iter().partition(complete);
    if good.len() < 2 {
        return None;
    }
    for class in partial {
        good[0].extend(class);
    }
    for class in &mut good {
        class.sort_unstable();
    }
    good.sort();
    Some(good)
}

/// Body = start and end activities plus anything that cannot act as a redo
/// part; redo parts are the remaining connected components. Returns
/// `(body, redo parts)`.
pub(super) fn looping(graph: &Graph) -> Option<(Vec<usize>, Vec<Vec<usize>>)> {
    let n = graph.len();
    let mut in_body: Vec<bool> = (0..n).map(|a| graph.start[a] || graph.end[a]).collect();

    let mut uf = UnionFind::new(n);
    for a in 0..n {
        for b in 0..n {
            if graph.follows[a][b] && !in_body[a] && !in_body[b] {
                uf.union(a, b);
            }
        }
    }
    let mut redo: Vec<Vec<usize>> = uf.classes().into_iter().filter(|c| !in_body[c[0]]).collect();

    loop {
        let mut merged = false;
        redo.retain(|part| {
            let mut valid = true;
            for a in 0..n {
                if !in_body[a] {
                    continue;
                }
                for &c in part.iter() {
                    // Body may only hand over to a redo part from an end
                    // activity, and a redo part may only return to a start.
                    if graph.follows[a][c] && !graph.end[a] {
                        valid = false;
                    }
                    if graph.follows[c][a] && !graph.start[a] {
                        valid = false;
                    }
                }
            }
            let entries: Vec<usize> = part
                .iter()
                .copied()
                .filter(|&c| (0..n).any(|e| graph.end[e] && graph.follows[e][c]))
                .collect();
            let exits: Vec<usize> = part
                .iter()
                .copied()
                .filter(|&c| (0..n).any(|s| graph.start[s] && graph.follows[c][s]))
                .collect();
            if entries.is_empty() || exits.is_empty() {
                valid = false;
            }
            for &c in &entries {
                if (0..n).any(|e| graph.end[e] && !graph.follows[e][c]) {
                    valid = false;
                }
            }
            for &c in &exits {
                if (0..n).any(|s| graph.start[s] && !graph.follows[c][s]) {
                    valid = false;
                }
            }
            if !valid {
                for &c in part.iter() {
                    in_body[c] = true;
                }
                merged = true;
            }
            valid
        });
        if !merged {
            break;
        }
    }
    if redo.is_empty() {
        return None;
    }
    let body = (0..n).filter(|&a| in_body[a]).collect();
    Some((body, redo))
}
