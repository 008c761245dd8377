use crate::process_tree::{Node, NodePath, Operator, ProcessTree, Severity};

use super::{LabeledPetriNet, NetError, Place, PlaceId, Transition};

struct Builder {
    places: Vec<Place>,
    transitions: Vec<Transition>,
}

impl Builder {
    fn place(&mut self, owner: Option<NodePath>) -> PlaceId {
        let id = PlaceId(self.places.len());
        let name = match &owner {
            None if id.0 == 0 => "source".to_string(),
            None => "sink".to_string(),
            Some(_) => format!("p{}", id.0),
        };
        self.places.push(Place { name, owner });
        id
    }

    fn transition(&mut self, label: Option<&str>, origin: &NodePath, from: Vec<PlaceId>, to: Vec<PlaceId>) {
        let index = self.transitions.len();
        let name = match label {
            Some(_) => format!("t{index}"),
            None => format!("tau{index}"),
        };
        self.transitions.push(Transition {
            name,
            label: label.map(str::to_string),
            origin: origin.clone(),
            preset: from,
            postset: to,
        });
    }

    fn translate(&mut self, node: &Node, path: &NodePath, entry: PlaceId, exit: PlaceId) {
        match node {
            Node::Activity(label) => self.transition(Some(label), path, vec![entry], vec![exit]),
            Node::Tau => self.transition(None, path, vec![entry], vec![exit]),
            Node::Operator { op, children } => match op {
                Operator::Sequence => {
                    let mut from = entry;
                    for (i, child) in children.iter().enumerate() {
                        let to = if i + 1 == children.len() {
                            exit
                        } else {
                            self.place(Some(path.clone()))
                        };
                        self.translate(child, &path.child(i), from, to);
                        from = to;
                    }
                }
                Operator::Choice => {
                    for (i, child) in children.iter().enumerate() {
                        self.translate(child, &path.child(i), entry, exit);
                    }
                }
                Operator::Parallel => {
                    let mut starts = Vec::new();
                    let mut ends = Vec::new();
                    for (i, child) in children.iter().enumerate() {
                        let start = self.place(Some(path.clone()));
                        let end = self.place(Some(path.clone()));
                        self.translate(child, &path.child(i), start, end);
                        starts.push(start);
                        ends.push(end);
                    }
                    self.transition(None, path, vec![entry], starts);
                    self.transition(None, path, ends, vec![exit]);
                }
                Operator::Loop => {
                    let body_in = self.place(Some(path.clone()));
                    let body_out = self.place(Some(path.clone()));
                    self.transition(None, path, vec![entry], vec![body_in]);
                    self.translate(&children[0], &path.child(0), body_in, body_out);
                    self.translate(&children[1], &path.child(1), body_out, body_in);
                    self.transition(None, path, vec![body_out], vec![exit]);
                }
            },
        }
    }
}

impl LabeledPetriNet {
    /// Translates a tree into a workflow net with the same language.
    ///
    /// Every subtree sits between an entry and an exit place. A sequence
    /// threads its children through fresh intermediate places, a choice puts
    /// all children between the shared entry and exit, a parallel node adds
    /// a silent split and join around per-child place pairs, and a loop gets
    /// its own body places with silent enter/leave transitions so its redo
    /// edge never reaches places shared with siblings.
    pub fn from_tree(tree: &ProcessTree) -> Result<LabeledPetriNet, NetError> {
        let errors: Vec<_> = tree
            .validate()
            .into_iter()
            .filter(|v| v.severity == Severity::Error)
            .collect();
        if !errors.is_empty() {
            return Err(NetError::InvalidTree(errors));
        }
        let mut builder = Builder {
            places: Vec::new(),
            transitions: Vec::new(),
        };
        let source = builder.place(None);
        let sink = builder.place(None);
        builder.translate(&tree.root, &NodePath::root(), source, sink);
        Ok(LabeledPetriNet {
            places: builder.places,
            transitions: builder.transitions,
            source,
            sink,
        })
    }
}
