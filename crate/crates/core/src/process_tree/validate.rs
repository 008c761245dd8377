use serde::Serialize;

use super::{Node, NodePath, Operator, ProcessTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationCode {
    /// A loop without exactly two children.
    LoopArity,
    /// A sequence, choice or parallel node without children.
    EmptyOperator,
    /// A sequence, choice or parallel node with a single child.
    SingleChildWarning,
}

impl ViolationCode {
    pub fn severity(self) -> Severity {
        match self {
            ViolationCode::LoopArity | ViolationCode::EmptyOperator => Severity::Error,
            ViolationCode::SingleChildWarning => Severity::Warning,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub path: NodePath,
    pub code: ViolationCode,
    pub severity: Severity,
}

impl ProcessTree {
    /// Structural check. Errors block discovery and conformance checking,
    /// warnings do not.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for path in self.paths() {
            let Some(Node::Operator { op, children }) = self.get(&path) else {
                continue;
            };
            let code = match (op, children.len()) {
                (Operator::Loop, 2) => continue,
                (Operator::Loop, _) => ViolationCode::LoopArity,
                (_, 0) => ViolationCode::EmptyOperator,
                (_, 1) => ViolationCode::SingleChildWarning,
                _ => continue,
            };
            out.push(Violation {
                path,
                code,
                severity: code.severity(),
            });
        }
        out
    }

    /// Whether [`validate`](Self::validate) reports no errors.
    pub fn is_valid(&self) -> bool {
        self.validate()
            .iter()
            .all(|v| v.severity == Severity::Warning)
    }
}
