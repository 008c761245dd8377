use arbor_core::alignment::AlignError;
use arbor_core::event_log::XesError;
use arbor_core::incremental::ExtendError;
use arbor_core::inductive_miner::MineError;
use arbor_core::petri_net::NetError;
use arbor_core::process_tree::{EditError, PtmlError, Violation};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("no session with id `{0}`")]
    UnknownSession(String),
    #[error("no variant with id {0}")]
    UnknownVariant(usize),
    #[error("no event log has been uploaded")]
    NoLog,
    #[error("the session has no process tree")]
    NoModel,
    #[error("no variants selected")]
    EmptySelection,
    #[error("the tree has structural errors")]
    InvalidTree(Vec<Violation>),
    #[error("previously added variant {0} is not accepted by the current tree")]
    InconsistentModel(usize),
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("nothing to redo")]
    NothingToRedo,
    #[error("could not read event log: {0}")]
    MalformedLog(#[from] XesError),
    #[error("could not read PTML: {0}")]
    MalformedPtml(#[from] PtmlError),
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error("alignment search gave up after {0} states")]
    SearchBudgetExceeded(usize),
    #[error("{0}")]
    BadRequest(String),
    #[error("no such endpoint")]
    NotFound,
    #[error("internal error: {0}")]
    Internal(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::UnknownVariant(_) => "unknown_variant",
            ServiceError::NoLog => "no_log",
            ServiceError::NoModel => "no_model",
            ServiceError::EmptySelection => "empty_selection",
            ServiceError::InvalidTree(_) => "invalid_tree",
            ServiceError::InconsistentModel(_) => "inconsistent_model",
            ServiceError::NothingToUndo => "nothing_to_undo",
            ServiceError::NothingToRedo => "nothing_to_redo",
            ServiceError::MalformedLog(_) => "malformed_log",
            ServiceError::MalformedPtml(_) => "malformed_ptml",
            ServiceError::Edit(e) => match e {
                EditError::InvalidPath(_) => "invalid_path",
                EditError::BelowLeaf(_) => "below_leaf",
                EditError::LeftOfRoot => "left_of_root",
                EditError::CannotRemoveRoot => "cannot_remove_root",
                EditError::NoSibling(_) => "no_sibling",
                EditError::NotALeaf(_) => "not_a_leaf",
                EditError::EmptyLabel => "empty_label",
            },
            ServiceError::SearchBudgetExceeded(_) => "search_budget_exceeded",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::NotFound => "not_found",
            ServiceError::Internal(_) => "internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownSession(_) | ServiceError::NotFound => StatusCode::NOT_FOUND,
            ServiceError::NoLog
            | ServiceError::NoModel
            | ServiceError::InconsistentModel(_)
            | ServiceError::NothingToUndo
            | ServiceError::NothingToRedo => StatusCode::CONFLICT,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::SearchBudgetExceeded(_) => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }
}

impl From<AlignError> for ServiceError {
    fn from(err: AlignError) -> Self {
        match err {
            AlignError::SearchBudgetExceeded(n) => ServiceError::SearchBudgetExceeded(n),
            AlignError::Net(net) => net.into(),
        }
    }
}

impl From<NetError> for ServiceError {
    fn from(err: NetError) -> Self {
        match err {
            NetError::InvalidTree(violations) => ServiceError::InvalidTree(violations),
            NetError::BudgetExceeded(n) => ServiceError::SearchBudgetExceeded(n),
            other => ServiceError::Internal(other.to_string()),
        }
    }
}

impl From<MineError> for ServiceError {
    fn from(err: MineError) -> Self {
        match err {
            MineError::EmptyInput | MineError::EmptySelection => ServiceError::EmptySelection,
        }
    }
}

impl From<ExtendError> for ServiceError {
    fn from(err: ExtendError) -> Self {
        match err {
            ExtendError::InvalidTree(violations) => ServiceError::InvalidTree(violations),
            ExtendError::Align(e) => e.into(),
            ExtendError::Mine(e) => e.into(),
            // Added variants are checked up front, so these mean a bug.
            other => ServiceError::Internal(other.to_string()),
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let mut body = json!({
            "error": { "code": self.code(), "message": self.to_string() }
        });
        if let ServiceError::InvalidTree(violations) = &self {
            body["error"]["violations"] = json!(violations);
        }
        (self.status(), Json(body)).into_response()
    }
}
