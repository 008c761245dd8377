//! HTTP service for interactive process discovery sessions: upload a log,
//! discover a tree from selected variants, extend it variant by variant,
//! edit it by hand, check conformance, undo and redo, import and export.

mod api;
pub mod error;
pub mod session;
mod store;

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;

use tokio::net::TcpListener;

pub use api::{routes, ApiJson, AppState, Selection};
pub use error::ServiceError;
pub use session::{ExportFormat, NodeSpec, Session, Snapshot, TreeEdit, DEFAULT_HISTORY_CAP};
pub use store::SessionStore;

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Sessions are loaded from here at startup and written back on shutdown.
    pub state_dir: Option<PathBuf>,
    /// Directory with static UI assets served for non-API paths.
    pub static_dir: Option<PathBuf>,
    pub history_cap: usize,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            state_dir: None,
            static_dir: None,
            history_cap: DEFAULT_HISTORY_CAP,
        }
    }
}

impl AppState {
    pub fn new(history_cap: usize) -> Self {
        AppState {
            store: Arc::new(SessionStore::new(history_cap)),
        }
    }
}

/// Serves until `shutdown` resolves, then persists sessions if a state
/// directory is configured.
pub async fn serve(
    listener: TcpListener,
    config: ServerConfig,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let state = AppState::new(config.history_cap);
    if let Some(dir) = &config.state_dir {
        let loaded = state.store.load_from(dir)?;
        tracing::info!("restored {loaded} sessions from {}", dir.display());
    }
    let app = routes(state.clone(), config.static_dir.as_deref());
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await?;
    if let Some(dir) = &config.state_dir {
        let saved = state.store.save_to(dir)?;
        tracing::info!("saved {saved} sessions to {}", dir.display());
    }
    Ok(())
}
