use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::path::Path;
use std::sync::{Arc, Mutex, MutexGuard, PoisonError};

use crate::error::ServiceError;
use crate::session::Session;

fn lock<T>(mutex: &Mutex<T>) -> MutexGuard<'_, T> {
    mutex.lock().unwrap_or_else(PoisonError::into_inner)
}

/// All live sessions. Each session has its own lock so requests on
/// different sessions never wait for each other.
#[derive(Debug, Default)]
pub struct SessionStore {
    sessions: Mutex<BTreeMap<String, Arc<Mutex<Session>>>>,
    history_cap: usize,
    faults: Mutex<BTreeSet<String>>,
}

impl SessionStore {
    pub fn new(history_cap: usize) -> Self {
        SessionStore {
            history_cap,
            ..SessionStore::default()
        }
    }

    pub fn create(&self) -> String {
        let id = uuid::Uuid::new_v4().to_string();
        let session = Session::with_history_cap(id.clone(), self.history_cap);
        lock(&self.sessions).insert(id.clone(), Arc::new(Mutex::new(session)));
        id
    }

    fn cell(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        lock(&self.sessions)
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    /// Copy of the current state of a session.
    pub fn snapshot(&self, id: &str) -> Option<Session> {
        self.cell(id).ok().map(|cell| lock(&cell).clone())
    }

    pub fn ids(&self) -> Vec<String> {
        lock(&self.sessions).keys().cloned().collect()
    }

    pub fn read<T>(&self, id: &str, f: impl FnOnce(&Session) -> Result<T, ServiceError>) -> Result<T, ServiceError> {
        let cell = self.cell(id)?;
        let session = lock(&cell);
        f(&session)
    }

    /// Runs `f` on a copy of the session and stores the copy only if `f`
    /// succeeds, so a failing operation never leaves a partial change.
    pub fn update<T>(
        &self,
        id: &str,
        operation: &str,
        f: impl FnOnce(&mut Session) -> Result<T, ServiceError>,
    ) -> Result<T, ServiceError> {
        let cell = self.cell(id)?;
        let mut session = lock(&cell);
        let mut draft = session.clone();
        let out = f(&mut draft)?;
        if lock(&self.faults).contains(operation) {
            return Err(ServiceError::Internal(format!("injected fault in `{operation}`")));
        }
        *session = draft;
        Ok(out)
    }

    /// Makes every later call of `operation` fail after its work is done
    /// but before the result is stored. For testing rollback.
    pub fn inject_fault(&self, operation: &str) {
        lock(&self.faults).insert(operation.to_string());
    }

    pub fn clear_faults(&self) {
        lock(&self.faults).clear();
    }

    /// Writes every session to `<dir>/<id>.json`.
    pub fn save_to(&self, dir: &Path) -> io::Result<usize> {
        std::fs::create_dir_all(dir)?;
        let cells: Vec<_> = lock(&self.sessions).values().cloned().collect();
        for cell in &cells {
            let session = lock(cell).clone();
            let json = serde_json::to_vec(&session).map_err(io::Error::other)?;
            std::fs::write(dir.join(format!("{}.json", session.session_id)), json)?;
        }
        Ok(cells.len())
    }

    /// Loads every `*.json` session file in `dir`. Unreadable files are
    /// skipped with a warning.
    pub fn load_from(&self, dir: &Path) -> io::Result<usize> {
        if !dir.exists() {
            return Ok(0);
        }
        let mut loaded = 0;
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_none_or(|ext| ext != "json") {
                continue;
            }
            let parsed = std::fs::read(&path)
                .map_err(|e| e.to_string())
                .and_then(|bytes| serde_json::from_slice::<Session>(&bytes).map_err(|e| e.to_string()));
            match parsed {
                Ok(session) => {
                    lock(&self.sessions).insert(session.session_id.clone(), Arc::new(Mutex::new(session)));
                    loaded += 1;
                }
                Err(err) => tracing::warn!("skipping session file {}: {err}", path.display()),
            }
        }
        Ok(loaded)
    }
}
