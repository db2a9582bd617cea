//! File-backed session store.
//!
//! Each session lives in `<dir>/<id>/session.json`, the same format the CLI
//! reads. Sessions are loaded lazily, so a restarted service sees every
//! session written before. Mutations of one session are serialized by its own
//! lock; the tokio mutex is fair, so writers are applied in arrival order.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use formsense_core::model::{ModelError, Session};
use thiserror::Error;
use tokio::sync::Mutex;

pub const SESSION_FILE: &str = "session.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("session `{0}` not found")]
    NotFound(String),
    #[error("session `{0}` already exists")]
    Exists(String),
    #[error("invalid session id `{0}`: use 1 to 64 characters from [A-Za-z0-9_-]")]
    InvalidId(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Corrupt { path: String, source: ModelError },
}

pub type SessionHandle = Arc<Mutex<Session>>;

#[derive(Debug)]
pub struct SessionStore {
    dir: PathBuf,
    sessions: Mutex<HashMap<String, SessionHandle>>,
}

pub fn is_valid_id(id: &str) -> bool {
    (1..=64).contains(&id.len()) && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

impl SessionStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into(), sessions: Mutex::new(HashMap::new()) }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn session_path(&self, id: &str) -> PathBuf {
        self.dir.join(id).join(SESSION_FILE)
    }

    /// Persists a new session; fails if the id is taken in memory or on disk.
    pub async fn create(&self, session: Session) -> Result<Session, StoreError> {
        if !is_valid_id(&session.id) {
            return Err(StoreError::InvalidId(session.id));
        }
        let mut map = self.sessions.lock().await;
        let path = self.session_path(&session.id);
        if map.contains_key(&session.id) || tokio::fs::try_exists(&path).await.unwrap_or(false) {
            return Err(StoreError::Exists(session.id));
        }
        write_atomic(&path, &session).await?;
        map.insert(session.id.clone(), Arc::new(Mutex::new(session.clone())));
        Ok(session)
    }

    pub async fn handle(&self, id: &str) -> Result<SessionHandle, StoreError> {
        if !is_valid_id(id) {
            return Err(StoreError::NotFound(id.to_string()));
        }
        let mut map = self.sessions.lock().await;
        if let Some(h) = map.get(id) {
            return Ok(h.clone());
        }
        let path = self.session_path(id);
        let text = match tokio::fs::read_to_string(&path).await {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_string())),
            Err(source) => return Err(StoreError::Io { path: path.display().to_string(), source }),
        };
        let session = Session::from_json(&text)
            .map_err(|source| StoreError::Corrupt { path: path.display().to_string(), source })?;
        let h = Arc::new(Mutex::new(session));
        map.insert(id.to_string(), h.clone());
        Ok(h)
    }

    pub async fn get(&self, id: &str) -> Result<Session, StoreError> {
        Ok(self.handle(id).await?.lock().await.clone())
    }

    /// Applies `f` to a copy of the session and commits it only if `f`
    /// succeeds and the file write succeeds.
    pub async fn update<T, E>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<T, E>,
    ) -> Result<Result<(T, Session), E>, StoreError> {
        let handle = self.handle(id).await?;
        let mut guard = handle.lock().await;
        let mut next = guard.clone();
        match f(&mut next) {
            Ok(out) => {
                write_atomic(&self.session_path(id), &next).await?;
                *guard = next.clone();
                Ok(Ok((out, next)))
            }
            Err(e) => Ok(Err(e)),
        }
    }
}

async fn write_atomic(path: &Path, session: &Session) -> Result<(), StoreError> {
    let io = |source| StoreError::Io { path: path.display().to_string(), source };
    let text = session
        .to_json()
        .map_err(|source| StoreError::Corrupt { path: path.display().to_string(), source })?;
    if let Some(parent) = path.parent() {
        tokio::fs::create_dir_all(parent).await.map_err(io)?;
    }
    let tmp = path.with_extension("json.tmp");
    tokio::fs::write(&tmp, text + "\n").await.map_err(io)?;
    tokio::fs::rename(&tmp, path).await.map_err(io)
}
