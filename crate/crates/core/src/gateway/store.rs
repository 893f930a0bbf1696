use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::behavior::{update_posterior, BehaviorEvent, BehaviorState};

const STATE_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct StateFile {
    version: u32,
    behavior: BTreeMap<String, BehaviorState>,
}

/// Per-principal behavior state, checkpointed to disk after every change.
///
/// Checkpoints go through a temp file and a rename, so the state file is
/// always either the previous or the next snapshot.
#[derive(Debug)]
pub struct StateStore {
    path: Option<PathBuf>,
    capacity: usize,
    behavior: Mutex<BTreeMap<String, BehaviorState>>,
    checkpoint: Mutex<()>,
}

impl StateStore {
    pub fn in_memory(capacity: usize) -> Self {
        Self {
            path: None,
            capacity,
            behavior: Mutex::new(BTreeMap::new()),
            checkpoint: Mutex::new(()),
        }
    }

    /// Loads `path` if it exists; a missing file starts empty.
    pub fn open(path: impl Into<PathBuf>, capacity: usize) -> std::io::Result<Self> {
        let path = path.into();
        let behavior = match std::fs::read_to_string(&path) {
            Ok(text) => {
                let file: StateFile = serde_json::from_str(&text).map_err(|e| {
                    std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("{}: {e}", path.display()),
                    )
                })?;
                if let Some((id, _)) = file.behavior.iter().find(|(_, s)| !s.is_valid()) {
                    return Err(std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("{}: invalid behavior state for `{id}`", path.display()),
                    ));
                }
                file.behavior
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e),
        };
        Ok(Self {
            path: Some(path),
            capacity,
            behavior: Mutex::new(behavior),
            checkpoint: Mutex::new(()),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Current state, or the prior for an unseen principal.
    pub fn get(&self, principal_id: &str) -> BehaviorState {
        self.lock()
            .get(principal_id)
            .cloned()
            .unwrap_or_else(|| BehaviorState::with_capacity(self.capacity))
    }

    /// Applies one event and returns the new state.
    pub fn record(&self, event: &BehaviorEvent, violation_weight: f64) -> BehaviorState {
        let mut map = self.lock();
        let entry = map
            .entry(event.principal_id.clone())
            .or_insert_with(|| BehaviorState::with_capacity(self.capacity));
        *entry = update_posterior(entry, event, violation_weight);
        entry.clone()
    }

    pub fn snapshot(&self) -> BTreeMap<String, BehaviorState> {
        self.lock().clone()
    }

    /// Writes the current snapshot. A no-op for in-memory stores.
    pub fn checkpoint(&self) -> std::io::Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let _guard = self.checkpoint.lock().unwrap_or_else(|p| p.into_inner());
        // Snapshot under the checkpoint lock so a later checkpoint never
        // writes an older state.
        let file = StateFile {
            version: STATE_VERSION,
            behavior: self.snapshot(),
        };
        let json = serde_json::to_vec_pretty(&file).map_err(std::io::Error::other)?;
        let dir = path
            .parent()
            .filter(|d| !d.as_os_str().is_empty())
            .unwrap_or(Path::new("."));
        std::fs::create_dir_all(dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(&json)?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, BTreeMap<String, BehaviorState>> {
        self.behavior.lock().unwrap_or_else(|p| p.into_inner())
    }
}
