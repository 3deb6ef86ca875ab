use super::ModelTier;
use crate::error::{Error, Result};
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

/// One recorded model exchange, stored as `<digest>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FixtureEntry {
    pub digest: String,
    pub tier: ModelTier,
    pub prompt: String,
    pub response: String,
    pub recorded_at: String,
}

/// Digest-keyed model responses, optionally backed by a directory.
#[derive(Debug, Default)]
pub struct FixtureStore {
    dir: Option<PathBuf>,
    entries: RwLock<HashMap<String, FixtureEntry>>,
}

impl FixtureStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads every `*.json` entry in `dir`, creating it if needed.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut entries = HashMap::new();
        for item in fs::read_dir(&dir)? {
            let path = item?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let entry: FixtureEntry = serde_json::from_str(&fs::read_to_string(&path)?)
                .map_err(|e| Error::CorruptDocument(format!("{}: {e}", path.display())))?;
            entries.insert(entry.digest.clone(), entry);
        }
        Ok(Self {
            dir: Some(dir),
            entries: RwLock::new(entries),
        })
    }

    pub fn from_entries(entries: impl IntoIterator<Item = FixtureEntry>) -> Self {
        Self {
            dir: None,
            entries: RwLock::new(entries.into_iter().map(|e| (e.digest.clone(), e)).collect()),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn get(&self, digest: &str) -> Option<FixtureEntry> {
        self.entries.read().get(digest).cloned()
    }

    pub fn len(&self) -> usize {
        self.entries.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries sorted by digest.
    pub fn entries(&self) -> Vec<FixtureEntry> {
        let mut all: Vec<_> = self.entries.read().values().cloned().collect();
        all.sort_by(|a, b| a.digest.cmp(&b.digest));
        all
    }

    /// Adds an entry, writing its file atomically when directory-backed.
    pub fn put(&self, entry: FixtureEntry) -> Result<()> {
        if let Some(dir) = &self.dir {
            let text = serde_json::to_string_pretty(&entry).expect("fixture serializes");
            let path = dir.join(format!("{}.json", entry.digest));
            let tmp = dir.join(format!("{}.json.tmp", entry.digest));
            fs::write(&tmp, text + "\n")?;
            fs::rename(&tmp, &path)?;
        }
        self.entries.write().insert(entry.digest.clone(), entry);
        Ok(())
    }
}
