//! On-disk response cache: `<root>/<kind>/<digest>.json`, written through a
//! temporary file and renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub request_digest: String,
    pub response: Value,
    pub provider_version: String,
    pub timestamp: u64,
}

#[derive(Debug, Clone)]
pub struct ResponseCache {
    root: PathBuf,
}

impl ResponseCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ResponseCache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_for(&self, kind: &str, digest: &str) -> PathBuf {
        self.root.join(kind).join(format!("{digest}.json"))
    }

    /// A stored entry; unreadable or corrupt files count as misses.
    pub fn get(&self, kind: &str, digest: &str) -> Option<CacheEntry> {
        let path = self.path_for(kind, digest);
        let bytes = fs::read(&path).ok()?;
        match serde_json::from_slice::<CacheEntry>(&bytes) {
            Ok(e) if e.request_digest == digest => Some(e),
            _ => {
                log::warn!("ignoring corrupt cache entry {}", path.display());
                None
            }
        }
    }

    pub fn put(&self, kind: &str, digest: &str, response: &Value, provider_version: &str) -> Result<()> {
        let dir = self.root.join(kind);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let entry = CacheEntry {
            request_digest: digest.to_string(),
            response: response.clone(),
            provider_version: provider_version.to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        };
        let body = serde_json::to_vec_pretty(&entry).map_err(|e| Error::json("cache entry", e))?;
        write_atomic(&self.path_for(kind, digest), &body)
    }
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
