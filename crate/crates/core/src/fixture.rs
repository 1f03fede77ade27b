//! Record/replay storage for HTTP exchanges, so tests run bit-exactly
//! without network access.

use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FixtureMode {
    #[default]
    Off,
    Record,
    Replay,
}

/// One recorded exchange: request metadata, response status and raw body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub request: serde_json::Value,
    pub status: u16,
    pub body: String,
}

/// One JSON file per key in a flat directory.
#[derive(Debug)]
pub struct FixtureStore {
    dir: PathBuf,
    writes: parking_lot::Mutex<()>,
}

impl FixtureStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            writes: parking_lot::Mutex::new(()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Hex sha256 over the parts, NUL-separated.
    pub fn key(parts: &[&str]) -> String {
        let mut h = Sha256::new();
        for (i, p) in parts.iter().enumerate() {
            if i > 0 {
                h.update([0u8]);
            }
            h.update(p.as_bytes());
        }
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str) -> io::Result<Option<Fixture>> {
        match std::fs::read_to_string(self.path(key)) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Writes via a temporary file and rename; concurrent writers are
    /// serialized.
    pub fn save(&self, key: &str, fixture: &Fixture) -> io::Result<()> {
        let _guard = self.writes.lock();
        std::fs::create_dir_all(&self.dir)?;
        let tmp = self.dir.join(format!(".{key}.tmp"));
        let mut text = serde_json::to_string_pretty(fixture).map_err(io::Error::other)?;
        text.push('\n');
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, self.path(key))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_separate_parts() {
        assert_ne!(FixtureStore::key(&["ab", "c"]), FixtureStore::key(&["a", "bc"]));
        assert_eq!(FixtureStore::key(&["x"]).len(), 64);
    }

    #[test]
    fn save_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let store = FixtureStore::new(dir.path().join("nested"));
        let f = Fixture {
            request: serde_json::json!({"q": "x"}),
            status: 200,
            body: "{}".into(),
        };
        let key = FixtureStore::key(&["t"]);
        assert_eq!(store.load(&key).unwrap(), None);
        store.save(&key, &f).unwrap();
        assert_eq!(store.load(&key).unwrap(), Some(f));
    }
}
