//! Content-addressed store of finished runs, one JSON file per spec.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ExperimentSpec, ResultRecord};
use crate::error::{Error, Result};

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

#[derive(Serialize)]
struct KeyMaterial<'a> {
    kind: &'a str,
    params: &'a std::collections::BTreeMap<String, String>,
    seed: u64,
}

/// SHA-256 over kind, params and seed. Threads are left out: they never
/// change results.
pub fn cache_key(spec: &ExperimentSpec) -> String {
    let material = KeyMaterial {
        kind: spec.kind.as_str(),
        params: &spec.params,
        seed: spec.seed,
    };
    let bytes = serde_json::to_vec(&material).expect("key serializes");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    records: Vec<ResultRecord>,
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|source| Error::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Stored records, or `None`. Unreadable entries are deleted.
    pub fn lookup(&self, spec: &ExperimentSpec) -> Option<Vec<ResultRecord>> {
        let key = cache_key(spec);
        let path = self.entry_path(&key);
        let text = std::fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<Entry>(&text) {
            Ok(e) if e.key == key => Some(e.records),
            _ => {
                let _ = std::fs::remove_file(&path);
                None
            }
        }
    }

    /// Writes via a temporary file and rename, so readers never see a
    /// partial entry.
    pub fn store(&self, spec: &ExperimentSpec, records: &[ResultRecord]) -> Result<()> {
        let key = cache_key(spec);
        let entry = Entry {
            key: key.clone(),
            records: records.to_vec(),
        };
        let tmp = self.dir.join(format!(
            ".{key}.{}.{}.tmp",
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| Error::Io { path, source }
        };
        std::fs::write(&tmp, serde_json::to_vec(&entry).expect("entry serializes"))
            .map_err(io(&tmp))?;
        let dest = self.entry_path(&key);
        std::fs::rename(&tmp, &dest).map_err(io(&dest))
    }
}
