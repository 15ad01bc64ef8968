//! Content-addressed, file-backed store of uploaded datasets and computed
//! labels.
//!
//! Layout under the root directory:
//!
//! ```text
//! datasets/<dataset_id>.csv             raw upload bytes
//! rankings/<ranking_id>.request.json    {"dataset_id": .., "request": ..}
//! rankings/<ranking_id>.label.json      canonical label JSON
//! ```
//!
//! Ids are 16-hex-digit prefixes of SHA-256 digests, so identical uploads
//! and identical requests map to the same files. Writes go through a
//! temporary file and an atomic rename.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::dataset::{digest_bytes, Dataset};
use crate::error::{Error, Result};
use crate::label::{render_json, NutritionalLabel};
use crate::request::RankingRequest;
use crate::scoring::Ranking;

const ID_LEN: usize = 16;

pub fn dataset_id(bytes: &[u8]) -> String {
    digest_bytes(bytes)[..ID_LEN].to_string()
}

pub fn ranking_id(dataset_id: &str, request: &RankingRequest) -> String {
    let key = format!("{dataset_id}\n{}", request.canonical_json());
    digest_bytes(key.as_bytes())[..ID_LEN].to_string()
}

fn valid_id(id: &str) -> bool {
    id.len() == ID_LEN && id.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase())
}

#[derive(Debug)]
pub struct StoredRanking {
    pub ranking_id: String,
    pub dataset_id: String,
    pub request: RankingRequest,
    pub ranking: Ranking,
    pub label: NutritionalLabel,
    pub label_json: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct RequestRecord {
    dataset_id: String,
    request: RankingRequest,
}

#[derive(Default)]
struct Index {
    datasets: HashMap<String, Arc<Dataset>>,
    rankings: HashMap<String, Arc<StoredRanking>>,
}

pub struct SessionStore {
    root: PathBuf,
    index: Mutex<Index>,
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

impl SessionStore {
    /// Opens (creating if needed) a store rooted at `root`. Previously
    /// uploaded datasets are loaded back into the index.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(root.join("datasets"))?;
        std::fs::create_dir_all(root.join("rankings"))?;
        let store = SessionStore {
            root,
            index: Mutex::new(Index::default()),
        };
        for entry in std::fs::read_dir(store.datasets_dir())? {
            let path = entry?.path();
            let Some(id) = path
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_suffix(".csv"))
            else {
                continue;
            };
            if valid_id(id) {
                let bytes = std::fs::read(&path)?;
                let ds = Dataset::load_csv(&bytes)?;
                store.lock().datasets.insert(id.to_string(), Arc::new(ds));
            }
        }
        Ok(store)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn datasets_dir(&self) -> PathBuf {
        self.root.join("datasets")
    }

    fn rankings_dir(&self) -> PathBuf {
        self.root.join("rankings")
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Index> {
        self.index.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Parses and stores an upload; returns its content-derived id.
    pub fn put_dataset(&self, bytes: &[u8]) -> Result<(String, Arc<Dataset>)> {
        let id = dataset_id(bytes);
        if let Some(ds) = self.lock().datasets.get(&id) {
            return Ok((id, ds.clone()));
        }
        let ds = Arc::new(Dataset::load_csv(bytes)?);
        write_atomic(&self.datasets_dir(), &format!("{id}.csv"), bytes)?;
        let ds = self.lock().datasets.entry(id.clone()).or_insert(ds).clone();
        Ok((id, ds))
    }

    pub fn dataset(&self, id: &str) -> Result<Arc<Dataset>> {
        if let Some(ds) = self.lock().datasets.get(id) {
            return Ok(ds.clone());
        }
        if !valid_id(id) {
            return Err(Error::NotFound(format!("dataset '{id}'")));
        }
        let path = self.datasets_dir().join(format!("{id}.csv"));
        let bytes = std::fs::read(&path).map_err(|_| Error::NotFound(format!("dataset '{id}'")))?;
        let ds = Arc::new(Dataset::load_csv(&bytes)?);
        Ok(self.lock().datasets.entry(id.to_string()).or_insert(ds).clone())
    }

    /// Ranks a stored dataset and persists the label. Identical requests on
    /// the same dataset return the same id and label bytes.
    pub fn create_ranking(&self, dataset_id: &str, request: &RankingRequest) -> Result<Arc<StoredRanking>> {
        let id = ranking_id(dataset_id, request);
        if let Some(r) = self.lock().rankings.get(&id) {
            return Ok(r.clone());
        }
        let dataset = self.dataset(dataset_id)?;
        let (ranking, label) = request.evaluate(&dataset)?;
        let label_json = render_json(&label);

        let dir = self.rankings_dir();
        let record = RequestRecord {
            dataset_id: dataset_id.to_string(),
            request: request.clone(),
        };
        write_atomic(&dir, &format!("{id}.request.json"), &serde_json::to_vec(&record)?)?;
        write_atomic(&dir, &format!("{id}.label.json"), &label_json)?;

        let stored = Arc::new(StoredRanking {
            ranking_id: id.clone(),
            dataset_id: dataset_id.to_string(),
            request: request.clone(),
            ranking,
            label,
            label_json,
        });
        Ok(self.lock().rankings.entry(id).or_insert(stored).clone())
    }

    /// Looks a ranking up in memory, falling back to the files on disk.
    pub fn ranking(&self, id: &str) -> Result<Arc<StoredRanking>> {
        if let Some(r) = self.lock().rankings.get(id) {
            return Ok(r.clone());
        }
        let not_found = || Error::NotFound(format!("ranking '{id}'"));
        if !valid_id(id) {
            return Err(not_found());
        }
        let dir = self.rankings_dir();
        let record: RequestRecord = match std::fs::read(dir.join(format!("{id}.request.json"))) {
            Ok(bytes) => serde_json::from_slice(&bytes)?,
            Err(_) => return Err(not_found()),
        };
        let dataset = self.dataset(&record.dataset_id)?;
        let (ranking, label) = record.request.evaluate(&dataset)?;
        let label_json = match std::fs::read(dir.join(format!("{id}.label.json"))) {
            Ok(bytes) => bytes,
            Err(_) => render_json(&label),
        };
        let stored = Arc::new(StoredRanking {
            ranking_id: id.to_string(),
            dataset_id: record.dataset_id,
            request: record.request,
            ranking,
            label,
            label_json,
        });
        Ok(self.lock().rankings.entry(id.to_string()).or_insert(stored).clone())
    }
}
