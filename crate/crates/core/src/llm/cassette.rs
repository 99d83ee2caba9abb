//! JSON-lines record/replay store.
//!
//! Line 1 is a header `{"format":"roboloop-cassette","version":1}`; every
//! following line is one [`CassetteRecord`].

use std::collections::HashMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{CompletionRequest, GenerationParams, ReplayKey};

pub const CASSETTE_FORMAT: &str = "roboloop-cassette";
pub const CASSETTE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CassetteError {
    #[error("cassette {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cassette header mismatch: expected {CASSETTE_FORMAT} version {expected}, found {found}")]
    Version { expected: u32, found: String },
    #[error("cassette line {line}: {message}")]
    Malformed { line: usize, message: String },
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CassetteRecord {
    pub key: ReplayKey,
    pub model: String,
    pub params: GenerationParams,
    pub system_sha256: String,
    /// The final user turn, kept for human-readable diffs.
    pub last_user: String,
    pub response: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl CassetteRecord {
    pub fn new(request: &CompletionRequest, response: &str, timestamp: u64) -> Self {
        Self {
            key: request.key(),
            model: request.model.clone(),
            params: request.params.clone(),
            system_sha256: hex::encode(Sha256::digest(request.system.as_bytes())),
            last_user: request.last_user().to_string(),
            response: response.to_string(),
            timestamp,
        }
    }
}

/// In-memory cassette; first record wins for duplicate keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Cassette {
    records: Vec<CassetteRecord>,
    index: HashMap<ReplayKey, usize>,
}

fn header_line() -> String {
    serde_json::to_string(&Header { format: CASSETTE_FORMAT.into(), version: CASSETTE_VERSION }).expect("header serializes")
}

impl Cassette {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[CassetteRecord] {
        &self.records
    }

    pub fn get(&self, key: &ReplayKey) -> Option<&CassetteRecord> {
        self.index.get(key).map(|&i| &self.records[i])
    }

    /// Returns false if the key was already present.
    pub fn insert(&mut self, record: CassetteRecord) -> bool {
        if self.index.contains_key(&record.key) {
            return false;
        }
        self.index.insert(record.key.clone(), self.records.len());
        self.records.push(record);
        true
    }

    pub fn parse(text: &str) -> Result<Self, CassetteError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let Some((_, first)) = lines.next() else {
            return Err(CassetteError::Version { expected: CASSETTE_VERSION, found: "empty file".into() });
        };
        let header: Header = serde_json::from_str(first)
            .map_err(|_| CassetteError::Version { expected: CASSETTE_VERSION, found: first.chars().take(80).collect() })?;
        if header.format != CASSETTE_FORMAT || header.version != CASSETTE_VERSION {
            return Err(CassetteError::Version {
                expected: CASSETTE_VERSION,
                found: format!("{} version {}", header.format, header.version),
            });
        }
        let mut cassette = Cassette::default();
        for (i, line) in lines {
            let record: CassetteRecord =
                serde_json::from_str(line).map_err(|e| CassetteError::Malformed { line: i + 1, message: e.to_string() })?;
            cassette.insert(record);
        }
        Ok(cassette)
    }

    pub fn to_text(&self) -> String {
        let mut out = header_line();
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CassetteError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| CassetteError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), CassetteError> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|source| CassetteError::Io { path: path.display().to_string(), source })
    }
}

/// Shared cassette with concurrent readers and a single appending writer.
#[derive(Debug)]
pub struct CassetteStore {
    cassette: RwLock<Cassette>,
    path: Option<PathBuf>,
    writer: Mutex<()>,
    fixed_timestamp: Option<u64>,
}

impl CassetteStore {
    pub fn in_memory() -> Self {
        Self { cassette: RwLock::new(Cassette::default()), path: None, writer: Mutex::new(()), fixed_timestamp: None }
    }

    /// Load an existing cassette file; missing files are an error.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CassetteError> {
        let path = path.as_ref();
        Ok(Self {
            cassette: RwLock::new(Cassette::load(path)?),
            path: Some(path.to_path_buf()),
            writer: Mutex::new(()),
            fixed_timestamp: None,
        })
    }

    /// Load the cassette at `path`, creating an empty one if it does not exist.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, CassetteError> {
        let path = path.as_ref();
        if !path.exists() {
            Cassette::default().save(path)?;
        }
        Self::load(path)
    }

    /// Stamp new records with `ts` instead of the wall clock.
    pub fn with_fixed_timestamp(mut self, ts: u64) -> Self {
        self.fixed_timestamp = Some(ts);
        self
    }

    pub fn lookup(&self, key: &ReplayKey) -> Option<String> {
        self.cassette.read().expect("cassette lock poisoned").get(key).map(|r| r.response.clone())
    }

    pub fn len(&self) -> usize {
        self.cassette.read().expect("cassette lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> Cassette {
        self.cassette.read().expect("cassette lock poisoned").clone()
    }

    pub fn describe(&self) -> String {
        self.path.as_ref().map_or_else(|| "memory".to_string(), |p| p.display().to_string())
    }

    pub fn record(&self, request: &CompletionRequest, response: &str) -> Result<(), CassetteError> {
        let timestamp = self.fixed_timestamp.unwrap_or_else(|| {
            SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or_default()
        });
        let record = CassetteRecord::new(request, response, timestamp);
        let _guard = self.writer.lock().expect("cassette writer poisoned");
        let inserted = self.cassette.write().expect("cassette lock poisoned").insert(record.clone());
        if !inserted {
            return Ok(());
        }
        if let Some(path) = &self.path {
            let io_err = |source| CassetteError::Io { path: path.display().to_string(), source };
            let mut file = OpenOptions::new().append(true).open(path).map_err(io_err)?;
            let mut line = serde_json::to_string(&record).expect("record serializes");
            line.push('\n');
            file.write_all(line.as_bytes()).map_err(io_err)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(user: &str) -> CassetteRecord {
        let req = CompletionRequest::new("sys", user, "m", GenerationParams::default());
        CassetteRecord::new(&req, &format!("reply to {user}"), 0)
    }

    #[test]
    fn empty_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        Cassette::default().save(&p).unwrap();
        assert!(Cassette::load(&p).unwrap().is_empty());
    }

    #[test]
    fn three_entries_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        let mut c = Cassette::default();
        for u in ["a", "b", "c"] {
            assert!(c.insert(record(u)));
        }
        assert!(!c.insert(record("a")));
        c.save(&p).unwrap();
        let back = Cassette::load(&p).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_version_names_expected_version() {
        let err = Cassette::parse("{\"format\":\"roboloop-cassette\",\"version\":7}\n").unwrap_err();
        assert!(matches!(err, CassetteError::Version { expected: 1, .. }));
        assert!(err.to_string().contains("version 1"), "{err}");
        assert!(Cassette::parse("not a header\n").is_err());
        assert!(Cassette::parse("").is_err());
    }

    #[test]
    fn malformed_record_reports_line() {
        let text = format!("{}\n{{oops\n", header_line());
        assert!(matches!(Cassette::parse(&text), Err(CassetteError::Malformed { line: 2, .. })));
    }

    #[test]
    fn store_appends_to_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        let store = CassetteStore::open(&p).unwrap().with_fixed_timestamp(42);
        let req = CompletionRequest::new("sys", "u", "m", GenerationParams::default());
        store.record(&req, "r").unwrap();
        store.record(&req, "ignored duplicate").unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("\"timestamp\":42"));
        assert_eq!(CassetteStore::load(&p).unwrap().lookup(&req.key()).as_deref(), Some("r"));
    }
}
