//! The two persistent stores: known plans and known flaws, keyed by
//! [`ProblemSignature`].
//!
//! Each store is an append-only JSON-lines file whose first line is a header
//! carrying the format version and digest algorithm. Opening a store keeps
//! the last record per key, skips unreadable lines, and rewrites the file in
//! compacted form.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use planner_core::fixes::{fix_from_value, fix_to_value};
use planner_core::signature::DIGEST_ALGORITHM;
use planner_core::{DomainFix, Plan, ProblemSignature};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const PLANS_FILE: &str = "known_plans.jsonl";
pub const FLAWS_FILE: &str = "known_flaws.jsonl";
pub const LOCK_FILE: &str = "LOCK";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cache directory {0} is locked by another process")]
    Locked(PathBuf),
    #[error("{path}: unsupported cache header `{header}`")]
    Header { path: PathBuf, header: String },
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CacheError + '_ {
    move |source| CacheError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "solver")]
    Solver,
    #[serde(rename = "solver+review")]
    SolverReview,
    #[serde(rename = "repaired-domain")]
    RepairedDomain,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Solver => "solver",
            Provenance::SolverReview => "solver+review",
            Provenance::RepairedDomain => "repaired-domain",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub signature: ProblemSignature,
    pub plan: Plan,
    pub created_at: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlawRecord {
    pub signature: ProblemSignature,
    pub fix: DomainFix,
    pub created_at: String,
    pub advisor: String,
}

#[derive(Serialize, Deserialize)]
struct FlawWire {
    signature: ProblemSignature,
    fix: Value,
    created_at: String,
    advisor: String,
}

impl Serialize for FlawRecord {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        FlawWire {
            signature: self.signature.clone(),
            fix: fix_to_value(&self.fix),
            created_at: self.created_at.clone(),
            advisor: self.advisor.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FlawRecord {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = FlawWire::deserialize(deserializer)?;
        let fix = fix_from_value(&wire.fix).map_err(serde::de::Error::custom)?;
        if fix.is_empty() {
            return Err(serde::de::Error::custom("empty fix"));
        }
        Ok(FlawRecord {
            signature: wire.signature,
            fix,
            created_at: wire.created_at,
            advisor: wire.advisor,
        })
    }
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub plan_hits: u64,
    pub plan_misses: u64,
    pub flaw_hits: u64,
    pub flaw_misses: u64,
    pub writes: u64,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    digest: String,
}

fn header_line() -> String {
    serde_json::to_string(&Header {
        format: "planner-cache".into(),
        version: FORMAT_VERSION,
        digest: DIGEST_ALGORITHM.into(),
    })
    .expect("serializable")
}

/// One JSON-lines file plus its in-memory index.
struct Store<R> {
    path: PathBuf,
    records: BTreeMap<ProblemSignature, R>,
    file: File,
}

trait Keyed {
    fn key(&self) -> &ProblemSignature;
}

impl Keyed for PlanRecord {
    fn key(&self) -> &ProblemSignature {
        &self.signature
    }
}

impl Keyed for FlawRecord {
    fn key(&self) -> &ProblemSignature {
        &self.signature
    }
}

impl<R: Keyed + Serialize + for<'de> Deserialize<'de>> Store<R> {
    fn open(path: PathBuf) -> Result<Self, CacheError> {
        let mut records = BTreeMap::new();
        match File::open(&path) {
            Ok(file) => {
                let mut lines = BufReader::new(file).lines();
                match lines.next() {
                    None => {}
                    Some(header) => {
                        let header = header.map_err(io_error(&path))?;
                        let ok = serde_json::from_str::<Header>(&header).is_ok_and(|h| {
                            h.format == "planner-cache"
                                && h.version == FORMAT_VERSION
                                && h.digest == DIGEST_ALGORITHM
                        });
                        if !ok {
                            return Err(CacheError::Header { path, header });
                        }
                    }
                }
                for (n, line) in lines.enumerate() {
                    let line = match line {
                        Ok(line) => line,
                        Err(e) if e.kind() == io::ErrorKind::InvalidData => {
                            log::warn!("{}:{}: skipping undecodable record", path.display(), n + 2);
                            continue;
                        }
                        Err(e) => return Err(io_error(&path)(e)),
                    };
                    if line.trim().is_empty() {
                        continue;
                    }
                    match serde_json::from_str::<R>(&line) {
                        Ok(record) => {
                            records.insert(record.key().clone(), record);
                        }
                        Err(e) => {
                            log::warn!("{}:{}: skipping corrupt record: {e}", path.display(), n + 2)
                        }
                    }
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(io_error(&path)(e)),
        }
        let file = Self::rewrite(&path, records.values())?;
        Ok(Store {
            path,
            records,
            file,
        })
    }

    /// Writes header plus `records` to a temporary file, renames it over
    /// `path`, and returns an append handle.
    fn rewrite<'a>(path: &Path, records: impl Iterator<Item = &'a R>) -> Result<File, CacheError>
    where
        R: 'a,
    {
        let tmp = path.with_extension("jsonl.tmp");
        {
            let mut out = io::BufWriter::new(File::create(&tmp).map_err(io_error(&tmp))?);
            writeln!(out, "{}", header_line()).map_err(io_error(&tmp))?;
            for record in records {
                let line = serde_json::to_string(record).expect("serializable");
                writeln!(out, "{line}").map_err(io_error(&tmp))?;
            }
            let file = out.into_inner().map_err(|e| io_error(&tmp)(e.into_error()))?;
            file.sync_all().map_err(io_error(&tmp))?;
        }
        fs::rename(&tmp, path).map_err(io_error(path))?;
        OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(io_error(path))
    }

    fn put(&mut self, record: R) -> Result<(), CacheError> {
        let mut line = serde_json::to_string(&record).expect("serializable");
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.sync_data())
            .map_err(io_error(&self.path))?;
        self.records.insert(record.key().clone(), record);
        Ok(())
    }

    fn clear(&mut self) -> Result<(), CacheError> {
        self.records.clear();
        self.file = Self::rewrite(&self.path, std::iter::empty())?;
        Ok(())
    }
}

struct Inner {
    plans: Store<PlanRecord>,
    flaws: Store<FlawRecord>,
    stats: CacheStats,
}

/// Known plans and known flaws in one directory, guarded by `LOCK` against
/// other processes and by a mutex within this one.
pub struct PlanCache {
    dir: PathBuf,
    inner: Mutex<Inner>,
    _lock: File,
}

impl std::fmt::Debug for PlanCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PlanCache").field("dir", &self.dir).finish()
    }
}

impl PlanCache {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, CacheError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir).map_err(io_error(&dir))?;
        let lock_path = dir.join(LOCK_FILE);
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)
            .map_err(io_error(&lock_path))?;
        match lock.try_lock() {
            Ok(()) => {}
            Err(fs::TryLockError::WouldBlock) => return Err(CacheError::Locked(dir)),
            Err(fs::TryLockError::Error(e)) => return Err(io_error(&lock_path)(e)),
        }
        let plans = Store::open(dir.join(PLANS_FILE))?;
        let flaws = Store::open(dir.join(FLAWS_FILE))?;
        Ok(PlanCache {
            dir,
            inner: Mutex::new(Inner {
                plans,
                flaws,
                stats: CacheStats::default(),
            }),
            _lock: lock,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn inner(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn get_plan(&self, signature: &ProblemSignature) -> Option<PlanRecord> {
        let mut inner = self.inner();
        let found = inner.plans.records.get(signature).cloned();
        match found {
            Some(_) => inner.stats.plan_hits += 1,
            None => inner.stats.plan_misses += 1,
        }
        found
    }

    pub fn put_plan(&self, record: PlanRecord) -> Result<(), CacheError> {
        let mut inner = self.inner();
        inner.plans.put(record)?;
        inner.stats.writes += 1;
        Ok(())
    }

    pub fn get_flaw(&self, signature: &ProblemSignature) -> Option<FlawRecord> {
        let mut inner = self.inner();
        let found = inner.flaws.records.get(signature).cloned();
        match found {
            Some(_) => inner.stats.flaw_hits += 1,
            None => inner.stats.flaw_misses += 1,
        }
        found
    }

    /// Like [`get_flaw`](Self::get_flaw) but leaves the counters alone.
    pub fn peek_flaw(&self, signature: &ProblemSignature) -> Option<FlawRecord> {
        self.inner().flaws.records.get(signature).cloned()
    }

    pub fn put_flaw(&self, record: FlawRecord) -> Result<(), CacheError> {
        let mut inner = self.inner();
        inner.flaws.put(record)?;
        inner.stats.writes += 1;
        Ok(())
    }

    pub fn stats(&self) -> CacheStats {
        self.inner().stats
    }

    pub fn plans(&self) -> Vec<PlanRecord> {
        self.inner().plans.records.values().cloned().collect()
    }

    pub fn flaws(&self) -> Vec<FlawRecord> {
        self.inner().flaws.records.values().cloned().collect()
    }

    /// Truncates both stores to their headers.
    pub fn clear(&self) -> Result<(), CacheError> {
        let mut inner = self.inner();
        inner.plans.clear()?;
        inner.flaws.clear()
    }
}
