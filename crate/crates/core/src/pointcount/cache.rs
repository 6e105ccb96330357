//! Append-only trace cache: one `key<TAB>trace` line per entry, keys are
//! SHA-256 digests of canonical JSON.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Hex digest of the canonical JSON of `(field, curve, prime)`.
///
/// Object keys serialize in sorted order, so equal values give equal keys.
pub fn cache_key<F: Serialize, C: Serialize, P: Serialize>(field: &F, curve: &C, prime: &P) -> String {
    let value = serde_json::json!([field, curve, prime]);
    hex::encode(Sha256::digest(value.to_string().as_bytes()))
}

#[derive(Debug, Default)]
pub struct TraceCache {
    map: RwLock<HashMap<String, i64>>,
    file: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

fn parse_line(line: &str, lineno: usize) -> Result<(String, i64)> {
    let bad = || Error::CacheCorruption(format!("line {lineno}: {line:?}"));
    let (key, trace) = line.split_once('\t').ok_or_else(bad)?;
    if key.len() != 64 || !key.bytes().all(|b| b.is_ascii_hexdigit() && !b.is_ascii_uppercase()) {
        return Err(bad());
    }
    let trace = trace.parse::<i64>().map_err(|_| bad())?;
    Ok((key.to_string(), trace))
}

impl TraceCache {
    /// A cache that lives only in memory.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads `path` (created if missing) and appends new entries to it.
    pub fn open(path: &Path) -> Result<Self> {
        let mut map = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.is_empty() {
                    continue;
                }
                let (key, trace) = parse_line(&line, i + 1)?;
                merge(&mut map, key, trace)?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(TraceCache { map: RwLock::new(map), file: Some(Mutex::new(file)), path: Some(path.to_path_buf()) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<i64> {
        self.map.read().expect("cache lock").get(key).copied()
    }

    /// Records `trace` under `key`. Re-inserting the same value is a no-op; a
    /// different value is corruption.
    pub fn insert(&self, key: &str, trace: i64) -> Result<()> {
        let mut map = self.map.write().expect("cache lock");
        if let Some(&old) = map.get(key) {
            return check_same(key, old, trace);
        }
        map.insert(key.to_string(), trace);
        if let Some(file) = &self.file {
            let mut f = file.lock().expect("cache file lock");
            writeln!(f, "{key}\t{trace}")?;
        }
        Ok(())
    }

    /// Looks up `key`, computing and recording the trace on a miss.
    pub fn get_or_insert_with(&self, key: &str, compute: impl FnOnce() -> Result<i64>) -> Result<i64> {
        if let Some(t) = self.get(key) {
            return Ok(t);
        }
        let t = compute()?;
        self.insert(key, t)?;
        Ok(t)
    }

    pub fn flush(&self) -> Result<()> {
        if let Some(file) = &self.file {
            file.lock().expect("cache file lock").flush()?;
        }
        Ok(())
    }
}

fn check_same(key: &str, old: i64, new: i64) -> Result<()> {
    if old == new {
        Ok(())
    } else {
        Err(Error::CacheCorruption(format!("key {key} holds both {old} and {new}")))
    }
}

fn merge(map: &mut HashMap<String, i64>, key: String, trace: i64) -> Result<()> {
    match map.get(&key) {
        Some(&old) => check_same(&key, old, trace),
        None => {
            map.insert(key, trace);
            Ok(())
        }
    }
}
