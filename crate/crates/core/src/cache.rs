//! Shared memo table keyed by [`CanonicalKey`], with a line-based text
//! persistence format.
//!
//! ```text
//! twistdesc-cache v1
//! 2;1;0:0:2,0:0:2;1/1
//! 3;3;0:0:3,0:0:3,0:0:3,0:0:3,0:0:3,0:1:2;1/1
//! ```
//!
//! Each record is `r;d;u:m:c,...;num/den` with sorted triples. Records are
//! written in key order so that files are diff-stable.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use dashmap::DashMap;

use crate::correlator::{CanonicalKey, Insertion};
use crate::error::{Error, Result};
use crate::rational::ExactRational;

pub const CACHE_HEADER: &str = "twistdesc-cache v1";

/// Concurrent memo table. Inserts are idempotent: a key always maps to the
/// same value, so racing writers are harmless.
#[derive(Default)]
pub struct MemoCache {
    map: DashMap<CanonicalKey, ExactRational>,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl MemoCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &CanonicalKey) -> Option<ExactRational> {
        let found = self.map.get(key).map(|v| v.value().clone());
        match found {
            Some(_) => self.hits.fetch_add(1, Ordering::Relaxed),
            None => self.misses.fetch_add(1, Ordering::Relaxed),
        };
        found
    }

    pub fn insert(&self, key: CanonicalKey, value: ExactRational) {
        let previous = self.map.insert(key, value.clone());
        debug_assert!(previous.is_none_or(|p| p == value), "memo insert changed a value");
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn reset_stats(&self) {
        self.hits.store(0, Ordering::Relaxed);
        self.misses.store(0, Ordering::Relaxed);
    }

    /// Sorted snapshot of all entries.
    pub fn entries(&self) -> Vec<(CanonicalKey, ExactRational)> {
        let mut entries: Vec<_> = self
            .map
            .iter()
            .map(|e| (e.key().clone(), e.value().clone()))
            .collect();
        entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        entries
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(64 * self.len() + CACHE_HEADER.len() + 1);
        out.push_str(CACHE_HEADER);
        out.push('\n');
        for (key, value) in self.entries() {
            let (r, d, insertions) = key.decode();
            let triples: Vec<String> = insertions.iter().map(|i| format!("{}:{}:{}", i.u, i.m, i.c)).collect();
            let _ = writeln!(out, "{r};{d};{};{}/{}", triples.join(","), value.numer(), value.denom());
        }
        out
    }

    /// Merges the records of `text` into this cache.
    pub fn load_text(&self, text: &str) -> Result<usize> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim_end() == CACHE_HEADER => {}
            Some(h) => {
                return Err(Error::CacheFormat {
                    line: 1,
                    message: format!("unsupported header {h:?}, expected {CACHE_HEADER:?}"),
                })
            }
            None => return Err(Error::CacheFormat { line: 1, message: "empty file".into() }),
        }
        let mut loaded = 0;
        for (idx, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = parse_record(line).map_err(|message| Error::CacheFormat { line: idx + 2, message })?;
            self.insert(key, value);
            loaded += 1;
        }
        Ok(loaded)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(&self, path: impl AsRef<Path>) -> Result<usize> {
        let text = fs::read_to_string(path)?;
        self.load_text(&text)
    }
}

fn parse_record(line: &str) -> std::result::Result<(CanonicalKey, ExactRational), String> {
    let fields: Vec<&str> = line.split(';').collect();
    if fields.len() != 4 {
        return Err(format!("expected 4 ';'-separated fields, found {}", fields.len()));
    }
    let num = |s: &str, what: &str| s.trim().parse::<u32>().map_err(|_| format!("bad {what} {s:?}"));
    let r = num(fields[0], "r")?;
    let d = num(fields[1], "d")?;
    let mut insertions = Vec::new();
    if !fields[2].trim().is_empty() {
        for triple in fields[2].split(',') {
            let parts: Vec<&str> = triple.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("bad triple {triple:?}"));
            }
            insertions.push(Insertion::new(num(parts[0], "u")?, num(parts[1], "m")?, num(parts[2], "c")?));
        }
    }
    let value: ExactRational = fields[3].trim().parse().map_err(|e| format!("{e}"))?;
    Ok((CanonicalKey::from_parts(r, d, &insertions), value))
}
