//! Append-only JSON-lines store of point counts keyed by
//! `(quiver hash, d, q, n, method)`.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use std::time::Instant;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::count::{count_moment_fiber, CountOptions, CountRecord, Method};
use crate::error::{Error, Result};
use crate::quiver::{DimVector, Quiver};

#[derive(Serialize, Deserialize)]
struct Line {
    key: String,
    count: String,
}

/// Reads go through a shared map; writes are serialized on the file.
#[derive(Debug)]
pub struct CountCache {
    path: PathBuf,
    map: RwLock<HashMap<String, BigUint>>,
    file: Mutex<File>,
}

impl CountCache {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut map = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (k, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: Line = serde_json::from_str(&line)
                    .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), k + 1)))?;
                let count = rec
                    .count
                    .parse()
                    .map_err(|_| Error::Parse(format!("{}:{}: bad count", path.display(), k + 1)))?;
                map.insert(rec.key, count);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(CountCache { path, map: RwLock::new(map), file: Mutex::new(file) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn key(quiver: &Quiver, d: &DimVector, q: u64, n: usize, method: Method) -> String {
        format!("{}|{}|{q}|{n}|{}", quiver.canonical_hash(), d, method.as_str())
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<BigUint> {
        self.map.read().expect("cache lock").get(key).cloned()
    }

    pub fn put(&self, key: &str, count: &BigUint) -> Result<()> {
        let mut file = self.file.lock().expect("cache lock");
        let mut map = self.map.write().expect("cache lock");
        if map.contains_key(key) {
            return Ok(());
        }
        let line = serde_json::to_string(&Line { key: key.to_string(), count: count.to_string() })
            .expect("serializable");
        writeln!(file, "{line}")?;
        file.flush()?;
        map.insert(key.to_string(), count.clone());
        Ok(())
    }

    /// Cached [`count_moment_fiber`].
    pub fn count_moment_fiber(
        &self,
        quiver: &Quiver,
        d: &DimVector,
        q: u64,
        n: usize,
        method: Method,
        opts: CountOptions,
    ) -> Result<CountRecord> {
        let key = Self::key(quiver, d, q, n, method);
        if let Some(count) = self.get(&key) {
            return CountRecord::from_count(quiver, d, q, n, count, method, Instant::now());
        }
        let rec = count_moment_fiber(quiver, d, q, n, method, opts)?;
        self.put(&key, &rec.count)?;
        Ok(rec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("counts.jsonl");
        let q = Quiver::a2();
        let d = DimVector::new(vec![1, 1]);
        let opts = CountOptions::with_threads(1);
        {
            let cache = CountCache::open(&path).unwrap();
            let r = cache.count_moment_fiber(&q, &d, 2, 3, Method::Kernel, opts).unwrap();
            assert_eq!(r.count, BigUint::from(20u32));
            cache.count_moment_fiber(&q, &d, 2, 3, Method::Kernel, opts).unwrap();
            assert_eq!(cache.len(), 1);
        }
        let cache = CountCache::open(&path).unwrap();
        let key = CountCache::key(&q, &d, 2, 3, Method::Kernel);
        assert_eq!(cache.get(&key), Some(BigUint::from(20u32)));
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 1);
    }

    #[test]
    fn corrupt_lines_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(&path, "{\"key\": 1}\n").unwrap();
        assert!(matches!(CountCache::open(&path), Err(Error::Parse(_))));
    }
}
