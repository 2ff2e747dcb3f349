//! On-disk memo of `count_K` and `count_W` values.
//!
//! One JSON object per line in `counts.jsonl`:
//!
//! ```text
//! {"kind":"K","m":1,"r":4,"value":"5"}
//! {"kind":"W","tree":"(..)","m":0,"n":[1,1],"value":"2"}
//! ```
//!
//! Values are decimal strings. Lines that fail to parse are skipped with a
//! warning and the value is simply recomputed. New values are appended in
//! one write, so a crash can at worst leave a truncated last line.

use crate::associahedron::Tree;
use crate::two_assoc::WCounter;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

pub const CACHE_DIR_ENV: &str = "TWOASSOC_CACHE_DIR";
const FILE_NAME: &str = "counts.jsonl";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
enum Entry {
    K {
        m: usize,
        r: usize,
        value: String,
    },
    W {
        tree: String,
        m: usize,
        n: Vec<u32>,
        value: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    K(usize, usize),
    W(String, usize, Vec<u32>),
}

#[derive(Debug)]
pub struct CountCache {
    path: PathBuf,
    known: HashSet<Key>,
    warnings: Vec<String>,
}

impl CountCache {
    /// `$TWOASSOC_CACHE_DIR`, else `$XDG_CACHE_HOME/twoassoc`, else
    /// `$HOME/.cache/twoassoc`.
    pub fn default_dir() -> Option<PathBuf> {
        let var = |k: &str| std::env::var_os(k).filter(|v| !v.is_empty()).map(PathBuf::from);
        var(CACHE_DIR_ENV)
            .or_else(|| var("XDG_CACHE_HOME").map(|d| d.join("twoassoc")))
            .or_else(|| var("HOME").map(|d| d.join(".cache").join("twoassoc")))
    }

    pub fn open(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(CountCache {
            path: dir.join(FILE_NAME),
            known: HashSet::new(),
            warnings: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Problems met while loading, one per skipped line.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Seeds `counter` with every readable entry; returns how many.
    pub fn load_into(&mut self, counter: &WCounter) -> io::Result<usize> {
        let text = match fs::read_to_string(&self.path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(0),
            Err(e) => return Err(e),
        };
        let mut loaded = 0;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match decode(line) {
                Ok((key, value)) => {
                    match &key {
                        Key::K(m, r) => counter.k_counter().seed(*m, *r, value),
                        Key::W(tree, m, n) => {
                            let tree: Tree = tree.parse().expect("checked in decode");
                            counter.seed(&tree, *m, n, value);
                        }
                    }
                    self.known.insert(key);
                    loaded += 1;
                }
                Err(reason) => self.warnings.push(format!(
                    "{}:{}: ignoring corrupt cache line ({reason})",
                    self.path.display(),
                    i + 1
                )),
            }
        }
        Ok(loaded)
    }

    /// Appends every memoised value not yet on disk; returns how many.
    pub fn store_from(&mut self, counter: &WCounter) -> io::Result<usize> {
        let mut lines = Vec::new();
        for (m, r, value) in counter.k_counter().entries() {
            let key = Key::K(m, r);
            if self.known.insert(key) {
                lines.push(Entry::K {
                    m,
                    r,
                    value: value.to_string(),
                });
            }
        }
        for (tree, m, n, value) in counter.entries() {
            let key = Key::W(tree.clone(), m, n.clone());
            if self.known.insert(key) {
                lines.push(Entry::W {
                    tree,
                    m,
                    n,
                    value: value.to_string(),
                });
            }
        }
        if lines.is_empty() {
            return Ok(0);
        }
        let mut file = OpenOptions::new()
            .create(true)
            .read(true)
            .append(true)
            .open(&self.path)?;
        let mut batch = String::new();
        if file.metadata()?.len() > 0 {
            // finish a line cut short by an earlier crash
            let mut last = [0u8; 1];
            file.seek(SeekFrom::End(-1))?;
            file.read_exact(&mut last)?;
            if last[0] != b'\n' {
                batch.push('\n');
            }
        }
        for e in &lines {
            batch.push_str(&serde_json::to_string(e).expect("cache entries serialise"));
            batch.push('\n');
        }
        file.write_all(batch.as_bytes())?;
        Ok(lines.len())
    }
}

fn decode(line: &str) -> Result<(Key, BigInt), String> {
    let entry: Entry = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let parse = |v: &str| {
        v.parse::<BigInt>()
            .ok()
            .filter(|b| b.sign() != num_bigint::Sign::Minus)
            .ok_or_else(|| format!("'{v}' is not a count"))
    };
    match entry {
        Entry::K { m, r, value } => Ok((Key::K(m, r), parse(&value)?)),
        Entry::W { tree, m, n, value } => {
            let t: Tree = tree.parse().map_err(|e| format!("bad tree: {e}"))?;
            if t.leaf_count() != n.len() {
                return Err(format!("tree {tree} does not match n = {n:?}"));
            }
            Ok((Key::W(t.to_string(), m, n), parse(&value)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn warm(dir: &Path) -> WCounter {
        let c = WCounter::new();
        c.count_w(&Tree::corolla(2), 1, &[2, 1]).unwrap();
        let mut cache = CountCache::open(dir).unwrap();
        assert!(cache.store_from(&c).unwrap() > 0);
        c
    }

    #[test]
    fn round_trip_seeds_counter() {
        let dir = tempfile::tempdir().unwrap();
        let original = warm(dir.path());
        let fresh = WCounter::new();
        let mut cache = CountCache::open(dir.path()).unwrap();
        let loaded = cache.load_into(&fresh).unwrap();
        assert_eq!(loaded, original.entries().len() + original.k_counter().entries().len());
        assert!(cache.warnings().is_empty());
        assert_eq!(fresh.entries(), original.entries());
        // nothing new to write
        assert_eq!(cache.store_from(&fresh).unwrap(), 0);
    }

    #[test]
    fn corrupt_lines_are_skipped_with_warning() {
        let dir = tempfile::tempdir().unwrap();
        warm(dir.path());
        let path = dir.path().join(FILE_NAME);
        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("{not json\n");
        text.push_str(r#"{"kind":"K","m":0,"r":3,"value":"-2"}"#);
        text.push('\n');
        text.push_str(r#"{"kind":"W","tree":"(..)","m":0,"n":[1],"value":"1"}"#);
        text.push('\n');
        text.push_str(r#"{"kind":"W","tree":"(.","m":0,"n":[1],"value":"1"}"#);
        fs::write(&path, text).unwrap();
        let fresh = WCounter::new();
        let mut cache = CountCache::open(dir.path()).unwrap();
        cache.load_into(&fresh).unwrap();
        assert_eq!(cache.warnings().len(), 4);
        assert!(cache.warnings()[0].contains("ignoring corrupt cache line"));
        // the truncated last line gets terminated before new entries
        fresh.count_w(&Tree::corolla(3), 0, &[1, 1, 1]).unwrap();
        cache.store_from(&fresh).unwrap();
        let again = fs::read_to_string(&path).unwrap();
        assert!(again.contains("\"n\":[1],\"value\":\"1\"}\n{"));
    }

    #[test]
    fn missing_file_loads_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let mut cache = CountCache::open(&dir.path().join("nested")).unwrap();
        assert_eq!(cache.load_into(&WCounter::new()).unwrap(), 0);
    }
}
