//! Persistent factorization cache.
//!
//! One entry per line, `<n> = <p1>^<e1> * ... * <pk>^<ek>` with the exponent
//! omitted when it is 1. The file is append-only; entries that fail to parse
//! or do not reconstruct `n` from certified primes are skipped with a warning.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use num_bigint::BigUint;
use num_traits::One;

use super::primes::is_prime;

#[derive(Debug)]
pub struct FactorCache {
    path: Option<PathBuf>,
    entries: RwLock<HashMap<BigUint, Vec<(BigUint, u32)>>>,
    writer: Mutex<Option<File>>,
    rejected: usize,
}

/// Summary for `cache stats`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheStats {
    pub path: Option<PathBuf>,
    pub entries: usize,
    pub rejected_lines: usize,
    pub largest_digits: usize,
}

/// Render one cache line (without the newline).
pub fn format_entry(n: &BigUint, factors: &[(BigUint, u32)]) -> String {
    let rhs: Vec<String> = factors
        .iter()
        .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
        .collect();
    format!("{n} = {}", rhs.join(" * "))
}

/// Parse one cache line; `None` when malformed or inconsistent.
pub fn parse_entry(line: &str) -> Option<(BigUint, Vec<(BigUint, u32)>)> {
    let (lhs, rhs) = line.split_once('=')?;
    let n: BigUint = lhs.trim().parse().ok()?;
    let mut factors = Vec::new();
    for part in rhs.split('*') {
        let part = part.trim();
        let (p, e) = match part.split_once('^') {
            Some((p, e)) => (p.trim().parse::<BigUint>().ok()?, e.trim().parse::<u32>().ok()?),
            None => (part.parse::<BigUint>().ok()?, 1),
        };
        if e == 0 {
            return None;
        }
        factors.push((p, e));
    }
    if factors.windows(2).any(|w| w[0].0 >= w[1].0) {
        return None;
    }
    let mut prod = BigUint::one();
    for (p, e) in &factors {
        prod *= num_traits::pow(p.clone(), *e as usize);
    }
    if prod != n || !factors.iter().all(|(p, _)| is_prime(p)) {
        return None;
    }
    Some((n, factors))
}

impl FactorCache {
    /// In-memory cache with no backing file.
    pub fn in_memory() -> Self {
        FactorCache {
            path: None,
            entries: RwLock::new(HashMap::new()),
            writer: Mutex::new(None),
            rejected: 0,
        }
    }

    /// Load (or create) the cache file at `path`.
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        let mut rejected = 0;
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (lineno, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match parse_entry(&line) {
                    Some((n, f)) => {
                        entries.insert(n, f);
                    }
                    None => {
                        rejected += 1;
                        log::warn!("{}:{}: ignoring corrupt cache entry", path.display(), lineno + 1);
                    }
                }
            }
        }
        let writer = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(FactorCache {
            path: Some(path),
            entries: RwLock::new(entries),
            writer: Mutex::new(Some(writer)),
            rejected,
        })
    }

    pub fn get(&self, n: &BigUint) -> Option<Vec<(BigUint, u32)>> {
        self.entries.read().unwrap().get(n).cloned()
    }

    /// Record a complete factorization; appends to the file if new.
    pub fn insert(&self, n: &BigUint, factors: &[(BigUint, u32)]) {
        {
            let mut map = self.entries.write().unwrap();
            if map.contains_key(n) {
                return;
            }
            map.insert(n.clone(), factors.to_vec());
        }
        let mut w = self.writer.lock().unwrap();
        if let Some(file) = w.as_mut() {
            let line = format_entry(n, factors);
            if let Err(e) = writeln!(file, "{line}").and_then(|_| file.flush()) {
                log::warn!("factor cache append failed: {e}");
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stats(&self) -> CacheStats {
        let map = self.entries.read().unwrap();
        CacheStats {
            path: self.path.clone(),
            entries: map.len(),
            rejected_lines: self.rejected,
            largest_digits: map.keys().map(|k| k.to_string().len()).max().unwrap_or(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_format() {
        let n = BigUint::from(2047u32 * 4);
        let f = vec![
            (BigUint::from(2u32), 2),
            (BigUint::from(23u32), 1),
            (BigUint::from(89u32), 1),
        ];
        let line = format_entry(&n, &f);
        assert_eq!(line, "8188 = 2^2 * 23 * 89");
        assert_eq!(parse_entry(&line), Some((n, f)));
    }

    #[test]
    fn rejects_inconsistent_lines() {
        assert!(parse_entry("8188 = 2^2 * 23 * 88").is_none());
        assert!(parse_entry("15 = 15").is_none());
        assert!(parse_entry("garbage").is_none());
        assert!(parse_entry("6 = 3 * 2").is_none());
    }

    #[test]
    fn persists_and_skips_corrupt_entries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.txt");
        std::fs::write(&path, "6 = 2 * 3\nnot a line\n10 = 2 * 7\n").unwrap();
        let cache = FactorCache::open(&path).unwrap();
        assert_eq!(cache.len(), 1);
        assert_eq!(cache.stats().rejected_lines, 2);
        cache.insert(&BigUint::from(2047u32), &[(BigUint::from(23u32), 1), (BigUint::from(89u32), 1)]);
        drop(cache);
        let again = FactorCache::open(&path).unwrap();
        assert_eq!(again.len(), 2);
        assert!(again.get(&BigUint::from(2047u32)).is_some());
    }
}
