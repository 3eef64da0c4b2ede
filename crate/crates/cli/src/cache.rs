//! Persistent factor cache: one JSON object per line, append-only.
//!
//! Writers take `<path>.lock` (created exclusively) around each append;
//! readers never lock. A later complete entry supersedes a partial one for
//! the same composite, never the other way round.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, SystemTime};

use dynzsig_core::divisibility::{factor, FactorBudget, FactorSource, Factorization};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Environment variable naming the default cache file.
pub const CACHE_ENV: &str = "DYNZSIG_CACHE";

const LOCK_ATTEMPTS: u32 = 200;
const LOCK_WAIT: Duration = Duration::from_millis(10);
const STALE_LOCK: Duration = Duration::from_secs(30);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimePower {
    pub prime: String,
    pub exponent: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorCacheEntry {
    pub composite: String,
    pub factors: Vec<PrimePower>,
    pub complete: bool,
}

impl FactorCacheEntry {
    pub fn from_factorization(n: &BigUint, f: &Factorization) -> Self {
        FactorCacheEntry {
            composite: n.to_string(),
            factors: f
                .factors
                .iter()
                .map(|(p, &e)| PrimePower {
                    prime: p.to_string(),
                    exponent: e,
                })
                .collect(),
            complete: f.is_complete(),
        }
    }

    /// The factorization this entry describes, if it is internally
    /// consistent.
    pub fn to_factorization(&self) -> Option<(BigUint, Factorization)> {
        let n: BigUint = self.composite.parse().ok()?;
        let mut factors = BTreeMap::new();
        let mut product = BigUint::one();
        for pp in &self.factors {
            let p: BigUint = pp.prime.parse().ok()?;
            if p <= BigUint::one() || pp.exponent == 0 {
                return None;
            }
            product *= p.pow(pp.exponent);
            *factors.entry(p).or_insert(0) += pp.exponent;
        }
        if product > n || !(&n % &product).is_zero() {
            return None;
        }
        let cofactor = &n / &product;
        if self.complete != cofactor.is_one() {
            return None;
        }
        Some((n, Factorization { factors, cofactor }))
    }
}

/// A [`FactorSource`] backed by the cache file, falling back to
/// [`factor`] with `budget` on a miss.
pub struct FactorCache {
    path: PathBuf,
    budget: FactorBudget,
    entries: RefCell<HashMap<BigUint, Factorization>>,
    warnings: RefCell<Vec<String>>,
    hits: Cell<u64>,
}

impl FactorCache {
    /// Loads `path` if it exists. Unreadable files and corrupt lines only
    /// produce warnings.
    pub fn open(path: &Path, budget: FactorBudget) -> Self {
        let cache = FactorCache {
            path: path.to_path_buf(),
            budget,
            entries: RefCell::new(HashMap::new()),
            warnings: RefCell::new(Vec::new()),
            hits: Cell::new(0),
        };
        match File::open(path) {
            Ok(f) => cache.load(BufReader::new(f)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => cache.warn(format!("cannot read cache {}: {e}", path.display())),
        }
        cache
    }

    fn load(&self, reader: impl BufRead) {
        let mut entries = self.entries.borrow_mut();
        for (i, line) in reader.lines().enumerate() {
            let line = match line {
                Ok(l) => l,
                Err(e) => {
                    self.warn(format!("cache line {} unreadable: {e}", i + 1));
                    break;
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let parsed = serde_json::from_str::<FactorCacheEntry>(&line)
                .ok()
                .and_then(|e| e.to_factorization());
            let Some((n, f)) = parsed else {
                self.warn(format!("cache line {} is corrupt; skipped", i + 1));
                continue;
            };
            let keep_old = entries.get(&n).is_some_and(|old| old.is_complete());
            if !keep_old {
                entries.insert(n, f);
            }
        }
    }

    fn warn(&self, msg: String) {
        self.warnings.borrow_mut().push(msg);
    }

    pub fn warnings(&self) -> Vec<String> {
        self.warnings.borrow().clone()
    }

    /// Lookups answered by a complete stored entry.
    pub fn hits(&self) -> u64 {
        self.hits.get()
    }

    pub fn lookup(&self, n: &BigUint) -> Option<Factorization> {
        self.entries.borrow().get(n).cloned()
    }

    fn store(&self, n: &BigUint, f: &Factorization) {
        self.entries.borrow_mut().insert(n.clone(), f.clone());
        let line = serde_json::to_string(&FactorCacheEntry::from_factorization(n, f)).unwrap();
        if let Err(e) = self.append(&line) {
            self.warn(format!("factorization of {n} not stored: {e}"));
        }
    }

    fn append(&self, line: &str) -> std::io::Result<()> {
        let _lock = LockGuard::acquire(&lock_path(&self.path))?;
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        writeln!(f, "{line}")?;
        f.sync_data()
    }
}

impl FactorSource for FactorCache {
    fn factor(&self, n: &BigUint) -> Factorization {
        let old = self.lookup(n);
        if let Some(f) = old.as_ref().filter(|f| f.is_complete()) {
            self.hits.set(self.hits.get() + 1);
            return f.clone();
        }
        let fresh = factor(n, &self.budget);
        if fresh.is_complete() || old.is_none() {
            self.store(n, &fresh);
            return fresh;
        }
        // both partial: keep whichever got further
        let old = old.unwrap();
        if fresh.cofactor < old.cofactor {
            fresh
        } else {
            old
        }
    }
}

fn lock_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".lock");
    PathBuf::from(s)
}

struct LockGuard(PathBuf);

impl LockGuard {
    fn acquire(path: &Path) -> std::io::Result<Self> {
        let mut last = None;
        for _ in 0..LOCK_ATTEMPTS {
            match OpenOptions::new().write(true).create_new(true).open(path) {
                Ok(mut f) => {
                    let _ = write!(f, "{}", std::process::id());
                    return Ok(LockGuard(path.to_path_buf()));
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    if is_stale(path) {
                        let _ = fs::remove_file(path);
                        continue;
                    }
                    last = Some(e);
                    thread::sleep(LOCK_WAIT);
                }
                Err(e) => return Err(e),
            }
        }
        Err(std::io::Error::new(
            std::io::ErrorKind::WouldBlock,
            match last {
                Some(e) => format!("cache lock {} is held ({e})", path.display()),
                None => format!("cache lock {} keeps going stale", path.display()),
            },
        ))
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

fn is_stale(path: &Path) -> bool {
    fs::metadata(path)
        .and_then(|m| m.modified())
        .ok()
        .and_then(|t| SystemTime::now().duration_since(t).ok())
        .is_some_and(|age| age > STALE_LOCK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn entries_round_trip() {
        let f = factor(&big(458330), &FactorBudget::default());
        let e = FactorCacheEntry::from_factorization(&big(458330), &f);
        assert!(e.complete);
        assert_eq!(e.to_factorization().unwrap().1, f);
        let line = serde_json::to_string(&e).unwrap();
        assert_eq!(
            line,
            r#"{"composite":"458330","factors":[{"prime":"2","exponent":1},{"prime":"5","exponent":1},{"prime":"45833","exponent":1}],"complete":true}"#
        );
    }

    #[test]
    fn inconsistent_entries_are_rejected() {
        let bad = |c: &str, fs: &[(&str, u32)], complete| FactorCacheEntry {
            composite: c.into(),
            factors: fs
                .iter()
                .map(|&(p, e)| PrimePower {
                    prime: p.into(),
                    exponent: e,
                })
                .collect(),
            complete,
        };
        assert!(bad("12", &[("2", 2), ("3", 1)], true)
            .to_factorization()
            .is_some());
        assert!(bad("12", &[("2", 2)], true).to_factorization().is_none());
        assert!(bad("12", &[("2", 2)], false).to_factorization().is_some());
        assert!(bad("12", &[("5", 1)], false).to_factorization().is_none());
        assert!(bad("12", &[("2", 3)], false).to_factorization().is_none());
        assert!(bad("x", &[], false).to_factorization().is_none());
    }
}
