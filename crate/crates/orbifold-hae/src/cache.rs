//! On-disk JSON caches for ψ-numbers, graph lists and R-matrix tables.
//!
//! File names carry a hash of the schema description, so a change in the
//! layout or meaning of any cached value makes old files invisible rather
//! than silently reused.

use crate::graphs::StableGraph;
use crate::intnum::{IntnumError, PsiCache, CACHE_VERSION};
use crate::rmatrix::RTable;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Environment override for the cache directory.
pub const CACHE_ENV: &str = "ORBIFOLD_HAE_CACHE";

/// Everything whose change invalidates cached values.
const SCHEMA: &str = "v1; psi: g:a,b -> num/den; graphs: genus,edges,legs,aut; \
rtable: rows[k][i] monomials (c1,c2,a1,da1,d2a1,a2,l,coeff), odd constants 0, even by symplectic";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache io: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Psi(#[from] IntnumError),
}

pub fn schema_hash() -> String {
    let d = Sha256::digest(format!("{SCHEMA}; psi-version {CACHE_VERSION}").as_bytes());
    d.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

/// A cache rooted at a directory; `None` disables caching.
#[derive(Clone, Debug, Default)]
pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Cache { dir }
    }

    /// Explicit directory first, then the environment variable.
    pub fn resolve(dir: Option<PathBuf>) -> Self {
        Cache::new(dir.or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from)))
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path(&self, kind: &str, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{kind}-{key}-{}.json", schema_hash())))
    }

    pub fn load(&self, kind: &str, key: &str) -> Result<Option<Value>, CacheError> {
        let Some(p) = self.path(kind, key) else { return Ok(None) };
        if !p.exists() {
            return Ok(None);
        }
        let v: Value = serde_json::from_slice(&std::fs::read(&p)?)?;
        Ok(v.get("payload").cloned())
    }

    /// Atomic write: temp file then rename.
    pub fn store(&self, kind: &str, key: &str, payload: Value) -> Result<(), CacheError> {
        let Some(p) = self.path(kind, key) else { return Ok(()) };
        if let Some(d) = p.parent() {
            std::fs::create_dir_all(d)?;
        }
        let tmp = p.with_extension("tmp");
        let v = json!({"schema": schema_hash(), "kind": kind, "key": key, "payload": payload});
        std::fs::write(&tmp, serde_json::to_vec(&v)?)?;
        std::fs::rename(tmp, p)?;
        Ok(())
    }

    pub fn load_psi(&self, psi: &PsiCache) -> Result<usize, CacheError> {
        match self.path("psi", "all") {
            Some(p) => Ok(psi.load(&p)?),
            None => Ok(0),
        }
    }

    pub fn store_psi(&self, psi: &PsiCache) -> Result<(), CacheError> {
        if let Some(p) = self.path("psi", "all") {
            psi.save(&p)?;
        }
        Ok(())
    }

    pub fn load_graphs(&self, g: u32, n: usize) -> Result<Option<Vec<StableGraph>>, CacheError> {
        match self.load("graphs", &format!("g{g}-n{n}"))? {
            Some(v) => Ok(Some(serde_json::from_value(v)?)),
            None => Ok(None),
        }
    }

    pub fn store_graphs(&self, g: u32, n: usize, gs: &[StableGraph]) -> Result<(), CacheError> {
        self.store("graphs", &format!("g{g}-n{n}"), serde_json::to_value(gs)?)
    }

    /// Symbolic table keyed by (K, N); poisoned tables are never cached.
    pub fn load_rtable(&self, k: usize, n: i64) -> Result<Option<RTable>, CacheError> {
        Ok(self.load("rtable", &format!("k{k}-n{n}"))?.and_then(|v| RTable::from_json(&v)))
    }

    pub fn store_rtable(&self, t: &RTable, n: i64) -> Result<(), CacheError> {
        if t.poison.is_some() {
            return Ok(());
        }
        self.store("rtable", &format!("k{}-n{n}", t.max_k), t.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disabled_cache_is_inert() {
        let c = Cache::new(None);
        c.store("x", "y", json!(1)).unwrap();
        assert!(c.load("x", "y").unwrap().is_none());
    }

    #[test]
    fn round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(Some(dir.path().to_path_buf()));
        let gs = crate::graphs::enumerate(2, 0).unwrap();
        c.store_graphs(2, 0, &gs).unwrap();
        assert_eq!(c.load_graphs(2, 0).unwrap().unwrap(), gs);
        let t = RTable::solve(3, None).unwrap();
        c.store_rtable(&t, 20).unwrap();
        assert_eq!(c.load_rtable(3, 20).unwrap().unwrap(), t);
        assert!(c.load_rtable(3, 40).unwrap().is_none());
    }

    #[test]
    fn schema_hash_is_stable_hex() {
        let h = schema_hash();
        assert_eq!(h.len(), 12);
        assert_eq!(h, schema_hash());
    }
}
