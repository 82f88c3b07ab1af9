//! ψ-class intersection numbers ⟨τ_{a1}…τ_{an}⟩_g on the moduli of stable
//! curves, via the DVV recursion with string and dilaton shortcuts.

use crate::field::{q_from_str, q_to_string, qi, Field, Q};
use dashmap::DashMap;
use num_bigint::BigInt;
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

/// Bump when the on-disk cache layout or semantics change.
pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IntnumError {
    #[error("unstable moduli space: g = {g}, n = {n}")]
    Unstable { g: u32, n: usize },
    #[error("cache file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cache file has version {found}, expected {expected}")]
    Version { found: u64, expected: u32 },
}

/// Genus plus the sorted multiset of ψ-exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PsiKey {
    pub g: u32,
    pub exps: Vec<u32>,
}

impl PsiKey {
    pub fn new(g: u32, exps: &[u32]) -> Self {
        let mut exps = exps.to_vec();
        exps.sort_unstable();
        PsiKey { g, exps }
    }

    pub fn is_stable(&self) -> bool {
        2 * self.g as i64 - 2 + self.exps.len() as i64 > 0
    }

    pub fn dimension_ok(&self) -> bool {
        self.exps.iter().map(|&a| a as i64).sum::<i64>() == 3 * self.g as i64 - 3 + self.exps.len() as i64
    }

    fn encode(&self) -> String {
        let e: Vec<String> = self.exps.iter().map(u32::to_string).collect();
        format!("{}:{}", self.g, e.join(","))
    }

    fn decode(s: &str) -> Option<Self> {
        let (g, e) = s.split_once(':')?;
        let exps = if e.is_empty() {
            Vec::new()
        } else {
            e.split(',').map(|x| x.parse().ok()).collect::<Option<Vec<u32>>>()?
        };
        Some(PsiKey::new(g.parse().ok()?, &exps))
    }
}

fn double_factorial(n: i64) -> BigInt {
    let mut r = BigInt::from(1);
    let mut k = n;
    while k > 1 {
        r *= k;
        k -= 2;
    }
    r
}

/// Memoized evaluator.  Inserts are idempotent, so it can be shared
/// between threads behind an `Arc` or a `&`.
#[derive(Default)]
pub struct PsiCache {
    memo: DashMap<PsiKey, Q>,
}

impl PsiCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }

    /// ⟨Π τ_{a_i}⟩_g; errors on unstable (g, n).
    pub fn psi_integral(&self, g: u32, exps: &[u32]) -> Result<Q, IntnumError> {
        let key = PsiKey::new(g, exps);
        if !key.is_stable() {
            return Err(IntnumError::Unstable { g, n: exps.len() });
        }
        Ok(self.eval(key))
    }

    /// Like `psi_integral` but unstable keys evaluate to zero; this is the
    /// convention the DVV splitting terms need.
    pub fn value(&self, g: u32, exps: &[u32]) -> Q {
        self.eval(PsiKey::new(g, exps))
    }

    fn eval(&self, key: PsiKey) -> Q {
        if !key.is_stable() || !key.dimension_ok() {
            return Q::zero();
        }
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let v = self.compute(&key);
        self.memo.insert(key, v.clone());
        v
    }

    fn compute(&self, key: &PsiKey) -> Q {
        let g = key.g;
        if g == 0 && key.exps[..] == [0, 0, 0] {
            return qi(1);
        }
        if g == 1 && key.exps[..] == [1] {
            return Q::new(1.into(), 24.into());
        }
        self.string_step(key)
            .or_else(|| self.dilaton_step(key))
            .or_else(|| self.dvv_step(key))
            .expect("DVV applies whenever no exponent is 0 or 1")
    }

    /// String equation: removes a τ_0.  `None` if there is none.
    pub fn string_step(&self, key: &PsiKey) -> Option<Q> {
        let pos = key.exps.iter().position(|&a| a == 0)?;
        let mut rest = key.exps.clone();
        rest.remove(pos);
        let mut s = Q::zero();
        for j in 0..rest.len() {
            if rest[j] == 0 {
                continue;
            }
            let mut r = rest.clone();
            r[j] -= 1;
            s += self.eval(PsiKey::new(key.g, &r));
        }
        Some(s)
    }

    /// Dilaton equation: removes a τ_1.  `None` if there is none.
    pub fn dilaton_step(&self, key: &PsiKey) -> Option<Q> {
        let pos = key.exps.iter().position(|&a| a == 1)?;
        let mut rest = key.exps.clone();
        rest.remove(pos);
        let f = 2 * key.g as i64 - 2 + rest.len() as i64;
        Some(self.eval(PsiKey::new(key.g, &rest)) * qi(f))
    }

    /// DVV on the largest exponent τ_{k+1}, k ≥ 1.  `None` if every
    /// exponent is below 2.
    pub fn dvv_step(&self, key: &PsiKey) -> Option<Q> {
        let g = key.g;
        let mut s = key.exps.clone();
        let kp1 = s.pop()?;
        if kp1 < 2 {
            return None;
        }
        let k = kp1 as i64 - 1;
        let mut total = Q::zero();
        for j in 0..s.len() {
            let dj = s[j] as i64;
            let mut r: Vec<u32> = s.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &x)| x).collect();
            r.push((k + dj) as u32);
            let c = Q::new(double_factorial(2 * k + 2 * dj + 1), double_factorial(2 * dj - 1));
            total += c * self.eval(PsiKey::new(g, &r));
        }
        for r_ in 0..k {
            let s_ = k - 1 - r_;
            let c = Q::new(double_factorial(2 * r_ + 1) * double_factorial(2 * s_ + 1), 2.into());
            let mut t = Q::zero();
            if g > 0 {
                let mut e = s.clone();
                e.push(r_ as u32);
                e.push(s_ as u32);
                t += self.eval(PsiKey::new(g - 1, &e));
            }
            let m = s.len();
            for mask in 0u64..(1u64 << m) {
                let mut i_part = Vec::new();
                let mut j_part = Vec::new();
                for (i, &x) in s.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        i_part.push(x);
                    } else {
                        j_part.push(x);
                    }
                }
                i_part.push(r_ as u32);
                j_part.push(s_ as u32);
                for g1 in 0..=g {
                    let a = self.eval(PsiKey::new(g1, &i_part));
                    if a.is_zero() {
                        continue;
                    }
                    t += a * self.eval(PsiKey::new(g - g1, &j_part));
                }
            }
            total += c * t;
        }
        Some(total / Q::from_integer(double_factorial(2 * k + 3)))
    }

    /// For a stable, dimension-compatible key containing τ_0 (resp. τ_1)
    /// and some exponent ≥ 2: does the string (resp. dilaton) equation agree
    /// with a DVV step on the largest exponent?  `None` if not applicable.
    pub fn string_consistent(&self, g: u32, exps: &[u32]) -> Option<bool> {
        let key = PsiKey::new(g, exps);
        if !key.is_stable() || !key.dimension_ok() {
            return None;
        }
        Some(self.string_step(&key)? == self.dvv_step(&key)?)
    }

    pub fn dilaton_consistent(&self, g: u32, exps: &[u32]) -> Option<bool> {
        let key = PsiKey::new(g, exps);
        if !key.is_stable() || !key.dimension_ok() {
            return None;
        }
        Some(self.dilaton_step(&key)? == self.dvv_step(&key)?)
    }

    /// Write the memo table as versioned JSON.
    pub fn save(&self, path: &Path) -> Result<(), IntnumError> {
        let map: BTreeMap<String, String> =
            self.memo.iter().map(|e| (e.key().encode(), q_to_string(e.value()))).collect();
        let v = serde_json::json!({ "version": CACHE_VERSION, "entries": map });
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, serde_json::to_vec(&v)?)?;
        std::fs::rename(tmp, path)?;
        Ok(())
    }

    /// Merge entries from a cache file; a missing file is not an error.
    pub fn load(&self, path: &Path) -> Result<usize, IntnumError> {
        if !path.exists() {
            return Ok(0);
        }
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(path)?)?;
        let found = v.get("version").and_then(|x| x.as_u64()).unwrap_or(0);
        if found != CACHE_VERSION as u64 {
            return Err(IntnumError::Version { found, expected: CACHE_VERSION });
        }
        let mut n = 0;
        if let Some(obj) = v.get("entries").and_then(|e| e.as_object()) {
            for (k, val) in obj {
                if let (Some(key), Some(x)) = (PsiKey::decode(k), val.as_str().and_then(q_from_str)) {
                    self.memo.insert(key, x);
                    n += 1;
                }
            }
        }
        Ok(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::q;

    #[test]
    fn known_values() {
        let c = PsiCache::new();
        assert_eq!(c.psi_integral(0, &[0, 0, 0]).unwrap(), qi(1));
        assert_eq!(c.psi_integral(1, &[1]).unwrap(), q(1, 24));
        assert_eq!(c.psi_integral(2, &[4]).unwrap(), q(1, 1152));
        assert_eq!(c.psi_integral(2, &[2, 3]).unwrap(), q(29, 5760));
        assert_eq!(c.psi_integral(3, &[7]).unwrap(), q(1, 82944));
        assert_eq!(c.psi_integral(0, &[1, 0, 0, 0]).unwrap(), qi(1));
    }

    #[test]
    fn unstable_is_an_error() {
        let c = PsiCache::new();
        assert!(c.psi_integral(0, &[0, 0]).is_err());
        assert!(c.psi_integral(1, &[]).is_err());
    }

    #[test]
    fn dimension_gate() {
        let c = PsiCache::new();
        assert!(c.psi_integral(2, &[3]).unwrap().is_zero());
    }

    #[test]
    fn string_and_dilaton_agree_with_dvv() {
        let c = PsiCache::new();
        assert_eq!(c.string_consistent(1, &[0, 2]), Some(true));
        assert_eq!(c.dilaton_consistent(2, &[1, 4]), Some(true));
        assert_eq!(c.string_consistent(2, &[0, 1, 1, 5]), Some(true));
        assert_eq!(c.string_consistent(0, &[0, 0, 0]), None);
        assert_eq!(c.dilaton_consistent(1, &[1]), None);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("psi.json");
        let c = PsiCache::new();
        let v = c.psi_integral(2, &[2, 2, 2]).unwrap();
        c.save(&p).unwrap();
        let d = PsiCache::new();
        assert!(d.load(&p).unwrap() > 0);
        assert_eq!(d.psi_integral(2, &[2, 2, 2]).unwrap(), v);
    }
}
