//! File plumbing and seeded randomness.
//!
//! Every artifact is written atomically (temp file + rename) and JSON is
//! canonical: `serde_json` maps are sorted (the crate's default `BTreeMap`
//! backing), output is pretty-printed with a trailing newline, and no
//! timestamps or machine-specific data are ever embedded. Re-running a
//! stage must reproduce files byte for byte.

use crate::{Error, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;

/// Deterministic RNG for a (domain, seed) pair. Distinct domains decouple
/// the random streams of unrelated stages that share a user-facing seed.
pub fn rng_for(domain: &str, seed: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"q64\0");
    h.update(domain.as_bytes());
    h.update([0u8]);
    h.update(seed.to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Write bytes atomically: temp file in the target directory, fsync-free
/// rename. Creates parent directories as needed.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    std::io::Write::write_all(&mut tmp.as_file(), bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Canonical JSON: value-tree roundtrip sorts object keys, then pretty
/// print with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Json {
        path: "<memory>".into(),
        source: e,
    })?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| Error::Json {
        path: "<memory>".into(),
        source: e,
    })?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_bytes(path, to_canonical_json(value)?.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })
}
