//! Seeded end-to-end pipeline runs with resumable on-disk artifacts.
//!
//! A campaign executes, per seed: code generation → lattice build and
//! certification → minimal-vector enumeration → full intersection-pattern
//! distribution → automorphism-group certification. Every stage writes one
//! artifact into the seed's directory and validates an existing artifact
//! instead of recomputing it, so an interrupted campaign resumes where it
//! stopped and a finished campaign re-verifies quickly. All artifacts are
//! pure functions of (manifest, seed): re-running with any thread count
//! reproduces every file byte for byte.
//!
//! Per-seed directory layout: `code.json`, `lattice.json`, `min.vecs`,
//! `patterns.bin` (cache of the per-vector patterns backing `dist.json`
//! and the automorphism search), `dist.json`, `cert.json` (present only
//! when a group was certified). The campaign root gets `ledger.jsonl`,
//! one row per seed in seed order.

use crate::autgroup::{
    certify, find_rigidifying_basis, rotation_action_of, AutCertificate, GroupSpec,
    RigidifyingBasis,
};
use crate::codes::{cyclic_code, random_code, Code, CodeFile};
use crate::e8::{Mat8, ShellTable};
use crate::invariants::{Distribution, Pattern, PatternKernel};
use crate::isotropic::{Geometry, PairType};
use crate::lattice::QLattice;
use crate::minvec::{certify_extremal, enumerate_min, read_min_vecs, write_min_vecs, MinVectorSet};
use crate::{io, Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const MANIFEST_FORMAT: &str = "q64-campaign-v1";
pub const LEDGER_NAME: &str = "ledger.jsonl";
pub const PATTERNS_MAGIC: &[u8; 8] = b"Q64PATT1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CampaignMode {
    Random,
    Cyclic,
}

fn default_sample() -> usize {
    1000
}

fn default_restarts() -> usize {
    crate::autgroup::RESTART_BUDGET
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CampaignManifest {
    pub format: String,
    pub mode: CampaignMode,
    /// Factor types of Δ, one per factor ("I" or "II"); cyclic campaigns
    /// require a uniform Δ.
    pub pair_types: [PairType; 8],
    pub seed_start: u64,
    pub seed_count: u64,
    /// Worker threads; 0 inherits the current thread pool. Thread count
    /// never influences artifact bytes.
    #[serde(default)]
    pub threads: usize,
    /// Per-lattice pattern sample size for the spot consistency check.
    #[serde(default = "default_sample")]
    pub sample_size: usize,
    /// Restart budget of the rigidifying-basis search.
    #[serde(default = "default_restarts")]
    pub aut_restarts: usize,
}

impl CampaignManifest {
    pub fn new(
        mode: CampaignMode,
        pair_types: [PairType; 8],
        seed_start: u64,
        seed_count: u64,
    ) -> CampaignManifest {
        CampaignManifest {
            format: MANIFEST_FORMAT.to_string(),
            mode,
            pair_types,
            seed_start,
            seed_count,
            threads: 0,
            sample_size: default_sample(),
            aut_restarts: default_restarts(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != MANIFEST_FORMAT {
            return Err(Error::invalid(format!(
                "unsupported manifest format {:?}",
                self.format
            )));
        }
        if self.mode == CampaignMode::Cyclic
            && self.pair_types.iter().any(|t| *t != self.pair_types[0])
        {
            return Err(Error::invalid(
                "cyclic campaigns need a uniform factor type",
            ));
        }
        if self.seed_start.checked_add(self.seed_count).is_none() {
            return Err(Error::invalid("seed range overflows"));
        }
        Ok(())
    }

    pub fn to_file(&self, path: &Path) -> Result<()> {
        self.validate()?;
        io::write_json(path, self)
    }

    pub fn from_file(path: &Path) -> Result<CampaignManifest> {
        let m: CampaignManifest = io::read_json(path)?;
        m.validate()?;
        Ok(m)
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> {
        self.seed_start..self.seed_start + self.seed_count
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AutStatus {
    /// `O(Q) = {±1}` certified by a rigidifying basis.
    CertifiedPm1,
    /// `O(Q) = {±1} × ℤ/8` certified; the rotation's ± pair orbit count
    /// on the minimal vectors is recorded.
    CertifiedPm1xC8 { orbit_pairs: u64 },
    /// Search budget exhausted: the group contains the expected one but
    /// equality is not certified.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub seed: u64,
    pub mode: CampaignMode,
    pub pair_condition_ok: bool,
    pub lattice_hash: Option<String>,
    pub min_total: Option<u64>,
    pub min_divisible: Option<u64>,
    pub min_ok: Option<bool>,
    pub digest: Option<String>,
    pub aut: Option<AutStatus>,
    pub error: Option<String>,
}

impl LedgerRow {
    fn failed(seed: u64, mode: CampaignMode, err: &Error) -> LedgerRow {
        LedgerRow {
            seed,
            mode,
            pair_condition_ok: false,
            lattice_hash: None,
            min_total: None,
            min_divisible: None,
            min_ok: None,
            digest: None,
            aut: None,
            error: Some(err.to_string()),
        }
    }
}

pub fn seed_dir(out_dir: &Path, seed: u64) -> PathBuf {
    out_dir.join(format!("seed-{seed:06}"))
}

// ---------------------------------------------------------------------------
// Stages. Each validates an existing artifact against its inputs and only
// recomputes when the artifact is absent; a present artifact produced by a
// different configuration is an error, never silently overwritten.

/// The order-8 census backing cyclic code generation: all order-8 elements
/// of the reference pair stabilizer, in canonical sorted order.
pub fn order8_census(t: PairType) -> Vec<Mat8> {
    Geometry::new()
        .pair_stabilizer(t)
        .elements_of_order(8, usize::MAX)
}

pub fn stage_code(
    path: &Path,
    mode: CampaignMode,
    types: [PairType; 8],
    census: Option<&[Mat8]>,
    seed: u64,
) -> Result<Code> {
    let fresh = match mode {
        CampaignMode::Random => random_code(types, seed),
        CampaignMode::Cyclic => cyclic_code(
            types[0],
            census.expect("cyclic mode carries a census"),
            seed,
        ),
    };
    if path.exists() {
        let file: CodeFile = io::read_json(path)?;
        let code = Code::from_file(&file)?;
        if io::to_canonical_json(&file)? != io::to_canonical_json(&fresh.to_file())? {
            return Err(Error::Format {
                path: path.into(),
                reason: "existing code does not match this campaign's (mode, Δ, seed)".into(),
            });
        }
        return Ok(code);
    }
    io::write_json(path, &fresh.to_file())?;
    Ok(fresh)
}

pub fn stage_lattice(path: &Path, code: &Code) -> Result<QLattice> {
    if path.exists() {
        let file: crate::lattice::LatticeFile = io::read_json(path)?;
        let q = QLattice::from_file(&file)?;
        if io::to_canonical_json(&file.code)? != io::to_canonical_json(&code.to_file())? {
            return Err(Error::Format {
                path: path.into(),
                reason: "existing lattice was built from a different code".into(),
            });
        }
        return Ok(q);
    }
    let q = QLattice::build(code)?;
    io::write_json(path, &q.to_file())?;
    Ok(q)
}

pub fn stage_min_vectors(
    path: &Path,
    code: &Code,
    q: &QLattice,
    shells: &ShellTable,
) -> Result<MinVectorSet> {
    if path.exists() {
        let (vectors, hash) = read_min_vecs(path)?;
        if hash != q.hash() {
            return Err(Error::Format {
                path: path.into(),
                reason: "existing minimal vectors belong to a different lattice".into(),
            });
        }
        return MinVectorSet::from_sorted_vectors(vectors);
    }
    let set = enumerate_min(code, shells)?;
    write_min_vecs(path, &set, &q.hash())?;
    Ok(set)
}

// Pattern cache: magic, 32-byte lattice hash, u64 LE count, then count
// rows of 3 × u32 LE.

fn write_patterns(path: &Path, lattice_hash: &str, patterns: &[Pattern]) -> Result<()> {
    let mut bytes = Vec::with_capacity(48 + 12 * patterns.len());
    bytes.extend_from_slice(PATTERNS_MAGIC);
    bytes.extend_from_slice(&decode_hash(path, lattice_hash)?);
    bytes.extend_from_slice(&(patterns.len() as u64).to_le_bytes());
    for p in patterns {
        for v in p.a {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    io::write_bytes(path, &bytes)
}

fn read_patterns(path: &Path, lattice_hash: &str, count: usize) -> Result<Vec<Pattern>> {
    let bytes = io::read_bytes(path)?;
    let bad = |reason: &str| Error::Format {
        path: path.into(),
        reason: reason.into(),
    };
    if bytes.len() < 48 || &bytes[..8] != PATTERNS_MAGIC {
        return Err(bad("missing pattern-cache header"));
    }
    if bytes[8..40] != decode_hash(path, lattice_hash)? {
        return Err(bad("pattern cache belongs to a different lattice"));
    }
    let stored = u64::from_le_bytes(bytes[40..48].try_into().unwrap());
    if stored != count as u64 || bytes.len() != 48 + 12 * count {
        return Err(bad("pattern cache has the wrong vector count"));
    }
    let mut out = Vec::with_capacity(count);
    for row in bytes[48..].chunks_exact(12) {
        out.push(Pattern {
            a: std::array::from_fn(|i| {
                u32::from_le_bytes(row[4 * i..4 * i + 4].try_into().unwrap())
            }),
        });
    }
    Ok(out)
}

fn decode_hash(path: &Path, hex: &str) -> Result<[u8; 32]> {
    let bytes = hex.as_bytes();
    if bytes.len() != 64 || !bytes.iter().all(u8::is_ascii_hexdigit) {
        return Err(Error::Format {
            path: path.into(),
            reason: "malformed lattice hash".into(),
        });
    }
    let nib = |c: u8| match c {
        b'0'..=b'9' => c - b'0',
        b'a'..=b'f' => c - b'a' + 10,
        _ => c - b'A' + 10,
    };
    Ok(std::array::from_fn(|i| {
        nib(bytes[2 * i]) << 4 | nib(bytes[2 * i + 1])
    }))
}

/// Compute or reload the per-vector patterns and their distribution.
///
/// The cache is spot-checked (a spread of rows is recomputed through the
/// kernel) and must aggregate to the stored distribution; any
/// disagreement discards the cache and recomputes the full pass, after
/// which a stored distribution that still disagrees is itself replaced.
pub fn stage_patterns_and_distribution(
    patterns_path: &Path,
    dist_path: &Path,
    lattice_hash: &str,
    kernel: &PatternKernel,
) -> Result<(Vec<Pattern>, Distribution)> {
    let n = kernel.len();
    let stored_dist = if dist_path.exists() {
        Some(Distribution::from_file(dist_path)?)
    } else {
        None
    };

    let mut patterns: Option<Vec<Pattern>> = None;
    if patterns_path.exists() {
        if let Ok(cached) = read_patterns(patterns_path, lattice_hash, n) {
            let spot: Vec<usize> = (0..16).map(|i| i * n.max(1) / 17).collect();
            let recomputed = kernel.patterns_of_rows(Some(&spot))?;
            let spot_ok = spot.iter().zip(&recomputed).all(|(&r, p)| cached[r] == *p);
            let dist_ok = match &stored_dist {
                Some(d) => Distribution::from_patterns(&cached) == *d,
                None => true,
            };
            if spot_ok && dist_ok {
                patterns = Some(cached);
            }
        }
    }
    let patterns = match patterns {
        Some(p) => p,
        None => {
            let p = kernel.patterns_of_rows(None)?;
            write_patterns(patterns_path, lattice_hash, &p)?;
            p
        }
    };
    let fresh = Distribution::from_patterns(&patterns);
    match stored_dist {
        Some(d) if d == fresh => Ok((patterns, d)),
        _ => {
            fresh.to_file(dist_path)?;
            Ok((patterns, fresh))
        }
    }
}

/// Certify the automorphism group, reusing a stored certificate's basis
/// when one exists (every certificate is independently re-verified before
/// it is trusted or reported).
#[allow(clippy::too_many_arguments)]
pub fn stage_aut(
    cert_path: &Path,
    q: &QLattice,
    code: &Code,
    universe: &[[i8; 64]],
    patterns: &[Pattern],
    kernel: &PatternKernel,
    mode: CampaignMode,
    seed: u64,
    restarts: usize,
) -> Result<(AutStatus, Option<AutCertificate>)> {
    let (spec, action) = match mode {
        CampaignMode::Random => (GroupSpec::Pm1, None),
        CampaignMode::Cyclic => {
            let action = rotation_action_of(q, code)?.ok_or_else(|| {
                Error::invalid("cyclic campaign requires a code with rotation provenance")
            })?;
            (GroupSpec::Pm1xC8, Some(action))
        }
    };
    let basis = if cert_path.exists() {
        let cert = AutCertificate::from_file(cert_path)?;
        if cert.group != spec {
            return Err(Error::Format {
                path: cert_path.into(),
                reason: "existing certificate is for a different group".into(),
            });
        }
        let mut vectors = Vec::with_capacity(cert.basis.len());
        for row in &cert.basis {
            if row.len() != crate::lattice::DIM {
                return Err(Error::verification(
                    "certificate basis row has wrong length",
                ));
            }
            let mut v = [0i8; 64];
            for (o, &x) in v.iter_mut().zip(row) {
                *o = i8::try_from(x)
                    .map_err(|_| Error::verification("certificate basis entry out of range"))?;
            }
            vectors.push(v);
        }
        Some(RigidifyingBasis { vectors })
    } else {
        find_rigidifying_basis(universe, patterns, spec, action.as_ref(), seed, restarts)?
    };
    let Some(basis) = basis else {
        return Ok((AutStatus::Inconclusive, None));
    };
    let existed = cert_path.exists();
    let cert = certify(q, universe, patterns, kernel, &basis, spec, action.as_ref())?;
    if existed {
        // The basis re-certified, but the rest of the stored file must
        // also agree with the recomputation.
        if io::read_bytes(cert_path)? != io::to_canonical_json(&cert)?.into_bytes() {
            return Err(Error::Format {
                path: cert_path.into(),
                reason: "stored certificate does not match its re-verification".into(),
            });
        }
    } else {
        cert.to_file(cert_path)?;
    }
    let status = match spec {
        GroupSpec::Pm1 => AutStatus::CertifiedPm1,
        GroupSpec::Pm1xC8 => AutStatus::CertifiedPm1xC8 {
            orbit_pairs: cert
                .orbit_pairs
                .expect("order-16 certificates count orbits"),
        },
    };
    Ok((status, Some(cert)))
}

// ---------------------------------------------------------------------------
// The campaign driver.

fn run_seed(
    manifest: &CampaignManifest,
    census: Option<&[Mat8]>,
    shells: &ShellTable,
    out_dir: &Path,
    seed: u64,
) -> Result<LedgerRow> {
    let dir = seed_dir(out_dir, seed);
    let stamp = std::time::Instant::now();
    let code = stage_code(
        &dir.join("code.json"),
        manifest.mode,
        manifest.pair_types,
        census,
        seed,
    )?;
    let pair_condition_ok = code.satisfies_pair_condition();
    let q = stage_lattice(&dir.join("lattice.json"), &code)?;
    log::info!(
        "seed {seed}: lattice {} ({:.1?})",
        &q.hash()[..12],
        stamp.elapsed()
    );
    let set = stage_min_vectors(&dir.join("min.vecs"), &code, &q, shells)?;
    let ext = certify_extremal(&code, shells, &set)?;
    log::info!(
        "seed {seed}: {} minimal vectors, extremality certified ({:.1?})",
        ext.total_both_signs,
        stamp.elapsed()
    );
    let kernel = PatternKernel::new(&set.vectors)?;
    // Seeded spot check across the sample budget: the kernel validates
    // every probe's pattern row, so this is a consistency sample beyond
    // the full pass itself.
    kernel.sampled_patterns(manifest.sample_size.min(set.vectors.len()), seed)?;
    let (patterns, dist) = stage_patterns_and_distribution(
        &dir.join("patterns.bin"),
        &dir.join("dist.json"),
        &q.hash(),
        &kernel,
    )?;
    log::info!(
        "seed {seed}: distribution {} over {} classes ({:.1?})",
        dist.digest(),
        dist.entries.len(),
        stamp.elapsed()
    );
    let (aut, _) = stage_aut(
        &dir.join("cert.json"),
        &q,
        &code,
        &set.vectors,
        &patterns,
        &kernel,
        manifest.mode,
        seed,
        manifest.aut_restarts,
    )?;
    log::info!(
        "seed {seed}: automorphism stage {:?} ({:.1?})",
        aut,
        stamp.elapsed()
    );
    Ok(LedgerRow {
        seed,
        mode: manifest.mode,
        pair_condition_ok,
        lattice_hash: Some(q.hash()),
        min_total: Some(ext.total_both_signs),
        min_divisible: Some(ext.divisible_both_signs),
        min_ok: Some(true),
        digest: Some(dist.digest()),
        aut: Some(aut),
        error: None,
    })
}

/// Run (or resume) a campaign: every seed in order, failures recorded as
/// rows, the ledger rewritten deterministically at the end.
pub fn run_campaign(manifest: &CampaignManifest, out_dir: &Path) -> Result<Vec<LedgerRow>> {
    manifest.validate()?;
    let shells = ShellTable::new(12);
    let census = match manifest.mode {
        CampaignMode::Cyclic => Some(order8_census(manifest.pair_types[0])),
        CampaignMode::Random => None,
    };
    let mut rows = Vec::with_capacity(manifest.seed_count as usize);
    for seed in manifest.seeds() {
        let row = run_seed(manifest, census.as_deref(), &shells, out_dir, seed)
            .unwrap_or_else(|e| LedgerRow::failed(seed, manifest.mode, &e));
        rows.push(row);
    }
    write_ledger(&out_dir.join(LEDGER_NAME), &rows)?;
    Ok(rows)
}

pub fn write_ledger(path: &Path, rows: &[LedgerRow]) -> Result<()> {
    let mut text = String::new();
    for row in rows {
        let value = serde_json::to_value(row).map_err(|e| Error::Json {
            path: path.into(),
            source: e,
        })?;
        let line = serde_json::to_string(&value).map_err(|e| Error::Json {
            path: path.into(),
            source: e,
        })?;
        text.push_str(&line);
        text.push('\n');
    }
    io::write_bytes(path, text.as_bytes())
}

pub fn read_ledger(path: &Path) -> Result<Vec<LedgerRow>> {
    let bytes = io::read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Format {
        path: path.into(),
        reason: "ledger is not UTF-8".into(),
    })?;
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(line).map_err(|e| Error::Json {
            path: path.into(),
            source: e,
        })?);
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Reporting.

/// Human-readable campaign summary: distinct-distribution tally, group
/// certification totals, and pattern-class divisibility statistics.
pub fn report(out_dir: &Path) -> Result<String> {
    let rows = read_ledger(&out_dir.join(LEDGER_NAME))?;
    let mut out = String::new();
    let complete: Vec<&LedgerRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    out.push_str(&format!(
        "seeds: {} total, {} complete, {} failed\n",
        rows.len(),
        complete.len(),
        rows.len() - complete.len()
    ));

    // Distinct distributions: equality of digests of full distributions.
    let mut by_digest: Vec<(&str, Vec<u64>)> = Vec::new();
    for row in &complete {
        let Some(d) = row.digest.as_deref() else {
            continue;
        };
        match by_digest.iter_mut().find(|(dd, _)| *dd == d) {
            Some((_, seeds)) => seeds.push(row.seed),
            None => by_digest.push((d, vec![row.seed])),
        }
    }
    by_digest.sort();
    out.push_str(&format!(
        "distinct distributions: {} among {} lattices",
        by_digest.len(),
        complete.len()
    ));
    if by_digest.len() == complete.len() && !complete.is_empty() {
        out.push_str(" -> pairwise non-isomorphic\n");
    } else {
        out.push_str(" (equal digests are indistinguishable, not proven isomorphic)\n");
    }
    for (digest, seeds) in &by_digest {
        out.push_str(&format!("  {digest}  seeds {seeds:?}\n"));
    }

    let tally = |f: &dyn Fn(&AutStatus) -> bool| {
        complete
            .iter()
            .filter(|r| r.aut.as_ref().is_some_and(f))
            .count()
    };
    let pm1 = tally(&|a| *a == AutStatus::CertifiedPm1);
    let pm1xc8 = tally(&|a| matches!(a, AutStatus::CertifiedPm1xC8 { .. }));
    let inconclusive = tally(&|a| *a == AutStatus::Inconclusive);
    out.push_str(&format!(
        "groups: {pm1} certified {{±1}}; {pm1xc8} certified {{±1}}×Z/8; \
         {inconclusive} not certified (group contains the expected one; equality unproven)\n"
    ));
    for row in &complete {
        if let Some(AutStatus::CertifiedPm1xC8 { orbit_pairs }) = &row.aut {
            out.push_str(&format!(
                "  seed {}: rotation orbits on ± pairs of minimal vectors: {orbit_pairs}\n",
                row.seed
            ));
        }
    }

    // Divisibility of pattern-class sizes (counts in each distribution);
    // reported as a statistic, no conclusion drawn.
    for row in &complete {
        let dist_path = seed_dir(out_dir, row.seed).join("dist.json");
        if !dist_path.exists() {
            continue;
        }
        let dist = Distribution::from_file(&dist_path)?;
        let gcd = dist.entries.values().fold(0u64, |g, &c| gcd_u64(g, c));
        let div48 = dist.entries.values().filter(|&&c| c % 48 == 0).count();
        out.push_str(&format!(
            "  seed {}: {} pattern classes, size gcd {}, {}/{} sizes divisible by 48\n",
            row.seed,
            dist.entries.len(),
            gcd,
            div48,
            dist.entries.len()
        ));
    }
    Ok(out)
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}
