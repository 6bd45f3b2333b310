//! Intersection-pattern invariants.
//!
//! For a minimal vector `v`, the pattern `a(v) = [a₁, a₂, a₃]` counts the
//! ± pairs of minimal vectors whose rescaled inner product with `v` has
//! absolute value 1, 2, 3. The multiset of patterns over all ± pairs is
//! an isomorphism invariant of the lattice: two lattices with different
//! distributions cannot be isometric (the converse direction proves
//! nothing).
//!
//! Ambient inner products between minimal vectors land in
//! `{0, ±3, ±6, ±9}` — with `±18` exactly for `v` against `±v` — because
//! the lattice is even with minimum norm 6 after rescaling, so every
//! computed value is validated against that set.
//!
//! The pattern computation is the dominant cost of the pipeline: all
//! pairs of 1,305,600 representatives, i.e. ~10¹² byte dot products. The
//! kernel biases coordinates into unsigned bytes and runs blocked
//! unsigned×signed dot-product instructions where the CPU supports them,
//! with a scalar path kept for portability and as an oracle.

use crate::e8;
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

/// Number of ± pairs of minimal vectors.
pub const FULL_PAIRS: u64 = 1_305_600;

const BIAS: i32 = 32;
/// Probes per parallel task; images of a task stay cache-resident.
const PROBE_BLOCK: usize = 512;
/// Target vectors per cache tile (64 bytes each).
const TILE: usize = 8192;

/// Inner product of two ambient vectors in the unscaled coordinates.
pub fn inner_s_i8(a: &[i8; 64], b: &[i8; 64]) -> i64 {
    let g = e8::gram();
    let mut total = 0i64;
    for f in 0..8 {
        for i in 0..8 {
            let ai = a[8 * f + i] as i64;
            if ai != 0 {
                for j in 0..8 {
                    total += ai * g[i][j] * b[8 * f + j] as i64;
                }
            }
        }
    }
    total
}

fn image_of(v: &[i8; 64]) -> Result<[i8; 64]> {
    let g = e8::gram();
    let mut w = [0i16; 64];
    for f in 0..8 {
        for i in 0..8 {
            let vi = v[8 * f + i] as i16;
            if vi != 0 {
                for j in 0..8 {
                    w[8 * f + j] += vi * g[i][j] as i16;
                }
            }
        }
    }
    let mut out = [0i8; 64];
    for k in 0..64 {
        if w[k].unsigned_abs() > 6 {
            return Err(Error::invalid(format!(
                "probe image entry {} exceeds the minimal-vector bound",
                w[k]
            )));
        }
        out[k] = w[k] as i8;
    }
    Ok(out)
}

/// Pattern engine over a fixed target set of canonical-sign vectors.
pub struct PatternKernel<'a> {
    vectors: &'a [[i8; 64]],
    /// Biased blocked layout: per 16-vector chunk, 16 groups of 64 bytes;
    /// byte `(g, lane, b)` is coordinate `4g + b` of lane's vector, + BIAS.
    blocked: Vec<u8>,
    /// Gram images of the target vectors, row-major.
    images: Vec<i8>,
    simd: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pattern {
    pub a: [u32; 3],
}

impl<'a> PatternKernel<'a> {
    pub fn new(vectors: &'a [[i8; 64]]) -> Result<PatternKernel<'a>> {
        for v in vectors {
            if v.iter().any(|&x| x.unsigned_abs() > (BIAS as u8 - 6)) {
                return Err(Error::invalid(
                    "vector coordinate exceeds the kernel bias margin",
                ));
            }
        }
        let chunks = vectors.len().div_ceil(16);
        let mut blocked = vec![BIAS as u8; chunks * 1024];
        for (idx, v) in vectors.iter().enumerate() {
            let (chunk, lane) = (idx / 16, idx % 16);
            for g in 0..16 {
                for b in 0..4 {
                    blocked[chunk * 1024 + g * 64 + lane * 4 + b] =
                        (v[4 * g + b] as i32 + BIAS) as u8;
                }
            }
        }
        let mut images = vec![0i8; vectors.len() * 64];
        let rows: Vec<[i8; 64]> = vectors
            .par_iter()
            .map(image_of)
            .collect::<Result<Vec<_>>>()?;
        for (row, out) in rows.iter().zip(images.chunks_exact_mut(64)) {
            out.copy_from_slice(row);
        }
        let simd = detect_simd();
        Ok(PatternKernel {
            vectors,
            blocked,
            images,
            simd,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn uses_simd(&self) -> bool {
        self.simd
    }

    fn probe_meta(w: &[i8; 64]) -> ([i32; 16], i32) {
        let wb: [i32; 16] = std::array::from_fn(|g| {
            i32::from_le_bytes(std::array::from_fn(|b| w[4 * g + b] as u8))
        });
        let corr = BIAS * w.iter().map(|&x| x as i32).sum::<i32>();
        (wb, corr)
    }

    /// Raw bucket counts `[a₁, a₂, a₃, a₆]` of one probe against the chunk
    /// range `[c0, c1)`; errors on any inner product outside the allowed
    /// value set.
    fn scan(&self, w: &[i8; 64], c0: usize, c1: usize, counts: &mut [u32; 4]) -> Result<()> {
        let invalid = if self.simd {
            let (wb, corr) = Self::probe_meta(w);
            #[cfg(target_arch = "x86_64")]
            unsafe {
                simd::scan_chunks(&self.blocked[c0 * 1024..c1 * 1024], &wb, corr, counts)
            }
            #[cfg(not(target_arch = "x86_64"))]
            unreachable!()
        } else {
            self.scan_scalar(w, c0, c1, counts)
        };
        if invalid {
            return Err(Error::verification(
                "inner product outside {0, ±3, ±6, ±9, ±18}: probe is not a minimal vector \
                 of this lattice",
            ));
        }
        Ok(())
    }

    /// Like `scan` for up to eight probes sharing one pass over the chunk
    /// range, which amortizes the target loads — the dominant win for the
    /// all-pairs computation.
    fn scan_multi(
        &self,
        ws: &[&[i8; 64]],
        c0: usize,
        c1: usize,
        counts: &mut [[u32; 4]],
    ) -> Result<()> {
        debug_assert!(ws.len() <= 8 && ws.len() == counts.len());
        #[cfg(target_arch = "x86_64")]
        if self.simd && ws.len() == 8 {
            let metas: [([i32; 16], i32); 8] = std::array::from_fn(|p| Self::probe_meta(ws[p]));
            let wbs: [[i32; 16]; 8] = std::array::from_fn(|p| metas[p].0);
            let corrs: [i32; 8] = std::array::from_fn(|p| metas[p].1);
            let out: &mut [[u32; 4]; 8] = counts.try_into().unwrap();
            let invalid = unsafe {
                simd::scan_chunks8(&self.blocked[c0 * 1024..c1 * 1024], &wbs, &corrs, out)
            };
            if invalid {
                return Err(Error::verification(
                    "inner product outside {0, ±3, ±6, ±9, ±18}: probe is not a minimal \
                     vector of this lattice",
                ));
            }
            return Ok(());
        }
        for (w, c) in ws.iter().zip(counts.iter_mut()) {
            self.scan(w, c0, c1, c)?;
        }
        Ok(())
    }

    fn scan_scalar(&self, w: &[i8; 64], c0: usize, c1: usize, counts: &mut [u32; 4]) -> bool {
        let mut invalid = false;
        let lo = c0 * 16;
        let hi = (c1 * 16).min(self.vectors.len());
        for v in &self.vectors[lo..hi] {
            let mut d = 0i32;
            for k in 0..64 {
                d += v[k] as i32 * w[k] as i32;
            }
            match d.unsigned_abs() {
                0 => {}
                3 => counts[0] += 1,
                6 => counts[1] += 1,
                9 => counts[2] += 1,
                18 => counts[3] += 1,
                _ => invalid = true,
            }
        }
        invalid
    }

    fn chunk_count(&self) -> usize {
        self.blocked.len() / 1024
    }

    fn finalize(counts: [u32; 4]) -> Result<Pattern> {
        if counts[3] != 1 {
            return Err(Error::verification(format!(
                "probe pairs to ±18 with {} vectors instead of itself alone",
                counts[3]
            )));
        }
        Ok(Pattern {
            a: [counts[0], counts[1], counts[2]],
        })
    }

    /// Pattern of one vector of the target set.
    pub fn pattern_of(&self, v: &[i8; 64]) -> Result<Pattern> {
        let w = image_of(v)?;
        let mut counts = [0u32; 4];
        self.scan(&w, 0, self.chunk_count(), &mut counts)?;
        Self::finalize(counts)
    }

    /// Patterns of every target vector, cache-tiled and parallel over
    /// probe blocks; output order matches the target order for any thread
    /// count.
    pub fn patterns_all(&self) -> Result<Vec<Pattern>> {
        self.patterns_of_rows(None)
    }

    /// Patterns of the selected rows (`None` = all), in selection order.
    pub fn patterns_of_rows(&self, rows: Option<&[usize]>) -> Result<Vec<Pattern>> {
        let indices: Vec<usize> = match rows {
            Some(r) => r.to_vec(),
            None => (0..self.vectors.len()).collect(),
        };
        let chunks = self.chunk_count();
        let done = std::sync::atomic::AtomicUsize::new(0);
        indices
            .par_chunks(PROBE_BLOCK)
            .map(|block| {
                let d = done.fetch_add(block.len(), std::sync::atomic::Ordering::Relaxed);
                if d / 131_072 != (d + block.len()) / 131_072 {
                    log::info!("patterns: {} / {} probes", d + block.len(), indices.len());
                }
                let metas: Vec<&[i8]> = block
                    .iter()
                    .map(|&i| &self.images[64 * i..64 * i + 64])
                    .collect();
                let mut counts = vec![[0u32; 4]; block.len()];
                let tile_chunks = TILE / 16;
                let mut c0 = 0;
                while c0 < chunks {
                    let c1 = (c0 + tile_chunks).min(chunks);
                    for (group, cnt) in metas.chunks(8).zip(counts.chunks_mut(8)) {
                        let ws: Vec<&[i8; 64]> = group
                            .iter()
                            .map(|w| <&[i8; 64]>::try_from(*w).unwrap())
                            .collect();
                        self.scan_multi(&ws, c0, c1, cnt)?;
                    }
                    c0 = c1;
                }
                counts
                    .into_iter()
                    .map(Self::finalize)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<Vec<_>>>>()
            .map(|blocks| blocks.concat())
    }

    /// Patterns of a seeded uniform sample of rows (triage only — any
    /// verdict touching isomorphism must come from the full distribution).
    pub fn sampled_patterns(&self, sample_size: usize, seed: u64) -> Result<Vec<Pattern>> {
        if sample_size > self.vectors.len() {
            return Err(Error::invalid("sample size exceeds the number of ± pairs"));
        }
        let mut rng = crate::io::rng_for("invariant-sample", seed);
        let mut rows =
            rand::seq::index::sample(&mut rng, self.vectors.len(), sample_size).into_vec();
        rows.sort_unstable();
        self.patterns_of_rows(Some(&rows))
    }
}

fn detect_simd() -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        is_x86_feature_detected!("avx512f") && is_x86_feature_detected!("avx512vnni")
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        false
    }
}

#[cfg(target_arch = "x86_64")]
mod simd {
    use std::arch::x86_64::*;

    /// Classify biased dot products of one probe against a blocked chunk
    /// range. Returns true if any value falls outside
    /// `{0, ±3, ±6, ±9, ±18}`.
    ///
    /// # Safety
    /// Requires AVX-512F and AVX-512VNNI; `blocked.len()` must be a
    /// multiple of 1024.
    #[target_feature(enable = "avx512f,avx512vnni")]
    pub unsafe fn scan_chunks(
        blocked: &[u8],
        wb: &[i32; 16],
        corr: i32,
        counts: &mut [u32; 4],
    ) -> bool {
        let ones = _mm512_set1_epi32(1);
        let c3 = _mm512_set1_epi32(3);
        let c6 = _mm512_set1_epi32(6);
        let c9 = _mm512_set1_epi32(9);
        let c18 = _mm512_set1_epi32(18);
        let corrv = _mm512_set1_epi32(corr);
        let zero = _mm512_setzero_si512();
        let mut a1 = zero;
        let mut a2 = zero;
        let mut a3 = zero;
        let mut n18 = 0u32;
        let mut bad = 0u16;
        for chunk in blocked.chunks_exact(1024) {
            // Four independent accumulators break the dot-product latency
            // chain; the loop is otherwise serialized on one register.
            let mut accs = [zero; 4];
            for g in 0..16 {
                let x = _mm512_loadu_si512(chunk.as_ptr().add(64 * g) as *const _);
                accs[g % 4] = _mm512_dpbusd_epi32(accs[g % 4], x, _mm512_set1_epi32(wb[g]));
            }
            let acc = _mm512_add_epi32(
                _mm512_add_epi32(accs[0], accs[1]),
                _mm512_add_epi32(accs[2], accs[3]),
            );
            let ad = _mm512_abs_epi32(_mm512_sub_epi32(acc, corrv));
            let m0 = _mm512_cmpeq_epi32_mask(ad, zero);
            let m3 = _mm512_cmpeq_epi32_mask(ad, c3);
            let m6 = _mm512_cmpeq_epi32_mask(ad, c6);
            let m9 = _mm512_cmpeq_epi32_mask(ad, c9);
            let m18 = _mm512_cmpeq_epi32_mask(ad, c18);
            a1 = _mm512_mask_add_epi32(a1, m3, a1, ones);
            a2 = _mm512_mask_add_epi32(a2, m6, a2, ones);
            a3 = _mm512_mask_add_epi32(a3, m9, a3, ones);
            n18 += (m18 as u16).count_ones();
            bad |= !(m0 | m3 | m6 | m9 | m18);
        }
        counts[0] += _mm512_reduce_add_epi32(a1) as u32;
        counts[1] += _mm512_reduce_add_epi32(a2) as u32;
        counts[2] += _mm512_reduce_add_epi32(a3) as u32;
        counts[3] += n18;
        bad != 0
    }

    /// Eight probes per pass over the blocked range: the 16 target loads
    /// per chunk are shared and the eight independent dot-product chains
    /// overlap, keeping the byte-dot port saturated.
    ///
    /// # Safety
    /// Same requirements as `scan_chunks`.
    #[target_feature(enable = "avx512f,avx512vnni")]
    pub unsafe fn scan_chunks8(
        blocked: &[u8],
        wbs: &[[i32; 16]; 8],
        corrs: &[i32; 8],
        counts: &mut [[u32; 4]; 8],
    ) -> bool {
        let ones = _mm512_set1_epi32(1);
        let c3 = _mm512_set1_epi32(3);
        let c6 = _mm512_set1_epi32(6);
        let c9 = _mm512_set1_epi32(9);
        let c18 = _mm512_set1_epi32(18);
        let zero = _mm512_setzero_si512();
        let mut a1 = [zero; 8];
        let mut a2 = [zero; 8];
        let mut a3 = [zero; 8];
        let mut n18 = [0u32; 8];
        let mut bad = 0u16;
        for chunk in blocked.chunks_exact(1024) {
            let mut acc = [zero; 8];
            for g in 0..16 {
                let x = _mm512_loadu_si512(chunk.as_ptr().add(64 * g) as *const _);
                for p in 0..8 {
                    acc[p] = _mm512_dpbusd_epi32(acc[p], x, _mm512_set1_epi32(wbs[p][g]));
                }
            }
            for p in 0..8 {
                let ad = _mm512_abs_epi32(_mm512_sub_epi32(acc[p], _mm512_set1_epi32(corrs[p])));
                let m0 = _mm512_cmpeq_epi32_mask(ad, zero);
                let m3 = _mm512_cmpeq_epi32_mask(ad, c3);
                let m6 = _mm512_cmpeq_epi32_mask(ad, c6);
                let m9 = _mm512_cmpeq_epi32_mask(ad, c9);
                let m18 = _mm512_cmpeq_epi32_mask(ad, c18);
                a1[p] = _mm512_mask_add_epi32(a1[p], m3, a1[p], ones);
                a2[p] = _mm512_mask_add_epi32(a2[p], m6, a2[p], ones);
                a3[p] = _mm512_mask_add_epi32(a3[p], m9, a3[p], ones);
                n18[p] += (m18 as u16).count_ones();
                bad |= !(m0 | m3 | m6 | m9 | m18);
            }
        }
        for p in 0..8 {
            counts[p][0] += _mm512_reduce_add_epi32(a1[p]) as u32;
            counts[p][1] += _mm512_reduce_add_epi32(a2[p]) as u32;
            counts[p][2] += _mm512_reduce_add_epi32(a3[p]) as u32;
            counts[p][3] += n18[p];
        }
        bad != 0
    }
}

// ---------------------------------------------------------------------------
// Distributions.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    /// Lexicographically sorted pattern → count.
    pub entries: BTreeMap<[u32; 3], u64>,
    pub total: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Distinct,
    Indistinguishable,
}

impl Distribution {
    pub fn from_patterns(patterns: &[Pattern]) -> Distribution {
        let mut entries: BTreeMap<[u32; 3], u64> = BTreeMap::new();
        for p in patterns {
            *entries.entry(p.a).or_insert(0) += 1;
        }
        Distribution {
            entries,
            total: patterns.len() as u64,
        }
    }

    /// Order-independent 128-bit digest over the sorted entries.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (a, count) in &self.entries {
            for x in a {
                h.update((*x as u64).to_le_bytes());
            }
            h.update(count.to_le_bytes());
        }
        let full = h.finalize();
        full[..16].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_file(&self, path: &Path) -> Result<()> {
        let file = DistributionFile {
            format: FORMAT.to_string(),
            total: self.total,
            digest: self.digest(),
            patterns: self
                .entries
                .iter()
                .map(|(a, &c)| [a[0] as u64, a[1] as u64, a[2] as u64, c])
                .collect(),
        };
        crate::io::write_json(path, &file)
    }

    pub fn from_file(path: &Path) -> Result<Distribution> {
        let file: DistributionFile = crate::io::read_json(path)?;
        let fail = |reason: String| Error::Format {
            path: path.into(),
            reason,
        };
        if file.format != FORMAT {
            return Err(fail(format!("unsupported format {:?}", file.format)));
        }
        let mut entries = BTreeMap::new();
        let mut prev: Option<[u64; 3]> = None;
        for row in &file.patterns {
            let key = [row[0], row[1], row[2]];
            if prev.is_some_and(|p| p >= key) {
                return Err(fail("patterns are not sorted and distinct".into()));
            }
            prev = Some(key);
            if row[3] == 0 || key.iter().any(|&x| x > u32::MAX as u64) {
                return Err(fail("pattern entry out of range".into()));
            }
            entries.insert([key[0] as u32, key[1] as u32, key[2] as u32], row[3]);
        }
        let dist = Distribution {
            entries,
            total: file.total,
        };
        if dist.entries.values().sum::<u64>() != file.total {
            return Err(fail("counts do not sum to the declared total".into()));
        }
        if dist.digest() != file.digest {
            return Err(fail("digest mismatch".into()));
        }
        Ok(dist)
    }
}

const FORMAT: &str = "q64-dist-v1";

#[derive(Serialize, Deserialize)]
struct DistributionFile {
    format: String,
    total: u64,
    digest: String,
    patterns: Vec<[u64; 4]>,
}

/// Compare two full distributions. `Distinct` proves the lattices are not
/// isometric; `Indistinguishable` proves nothing.
pub fn compare(a: &Distribution, b: &Distribution) -> Result<Verdict> {
    if a.total != FULL_PAIRS || b.total != FULL_PAIRS {
        return Err(Error::invalid(format!(
            "comparison requires full distributions over {FULL_PAIRS} pairs, got {} and {}",
            a.total, b.total
        )));
    }
    if a.entries == b.entries {
        Ok(Verdict::Indistinguishable)
    } else {
        Ok(Verdict::Distinct)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::random_code;
    use crate::isotropic::PairType;
    use crate::minvec::{enumerate_min, MinVectorSet};
    use std::sync::OnceLock;

    fn min_set() -> &'static MinVectorSet {
        static SET: OnceLock<MinVectorSet> = OnceLock::new();
        SET.get_or_init(|| {
            let code = random_code([PairType::I; 8], 7);
            let shells = crate::e8::ShellTable::new(12);
            enumerate_min(&code, &shells).unwrap()
        })
    }

    /// Every 26th vector: an arbitrary sub-multiset that still contains
    /// each probe itself, which is all the kernel requires.
    fn subset() -> Vec<[i8; 64]> {
        min_set().vectors.iter().copied().step_by(26).collect()
    }

    fn scalar_pattern(vectors: &[[i8; 64]], v: &[i8; 64]) -> [u32; 4] {
        let mut counts = [0u32; 4];
        for u in vectors {
            match inner_s_i8(v, u).unsigned_abs() {
                0 => {}
                3 => counts[0] += 1,
                6 => counts[1] += 1,
                9 => counts[2] += 1,
                18 => counts[3] += 1,
                other => panic!("invalid inner product {other}"),
            }
        }
        counts
    }

    #[test]
    fn kernel_matches_direct_inner_products() {
        let vectors = subset();
        let kernel = PatternKernel::new(&vectors).unwrap();
        let mut rng = crate::io::rng_for("test-invariants", 1);
        use rand::Rng;
        for _ in 0..20 {
            let v = vectors[rng.gen_range(0..vectors.len())];
            let expected = scalar_pattern(&vectors, &v);
            assert_eq!(expected[3], 1);
            let got = kernel.pattern_of(&v).unwrap();
            assert_eq!(got.a, [expected[0], expected[1], expected[2]]);
        }
    }

    #[test]
    fn simd_and_scalar_paths_agree() {
        let vectors = subset();
        let mut kernel = PatternKernel::new(&vectors).unwrap();
        if !kernel.uses_simd() {
            return; // only the scalar path exists on this host
        }
        let sample = kernel.sampled_patterns(200, 5).unwrap();
        kernel.simd = false;
        let scalar = kernel.sampled_patterns(200, 5).unwrap();
        assert_eq!(sample, scalar);
    }

    #[test]
    fn tiled_full_pass_matches_per_probe_path() {
        let vectors = subset();
        let kernel = PatternKernel::new(&vectors).unwrap();
        let all = kernel.patterns_all().unwrap();
        assert_eq!(all.len(), vectors.len());
        let mut rng = crate::io::rng_for("test-invariants", 2);
        use rand::Rng;
        for _ in 0..12 {
            let i = rng.gen_range(0..vectors.len());
            assert_eq!(all[i], kernel.pattern_of(&vectors[i]).unwrap());
        }
        // Pairwise incidences are symmetric, so each off-diagonal pair is
        // counted twice and the bucket sums come out even.
        for k in 0..3 {
            let sum: u64 = all.iter().map(|p| p.a[k] as u64).sum();
            assert_eq!(sum % 2, 0, "bucket {k}");
        }
    }

    #[test]
    fn factor_permutation_preserves_patterns() {
        let vectors = subset();
        let kernel = PatternKernel::new(&vectors).unwrap();
        let sigma = [3usize, 0, 6, 1, 7, 2, 5, 4];
        let mut permuted: Vec<[i8; 64]> = vectors
            .iter()
            .map(|v| {
                let moved: [i8; 64] = std::array::from_fn(|i| v[8 * sigma[i / 8] + i % 8]);
                crate::minvec::canonicalize_sign(&moved)
            })
            .collect();
        permuted.sort_unstable();
        let kernel2 = PatternKernel::new(&permuted).unwrap();
        let mut rng = crate::io::rng_for("test-invariants", 3);
        use rand::Rng;
        for _ in 0..10 {
            let v = vectors[rng.gen_range(0..vectors.len())];
            let moved: [i8; 64] = std::array::from_fn(|i| v[8 * sigma[i / 8] + i % 8]);
            let moved = crate::minvec::canonicalize_sign(&moved);
            assert_eq!(
                kernel.pattern_of(&v).unwrap(),
                kernel2.pattern_of(&moved).unwrap()
            );
        }
    }

    #[test]
    fn foreign_probe_is_rejected() {
        let vectors = subset();
        let kernel = PatternKernel::new(&vectors).unwrap();
        // A vector absent from the set pairs to ±18 zero times.
        let missing = min_set().vectors[1]; // step_by(26) keeps index 0, skips 1
        assert!(kernel.pattern_of(&missing).is_err());
    }

    #[test]
    fn sampling_edge_cases_and_distribution_roundtrip() {
        let vectors = subset();
        let kernel = PatternKernel::new(&vectors).unwrap();
        assert!(kernel.sampled_patterns(0, 9).unwrap().is_empty());
        let full = kernel.patterns_all().unwrap();
        let sampled = kernel.sampled_patterns(vectors.len(), 9).unwrap();
        assert_eq!(
            Distribution::from_patterns(&full),
            Distribution::from_patterns(&sampled)
        );
        assert!(kernel.sampled_patterns(vectors.len() + 1, 9).is_err());

        let dist = Distribution::from_patterns(&full);
        assert_eq!(dist.total, vectors.len() as u64);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dist.json");
        dist.to_file(&path).unwrap();
        let back = Distribution::from_file(&path).unwrap();
        assert_eq!(back, dist);
        back.to_file(&path).unwrap();
        let again = crate::io::read_bytes(&path).unwrap();
        dist.to_file(&path).unwrap();
        assert_eq!(again, crate::io::read_bytes(&path).unwrap());

        // Tampering with a count breaks the digest check.
        let mut file: serde_json::Value =
            serde_json::from_slice(&crate::io::read_bytes(&path).unwrap()).unwrap();
        file["patterns"][0][3] = serde_json::json!(999_999);
        crate::io::write_json(&path, &file).unwrap();
        assert!(Distribution::from_file(&path).is_err());
    }

    #[test]
    fn compare_requires_full_totals() {
        let mut entries = BTreeMap::new();
        entries.insert([1u32, 2, 3], FULL_PAIRS);
        let full = Distribution {
            entries: entries.clone(),
            total: FULL_PAIRS,
        };
        assert_eq!(compare(&full, &full).unwrap(), Verdict::Indistinguishable);
        let mut other_entries = BTreeMap::new();
        other_entries.insert([1u32, 2, 4], FULL_PAIRS);
        let other = Distribution {
            entries: other_entries,
            total: FULL_PAIRS,
        };
        assert_eq!(compare(&full, &other).unwrap(), Verdict::Distinct);
        let partial = Distribution { entries, total: 10 };
        assert!(compare(&full, &partial).is_err());
    }
}
