//! Exhaustive enumeration of the minimal vectors of a lattice `Q`.
//!
//! A minimal vector has ambient norm 18 spread over the eight factors as a
//! *norm type* — an 8-tuple of even component norms. Vectors inside `3S`
//! (norm type a permutation of `[0,…,0,18]`) are listed directly: they are
//! `3r` for a root `r` placed in one factor. Every other minimal vector
//! has component norms from one of four patterns, and is found by a staged
//! backtrack over the codewords of `B ⊕ B⊥`: sort the factors so the
//! smallest shells come first, echelonize the permuted code, then extend a
//! partial codeword level by level, pruning on shell-class membership.
//! Accepted codewords are lifted through the finite fibers of
//! `N(a, E) → N(a, U)` back to integer vectors.
//!
//! The same engine doubles as an extremality certificate: a nonzero
//! lattice vector shorter than the minimum would have even ambient norm
//! divisible by 3 — that is, 6 or 12 — so running the backtrack over
//! every even 8-tuple summing to 6 or 12 and finding nothing proves the
//! minimum is 18 (vectors of `3S` are excluded since their norm is at
//! least 18).

use crate::codes::{permute_factor_columns, Code, EchelonForm};
use crate::e8::ShellTable;
use crate::gf3::{trit_of_int, Trit64, Trit8, TritMat};
use crate::{Error, Result};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::path::Path;

pub const TOTAL_BOTH_SIGNS: u64 = 2_611_200;
pub const DIVISIBLE_BOTH_SIGNS: u64 = 1920;

/// Ascending base patterns of the non-divisible norm types.
pub const BASE_PATTERNS: [[u8; 8]; 4] = [
    [0, 0, 0, 0, 0, 6, 6, 6],
    [0, 2, 2, 2, 2, 2, 4, 4],
    [0, 2, 2, 2, 2, 2, 2, 6],
    [2, 2, 2, 2, 2, 2, 2, 4],
];

/// All distinct permutations of the base patterns, sorted: 56 + 168 + 56 +
/// 8 = 288 instances.
pub fn norm_type_instances() -> Vec<[u8; 8]> {
    let mut set = std::collections::BTreeSet::new();
    for pattern in BASE_PATTERNS {
        distinct_permutations(&pattern, &mut set);
    }
    set.into_iter().collect()
}

fn distinct_permutations(pattern: &[u8; 8], out: &mut std::collections::BTreeSet<[u8; 8]>) {
    // Multiset recursion: place each distinct remaining value per slot.
    fn rec(
        remaining: &mut BTreeMap<u8, u8>,
        cur: &mut [u8; 8],
        pos: usize,
        out: &mut std::collections::BTreeSet<[u8; 8]>,
    ) {
        if pos == 8 {
            out.insert(*cur);
            return;
        }
        let values: Vec<u8> = remaining
            .iter()
            .filter(|&(_, &c)| c > 0)
            .map(|(&v, _)| v)
            .collect();
        for v in values {
            *remaining.get_mut(&v).unwrap() -= 1;
            cur[pos] = v;
            rec(remaining, cur, pos + 1, out);
            *remaining.get_mut(&v).unwrap() += 1;
        }
    }
    let mut counts = BTreeMap::new();
    for &v in pattern {
        *counts.entry(v).or_insert(0u8) += 1;
    }
    rec(&mut counts, &mut [0u8; 8], 0, out);
}

/// All even 8-tuples summing to `total` (used with 6 and 12 for the
/// extremality budget).
pub fn even_tuples(total: u8) -> Vec<[u8; 8]> {
    fn rec(pos: usize, left: u8, cur: &mut [u8; 8], out: &mut Vec<[u8; 8]>) {
        if pos == 7 {
            cur[7] = left;
            out.push(*cur);
            return;
        }
        let mut v = 0;
        while v <= left {
            cur[pos] = v;
            rec(pos + 1, left - v, cur, out);
            v += 2;
        }
    }
    assert!(total.is_multiple_of(2));
    let mut out = Vec::new();
    rec(0, total, &mut [0u8; 8], &mut out);
    out
}

// ---------------------------------------------------------------------------
// The backtrack engine.

/// 8×8 GF(3) matrix packed as rows for fast row-vector application.
fn pack_rows8(m: &TritMat) -> [Trit8; 8] {
    debug_assert_eq!((m.rows(), m.cols()), (8, 8));
    std::array::from_fn(|i| Trit8::from_trits(m.row(i)))
}

#[inline]
fn apply_rows8(x: Trit8, rows: &[Trit8; 8]) -> Trit8 {
    let mut acc = Trit8::ZERO;
    for (i, row) in rows.iter().enumerate() {
        acc = acc.add(row.scale(x.trit(i)));
    }
    acc
}

/// Per-free-level lookup tables over all 81 coefficient vectors
/// `ū ∈ GF(3)⁴` (index = base-3 digits of ū).
struct FreeTables {
    own: [Trit8; 81],
    t7: [Trit8; 81],
    t8: [Trit8; 81],
}

fn free_tables(a: &TritMat, t7: &TritMat, t8: &TritMat) -> FreeTables {
    let pack4 =
        |m: &TritMat| -> [Trit8; 4] { std::array::from_fn(|i| Trit8::from_trits(m.row(i))) };
    let (ra, r7, r8) = (pack4(a), pack4(t7), pack4(t8));
    let table = |rows: &[Trit8; 4]| -> [Trit8; 81] {
        std::array::from_fn(|u| {
            let mut acc = Trit8::ZERO;
            let mut rest = u;
            for row in rows {
                acc = acc.add(row.scale((rest % 3) as u8));
                rest /= 3;
            }
            acc
        })
    };
    FreeTables {
        own: table(&ra),
        t7: table(&r7),
        t8: table(&r8),
    }
}

fn classes_of(norm: u8, shells: &ShellTable) -> Vec<Trit8> {
    if norm == 0 {
        vec![Trit8::ZERO]
    } else {
        shells
            .shell(norm as i64)
            .classes
            .iter()
            .map(|&k| Trit8::from_key(k))
            .collect()
    }
}

/// All codewords of the echelonized code whose component `i` is the
/// reduction of some ambient vector of norm `norms[i]` (`norms` ascending).
/// `check_level[t]` disables the membership prune at free level `t` (the
/// final acceptance always re-checks every component, so disabling a prune
/// must not change the result — a tested property).
fn backtrack_with_pruning(
    form: &EchelonForm,
    norms: &[u8; 8],
    shells: &ShellTable,
    check_level: [bool; 4],
) -> Vec<[Trit8; 8]> {
    debug_assert!(norms.windows(2).all(|w| w[0] <= w[1]));
    let c1: [[Trit8; 8]; 6] = std::array::from_fn(|k| pack_rows8(&form.c1[k]));
    let c2: [[Trit8; 8]; 6] = std::array::from_fn(|k| pack_rows8(&form.c2[k]));
    let tables: [FreeTables; 4] =
        std::array::from_fn(|t| free_tables(&form.free[t].a, &form.free[t].t7, &form.free[t].t8));

    let accept =
        |xs: &[Trit8; 8]| -> bool { (0..8).all(|i| shells.in_class(norms[i] as i64, xs[i].key())) };

    struct Dfs<'a> {
        tables: &'a [FreeTables; 4],
        base: [Trit8; 6],
        norms: &'a [u8; 8],
        shells: &'a ShellTable,
        check_level: [bool; 4],
        out: Vec<[Trit8; 8]>,
    }
    impl Dfs<'_> {
        fn descend(&mut self, lvl: usize, acc7: Trit8, acc8: Trit8, xs: &mut [Trit8; 8]) {
            if lvl == 4 {
                let x7 = self.base[4].add(acc7);
                if !self.shells.in_class(self.norms[6] as i64, x7.key()) {
                    return;
                }
                let x8 = self.base[5].add(acc8);
                if !self.shells.in_class(self.norms[7] as i64, x8.key()) {
                    return;
                }
                xs[6] = x7;
                xs[7] = x8;
                self.out.push(*xs);
                return;
            }
            let t = &self.tables[lvl];
            for u in 0..81 {
                let xi = self.base[lvl].add(t.own[u]);
                if self.check_level[lvl]
                    && !self.shells.in_class(self.norms[lvl + 2] as i64, xi.key())
                {
                    continue;
                }
                xs[lvl + 2] = xi;
                self.descend(lvl + 1, acc7.add(t.t7[u]), acc8.add(t.t8[u]), xs);
            }
        }
    }

    let mut results = Vec::new();
    for x1 in classes_of(norms[0], shells) {
        let b1: [Trit8; 6] = std::array::from_fn(|k| apply_rows8(x1, &c1[k]));
        for x2 in classes_of(norms[1], shells) {
            let base: [Trit8; 6] = std::array::from_fn(|k| b1[k].add(apply_rows8(x2, &c2[k])));
            let mut dfs = Dfs {
                tables: &tables,
                base,
                norms,
                shells,
                check_level,
                out: Vec::new(),
            };
            let mut xs = [Trit8::ZERO; 8];
            xs[0] = x1;
            xs[1] = x2;
            dfs.descend(0, Trit8::ZERO, Trit8::ZERO, &mut xs);
            results.extend(dfs.out.into_iter().filter(|xs| accept(xs)));
        }
    }
    results
}

pub fn backtrack_codewords(
    form: &EchelonForm,
    norms: &[u8; 8],
    shells: &ShellTable,
) -> Vec<[Trit8; 8]> {
    backtrack_with_pruning(form, norms, shells, [true; 4])
}

/// Keep one representative per ± pair: first nonzero coordinate positive.
pub fn is_canonical_sign(v: &[i8]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// Component norms of an ambient vector.
pub fn norm_type_of(v: &[i8; 64]) -> [u8; 8] {
    let g = crate::e8::gram();
    std::array::from_fn(|f| {
        let part: crate::e8::Vec8 = std::array::from_fn(|i| v[8 * f + i] as i64);
        let n = crate::e8::norm(&g, &part);
        debug_assert!((0..=18).contains(&n));
        n as u8
    })
}

/// Lift the codewords of one norm-type instance to canonical-sign integer
/// vectors in original factor order. `tau` is the sorting permutation
/// (level `i` of the permuted code is original factor `tau[i]`).
fn lift_codewords(
    codewords: &[[Trit8; 8]],
    sorted_norms: &[u8; 8],
    tau: &[usize; 8],
    shells: &ShellTable,
) -> Vec<[i8; 64]> {
    let mut out = Vec::new();
    let zero_fiber: Vec<[i8; 8]> = vec![[0i8; 8]];
    for xs in codewords {
        // Per-level fiber lists.
        let fibers: [Vec<[i8; 8]>; 8] = std::array::from_fn(|i| {
            if sorted_norms[i] == 0 {
                zero_fiber.clone()
            } else {
                let shell = shells.shell(sorted_norms[i] as i64);
                shell
                    .fiber(xs[i].key())
                    .iter()
                    .map(|&idx| shell.vectors[idx as usize])
                    .collect()
            }
        });
        debug_assert!(fibers.iter().all(|f| !f.is_empty()));
        let mut pick = [0usize; 8];
        loop {
            let mut v = [0i8; 64];
            for i in 0..8 {
                v[8 * tau[i]..8 * tau[i] + 8].copy_from_slice(&fibers[i][pick[i]]);
            }
            if is_canonical_sign(&v) {
                out.push(v);
            }
            // Odometer.
            let mut i = 0;
            loop {
                if i == 8 {
                    break;
                }
                pick[i] += 1;
                if pick[i] < fibers[i].len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if i == 8 {
                break;
            }
        }
    }
    out
}

/// Enumerate the canonical-sign vectors of one norm-type instance.
fn enumerate_instance(
    stack: &TritMat,
    norm_type: &[u8; 8],
    shells: &ShellTable,
) -> Result<Vec<[i8; 64]>> {
    let mut tau: [usize; 8] = [0, 1, 2, 3, 4, 5, 6, 7];
    tau.sort_by_key(|&f| norm_type[f]);
    let sorted: [u8; 8] = std::array::from_fn(|i| norm_type[tau[i]]);
    let permuted = permute_factor_columns(stack, &tau);
    let form = EchelonForm::new(&permuted)?;
    let codewords = backtrack_codewords(&form, &sorted, shells);
    Ok(lift_codewords(&codewords, &sorted, &tau, shells))
}

/// The divisible-type vectors: `3r` in one factor, canonical signs only
/// (960 of 1920).
pub fn divisible_vectors(shells: &ShellTable) -> Vec<([i8; 64], usize)> {
    let roots = shells.shell(2);
    let mut out = Vec::new();
    for f in 0..8 {
        for r in &roots.vectors {
            let mut v = [0i8; 64];
            for j in 0..8 {
                v[8 * f + j] = 3 * r[j];
            }
            if is_canonical_sign(&v) {
                out.push((v, f));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// The full set.

pub struct MinVectorSet {
    /// Sorted canonical-sign representatives, one per ± pair.
    pub vectors: Vec<[i8; 64]>,
    /// Parallel index into `type_table`.
    pub type_ids: Vec<u16>,
    /// Norm type per id: the eight divisible types first, then the 288
    /// instance types.
    pub type_table: Vec<[u8; 8]>,
    /// Both-signs count per norm type present.
    pub counts: BTreeMap<[u8; 8], u64>,
}

pub fn type_table() -> Vec<[u8; 8]> {
    let mut table = Vec::with_capacity(296);
    for f in 0..8 {
        let mut t = [0u8; 8];
        t[f] = 18;
        table.push(t);
    }
    table.extend(norm_type_instances());
    table
}

/// Mod-3 membership tester over the packed 64-trit representation,
/// reducing against the echelonized code rows.
pub struct Mod3Membership {
    rows: Vec<Trit64>,
    pivots: Vec<usize>,
}

impl Mod3Membership {
    pub fn new(stack: &TritMat) -> Mod3Membership {
        let (r, rank, pivots) = stack.rref();
        let rows = (0..rank).map(|i| Trit64::from_trits(r.row(i))).collect();
        Mod3Membership { rows, pivots }
    }

    pub fn contains(&self, v: &[i8; 64]) -> bool {
        let trits: Vec<u8> = v.iter().map(|&x| trit_of_int(x as i64)).collect();
        let mut t = Trit64::from_trits(&trits);
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = t.trit(p);
            if c != 0 {
                t = t.sub(row.scale(c));
            }
        }
        t.is_zero()
    }
}

/// Enumerate, lift, merge, and cross-check all minimal vectors.
///
/// Instances run in parallel but are merged in a fixed order and globally
/// sorted, so the result is identical for any thread count. Every stored
/// vector is re-checked from scratch: component norms must reproduce the
/// annotated type (hence ambient norm 18), and the mod-3 reduction must
/// lie in the code.
pub fn enumerate_min(code: &Code, shells: &ShellTable) -> Result<MinVectorSet> {
    let stack = code.stacked_u_generators();
    let instances = norm_type_instances();
    let table = type_table();

    let per_instance: Vec<Result<Vec<[i8; 64]>>> = instances
        .par_iter()
        .map(|nt| enumerate_instance(&stack, nt, shells))
        .collect();

    let mut all: Vec<([i8; 64], u16)> = Vec::new();
    for (v, f) in divisible_vectors(shells) {
        all.push((v, f as u16));
    }
    for (idx, res) in per_instance.into_iter().enumerate() {
        let id = (8 + idx) as u16;
        for v in res? {
            all.push((v, id));
        }
    }

    all.par_sort_unstable();
    // Defensive: a vector admitting two norm-type readings would appear
    // twice; correctness must not rely on that never happening.
    all.dedup_by(|a, b| a.0 == b.0);

    let membership = Mod3Membership::new(&stack);
    all.par_iter().try_for_each(|(v, id)| -> Result<()> {
        if norm_type_of(v) != table[*id as usize] {
            return Err(Error::verification(format!(
                "vector annotated with the wrong norm type: {v:?}"
            )));
        }
        if !membership.contains(v) {
            return Err(Error::verification(format!(
                "enumerated vector does not reduce into the code: {v:?}"
            )));
        }
        Ok(())
    })?;

    let mut counts: BTreeMap<[u8; 8], u64> = BTreeMap::new();
    for &(_, id) in &all {
        *counts.entry(table[id as usize]).or_insert(0) += 2;
    }
    let (vectors, type_ids): (Vec<_>, Vec<_>) = all.into_iter().unzip();
    Ok(MinVectorSet {
        vectors,
        type_ids,
        type_table: table,
        counts,
    })
}

impl MinVectorSet {
    pub fn total_both_signs(&self) -> u64 {
        2 * self.vectors.len() as u64
    }

    pub fn divisible_both_signs(&self) -> u64 {
        self.type_ids.iter().filter(|&&id| id < 8).count() as u64 * 2
    }

    /// Binary search over the sorted canonical representatives.
    pub fn index_of(&self, v: &[i8; 64]) -> Option<usize> {
        let key = canonicalize_sign(v);
        self.vectors.binary_search(&key).ok()
    }

    pub fn contains(&self, v: &[i8; 64]) -> bool {
        self.index_of(v).is_some()
    }

    /// Rebuild annotations for vectors loaded from disk; validates sort
    /// order, canonical signs, and recognizable norm types.
    pub fn from_sorted_vectors(vectors: Vec<[i8; 64]>) -> Result<MinVectorSet> {
        let table = type_table();
        let lookup: std::collections::HashMap<[u8; 8], u16> = table
            .iter()
            .enumerate()
            .map(|(i, t)| (*t, i as u16))
            .collect();
        if !vectors.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::invalid("stored vectors are not sorted and distinct"));
        }
        let type_ids: Vec<u16> = vectors
            .par_iter()
            .map(|v| -> Result<u16> {
                if !is_canonical_sign(v) {
                    return Err(Error::invalid(format!("non-canonical stored vector {v:?}")));
                }
                lookup
                    .get(&norm_type_of(v))
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("vector of unexpected norm type {v:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut counts: BTreeMap<[u8; 8], u64> = BTreeMap::new();
        for &id in &type_ids {
            *counts.entry(table[id as usize]).or_insert(0) += 2;
        }
        Ok(MinVectorSet {
            vectors,
            type_ids,
            type_table: table,
            counts,
        })
    }
}

pub fn canonicalize_sign(v: &[i8; 64]) -> [i8; 64] {
    if is_canonical_sign(v) {
        *v
    } else {
        std::array::from_fn(|i| -v[i])
    }
}

// ---------------------------------------------------------------------------
// Extremality certificate.

#[derive(Debug, serde::Serialize)]
pub struct ExtremalityCertificate {
    pub total_both_signs: u64,
    pub divisible_both_signs: u64,
    pub budget_tuples_checked: usize,
}

/// Certify the minimum: the budget search over every even norm tuple
/// summing to 6 or 12 must be empty (a shorter nonzero vector would have
/// even ambient norm divisible by 3, and cannot lie in `3S` whose nonzero
/// norms start at 18), and the enumerated set must have the counts forced
/// by the theory of even unimodular lattices of this rank.
pub fn certify_extremal(
    code: &Code,
    shells: &ShellTable,
    set: &MinVectorSet,
) -> Result<ExtremalityCertificate> {
    let stack = code.stacked_u_generators();
    let mut tuples = even_tuples(6);
    tuples.extend(even_tuples(12));
    let found: Vec<(usize, usize)> = tuples
        .par_iter()
        .enumerate()
        .filter_map(|(i, t)| match enumerate_instance(&stack, t, shells) {
            Ok(v) if v.is_empty() => None,
            Ok(v) => Some((i, v.len())),
            Err(_) => Some((i, usize::MAX)),
        })
        .collect();
    if let Some(&(i, n)) = found.first() {
        return Err(Error::verification(format!(
            "budget search found {n} short vectors for norm tuple {:?}",
            tuples[i]
        )));
    }
    if set.total_both_signs() != TOTAL_BOTH_SIGNS {
        return Err(Error::verification(format!(
            "minimal vector count is {}, expected {TOTAL_BOTH_SIGNS}",
            set.total_both_signs()
        )));
    }
    if set.divisible_both_signs() != DIVISIBLE_BOTH_SIGNS {
        return Err(Error::verification(format!(
            "divisible-type count is {}, expected {DIVISIBLE_BOTH_SIGNS}",
            set.divisible_both_signs()
        )));
    }
    Ok(ExtremalityCertificate {
        total_both_signs: set.total_both_signs(),
        divisible_both_signs: set.divisible_both_signs(),
        budget_tuples_checked: tuples.len(),
    })
}

// ---------------------------------------------------------------------------
// Binary storage.

pub const MIN_VECS_MAGIC: &[u8; 8] = b"Q64MINV1";

/// Header: magic, little-endian count, 32-byte lattice digest; then
/// `count × 64` signed bytes.
pub fn write_min_vecs(path: &Path, set: &MinVectorSet, lattice_hash: &str) -> Result<()> {
    let digest = parse_hash(lattice_hash)?;
    let mut bytes = Vec::with_capacity(48 + set.vectors.len() * 64);
    bytes.extend_from_slice(MIN_VECS_MAGIC);
    bytes.extend_from_slice(&(set.vectors.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&digest);
    for v in &set.vectors {
        bytes.extend(v.iter().map(|&x| x as u8));
    }
    crate::io::write_bytes(path, &bytes)
}

pub fn read_min_vecs(path: &Path) -> Result<(Vec<[i8; 64]>, String)> {
    let bytes = crate::io::read_bytes(path)?;
    let fail = |reason: &str| Error::Format {
        path: path.into(),
        reason: reason.to_string(),
    };
    if bytes.len() < 48 || &bytes[..8] != MIN_VECS_MAGIC {
        return Err(fail("missing header magic"));
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    if bytes.len() != 48 + count * 64 {
        return Err(fail("size does not match the declared vector count"));
    }
    let hash: String = bytes[16..48].iter().map(|b| format!("{b:02x}")).collect();
    let vectors: Vec<[i8; 64]> = bytes[48..]
        .chunks_exact(64)
        .map(|c| std::array::from_fn(|i| c[i] as i8))
        .collect();
    Ok((vectors, hash))
}

fn parse_hash(hex: &str) -> Result<[u8; 32]> {
    if hex.len() != 64 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(Error::invalid(format!(
            "expected a 64-digit hex digest, got {hex:?}"
        )));
    }
    let mut out = [0u8; 32];
    for (i, chunk) in hex.as_bytes().chunks_exact(2).enumerate() {
        out[i] = u8::from_str_radix(std::str::from_utf8(chunk).unwrap(), 16).unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::random_code;
    use crate::isotropic::PairType;
    use std::sync::OnceLock;

    fn shells() -> &'static ShellTable {
        static TABLE: OnceLock<ShellTable> = OnceLock::new();
        TABLE.get_or_init(|| ShellTable::new(12))
    }

    fn sample_code() -> Code {
        random_code([PairType::I; 8], 7)
    }

    #[test]
    fn instance_and_tuple_counts() {
        let inst = norm_type_instances();
        assert_eq!(inst.len(), 288);
        let count_of = |p: [u8; 8]| {
            inst.iter()
                .filter(|nt| {
                    let mut s = **nt;
                    s.sort_unstable();
                    s == p
                })
                .count()
        };
        assert_eq!(count_of(BASE_PATTERNS[0]), 56);
        assert_eq!(count_of(BASE_PATTERNS[1]), 168);
        assert_eq!(count_of(BASE_PATTERNS[2]), 56);
        assert_eq!(count_of(BASE_PATTERNS[3]), 8);
        assert_eq!(even_tuples(6).len(), 120);
        assert_eq!(even_tuples(12).len(), 1716);
    }

    #[test]
    fn divisible_vectors_structure() {
        let divs = divisible_vectors(shells());
        assert_eq!(divs.len(), 960);
        for (v, f) in &divs {
            assert!(is_canonical_sign(v));
            let nt = norm_type_of(v);
            assert_eq!(nt[*f], 18);
            assert_eq!(nt.iter().map(|&x| x as u32).sum::<u32>(), 18);
            assert!(v.iter().all(|&x| x % 3 == 0));
        }
    }

    #[test]
    fn codewords_closed_under_negation() {
        let code = sample_code();
        let stack = code.stacked_u_generators();
        for nt in [BASE_PATTERNS[0], BASE_PATTERNS[2]] {
            let form = EchelonForm::new(&stack).unwrap();
            let words = backtrack_codewords(&form, &nt, shells());
            assert_eq!(words.len() % 2, 0);
            let set: std::collections::HashSet<[u16; 8]> =
                words.iter().map(|xs| xs.map(|x| x.key())).collect();
            for xs in &words {
                let neg = xs.map(|x| x.neg().key());
                assert!(set.contains(&neg));
            }
        }
    }

    #[test]
    fn pruning_can_be_disabled_per_level() {
        let code = sample_code();
        let stack = code.stacked_u_generators();
        let form = EchelonForm::new(&stack).unwrap();
        let nt = BASE_PATTERNS[1];
        let full = backtrack_with_pruning(&form, &nt, shells(), [true; 4]);
        for lvl in 0..4 {
            let mut flags = [true; 4];
            flags[lvl] = false;
            let relaxed = backtrack_with_pruning(&form, &nt, shells(), flags);
            assert_eq!(relaxed, full, "disabled prune at level {lvl}");
        }
    }

    #[test]
    fn full_enumeration_has_expected_counts() {
        let code = sample_code();
        let set = enumerate_min(&code, shells()).expect("enumeration with cross-checks");
        assert_eq!(set.total_both_signs(), TOTAL_BOTH_SIGNS);
        assert_eq!(set.divisible_both_signs(), DIVISIBLE_BOTH_SIGNS);
        assert_eq!(set.counts.values().sum::<u64>(), TOTAL_BOTH_SIGNS);
        // Vectors are sorted, distinct, canonical.
        assert!(set.vectors.windows(2).all(|w| w[0] < w[1]));
        // Type subtotal sanity: each instance subtotal divisible by the
        // sign pairing; the pattern with three 6-norm factors lifts in
        // multiples of 27.
        for (nt, &count) in &set.counts {
            let mut s = *nt;
            s.sort_unstable();
            if s == BASE_PATTERNS[0] {
                assert_eq!(count % (2 * 27), 0, "type {nt:?}");
            }
        }
        // Membership index works.
        let v = set.vectors[12345];
        assert_eq!(set.index_of(&v), Some(12345));
        let neg: [i8; 64] = std::array::from_fn(|i| -v[i]);
        assert_eq!(set.index_of(&neg), Some(12345));

        // Extremality certificate on the same code.
        let cert = certify_extremal(&code, shells(), &set).expect("budget search empty");
        assert_eq!(cert.budget_tuples_checked, 1836);

        // Round trip through the binary format.
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("min.vecs");
        let hash = "ab".repeat(32);
        write_min_vecs(&path, &set, &hash).unwrap();
        let (vectors, stored_hash) = read_min_vecs(&path).unwrap();
        assert_eq!(stored_hash, hash);
        assert_eq!(vectors, set.vectors);
        let rebuilt = MinVectorSet::from_sorted_vectors(vectors).unwrap();
        assert_eq!(rebuilt.type_ids, set.type_ids);
        assert_eq!(rebuilt.counts, set.counts);
    }

    #[test]
    fn section_restriction_matches_direct_enumeration() {
        use rand::Rng;
        let code = sample_code();
        let q = crate::lattice::QLattice::build(&code).unwrap();
        let set = enumerate_min(&code, shells()).unwrap();
        let mut rng = crate::io::rng_for("test-section", 3);

        // A random rank-8 section: eight basis rows, half perturbed by a
        // second row, retried until the section Gram is nonsingular.
        let (rows, gram8) = loop {
            let mut rows: Vec<Vec<i64>> = (0..8)
                .map(|_| q.basis[rng.gen_range(0..crate::lattice::DIM)].clone())
                .collect();
            for k in 0..4 {
                let other = q.basis[rng.gen_range(0..crate::lattice::DIM)].clone();
                for (a, b) in rows[k].iter_mut().zip(&other) {
                    *a += b;
                }
            }
            let gram8: crate::e8::Mat8 = std::array::from_fn(|i| {
                std::array::from_fn(|j| crate::lattice::inner_s(&rows[i], &rows[j]))
            });
            let as_vec: Vec<Vec<i64>> = gram8.iter().map(|r| r.to_vec()).collect();
            if crate::lattice::det_exact(&as_vec) != num_bigint::BigInt::from(0) {
                break (rows, gram8);
            }
        };

        // Direct side: every nonzero section vector of ambient norm ≤ 18.
        let mut direct: Vec<[i8; 64]> = Vec::new();
        for (c, n) in crate::e8::enumerate_up_to(&gram8, 18) {
            assert_eq!(n, 18, "section vector shorter than the minimum");
            let mut v = [0i64; 64];
            for (k, row) in rows.iter().enumerate() {
                for (a, b) in v.iter_mut().zip(row) {
                    *a += c[k] * b;
                }
            }
            let v: [i8; 64] = std::array::from_fn(|i| i8::try_from(v[i]).unwrap());
            direct.push(canonicalize_sign(&v));
        }
        direct.sort_unstable();
        direct.dedup();

        // Stratified side: minimal vectors that solve through the
        // triangularized section rows over the integers.
        let h = crate::lattice::hnf(rows.clone(), 64);
        assert_eq!(h.len(), 8);
        let pivots: Vec<usize> = h
            .iter()
            .map(|row| row.iter().position(|&x| x != 0).unwrap())
            .collect();
        let in_section = |v: &[i8; 64]| -> bool {
            let mut rem: Vec<i64> = v.iter().map(|&x| x as i64).collect();
            for (row, &p) in h.iter().zip(&pivots) {
                if rem[p] % row[p] != 0 {
                    return false;
                }
                let q = rem[p] / row[p];
                for (a, b) in rem.iter_mut().zip(row) {
                    *a -= q * b;
                }
            }
            rem.iter().all(|&x| x == 0)
        };
        let restricted: Vec<[i8; 64]> = set
            .vectors
            .par_iter()
            .filter(|v| in_section(v))
            .copied()
            .collect();
        assert_eq!(restricted, direct);
        assert!(
            !direct.is_empty(),
            "section unexpectedly avoids all minimal vectors"
        );
    }

    #[test]
    fn budget_search_catches_degenerate_codes() {
        use crate::codes::{Code, Provenance};
        use crate::isotropic::Delta;
        // A code violating the pair condition admits short vectors; the
        // budget search must find one rather than certify. The echelon
        // form already refuses such codes, which is an acceptable failure
        // mode — either way certification fails.
        let mat = TritMat::from_fn(8, 32, |r, c| u8::from(r == c));
        let code = Code::from_generators(
            Delta::uniform(PairType::I),
            &mat,
            Provenance::Random { seed: 0, draws: 1 },
        )
        .unwrap();
        let set = MinVectorSet {
            vectors: Vec::new(),
            type_ids: Vec::new(),
            type_table: type_table(),
            counts: BTreeMap::new(),
        };
        assert!(certify_extremal(&code, shells(), &set).is_err());
    }

    #[test]
    fn min_vecs_rejects_corrupt_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.vecs");
        crate::io::write_bytes(&path, b"NOTMAGIC").unwrap();
        assert!(read_min_vecs(&path).is_err());
        let mut ok = Vec::new();
        ok.extend_from_slice(MIN_VECS_MAGIC);
        ok.extend_from_slice(&2u64.to_le_bytes());
        ok.extend_from_slice(&[0u8; 32]);
        ok.extend_from_slice(&[1u8; 64]); // only one vector, two declared
        crate::io::write_bytes(&path, &ok).unwrap();
        assert!(read_min_vecs(&path).is_err());
    }
}
