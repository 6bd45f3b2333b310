//! Automorphism-group certification via rigidifying bases.
//!
//! A Γ-rigidifying basis is an ordered list of 64 minimal vectors such
//! that (a) they span the rational span of the lattice, (b) Γ acts
//! transitively on the pattern class of the first vector, and (c) for
//! each later vector, its pattern class contains exactly one vector
//! matching the inner products against all earlier basis vectors. Any
//! isometry fixes pattern classes and inner products, so conditions
//! (a)–(c) force it to agree with an element of Γ on a basis — hence on
//! the whole lattice: exhibiting such a basis certifies `O(Q) = Γ`.
//!
//! Two groups are certified here: `{±1}` for generic lattices, and
//! `{±1} × ⟨γ̃⟩ ≅ {±1} × ℤ/8` for lattices built from twisted-rotation
//! invariant codes, where γ̃ cycles the eight factors and twists each by
//! an order-8 isometry of one factor.
//!
//! A failed or exhausted search is *inconclusive*: it never demonstrates
//! that the group is larger.

use crate::codes::Code;
use crate::e8::{mat8_apply, Mat8};
use crate::invariants::{inner_s_i8, Pattern, PatternKernel};
use crate::lattice::{det_exact, QLattice, DIM};
use crate::minvec::canonicalize_sign;
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::path::Path;

pub const RESTART_BUDGET: usize = 200;
const CANDIDATE_POOL: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupSpec {
    /// `{±1}`, order 2.
    Pm1,
    /// `{±1} × ℤ/8`, order 16, generated by `-1` and the twisted rotation.
    Pm1xC8,
}

impl GroupSpec {
    pub fn order(self) -> u64 {
        match self {
            GroupSpec::Pm1 => 2,
            GroupSpec::Pm1xC8 => 16,
        }
    }
}

// ---------------------------------------------------------------------------
// The twisted-rotation isometry.

/// Apply the ambient isometry: factor `i` of the output is factor
/// `i+1 mod 8` of the input twisted by `γ` (a row vector acts as `x·γ`).
pub fn gamma_s_apply_i64(gamma: &Mat8, v: &[i64]) -> Vec<i64> {
    let mut out = vec![0i64; DIM];
    for i in 0..8 {
        let src = (i + 1) % 8;
        let block: [i64; 8] = std::array::from_fn(|c| v[8 * src + c]);
        out[8 * i..8 * i + 8].copy_from_slice(&mat8_apply(&block, gamma));
    }
    out
}

pub fn gamma_s_apply_i8(gamma: &Mat8, v: &[i8; 64]) -> [i8; 64] {
    let wide: Vec<i64> = v.iter().map(|&x| x as i64).collect();
    let out = gamma_s_apply_i64(gamma, &wide);
    std::array::from_fn(|i| i8::try_from(out[i]).expect("isometry image fits in i8"))
}

/// The verified action of the twisted rotation on a lattice: `matrix_q`
/// expresses it in the lattice basis (rows transform as
/// `basis[i] ↦ Σ matrix_q[i][j]·basis[j]`).
#[derive(Clone, Debug)]
pub struct GammaAction {
    pub gamma: Mat8,
    pub matrix_q: Vec<Vec<i64>>,
}

/// Express the twisted rotation in the basis of `q` and verify it is an
/// order-8 isometry of the lattice (order exactly 8, Gram preserved).
/// Fails when the underlying code is not invariant, in which case the
/// rotation does not map the lattice into itself.
pub fn verify_gamma_action(q: &QLattice, gamma: &Mat8) -> Result<GammaAction> {
    let mut rows = Vec::with_capacity(DIM);
    for b in &q.basis {
        let image = gamma_s_apply_i64(gamma, b);
        let coords = q.solve_in_basis(&image).ok_or_else(|| {
            Error::verification(
                "twisted rotation does not map the lattice into itself; \
                 the code is not rotation-invariant",
            )
        })?;
        rows.push(coords);
    }
    let t = rows;
    // Gram preservation: T G Tᵀ = G.
    let tg = mat_mul(&t, &q.gram);
    let tgt = mat_mul(&tg, &transpose(&t));
    if tgt != q.gram {
        return Err(Error::verification(
            "twisted rotation does not preserve the Gram matrix",
        ));
    }
    let t2 = mat_mul(&t, &t);
    let t4 = mat_mul(&t2, &t2);
    let t8 = mat_mul(&t4, &t4);
    if !is_identity(&t8) || is_identity(&t4) {
        return Err(Error::verification(
            "twisted rotation must have order exactly 8",
        ));
    }
    // `-1` must lie outside the cyclic part, or together they generate a
    // group of order 8 rather than 16. Only the fourth power could be
    // `-1`: `Tᵏ = -1` forces `8 | 2k`.
    if is_neg_identity(&t4) {
        return Err(Error::verification(
            "twisted rotation powers into -1; the product with {±1} would not be direct",
        ));
    }
    Ok(GammaAction {
        gamma: *gamma,
        matrix_q: t,
    })
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![0i64; m]; n];
    for i in 0..n {
        for (k, &aik) in a[i].iter().enumerate() {
            if aik != 0 {
                for j in 0..m {
                    out[i][j] += aik * b[k][j];
                }
            }
        }
    }
    out
}

fn transpose(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let m = a[0].len();
    let mut out = vec![vec![0i64; n]; m];
    for i in 0..n {
        for j in 0..m {
            out[j][i] = a[i][j];
        }
    }
    out
}

fn is_identity(a: &[Vec<i64>]) -> bool {
    a.iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, &x)| x == i64::from(i == j)))
}

fn is_neg_identity(a: &[Vec<i64>]) -> bool {
    a.iter().enumerate().all(|(i, row)| {
        row.iter()
            .enumerate()
            .all(|(j, &x)| x == -i64::from(i == j))
    })
}

// ---------------------------------------------------------------------------
// Pattern classes and the uniqueness scan.

/// Vector indices grouped by pattern, over a sorted canonical universe.
pub struct ClassIndex {
    classes: HashMap<[u32; 3], Vec<u32>>,
}

impl ClassIndex {
    pub fn new(patterns: &[Pattern]) -> ClassIndex {
        let mut classes: HashMap<[u32; 3], Vec<u32>> = HashMap::new();
        for (i, p) in patterns.iter().enumerate() {
            classes.entry(p.a).or_default().push(i as u32);
        }
        ClassIndex { classes }
    }

    pub fn class(&self, p: Pattern) -> &[u32] {
        self.classes.get(&p.a).map_or(&[], |v| v.as_slice())
    }

    pub fn class_size(&self, p: Pattern) -> usize {
        self.class(p).len()
    }
}

fn inner_q(a: &[i8; 64], b: &[i8; 64]) -> i64 {
    let s = inner_s_i8(a, b);
    debug_assert_eq!(s % 3, 0);
    s / 3
}

/// The uniqueness scan of condition (c): all signed vectors in the
/// pattern class of `candidate` whose inner products against `chosen`
/// match those of `candidate`, with the filters applied in the given
/// order. Early-exits once two survivors are found when `cap2` is set.
fn matching_in_class(
    universe: &[[i8; 64]],
    class: &[u32],
    candidate: &[i8; 64],
    chosen: &[[i8; 64]],
    filter_order: &[usize],
    cap2: bool,
) -> Vec<[i8; 64]> {
    let required: Vec<i64> = filter_order
        .iter()
        .map(|&j| inner_q(candidate, &chosen[j]))
        .collect();
    let mut survivors = Vec::new();
    for &wi in class {
        let w = universe[wi as usize];
        'sign: for cand in [w, std::array::from_fn(|i| -w[i])] {
            for (&j, &req) in filter_order.iter().zip(&required) {
                if inner_q(&cand, &chosen[j]) != req {
                    continue 'sign;
                }
            }
            survivors.push(cand);
            if cap2 && survivors.len() >= 2 {
                return survivors;
            }
        }
    }
    survivors
}

// ---------------------------------------------------------------------------
// Incremental rational-independence tracking (mod a large prime; full
// rank mod p implies full rank over ℚ, and the final certificate re-checks
// with an exact integer determinant).

const P: u64 = (1 << 61) - 1;

struct RankTracker {
    rows: Vec<[u64; 64]>,
    pivots: Vec<usize>,
}

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % P as u128) as u64
}

fn powmod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b);
        }
        b = mulmod(b, b);
        e >>= 1;
    }
    acc
}

impl RankTracker {
    fn new() -> RankTracker {
        RankTracker {
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` against the stored pivot rows; store and report true if
    /// it remains nonzero.
    fn add_row(&mut self, v: &[i8; 64]) -> bool {
        let mut row: [u64; 64] = std::array::from_fn(|i| {
            if v[i] >= 0 {
                v[i] as u64
            } else {
                P - (-v[i]) as u64
            }
        });
        for (r, &p) in self.rows.iter().zip(&self.pivots) {
            let c = row[p];
            if c != 0 {
                for k in 0..64 {
                    row[k] = (row[k] + P - mulmod(c, r[k])) % P;
                }
            }
        }
        let Some(p) = row.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = powmod(row[p], P - 2);
        for x in &mut row {
            *x = mulmod(*x, inv);
        }
        self.rows.push(row);
        self.pivots.push(p);
        true
    }
}

// ---------------------------------------------------------------------------
// The search.

#[derive(Clone, Debug)]
pub struct RigidifyingBasis {
    /// The 64 signed minimal vectors, in certification order.
    pub vectors: Vec<[i8; 64]>,
}

/// Condition (b) for the first vector: `{±1}` needs the pattern class to
/// be the single ± pair of the vector itself; the order-16 group needs
/// its twisted-rotation orbit to cover the whole class.
fn first_vector_ok(
    universe: &[[i8; 64]],
    classes: &ClassIndex,
    patterns: &[Pattern],
    idx: usize,
    spec: GroupSpec,
    gamma: Option<&GammaAction>,
) -> bool {
    let class = classes.class(patterns[idx]);
    match spec {
        GroupSpec::Pm1 => class.len() == 1,
        GroupSpec::Pm1xC8 => {
            let Some(action) = gamma else { return false };
            let mut orbit: Vec<[i8; 64]> = Vec::with_capacity(8);
            let mut cur = universe[idx];
            for _ in 0..8 {
                orbit.push(canonicalize_sign(&cur));
                cur = gamma_s_apply_i8(&action.gamma, &cur);
            }
            orbit.sort_unstable();
            orbit.dedup();
            class.len() == orbit.len()
                && class
                    .iter()
                    .all(|&wi| orbit.binary_search(&universe[wi as usize]).is_ok())
        }
    }
}

/// Greedy seeded search for a Γ-rigidifying basis: candidates are drawn
/// from the smallest pattern classes, each restart shuffles the candidate
/// pool, and a vector is accepted when its uniqueness scan returns only
/// itself and it extends the rational span. Returns `None` when the
/// restart budget is exhausted — which says nothing about the group being
/// larger.
pub fn find_rigidifying_basis(
    universe: &[[i8; 64]],
    patterns: &[Pattern],
    spec: GroupSpec,
    gamma: Option<&GammaAction>,
    seed: u64,
    restarts: usize,
) -> Result<Option<RigidifyingBasis>> {
    if universe.len() != patterns.len() {
        return Err(Error::invalid("one pattern per universe vector required"));
    }
    if spec == GroupSpec::Pm1xC8 && gamma.is_none() {
        return Err(Error::invalid(
            "certifying the order-16 group requires the rotation action",
        ));
    }
    let classes = ClassIndex::new(patterns);
    // Draw the pool from the smallest pattern classes, breaking ties with a
    // seeded shuffle: the universe is lexicographically sorted, so breaking
    // ties by index would concentrate the pool on vectors sharing leading
    // zero coordinates, which span a proper subspace.
    let mut pool: Vec<u32> = (0..universe.len() as u32).collect();
    pool.shuffle(&mut crate::io::rng_for("aut-pool", seed));
    pool.sort_by_key(|&i| classes.class_size(patterns[i as usize]));
    pool.truncate(CANDIDATE_POOL);
    let firsts: Vec<u32> = pool
        .iter()
        .copied()
        .filter(|&i| first_vector_ok(universe, &classes, patterns, i as usize, spec, gamma))
        .collect();
    if firsts.is_empty() {
        return Ok(None);
    }

    for restart in 0..restarts {
        let mut rng = crate::io::rng_for("aut-search", seed ^ (restart as u64) << 32);
        let first = firsts[rng.gen_range(0..firsts.len())];
        let mut shuffled = pool.clone();
        shuffled.shuffle(&mut rng);

        let mut chosen: Vec<[i8; 64]> = Vec::with_capacity(64);
        let mut tracker = RankTracker::new();
        let v1 = universe[first as usize];
        tracker.add_row(&v1);
        chosen.push(v1);

        'steps: while chosen.len() < 64 {
            let forward: Vec<usize> = (0..chosen.len()).collect();
            for &ci in &shuffled {
                let cu = universe[ci as usize];
                for cand in [cu, std::array::from_fn(|i| -cu[i])] {
                    if chosen.contains(&cand) {
                        continue;
                    }
                    let class = classes.class(patterns[ci as usize]);
                    let survivors =
                        matching_in_class(universe, class, &cand, &chosen, &forward, true);
                    if survivors.len() != 1 {
                        continue;
                    }
                    if !tracker.add_row(&cand) {
                        continue;
                    }
                    chosen.push(cand);
                    continue 'steps;
                }
            }
            break; // pool exhausted at this step — restart
        }
        if chosen.len() == 64 && tracker.rank() == 64 {
            log::info!("rigidifying basis found on restart {restart}");
            return Ok(Some(RigidifyingBasis { vectors: chosen }));
        }
        log::debug!("restart {restart}: stalled at depth {}", chosen.len());
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Certification.

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AutCertificate {
    pub format: String,
    pub group: GroupSpec,
    pub order: u64,
    /// The rigidifying basis: 64 minimal vectors in ambient coordinates.
    pub basis: Vec<Vec<i64>>,
    /// Generator matrices in the lattice basis.
    pub generators: Vec<Vec<Vec<i64>>>,
    /// ± pair orbits of the full group on the minimal vectors (only for
    /// the order-16 group; the order-2 group always has one per pair).
    pub orbit_pairs: Option<u64>,
    pub verified: bool,
}

pub const CERT_FORMAT: &str = "q64-aut-cert-v1";

/// Independently re-verify a rigidifying basis against the universe and
/// emit the certificate. Checks, from scratch: every basis vector is a
/// minimal vector with a recomputed pattern; exact rational independence
/// (integer determinant); condition (b); condition (c) with forward
/// filters; generators preserve the Gram matrix and permute the minimal
/// vectors.
pub fn certify(
    q: &QLattice,
    universe: &[[i8; 64]],
    patterns: &[Pattern],
    kernel: &PatternKernel,
    basis: &RigidifyingBasis,
    spec: GroupSpec,
    gamma: Option<&GammaAction>,
) -> Result<AutCertificate> {
    if basis.vectors.len() != 64 {
        return Err(Error::verification("a rigidifying basis needs 64 vectors"));
    }
    if spec == GroupSpec::Pm1xC8 && gamma.is_none() {
        return Err(Error::invalid(
            "certifying the order-16 group requires the rotation action",
        ));
    }
    let classes = ClassIndex::new(patterns);

    // Membership + pattern agreement, recomputed through the kernel.
    let mut indices = Vec::with_capacity(64);
    for v in &basis.vectors {
        let idx = universe
            .binary_search(&canonicalize_sign(v))
            .map_err(|_| Error::verification("basis vector is not a minimal vector"))?;
        let p = kernel.pattern_of(v)?;
        if p != patterns[idx] {
            return Err(Error::verification(
                "stored pattern disagrees with recomputation",
            ));
        }
        indices.push(idx);
    }

    // (a) exact rational independence.
    let rows: Vec<Vec<i64>> = basis
        .vectors
        .iter()
        .map(|v| v.iter().map(|&x| x as i64).collect())
        .collect();
    if det_exact(&rows) == num_bigint::BigInt::from(0) {
        return Err(Error::verification(
            "basis vectors are rationally dependent",
        ));
    }

    // (b) transitivity on the first pattern class.
    if !first_vector_ok(universe, &classes, patterns, indices[0], spec, gamma) {
        return Err(Error::verification(
            "the group does not act transitively on the first pattern class",
        ));
    }

    // (c) uniqueness scans.
    for i in 1..64 {
        let chosen = &basis.vectors[..i];
        let forward: Vec<usize> = (0..i).collect();
        let class = classes.class(patterns[indices[i]]);
        let survivors =
            matching_in_class(universe, class, &basis.vectors[i], chosen, &forward, false);
        if survivors.len() != 1 || survivors[0] != basis.vectors[i] {
            return Err(Error::verification(format!(
                "uniqueness scan at step {i} found {} matching vectors",
                survivors.len()
            )));
        }
    }

    // Generators: -1 always; the twisted rotation for the order-16 group.
    let minus_one: Vec<Vec<i64>> = (0..DIM)
        .map(|i| (0..DIM).map(|j| if i == j { -1 } else { 0 }).collect())
        .collect();
    let mut generators = vec![minus_one];
    let mut orbit_pairs = None;
    if spec == GroupSpec::Pm1xC8 {
        let action = gamma.unwrap();
        // Re-verify the action on this lattice (Gram + order).
        let checked = verify_gamma_action(q, &action.gamma)?;
        if checked.matrix_q != action.matrix_q {
            return Err(Error::verification(
                "rotation matrix disagrees with recomputation",
            ));
        }
        orbit_pairs = Some(count_rotation_orbits(universe, action)?);
        generators.push(action.matrix_q.clone());
    }

    Ok(AutCertificate {
        format: CERT_FORMAT.to_string(),
        group: spec,
        order: spec.order(),
        basis: rows,
        generators,
        orbit_pairs,
        verified: true,
    })
}

/// Count the ± pair orbits of the twisted rotation on the universe,
/// verifying along the way that it permutes the minimal vectors.
pub fn count_rotation_orbits(universe: &[[i8; 64]], action: &GammaAction) -> Result<u64> {
    let mut seen = vec![false; universe.len()];
    let mut orbits = 0u64;
    for start in 0..universe.len() {
        if seen[start] {
            continue;
        }
        orbits += 1;
        let mut cur = universe[start];
        for _ in 0..8 {
            cur = gamma_s_apply_i8(&action.gamma, &cur);
            let idx = universe
                .binary_search(&canonicalize_sign(&cur))
                .map_err(|_| Error::verification("rotation image leaves the minimal vectors"))?;
            seen[idx] = true;
        }
        if canonicalize_sign(&cur) != universe[start] {
            return Err(Error::verification(
                "rotation orbit does not close after 8 steps",
            ));
        }
    }
    Ok(orbits)
}

/// Re-run the reverse-filter uniqueness scan of one step; certification
/// must not depend on the filter order.
pub fn uniqueness_scan_orders_agree(
    universe: &[[i8; 64]],
    patterns: &[Pattern],
    basis: &RigidifyingBasis,
    step: usize,
) -> Result<bool> {
    let classes = ClassIndex::new(patterns);
    let chosen = &basis.vectors[..step];
    let idx = universe
        .binary_search(&canonicalize_sign(&basis.vectors[step]))
        .map_err(|_| Error::verification("basis vector is not a minimal vector"))?;
    let class = classes.class(patterns[idx]);
    let forward: Vec<usize> = (0..step).collect();
    let reverse: Vec<usize> = (0..step).rev().collect();
    let a = matching_in_class(
        universe,
        class,
        &basis.vectors[step],
        chosen,
        &forward,
        false,
    );
    let b = matching_in_class(
        universe,
        class,
        &basis.vectors[step],
        chosen,
        &reverse,
        false,
    );
    Ok(a == b)
}

impl AutCertificate {
    pub fn to_file(&self, path: &Path) -> Result<()> {
        crate::io::write_json(path, self)
    }

    pub fn from_file(path: &Path) -> Result<AutCertificate> {
        let cert: AutCertificate = crate::io::read_json(path)?;
        if cert.format != CERT_FORMAT {
            return Err(Error::Format {
                path: path.into(),
                reason: format!("unsupported format {:?}", cert.format),
            });
        }
        if cert.order != cert.group.order() || !cert.verified {
            return Err(Error::Format {
                path: path.into(),
                reason: "inconsistent certificate header".into(),
            });
        }
        Ok(cert)
    }
}

/// Extract and verify the rotation action recorded in a cyclic code's
/// provenance.
pub fn rotation_action_of(q: &QLattice, code: &Code) -> Result<Option<GammaAction>> {
    match code.gamma() {
        Some(gamma) => Ok(Some(verify_gamma_action(q, &gamma)?)),
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{cyclic_code, random_code};
    use crate::e8::ShellTable;
    use crate::isotropic::{Geometry, PairType};
    use crate::minvec::{enumerate_min, MinVectorSet};
    use std::sync::OnceLock;

    fn shells() -> &'static ShellTable {
        static TABLE: OnceLock<ShellTable> = OnceLock::new();
        TABLE.get_or_init(|| ShellTable::new(12))
    }

    fn geometry() -> &'static Geometry {
        static GEO: OnceLock<Geometry> = OnceLock::new();
        GEO.get_or_init(Geometry::new)
    }

    fn random_set() -> &'static (crate::codes::Code, MinVectorSet) {
        static SET: OnceLock<(crate::codes::Code, MinVectorSet)> = OnceLock::new();
        SET.get_or_init(|| {
            let code = random_code([PairType::I; 8], 7);
            let set = enumerate_min(&code, shells()).unwrap();
            (code, set)
        })
    }

    fn cyclic_set() -> &'static (crate::codes::Code, MinVectorSet) {
        static SET: OnceLock<(crate::codes::Code, MinVectorSet)> = OnceLock::new();
        SET.get_or_init(|| {
            let census = geometry()
                .pair_stabilizer(PairType::I)
                .elements_of_order(8, usize::MAX);
            let code = cyclic_code(PairType::I, &census, 1);
            let set = enumerate_min(&code, shells()).unwrap();
            (code, set)
        })
    }

    /// A small universe closed under sign canonicalization: every 26th
    /// canonical vector. Patterns are relative to this sub-universe, which
    /// exercises the search machinery at a fraction of the full cost.
    fn sub_universe(set: &MinVectorSet) -> Vec<[i8; 64]> {
        set.vectors.iter().copied().step_by(26).collect()
    }

    /// Close a sample of vectors under the rotation action so orbits stay
    /// intact inside the sub-universe.
    fn rotation_closed_universe(set: &MinVectorSet, action: &GammaAction) -> Vec<[i8; 64]> {
        let mut out: Vec<[i8; 64]> = Vec::new();
        for v in set.vectors.iter().step_by(101) {
            let mut cur = *v;
            for _ in 0..8 {
                out.push(canonicalize_sign(&cur));
                cur = gamma_s_apply_i8(&action.gamma, &cur);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    #[test]
    fn rotation_action_is_an_order_8_isometry() {
        let (code, set) = cyclic_set();
        let q = QLattice::build(code).unwrap();
        let action = rotation_action_of(&q, code)
            .unwrap()
            .expect("cyclic provenance");
        // Sampled minimal vectors map to minimal vectors.
        for v in set.vectors.iter().step_by(40_000) {
            let image = gamma_s_apply_i8(&action.gamma, v);
            assert!(set.contains(&image));
            assert_eq!(inner_s_i8(&image, &image), 18);
        }
        // The recorded matrix really is the basis-coordinates action.
        for (i, b) in q.basis.iter().enumerate().step_by(13) {
            let image = gamma_s_apply_i64(&action.gamma, b);
            let mut recombined = vec![0i64; DIM];
            for (j, &c) in action.matrix_q[i].iter().enumerate() {
                for (r, &bj) in recombined.iter_mut().zip(&q.basis[j]) {
                    *r += c * bj;
                }
            }
            assert_eq!(image, recombined);
        }
    }

    #[test]
    fn random_code_lattice_rejects_rotation() {
        let (code, _) = random_set();
        let q = QLattice::build(code).unwrap();
        let census = geometry()
            .pair_stabilizer(PairType::I)
            .elements_of_order(8, usize::MAX);
        assert!(verify_gamma_action(&q, &census[0]).is_err());
    }

    #[test]
    fn pm1_basis_found_and_certified_on_sub_universe() {
        let (code, set) = random_set();
        let q = QLattice::build(code).unwrap();
        let universe = sub_universe(set);
        let kernel = PatternKernel::new(&universe).unwrap();
        let patterns = kernel.patterns_all().unwrap();
        let basis = find_rigidifying_basis(
            &universe,
            &patterns,
            GroupSpec::Pm1,
            None,
            11,
            RESTART_BUDGET,
        )
        .unwrap()
        .expect("search should succeed on a generic universe");
        let cert = certify(
            &q,
            &universe,
            &patterns,
            &kernel,
            &basis,
            GroupSpec::Pm1,
            None,
        )
        .unwrap();
        assert_eq!(cert.order, 2);
        assert!(cert.verified);
        assert!(cert.orbit_pairs.is_none());

        // Reverse-filter scans agree at every step.
        for step in [1, 17, 40, 63] {
            assert!(uniqueness_scan_orders_agree(&universe, &patterns, &basis, step).unwrap());
        }

        // Tampering breaks certification.
        let mut bad = basis.clone();
        bad.vectors[5] = bad.vectors[6];
        assert!(certify(
            &q,
            &universe,
            &patterns,
            &kernel,
            &bad,
            GroupSpec::Pm1,
            None
        )
        .is_err());
        let mut foreign = basis.clone();
        foreign.vectors[5] = [0; 64];
        foreign.vectors[5][0] = 1;
        assert!(certify(
            &q,
            &universe,
            &patterns,
            &kernel,
            &foreign,
            GroupSpec::Pm1,
            None
        )
        .is_err());

        // File round trip.
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cert.json");
        cert.to_file(&path).unwrap();
        let back = AutCertificate::from_file(&path).unwrap();
        assert_eq!(back.basis, cert.basis);
        assert_eq!(back.group, cert.group);
    }

    #[test]
    fn pm1xc8_certified_on_rotation_closed_universe() {
        let (code, set) = cyclic_set();
        let q = QLattice::build(code).unwrap();
        let action = rotation_action_of(&q, code).unwrap().unwrap();
        let universe = rotation_closed_universe(set, &action);
        let kernel = PatternKernel::new(&universe).unwrap();
        let patterns = kernel.patterns_all().unwrap();

        // On a rotation-closed universe the order-2 group cannot satisfy
        // condition (b): patterns repeat along each orbit.
        let pm1 =
            find_rigidifying_basis(&universe, &patterns, GroupSpec::Pm1, None, 3, 10).unwrap();
        assert!(pm1.is_none());

        let basis = find_rigidifying_basis(
            &universe,
            &patterns,
            GroupSpec::Pm1xC8,
            Some(&action),
            3,
            RESTART_BUDGET,
        )
        .unwrap()
        .expect("order-16 search should succeed");
        let cert = certify(
            &q,
            &universe,
            &patterns,
            &kernel,
            &basis,
            GroupSpec::Pm1xC8,
            Some(&action),
        )
        .unwrap();
        assert_eq!(cert.order, 16);
        assert_eq!(cert.generators.len(), 2);
        let orbits = cert.orbit_pairs.unwrap();
        assert_eq!(orbits, universe.len() as u64 / 8);
    }

    #[test]
    fn rank_tracker_matches_exact_rank() {
        let mut tracker = RankTracker::new();
        let mut a = [0i8; 64];
        a[0] = 1;
        let mut b = [0i8; 64];
        b[1] = 2;
        let mut c = [0i8; 64];
        c[0] = 3;
        c[1] = 6; // 3a + 3b
        assert!(tracker.add_row(&a));
        assert!(tracker.add_row(&b));
        assert!(!tracker.add_row(&c));
        assert_eq!(tracker.rank(), 2);
    }
}
