//! Maximal totally isotropic subspaces of `U = E/3E` and their pair
//! geometry.
//!
//! `U` carries the induced GF(3) quadratic form of plus type; its maximal
//! totally isotropic subspaces have dimension 4 and there are 2240 of them,
//! a single `O(E)`-orbit. For a fixed such subspace `V` there are 729
//! maximal isotropic complements `W` (`V ∩ W = 0`), and the stabilizer of
//! `V` in `O(E)` (order 311,040) splits them into two orbits of sizes 648
//! and 81. Ordered pairs `(V, W)` therefore fall into exactly two
//! `O(E)`-orbits, with pair stabilizers of order 480 (type I, the large
//! orbit) and 3840 (type II, the small orbit).
//!
//! A complement pair gives a perfect pairing `V × W → GF(3)`; the dual
//! basis of `W` against the canonical basis of `V` is what turns code
//! coordinates into `U`-vectors downstream.
//!
//! Everything here is computed twice where feasible: subspaces are
//! enumerated both by closing up isotropic flags level by level and as the
//! orbit of a pinned reference subspace, and stabilizer orders are
//! cross-checked against orbit sizes via the orbit–stabilizer identity.

use crate::e8::{
    isometry_inverse, mat8_identity, mat8_mul, mat8_order, orthogonal_group_bsgs, u_inner, u_norm,
    Mat8, UAction, UPoints,
};
use crate::gf3::{Subspace, Trit8};
use crate::perm::{Bsgs, OrbitTree};
use crate::{Error, Result};
use std::collections::{HashMap, HashSet};

/// Pinned reference bases: a maximal isotropic `V₀` and two complements
/// `W^I`, `W^II` representing the two pair orbits. The rows of the `W`
/// matrices are dual to the rows of `V₀` under the pairing, in order.
const V0_ROWS: [[u8; 8]; 4] = [
    [0, 0, 0, 0, 0, 0, 1, 2],
    [0, 0, 0, 1, 2, 0, 0, 0],
    [0, 1, 0, 0, 1, 0, 0, 1],
    [1, 0, 2, 0, 0, 0, 0, 1],
];

const W1_ROWS: [[u8; 8]; 4] = [
    [1, 2, 1, 0, 2, 2, 0, 2],
    [0, 1, 2, 0, 0, 0, 0, 0],
    [2, 2, 1, 0, 1, 0, 2, 2],
    [1, 0, 2, 0, 1, 0, 2, 1],
];

const W2_ROWS: [[u8; 8]; 4] = [
    [1, 2, 1, 0, 2, 2, 0, 2],
    [1, 1, 1, 0, 0, 0, 0, 1],
    [0, 2, 0, 0, 1, 0, 2, 0],
    [1, 2, 2, 2, 1, 0, 2, 0],
];

fn subspace_of(rows: &[[u8; 8]; 4]) -> Subspace {
    Subspace::from_generators(8, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

pub fn reference_v0() -> Subspace {
    subspace_of(&V0_ROWS)
}

pub fn reference_w(t: PairType) -> Subspace {
    match t {
        PairType::I => subspace_of(&W1_ROWS),
        PairType::II => subspace_of(&W2_ROWS),
    }
}

/// Reference basis rows in their pinned (non-canonical) order.
pub fn reference_rows(which: Reference) -> [Trit8; 4] {
    let rows = match which {
        Reference::V0 => &V0_ROWS,
        Reference::WI => &W1_ROWS,
        Reference::WII => &W2_ROWS,
    };
    std::array::from_fn(|i| Trit8::from_trits(&rows[i]))
}

#[derive(Clone, Copy, Debug)]
pub enum Reference {
    V0,
    WI,
    WII,
}

/// The two `O(E)`-orbits of complement pairs, named by convention: type I is
/// the orbit with pair stabilizer of order 480, type II the one with 3840.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, serde::Serialize, serde::Deserialize)]
pub enum PairType {
    I,
    II,
}

impl PairType {
    pub fn as_str(self) -> &'static str {
        match self {
            PairType::I => "I",
            PairType::II => "II",
        }
    }

    pub fn parse(s: &str) -> Result<PairType> {
        match s {
            "I" | "i" | "1" => Ok(PairType::I),
            "II" | "ii" | "2" => Ok(PairType::II),
            other => Err(Error::invalid(format!("unknown pair type {other:?}"))),
        }
    }
}

impl std::fmt::Display for PairType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether the quadratic form vanishes on the whole subspace, checked on
/// every element rather than just a basis.
pub fn is_totally_isotropic(s: &Subspace) -> bool {
    s.elements()
        .iter()
        .all(|v| u_norm(Trit8::from_trits(v)) == 0)
}

fn rows4(s: &Subspace) -> [Trit8; 4] {
    assert_eq!(s.dim(), 4);
    std::array::from_fn(|i| Trit8::from_trits(s.basis().row(i)))
}

/// Apply a mod-3 matrix action to a subspace, re-canonicalizing.
pub fn apply_to_subspace(action: &UAction, s: &Subspace) -> Subspace {
    let rows: Vec<Vec<u8>> = (0..s.dim())
        .map(|i| {
            action
                .apply(Trit8::from_trits(s.basis().row(i)))
                .trits()
                .to_vec()
        })
        .collect();
    Subspace::from_generators(s.ambient(), &rows)
}

/// All nonzero isotropic points, as sorted packed keys.
pub fn isotropic_points() -> Vec<u16> {
    let mut keys: Vec<u16> = Trit8::all()
        .filter(|t| !t.is_zero() && u_norm(*t) == 0)
        .map(|t| t.key())
        .collect();
    keys.sort_unstable();
    keys
}

/// Enumerate all maximal totally isotropic subspaces by extending isotropic
/// flags one dimension at a time. Returns canonical subspaces sorted by
/// packed key.
pub fn enumerate_maximal_isotropic() -> Vec<Subspace> {
    let pts = isotropic_points();
    let n = pts.len();
    let idx_of: HashMap<u16, usize> = pts.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    // ortho[i] = bitset over point indices orthogonal to point i.
    let words = n.div_ceil(64);
    let mut ortho = vec![0u64; n * words];
    for i in 0..n {
        let a = Trit8::from_key(pts[i]);
        for j in i..n {
            if u_inner(a, Trit8::from_key(pts[j])) == 0 {
                ortho[i * words + j / 64] |= 1 << (j % 64);
                ortho[j * words + i / 64] |= 1 << (i % 64);
            }
        }
    }

    let mut current: HashMap<u128, Subspace> = HashMap::new();
    for &k in &pts {
        let s = Subspace::from_generators(8, &[Trit8::from_key(k).trits().to_vec()]);
        current.insert(s.packed_key(), s);
    }
    for _dim in 2..=4 {
        let mut next: HashMap<u128, Subspace> = HashMap::new();
        for s in current.values() {
            // Candidates must be orthogonal to every basis row.
            let mut mask = vec![u64::MAX; words];
            for r in 0..s.dim() {
                let ri = idx_of[&Trit8::from_trits(s.basis().row(r)).key()];
                for w in 0..words {
                    mask[w] &= ortho[ri * words + w];
                }
            }
            for w in 0..words {
                let mut bits = mask[w];
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let pi = w * 64 + b;
                    if pi >= n {
                        continue;
                    }
                    let cand = Trit8::from_key(pts[pi]).trits().to_vec();
                    if s.contains(&cand) {
                        continue;
                    }
                    let mut gens = s.basis().row_vecs();
                    gens.push(cand);
                    let bigger = Subspace::from_generators(8, &gens);
                    next.entry(bigger.packed_key()).or_insert(bigger);
                }
            }
        }
        current = next;
    }
    let mut keys: Vec<u128> = current.keys().copied().collect();
    keys.sort_unstable();
    keys.into_iter()
        .map(|k| current.remove(&k).unwrap())
        .collect()
}

/// The orbit of a subspace under matrix generators, as an [`OrbitTree`] on
/// packed keys, together with the subspace for every key.
pub struct SubspaceOrbit {
    pub tree: OrbitTree<u128>,
    pub spaces: HashMap<u128, Subspace>,
}

pub fn subspace_orbit(seed: &Subspace, gens: &[Mat8]) -> SubspaceOrbit {
    let actions: Vec<UAction> = gens.iter().map(UAction::of).collect();
    let mut spaces: HashMap<u128, Subspace> = HashMap::new();
    spaces.insert(seed.packed_key(), seed.clone());
    let tree = {
        let spaces = &mut spaces;
        OrbitTree::new(seed.packed_key(), gens.len(), |g, key| {
            let s = spaces.get(key).expect("parent visited first").clone();
            let img = apply_to_subspace(&actions[g], &s);
            let k = img.packed_key();
            spaces.entry(k).or_insert(img);
            k
        })
    };
    SubspaceOrbit { tree, spaces }
}

/// A finitely generated subgroup of `O(E)` with its exact order.
#[derive(Clone)]
pub struct MatrixGroup {
    pub gens: Vec<Mat8>,
    pub order: u128,
}

impl MatrixGroup {
    /// All elements, BFS closure of the generators. Deterministic order of
    /// discovery; `cap` guards against runaway closure of a wrong group.
    pub fn elements(&self, cap: usize) -> Vec<Mat8> {
        let mut seen: HashSet<[i8; 64]> = HashSet::new();
        let mut out = vec![mat8_identity()];
        seen.insert(mat_key(&out[0]));
        let mut i = 0;
        while i < out.len() {
            let cur = out[i];
            for g in &self.gens {
                let next = mat8_mul(&cur, g);
                if seen.insert(mat_key(&next)) {
                    out.push(next);
                    assert!(out.len() <= cap, "group closure exceeded cap {cap}");
                }
            }
            i += 1;
        }
        assert_eq!(
            out.len() as u128,
            self.order,
            "closure does not match order"
        );
        out
    }

    /// Elements of a given multiplicative order, sorted by matrix bytes for
    /// deterministic indexing.
    pub fn elements_of_order(&self, order: u32, cap: usize) -> Vec<Mat8> {
        let mut hits: Vec<Mat8> = self
            .elements(cap)
            .into_iter()
            .filter(|m| mat8_order(m) == order)
            .collect();
        hits.sort_unstable_by_key(mat_key);
        hits
    }
}

fn mat_key(m: &Mat8) -> [i8; 64] {
    std::array::from_fn(|i| {
        let v = m[i / 8][i % 8];
        i8::try_from(v).expect("O(E) entries fit i8")
    })
}

/// Extract generators of the stabilizer of the orbit seed from the Schreier
/// tree: sifts Schreier generators into a fresh permutation-group structure
/// until the subgroup order matches `|G| / |orbit|`.
pub fn stabilizer_from_orbit(
    orbit: &SubspaceOrbit,
    gens: &[Mat8],
    upoints: &UPoints,
    group_order: u128,
) -> MatrixGroup {
    let orbit_len = orbit.tree.len() as u128;
    assert_eq!(
        group_order % orbit_len,
        0,
        "orbit size must divide group order"
    );
    let target = group_order / orbit_len;

    // Transversal matrices: product of generators along each tree path.
    let n = orbit.tree.len();
    let mut transversal: Vec<Mat8> = Vec::with_capacity(n);
    for k in 0..n {
        let mut t = mat8_identity();
        for g in orbit.tree.word_to(k) {
            t = mat8_mul(&t, &gens[g]);
        }
        transversal.push(t);
    }

    let actions: Vec<UAction> = gens.iter().map(UAction::of).collect();
    let mut bsgs = Bsgs::new(upoints.len());
    let mut kept: Vec<Mat8> = Vec::new();
    'outer: for k in 0..n {
        let key = orbit.tree.points()[k];
        let space = &orbit.spaces[&key];
        for (gi, g) in gens.iter().enumerate() {
            let image = apply_to_subspace(&actions[gi], space);
            let kpos = orbit
                .tree
                .position(&image.packed_key())
                .expect("orbit closed");
            // Schreier generator: t_k · g · t_{k·g}⁻¹ stabilizes the seed.
            let h = mat8_mul(
                &mat8_mul(&transversal[k], g),
                &isometry_inverse(&transversal[kpos]),
            );
            if h == mat8_identity() {
                continue;
            }
            let perm = upoints.perm_of(&h);
            if bsgs.contains(&perm) {
                continue;
            }
            bsgs.add_generator(perm);
            kept.push(h);
            if bsgs.order() == target {
                break 'outer;
            }
        }
    }
    assert_eq!(bsgs.order(), target, "Schreier generators exhausted early");
    MatrixGroup {
        gens: kept,
        order: target,
    }
}

/// Decomposition of a set of subspace keys into orbits under matrix
/// generators; orbits are reported largest first, keys sorted within.
pub fn orbit_decomposition(all: &[Subspace], gens: &[Mat8]) -> Vec<Vec<u128>> {
    let mut remaining: HashSet<u128> = all.iter().map(|s| s.packed_key()).collect();
    let by_key: HashMap<u128, &Subspace> = all.iter().map(|s| (s.packed_key(), s)).collect();
    let mut orbits = Vec::new();
    // Seed from sorted keys for determinism.
    let mut seeds: Vec<u128> = remaining.iter().copied().collect();
    seeds.sort_unstable();
    for seed in seeds {
        if !remaining.contains(&seed) {
            continue;
        }
        let so = subspace_orbit(by_key[&seed], gens);
        let mut keys: Vec<u128> = so.tree.points().to_vec();
        for k in &keys {
            assert!(remaining.remove(k), "orbit escaped the set");
        }
        keys.sort_unstable();
        orbits.push(keys);
    }
    orbits.sort_by_key(|o| std::cmp::Reverse(o.len()));
    orbits
}

/// A complement pair `(V, W)` of maximal isotropic subspaces with the dual
/// basis of `W` against the canonical basis of `V`.
#[derive(Clone)]
pub struct IsoPair {
    pub v: Subspace,
    pub w: Subspace,
    /// Canonical (echelon) basis of `V`.
    pub v_basis: [Trit8; 4],
    /// `w_dual[j]` pairs to 1 with `v_basis[j]` and to 0 with the others.
    pub w_dual: [Trit8; 4],
}

impl IsoPair {
    pub fn new(v: Subspace, w: Subspace) -> Result<IsoPair> {
        if v.dim() != 4 || w.dim() != 4 || v.ambient() != 8 || w.ambient() != 8 {
            return Err(Error::invalid(
                "pair components must be 4-dimensional in GF(3)^8",
            ));
        }
        if !is_totally_isotropic(&v) || !is_totally_isotropic(&w) {
            return Err(Error::invalid("pair components must be totally isotropic"));
        }
        let v_basis = rows4(&v);
        let w_rows = rows4(&w);
        // Pairing matrix P[i][k] = ⟨v_i, w_k⟩.
        let p = crate::gf3::TritMat::from_fn(4, 4, |i, k| u_inner(v_basis[i], w_rows[k]));
        let Some(pinv) = p.inverse() else {
            return Err(Error::invalid(
                "subspaces are not complementary: the pairing is degenerate",
            ));
        };
        // v*_j = Σ_k P⁻¹[k][j] w_k satisfies ⟨v_i, v*_j⟩ = δ_ij.
        let w_dual: [Trit8; 4] = std::array::from_fn(|j| {
            let mut acc = Trit8::ZERO;
            for k in 0..4 {
                acc = acc.add(w_rows[k].scale(pinv.at(k, j)));
            }
            acc
        });
        for i in 0..4 {
            for j in 0..4 {
                debug_assert_eq!(u_inner(v_basis[i], w_dual[j]), u8::from(i == j));
            }
        }
        Ok(IsoPair {
            v,
            w,
            v_basis,
            w_dual,
        })
    }

    pub fn reference(t: PairType) -> IsoPair {
        IsoPair::new(reference_v0(), reference_w(t)).expect("reference pair is valid")
    }
}

/// Eight complement pairs, one per factor of `S = E⁸`.
#[derive(Clone)]
pub struct Delta {
    pub pairs: Vec<IsoPair>,
    /// Recorded pair types when built from the references.
    pub types: Option<[PairType; 8]>,
}

impl Delta {
    pub fn from_types(types: [PairType; 8]) -> Delta {
        let pairs = types.iter().map(|&t| IsoPair::reference(t)).collect();
        Delta {
            pairs,
            types: Some(types),
        }
    }

    pub fn uniform(t: PairType) -> Delta {
        Delta::from_types([t; 8])
    }

    /// Permute the factors: pair `i` of the result is pair `perm[i]` of
    /// `self`.
    pub fn permuted(&self, perm: &[usize; 8]) -> Delta {
        Delta {
            pairs: perm.iter().map(|&i| self.pairs[i].clone()).collect(),
            types: self.types.map(|t| std::array::from_fn(|i| t[perm[i]])),
        }
    }
}

/// The full pair geometry around the reference subspace, computed once and
/// shared: orbit of `V₀`, its stabilizer, the complement orbits, and both
/// pair stabilizers.
pub struct Geometry {
    pub upoints: UPoints,
    pub group_order: u128,
    /// Sorted packed keys of all 2240 maximal isotropic subspaces.
    pub space_keys: Vec<u128>,
    pub stab_v0: MatrixGroup,
    /// Orbits of the complements of `V₀` under its stabilizer, largest
    /// first (sizes 648 and 81).
    pub complement_orbits: Vec<Vec<u128>>,
    pub pair_stab: [MatrixGroup; 2],
}

impl Geometry {
    pub fn new() -> Geometry {
        let upoints = UPoints::new();
        let group_order = orthogonal_group_bsgs(&upoints).order();
        let refl = crate::e8::reflection_gens();

        let v0 = reference_v0();
        let orbit = subspace_orbit(&v0, &refl);
        let mut space_keys: Vec<u128> = orbit.tree.points().to_vec();
        space_keys.sort_unstable();

        let stab_v0 = stabilizer_from_orbit(&orbit, &refl, &upoints, group_order);

        // Complements of V₀ among all maximal isotropic subspaces.
        let complements: Vec<Subspace> = orbit
            .spaces
            .values()
            .filter(|w| v0.intersect(w).dim() == 0)
            .cloned()
            .collect();
        let complement_orbits = orbit_decomposition(&complements, &stab_v0.gens);

        let pair_stab = [PairType::I, PairType::II].map(|t| {
            let w = reference_w(t);
            let worbit = subspace_orbit(&w, &stab_v0.gens);
            stabilizer_from_orbit(&worbit, &stab_v0.gens, &upoints, stab_v0.order)
        });

        Geometry {
            upoints,
            group_order,
            space_keys,
            stab_v0,
            complement_orbits,
            pair_stab,
        }
    }

    pub fn pair_stabilizer(&self, t: PairType) -> &MatrixGroup {
        match t {
            PairType::I => &self.pair_stab[0],
            PairType::II => &self.pair_stab[1],
        }
    }
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn geometry() -> &'static Geometry {
        static GEO: OnceLock<Geometry> = OnceLock::new();
        GEO.get_or_init(Geometry::new)
    }

    #[test]
    fn reference_spaces_are_maximal_isotropic() {
        for s in [
            reference_v0(),
            reference_w(PairType::I),
            reference_w(PairType::II),
        ] {
            assert_eq!(s.dim(), 4);
            assert!(is_totally_isotropic(&s));
        }
    }

    #[test]
    fn reference_bases_are_dual_in_pinned_order() {
        let v = reference_rows(Reference::V0);
        for wref in [Reference::WI, Reference::WII] {
            let w = reference_rows(wref);
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(
                        u_inner(v[i], w[j]),
                        u8::from(i == j),
                        "pairing of v[{i}], w[{j}]"
                    );
                }
            }
        }
    }

    #[test]
    fn isotropic_point_count() {
        assert_eq!(isotropic_points().len(), 2240);
    }

    #[test]
    fn levelwise_enumeration_matches_orbit() {
        let all = enumerate_maximal_isotropic();
        assert_eq!(all.len(), 2240);
        for s in all.iter().step_by(97) {
            assert!(is_totally_isotropic(s));
        }
        let keys: Vec<u128> = all.iter().map(|s| s.packed_key()).collect();
        assert_eq!(keys, geometry().space_keys);
    }

    #[test]
    fn stabilizer_order_and_orbit_identity() {
        let geo = geometry();
        assert_eq!(geo.group_order, 696_729_600);
        assert_eq!(geo.stab_v0.order, 311_040);
        assert_eq!(geo.stab_v0.order, (1 << 8) * 243 * 5);
        assert_eq!(
            geo.space_keys.len() as u128 * geo.stab_v0.order,
            geo.group_order
        );
    }

    #[test]
    fn complement_orbits_are_648_and_81() {
        let geo = geometry();
        let sizes: Vec<usize> = geo.complement_orbits.iter().map(|o| o.len()).collect();
        assert_eq!(sizes, vec![648, 81]);
        // The type-I reference lies in the large orbit, type-II in the small.
        let w1 = reference_w(PairType::I).packed_key();
        let w2 = reference_w(PairType::II).packed_key();
        assert!(geo.complement_orbits[0].binary_search(&w1).is_ok());
        assert!(geo.complement_orbits[1].binary_search(&w2).is_ok());
    }

    #[test]
    fn pair_stabilizer_orders() {
        let geo = geometry();
        assert_eq!(geo.pair_stabilizer(PairType::I).order, 480);
        assert_eq!(geo.pair_stabilizer(PairType::II).order, 3840);
        // Orbit–stabilizer inside the stabilizer of V₀.
        assert_eq!(648 * 480, geo.stab_v0.order);
        assert_eq!(81 * 3840, geo.stab_v0.order);
        // The two pair orbits exhaust all 2240 × 729 complement pairs.
        assert_eq!(geo.group_order / 480 + geo.group_order / 3840, 2240 * 729);
    }

    #[test]
    fn pair_stabilizers_fix_both_subspaces() {
        let geo = geometry();
        for (t, stab) in [
            (PairType::I, &geo.pair_stab[0]),
            (PairType::II, &geo.pair_stab[1]),
        ] {
            let v0 = reference_v0();
            let w = reference_w(t);
            for g in &stab.gens {
                let a = UAction::of(g);
                assert_eq!(apply_to_subspace(&a, &v0), v0);
                assert_eq!(apply_to_subspace(&a, &w), w);
            }
        }
    }

    #[test]
    fn order_eight_censuses() {
        let geo = geometry();
        let c1 = geo.pair_stabilizer(PairType::I).elements_of_order(8, 481);
        let c2 = geo.pair_stabilizer(PairType::II).elements_of_order(8, 3841);
        assert_eq!(c1.len(), 120);
        assert_eq!(c2.len(), 1360);
        // Censuses are sorted for deterministic indexing.
        for w in c1.windows(2) {
            assert!(mat_key(&w[0]) < mat_key(&w[1]));
        }
    }

    #[test]
    fn dual_basis_construction() {
        for t in [PairType::I, PairType::II] {
            let pair = IsoPair::reference(t);
            for i in 0..4 {
                assert!(pair.w.contains(&pair.w_dual[i].trits()));
                for j in 0..4 {
                    assert_eq!(u_inner(pair.v_basis[i], pair.w_dual[j]), u8::from(i == j));
                }
            }
        }
    }

    #[test]
    fn pair_rejects_non_complement() {
        let v0 = reference_v0();
        assert!(IsoPair::new(v0.clone(), v0).is_err());
    }

    #[test]
    fn delta_permutation() {
        let delta = Delta::from_types([
            PairType::I,
            PairType::II,
            PairType::I,
            PairType::I,
            PairType::II,
            PairType::I,
            PairType::I,
            PairType::I,
        ]);
        let perm = [1usize, 0, 2, 3, 4, 5, 6, 7];
        let permuted = delta.permuted(&perm);
        assert_eq!(
            permuted.types.unwrap(),
            [
                PairType::II,
                PairType::I,
                PairType::I,
                PairType::I,
                PairType::II,
                PairType::I,
                PairType::I,
                PairType::I,
            ]
        );
    }
}
