//! The E8 root lattice `E`, its small-norm shells, the 3-elementary quotient
//! `U = E/3E` with its induced GF(3) quadratic form, and the orthogonal
//! group `O(E)` of order 696,729,600.
//!
//! Vectors are rows of coordinates in a fixed basis of simple roots; the
//! bilinear form is `⟨x, y⟩ = x G yᵀ` with `G` the Cartan-style Gram matrix
//! (2 on the diagonal, −1 on bonded pairs). Group elements are integer 8×8
//! matrices acting on the right and preserving `G`; they act faithfully on
//! the 6560 nonzero points of `U`, which is how orders and stabilizers are
//! computed exactly.

use crate::gf3::{trit_of_int, Trit8};
use crate::perm::{Bsgs, Perm};
use std::collections::HashMap;

pub type Mat8 = [[i64; 8]; 8];
pub type Vec8 = [i64; 8];

/// Bonds between basis vectors: a chain 2–3–4–5–6–7–8 with 1 attached to 4
/// (1-indexed), i.e. the E8 Coxeter diagram.
const BONDS: [(usize, usize); 7] = [(0, 3), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)];

/// Gram matrix of the fixed simple-root basis.
pub fn gram() -> Mat8 {
    let mut g = [[0i64; 8]; 8];
    for i in 0..8 {
        g[i][i] = 2;
    }
    for &(a, b) in &BONDS {
        g[a][b] = -1;
        g[b][a] = -1;
    }
    g
}

/// Exact integer inverse of the Gram matrix (it is unimodular). Computed
/// once by rounding a floating-point inverse and verifying exactly.
pub fn gram_inverse() -> Mat8 {
    static INV: std::sync::OnceLock<Mat8> = std::sync::OnceLock::new();
    *INV.get_or_init(|| mat8_inverse_exact(&gram()).expect("E8 Gram matrix is unimodular"))
}

#[inline]
pub fn inner(g: &Mat8, a: &Vec8, b: &Vec8) -> i64 {
    let mut acc = 0;
    for i in 0..8 {
        let mut row = 0;
        for j in 0..8 {
            row += g[i][j] * b[j];
        }
        acc += a[i] * row;
    }
    acc
}

#[inline]
pub fn norm(g: &Mat8, a: &Vec8) -> i64 {
    inner(g, a, a)
}

// ---------------------------------------------------------------------------
// Small integer matrix helpers.

pub fn mat8_identity() -> Mat8 {
    let mut m = [[0i64; 8]; 8];
    for i in 0..8 {
        m[i][i] = 1;
    }
    m
}

pub fn mat8_mul(a: &Mat8, b: &Mat8) -> Mat8 {
    let mut out = [[0i64; 8]; 8];
    for i in 0..8 {
        for k in 0..8 {
            let aik = a[i][k];
            if aik == 0 {
                continue;
            }
            for j in 0..8 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn mat8_transpose(a: &Mat8) -> Mat8 {
    let mut out = [[0i64; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            out[j][i] = a[i][j];
        }
    }
    out
}

pub fn mat8_is_identity(a: &Mat8) -> bool {
    *a == mat8_identity()
}

/// Row vector times matrix: `v ↦ v·M`.
pub fn mat8_apply(v: &Vec8, m: &Mat8) -> Vec8 {
    let mut out = [0i64; 8];
    for i in 0..8 {
        let vi = v[i];
        if vi == 0 {
            continue;
        }
        for j in 0..8 {
            out[j] += vi * m[i][j];
        }
    }
    out
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn mat8_det(m: &Mat8) -> i128 {
    let mut a: [[i128; 8]; 8] = std::array::from_fn(|i| std::array::from_fn(|j| m[i][j] as i128));
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..7 {
        if a[k][k] == 0 {
            let Some(p) = (k + 1..8).find(|&r| a[r][k] != 0) else {
                return 0;
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..8 {
            for j in k + 1..8 {
                a[i][j] = (a[k][k] * a[i][j] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    sign * a[7][7]
}

/// Multiplicative order of an integer matrix (panics past the cap; elements
/// of finite orthogonal groups stay far below it).
pub fn mat8_order(m: &Mat8) -> u32 {
    let mut p = *m;
    let mut n = 1;
    while !mat8_is_identity(&p) {
        p = mat8_mul(&p, m);
        n += 1;
        assert!(n <= 10_000, "matrix order runaway");
    }
    n
}

/// Whether `m` preserves the form: `m G mᵀ = G`.
pub fn is_isometry(g: &Mat8, m: &Mat8) -> bool {
    mat8_mul(&mat8_mul(m, g), &mat8_transpose(m)) == *g
}

/// Inverse of an isometry of the E8 form: `m⁻¹ = G mᵀ G⁻¹`, exact over the
/// integers.
pub fn isometry_inverse(m: &Mat8) -> Mat8 {
    let inv = mat8_mul(&mat8_mul(&gram(), &mat8_transpose(m)), &gram_inverse());
    debug_assert!(mat8_is_identity(&mat8_mul(m, &inv)));
    inv
}

/// Integer matrix inverse via floating-point elimination with exact
/// verification; `None` when not integrally invertible.
pub fn mat8_inverse_exact(m: &Mat8) -> Option<Mat8> {
    let mut a = [[0f64; 16]; 8];
    for i in 0..8 {
        for j in 0..8 {
            a[i][j] = m[i][j] as f64;
        }
        a[i][8 + i] = 1.0;
    }
    for col in 0..8 {
        let p = (col..8).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[p][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, p);
        let d = a[col][col];
        for j in 0..16 {
            a[col][j] /= d;
        }
        for r in 0..8 {
            if r != col {
                let f = a[r][col];
                for j in 0..16 {
                    a[r][j] -= f * a[col][j];
                }
            }
        }
    }
    let mut out = [[0i64; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            out[i][j] = a[i][8 + j].round() as i64;
        }
    }
    if mat8_mul(m, &out) == mat8_identity() {
        Some(out)
    } else {
        None
    }
}

/// The eight root reflections `x ↦ x − ⟨x, eᵢ⟩ eᵢ` as matrices.
pub fn reflection_gens() -> Vec<Mat8> {
    let g = gram();
    (0..8)
        .map(|i| {
            let mut s = mat8_identity();
            for a in 0..8 {
                s[a][i] -= g[a][i];
            }
            s
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Fincke–Pohst enumeration.

/// All nonzero integer row vectors `x` with `0 < x G xᵀ ≤ bound`, both
/// signs, in no particular order. Floating-point pruning with a safety
/// margin; every emitted vector passes an exact integer norm check, and the
/// margin is far wider than the error of these well-conditioned forms.
pub fn enumerate_up_to(g: &Mat8, bound: i64) -> Vec<(Vec8, i64)> {
    assert!(bound > 0);
    // LDL decomposition: G = L D Lᵀ with unit lower-triangular L, giving
    // x G xᵀ = Σ d[i] (x[i] + Σ_{j>i} L[j][i] x[j])².
    let mut d = [0f64; 8];
    let mut l = [[0f64; 8]; 8];
    for i in 0..8 {
        let mut di = g[i][i] as f64;
        for k in 0..i {
            di -= d[k] * l[i][k] * l[i][k];
        }
        assert!(di > 1e-9, "form not positive definite");
        d[i] = di;
        for j in i + 1..8 {
            let mut v = g[j][i] as f64;
            for k in 0..i {
                v -= d[k] * l[j][k] * l[i][k];
            }
            l[j][i] = v / di;
        }
    }

    const EPS: f64 = 1e-7;
    let mut out = Vec::new();
    let mut x = [0i64; 8];
    // Depth-first from coordinate 7 down to 0. `budget` is what remains of
    // `bound` after the contributions of coordinates above `level`.
    #[allow(clippy::too_many_arguments)]
    fn descend(
        level: isize,
        budget: f64,
        x: &mut [i64; 8],
        d: &[f64; 8],
        l: &[[f64; 8]; 8],
        g: &Mat8,
        bound: i64,
        out: &mut Vec<(Vec8, i64)>,
    ) {
        if level < 0 {
            let n = norm(g, x);
            if n > 0 && n <= bound {
                out.push((*x, n));
            }
            return;
        }
        let i = level as usize;
        let c: f64 = (i + 1..8).map(|j| l[j][i] * x[j] as f64).sum();
        let r = (budget.max(0.0) / d[i]).sqrt() + EPS;
        let lo = (-r - c).ceil() as i64;
        let hi = (r - c).floor() as i64;
        for xi in lo..=hi {
            x[i] = xi;
            let t = xi as f64 + c;
            descend(level - 1, budget - d[i] * t * t, x, d, l, g, bound, out);
        }
        x[i] = 0;
    }
    descend(7, bound as f64, &mut x, &d, &l, g, bound, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Shells and their images in U = E/3E.

/// One shell `N(a, E) = {x ∈ E : ⟨x, x⟩ = a}` together with its image in
/// `U`: `classes` lists the distinct mod-3 reduction classes and `fibers`
/// maps a class key to the indices of its preimages in `vectors`.
pub struct Shell {
    pub norm: i64,
    /// All shell vectors (both signs), sorted lexicographically.
    pub vectors: Vec<[i8; 8]>,
    /// Mod-3 class of each vector, aligned with `vectors`.
    pub class_of: Vec<u16>,
    /// Sorted distinct class keys.
    pub classes: Vec<u16>,
    fibers: HashMap<u16, Vec<u32>>,
}

impl Shell {
    pub fn fiber(&self, key: u16) -> &[u32] {
        self.fibers.get(&key).map_or(&[], |v| v)
    }
}

/// Bit assigned to norm `a` in the class-membership mask; norm 0 gets its
/// own bit since only the zero vector has it.
#[inline]
fn norm_bit(norm: i64) -> u8 {
    if norm == 0 {
        1 << 6
    } else {
        debug_assert!(norm % 2 == 0 && (2..=12).contains(&norm));
        1 << (norm / 2 - 1)
    }
}

/// Shells of `E` up to a norm bound, with the mod-3 class data used by the
/// minimal-vector backtrack.
pub struct ShellTable {
    pub max_norm: i64,
    shells: Vec<Shell>,
    /// `class_mask[key] & norm_bit(a) ≠ 0` iff the key is the reduction of
    /// some vector of `N(a, E)`.
    class_mask: Box<[u8; 65536]>,
}

impl ShellTable {
    pub fn new(max_norm: i64) -> ShellTable {
        assert!(max_norm >= 2 && max_norm % 2 == 0 && max_norm <= 12);
        let g = gram();
        let mut buckets: Vec<Vec<[i8; 8]>> = (0..max_norm / 2).map(|_| Vec::new()).collect();
        for (v, n) in enumerate_up_to(&g, max_norm) {
            debug_assert_eq!(n % 2, 0, "E8 is even");
            let vi8: [i8; 8] =
                std::array::from_fn(|i| i8::try_from(v[i]).expect("small-norm coordinates fit i8"));
            buckets[(n / 2 - 1) as usize].push(vi8);
        }
        let mut class_mask: Box<[u8; 65536]> = vec![0u8; 65536].try_into().unwrap();
        class_mask[0] |= norm_bit(0);
        let mut shells = Vec::new();
        for (bi, mut vectors) in buckets.into_iter().enumerate() {
            let norm = 2 * (bi as i64 + 1);
            vectors.sort_unstable();
            let class_of: Vec<u16> = vectors.iter().map(|v| reduce_mod3(v).key()).collect();
            let mut fibers: HashMap<u16, Vec<u32>> = HashMap::new();
            for (i, &k) in class_of.iter().enumerate() {
                fibers.entry(k).or_default().push(i as u32);
                class_mask[k as usize] |= norm_bit(norm);
            }
            let mut classes: Vec<u16> = fibers.keys().copied().collect();
            classes.sort_unstable();
            shells.push(Shell {
                norm,
                vectors,
                class_of,
                classes,
                fibers,
            });
        }
        ShellTable {
            max_norm,
            shells,
            class_mask,
        }
    }

    pub fn shell(&self, norm: i64) -> &Shell {
        assert!(norm >= 2 && norm % 2 == 0 && norm <= self.max_norm);
        &self.shells[(norm / 2 - 1) as usize]
    }

    /// Is `key` the mod-3 class of some vector of norm `a`? Norm 0 means
    /// the zero class.
    #[inline]
    pub fn in_class(&self, norm: i64, key: u16) -> bool {
        self.class_mask[key as usize] & norm_bit(norm) != 0
    }
}

/// Reduce an integer vector mod 3 into a packed U-vector.
pub fn reduce_mod3(v: &[i8; 8]) -> Trit8 {
    let trits: [u8; 8] = std::array::from_fn(|i| trit_of_int(v[i] as i64));
    Trit8::from_trits(&trits)
}

/// Quadratic form on U induced by the lattice norm: well defined because
/// `⟨x + 3z, x + 3z⟩ ≡ ⟨x, x⟩ (mod 3)`.
pub fn u_norm(a: Trit8) -> u8 {
    let v: Vec8 = std::array::from_fn(|i| a.trit(i) as i64);
    trit_of_int(norm(&gram(), &v))
}

/// Bilinear form on U.
pub fn u_inner(a: Trit8, b: Trit8) -> u8 {
    let va: Vec8 = std::array::from_fn(|i| a.trit(i) as i64);
    let vb: Vec8 = std::array::from_fn(|i| b.trit(i) as i64);
    trit_of_int(inner(&gram(), &va, &vb))
}

/// A matrix reduced mod 3, with its rows and negated rows packed for fast
/// application to U-vectors.
#[derive(Clone)]
pub struct UAction {
    rows: [Trit8; 8],
    neg_rows: [Trit8; 8],
}

impl UAction {
    pub fn of(m: &Mat8) -> UAction {
        let rows: [Trit8; 8] = std::array::from_fn(|i| {
            let trits: [u8; 8] = std::array::from_fn(|j| trit_of_int(m[i][j]));
            Trit8::from_trits(&trits)
        });
        UAction {
            neg_rows: std::array::from_fn(|i| rows[i].neg()),
            rows,
        }
    }

    /// `x ↦ x·M` on packed U-vectors.
    #[inline]
    pub fn apply(&self, x: Trit8) -> Trit8 {
        let mut acc = Trit8::ZERO;
        for i in 0..8 {
            match x.trit(i) {
                1 => acc = acc.add(self.rows[i]),
                2 => acc = acc.add(self.neg_rows[i]),
                _ => {}
            }
        }
        acc
    }
}

/// The 6560 nonzero points of U, indexed in ascending key order, and the
/// translation of matrices into permutations of those points.
pub struct UPoints {
    keys: Vec<u16>,
    index_of: Box<[u32; 65536]>,
}

const NO_INDEX: u32 = u32::MAX;

impl UPoints {
    pub fn new() -> UPoints {
        let mut keys: Vec<u16> = Trit8::all()
            .filter(|t| !t.is_zero())
            .map(|t| t.key())
            .collect();
        keys.sort_unstable();
        let mut index_of: Box<[u32; 65536]> = vec![NO_INDEX; 65536].try_into().unwrap();
        for (i, &k) in keys.iter().enumerate() {
            index_of[k as usize] = i as u32;
        }
        UPoints { keys, index_of }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn key(&self, index: u16) -> u16 {
        self.keys[index as usize]
    }

    #[inline]
    pub fn index(&self, key: u16) -> u16 {
        let i = self.index_of[key as usize];
        debug_assert_ne!(i, NO_INDEX, "not a nonzero U-point key");
        i as u16
    }

    /// Permutation of the 6560 points induced by an invertible matrix.
    pub fn perm_of(&self, m: &Mat8) -> Perm {
        let action = UAction::of(m);
        let img: Vec<u16> = self
            .keys
            .iter()
            .map(|&k| self.index(action.apply(Trit8::from_key(k)).key()))
            .collect();
        Perm::from_images(img)
    }
}

impl Default for UPoints {
    fn default() -> Self {
        UPoints::new()
    }
}

/// Exact order of `O(E)` computed from scratch: a Schreier–Sims run on the
/// permutation images of the eight root reflections.
pub fn orthogonal_group_order(upoints: &UPoints) -> u128 {
    orthogonal_group_bsgs(upoints).order()
}

pub fn orthogonal_group_bsgs(upoints: &UPoints) -> Bsgs {
    let perms: Vec<Perm> = reflection_gens()
        .iter()
        .map(|m| upoints.perm_of(m))
        .collect();
    Bsgs::from_generators(upoints.len(), &perms)
}
