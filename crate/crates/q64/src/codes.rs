//! Ternary codes over the pair geometry.
//!
//! Fix eight complement pairs `Δ = ((V₁,W₁), …, (V₈,W₈))`. The products
//! `V_T = V₁×…×V₈` and `W_T = W₁×…×W₈` are 32-dimensional GF(3) spaces, in
//! coordinates: 4 trits per factor against the canonical basis of `Vᵢ`
//! (respectively the dual basis of `Wᵢ`). In those coordinates the pairing
//! `V_T × W_T → GF(3)` is the standard dot product, so the annihilator of a
//! code `B ⊂ V_T` is a plain kernel computation.
//!
//! A code `B` of dimension 8 is *admissible* when every projection onto a
//! pair of factors is bijective (the pair condition); its annihilator
//! `B⊥ ⊂ W_T` of dimension 24 then projects bijectively onto every six
//! factors. Two constructions are provided: uniformly random codes in the
//! form `[I₈ | G′]`, and cyclic codes spanned by the orbit of one vector
//! under the twisted factor rotation `x ↦ (x₂^γ, …, x₈^γ, x₁^γ)` for an
//! order-8 element `γ` of a pair stabilizer.
//!
//! The echelon form at the end of this module reshapes `B ⊕ B⊥` (as a
//! 32-dimensional subspace of `U⁸`, 8 trits per factor) into the block
//! structure consumed by the minimal-vector backtrack: identity blocks on
//! the first two factors, and one 4-dimensional free block per middle
//! factor whose rows vanish on the other middle factors.

use crate::e8::{Mat8, UAction};
use crate::gf3::{row_string, Subspace, Trit8, TritMat};
use crate::isotropic::{Delta, IsoPair, PairType};
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// An 8-dimensional admissible code in `V_T`, stored as its canonical
/// reduced-echelon generator matrix (8×32, V-coordinates).
#[derive(Clone)]
pub struct Code {
    pub delta: Delta,
    pub mat: TritMat,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Random {
        seed: u64,
        /// Matrices drawn until the pair condition held.
        draws: u32,
    },
    Cyclic {
        seed: u64,
        draws: u32,
        /// Index into the sorted order-8 census of the pair stabilizer.
        gamma_index: usize,
        /// The order-8 matrix itself (acts on the right).
        gamma: Vec<Vec<i64>>,
        /// Seed vector of the orbit, 32 trits in V-coordinates.
        v: String,
    },
}

impl Code {
    /// Dimension-8 check plus canonicalization; rejects rank-deficient
    /// generator sets.
    pub fn from_generators(delta: Delta, gens: &TritMat, provenance: Provenance) -> Result<Code> {
        assert_eq!(gens.cols(), 32);
        let (mat, rank, _) = gens.rref();
        if rank != 8 || gens.rows() != 8 {
            return Err(Error::invalid(format!(
                "code must have dimension 8, got rank {rank}"
            )));
        }
        Ok(Code {
            delta,
            mat,
            provenance,
        })
    }

    /// Annihilator `B⊥ ⊂ W_T`: 24×32 canonical matrix in W-coordinates.
    pub fn annihilator(&self) -> TritMat {
        let ker = self.mat.kernel();
        assert_eq!(ker.dim(), 24);
        ker.basis().clone()
    }

    /// The pair condition: every projection onto two factors is bijective.
    pub fn satisfies_pair_condition(&self) -> bool {
        pair_condition(&self.mat)
    }

    /// Generator matrix of `B ⊕ B⊥` inside `U⁸`, 32×64 in e-coordinates
    /// (8 trits per factor): first the 8 rows of `B`, then the 24 rows of
    /// `B⊥`.
    pub fn stacked_u_generators(&self) -> TritMat {
        let mut rows: Vec<Vec<u8>> = Vec::with_capacity(32);
        for r in 0..8 {
            rows.push(flatten(&vt_to_u(&self.delta, self.mat.row(r))));
        }
        let ann = self.annihilator();
        for r in 0..24 {
            rows.push(flatten(&wt_to_u(&self.delta, ann.row(r))));
        }
        TritMat::from_rows(&rows)
    }
}

/// Map 32 V-coordinates (4 per factor) to the eight U-vectors.
pub fn vt_to_u(delta: &Delta, coords: &[u8]) -> [Trit8; 8] {
    factor_map(coords, |f| &delta.pairs[f].v_basis)
}

/// Map 32 W-coordinates (dual basis, 4 per factor) to the eight U-vectors.
pub fn wt_to_u(delta: &Delta, coords: &[u8]) -> [Trit8; 8] {
    factor_map(coords, |f| &delta.pairs[f].w_dual)
}

fn factor_map<'a>(coords: &[u8], basis: impl Fn(usize) -> &'a [Trit8; 4]) -> [Trit8; 8] {
    assert_eq!(coords.len(), 32);
    std::array::from_fn(|f| {
        let b = basis(f);
        let mut acc = Trit8::ZERO;
        for k in 0..4 {
            acc = acc.add(b[k].scale(coords[4 * f + k]));
        }
        acc
    })
}

fn flatten(factors: &[Trit8; 8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(64);
    for t in factors {
        out.extend_from_slice(&t.trits());
    }
    out
}

/// Every projection of an 8×32 generator matrix onto two factor blocks has
/// full rank 8.
pub fn pair_condition(mat: &TritMat) -> bool {
    debug_assert_eq!((mat.rows(), mat.cols()), (8, 32));
    for i in 0..8 {
        for j in i + 1..8 {
            let cols: Vec<usize> = (4 * i..4 * i + 4).chain(4 * j..4 * j + 4).collect();
            if mat.select_columns(&cols).rank() != 8 {
                return false;
            }
        }
    }
    true
}

/// Every projection of the 24×32 annihilator onto six factor blocks has
/// full rank 24 (equivalently: nothing vanishes on six factors).
pub fn six_factor_condition(ann: &TritMat) -> bool {
    debug_assert_eq!((ann.rows(), ann.cols()), (24, 32));
    for i in 0..8 {
        for j in i + 1..8 {
            let cols: Vec<usize> = (0..8)
                .filter(|f| *f != i && *f != j)
                .flat_map(|f| 4 * f..4 * f + 4)
                .collect();
            if ann.select_columns(&cols).rank() != 24 {
                return false;
            }
        }
    }
    true
}

/// Draw random codes `[I₈ | G′]` until the pair condition holds.
///
/// Accepting a uniformly random `G′` outright would succeed with
/// probability ≈ 10⁻⁷ (28 nearly independent nonsingularity events), so the
/// rejection is staged: each factor block of `G′` is redrawn until its top
/// and bottom 4×4 halves are invertible — precisely the pair conditions
/// against the two identity factors — and then the whole candidate is
/// accepted or rejected on the remaining 15 cross pairs. The accepted
/// matrix is still uniform among admissible ones of this shape.
pub fn random_code(types: [PairType; 8], seed: u64) -> Code {
    let delta = Delta::from_types(types);
    let mut rng = crate::io::rng_for("code-random", seed);
    let mut draws = 0u32;
    loop {
        draws += 1;
        assert!(
            draws < 1_000_000,
            "pair condition rejected implausibly many candidates"
        );
        let mut mat = TritMat::zero(8, 32);
        for r in 0..8 {
            mat.set(r, r, 1);
        }
        for f in 2..8 {
            loop {
                for r in 0..8 {
                    for c in 0..4 {
                        mat.set(r, 4 * f + c, rng.gen_range(0..3u8));
                    }
                }
                let block = |rows: std::ops::Range<usize>| {
                    TritMat::from_fn(4, 4, |r, c| mat.at(rows.start + r, 4 * f + c))
                };
                if block(0..4).rank() == 4 && block(4..8).rank() == 4 {
                    break;
                }
            }
        }
        if !cross_pairs_ok(&mat) {
            continue;
        }
        assert!(pair_condition(&mat));
        return Code::from_generators(delta, &mat, Provenance::Random { seed, draws })
            .expect("[I|G'] has rank 8");
    }
}

/// Pair condition restricted to pairs not involving the identity factors.
fn cross_pairs_ok(mat: &TritMat) -> bool {
    for i in 2..8 {
        for j in i + 1..8 {
            let cols: Vec<usize> = (4 * i..4 * i + 4).chain(4 * j..4 * j + 4).collect();
            if mat.select_columns(&cols).rank() != 8 {
                return false;
            }
        }
    }
    true
}

/// Matrix of the restriction of `γ` to `V` in the canonical basis: row `i`
/// holds the coordinates of `v_basis[i]·γ`.
pub fn gamma_on_v(pair: &IsoPair, gamma: &Mat8) -> TritMat {
    let action = UAction::of(gamma);
    TritMat::from_fn(4, 4, |i, j| {
        let img = action.apply(pair.v_basis[i]);
        let coords = pair
            .v
            .coordinates(&img.trits())
            .expect("gamma must stabilize V");
        coords[j]
    })
}

/// Twisted rotation on V-coordinates: factor `i` of the output is factor
/// `i+1` of the input acted on by `γ|V` (indices mod 8).
pub fn rotate_twist(coords: &[u8], rv: &TritMat) -> Vec<u8> {
    assert_eq!(coords.len(), 32);
    let mut out = vec![0u8; 32];
    for i in 0..8 {
        let src = (i + 1) % 8;
        let img = rv.vec_mul(&coords[4 * src..4 * src + 4]);
        out[4 * i..4 * i + 4].copy_from_slice(&img);
    }
    out
}

/// Search for a cyclic code: pick an order-8 element from the census
/// (seeded), then draw orbit seeds until the orbit spans an admissible
/// 8-dimensional code.
///
/// For a rotation-invariant code, bijectivity of the projection to factors
/// `(i, j)` depends only on `j − i mod 8` (rotating by one factor carries
/// one projection onto the next, twisted by the invertible `γ|V`), so only
/// the four gaps 1..4 are checked per draw.
pub fn cyclic_code(pair_type: PairType, census: &[Mat8], seed: u64) -> Code {
    let delta = Delta::uniform(pair_type);
    let mut rng = crate::io::rng_for("code-cyclic", seed);
    let gamma_index = rng.gen_range(0..census.len());
    let gamma = census[gamma_index];
    let rv = gamma_on_v(&delta.pairs[0], &gamma);
    let mut draws = 0u32;
    loop {
        draws += 1;
        assert!(
            draws < 10_000_000,
            "cyclic orbit rejected implausibly many draws"
        );
        let v: Vec<u8> = (0..32).map(|_| rng.gen_range(0..3u8)).collect();
        let mut rows = Vec::with_capacity(8);
        let mut cur = v.clone();
        for _ in 0..8 {
            rows.push(cur.clone());
            cur = rotate_twist(&cur, &rv);
        }
        debug_assert_eq!(cur, v, "twisted rotation must have order dividing 8");
        let orbit = TritMat::from_rows(&rows);
        if orbit.rank() != 8 {
            continue;
        }
        let gaps_ok = (1..=4).all(|d| {
            let cols: Vec<usize> = (0..4).chain(4 * d..4 * d + 4).collect();
            orbit.select_columns(&cols).rank() == 8
        });
        if !gaps_ok {
            continue;
        }
        assert!(pair_condition(&orbit.rref().0));
        let provenance = Provenance::Cyclic {
            seed,
            draws,
            gamma_index,
            gamma: gamma.iter().map(|r| r.to_vec()).collect(),
            v: row_string(&v),
        };
        return Code::from_generators(delta, &orbit, provenance).expect("rank checked");
    }
}

// ---------------------------------------------------------------------------
// Echelon form for the backtrack.

/// Permute factor blocks of a matrix over `U⁸`: column block `i` of the
/// result is column block `tau[i]` of the input (so row vectors transform
/// as `x ↦ (x_{τ(1)}, …, x_{τ(8)})`).
pub fn permute_factor_columns(m: &TritMat, tau: &[usize; 8]) -> TritMat {
    let cols: Vec<usize> = tau.iter().flat_map(|&f| 8 * f..8 * f + 8).collect();
    m.select_columns(&cols)
}

/// One free middle factor of the echelon form: 4 rows supported on this
/// factor and the last two.
pub struct FreeBlock {
    /// 4×8, rank 4: the rows' footprint on their own factor.
    pub a: TritMat,
    /// 4×8 contributions to factor 7 (0-indexed 6).
    pub t7: TritMat,
    /// 4×8 contributions to factor 8 (0-indexed 7).
    pub t8: TritMat,
}

/// Echelon decomposition of a 32-dimensional code `C ⊂ U⁸` whose projection
/// to the first two factors is bijective:
///
/// * rows 1–8: identity on factor 1, zero on factor 2, cross blocks
///   `c1[k]` on factors 3..8;
/// * rows 9–16: zero/identity on factors 1/2, cross blocks `c2[k]`;
/// * for each middle factor `t ∈ {3,4,5,6}`: four rows vanishing on the
///   other middle factors, with invertible footprint `a` on factor `t` and
///   tails on factors 7, 8.
///
/// Every codeword is then reachable as
/// `x̄₁·row-group1 + x̄₂·row-group2 + Σ_t ū_t·group_t` with
/// `(x̄₁, x̄₂) ∈ U²` free and `ū_t ∈ GF(3)⁴` free, which is exactly the
/// search order of the minimal-vector backtrack.
pub struct EchelonForm {
    pub c1: [TritMat; 6],
    pub c2: [TritMat; 6],
    pub free: [FreeBlock; 4],
    /// Row space, for membership checks.
    pub space: Subspace,
}

impl EchelonForm {
    /// Decompose `m` (32×64 over `U⁸`). Fails when the projection to the
    /// first two factors is not bijective or a free block degenerates —
    /// both symptoms of a code violating the pair/six-factor conditions.
    pub fn new(m: &TritMat) -> Result<EchelonForm> {
        assert_eq!((m.rows(), m.cols()), (32, 64));
        let (r, rank, pivots) = m.rref();
        if rank != 32 {
            return Err(Error::invalid(format!(
                "expected a 32-dimensional code, rank {rank}"
            )));
        }
        if pivots[..16] != (0..16).collect::<Vec<_>>()[..] {
            return Err(Error::invalid(
                "projection to the first two factors is not bijective",
            ));
        }
        let block = |rows: std::ops::Range<usize>, factor: usize| {
            TritMat::from_fn(rows.len(), 8, |i, j| r.at(rows.start + i, 8 * factor + j))
        };
        let c1: [TritMat; 6] = std::array::from_fn(|k| block(0..8, k + 2));
        let c2: [TritMat; 6] = std::array::from_fn(|k| block(8..16, k + 2));

        // Rows 17..32 are the kernel of the projection to factors 1, 2.
        let tail = TritMat::from_rows(&(16..32).map(|i| r.row(i).to_vec()).collect::<Vec<_>>());
        let mut blocks = Vec::with_capacity(4);
        for t in 0..4 {
            match Self::free_block(&tail, t + 2) {
                Some(b) => blocks.push(b),
                None => {
                    return Err(Error::invalid(format!(
                        "free block on factor {} is degenerate",
                        t + 3
                    )))
                }
            }
        }
        let free: [FreeBlock; 4] = match blocks.try_into() {
            Ok(arr) => arr,
            Err(_) => unreachable!("exactly four blocks pushed"),
        };

        let space = Subspace::from_matrix(m);
        let form = EchelonForm {
            c1,
            c2,
            free,
            space,
        };
        form.verify(m)?;
        Ok(form)
    }

    /// Rows of `tail` vanishing on all middle factors except `factor`,
    /// canonicalized; rank of the own-factor footprint must be 4.
    fn free_block(tail: &TritMat, factor: usize) -> Option<FreeBlock> {
        // Left kernel of the columns of the *other* middle factors.
        let other_cols: Vec<usize> = (2..6)
            .filter(|f| *f != factor)
            .flat_map(|f| 8 * f..8 * f + 8)
            .collect();
        let sub = tail.select_columns(&other_cols);
        let lk = sub.left_kernel();
        if lk.dim() != 4 {
            return None;
        }
        let rows: Vec<Vec<u8>> = (0..4).map(|i| tail.vec_mul(lk.basis().row(i))).collect();
        let group = Subspace::from_generators(64, &rows);
        if group.dim() != 4 {
            return None;
        }
        let g = group.basis();
        let cut = |f: usize| TritMat::from_fn(4, 8, |i, j| g.at(i, 8 * f + j));
        let a = cut(factor);
        if a.rank() != 4 {
            return None;
        }
        // The construction forces zeros outside {own factor, 7, 8}; check.
        for i in 0..4 {
            for f in 0..6 {
                if f != factor && (0..8).any(|j| g.at(i, 8 * f + j) != 0) {
                    return None;
                }
            }
        }
        Some(FreeBlock {
            a,
            t7: cut(6),
            t8: cut(7),
        })
    }

    /// The decomposition must regenerate exactly the original row space and
    /// the advertised block identities.
    fn verify(&self, original: &TritMat) -> Result<()> {
        let mut rows: Vec<Vec<u8>> = Vec::with_capacity(32);
        for r in 0..8 {
            rows.push(self.row_group1(r));
        }
        for r in 0..8 {
            rows.push(self.row_group2(r));
        }
        for (t, f) in self.free.iter().enumerate() {
            for i in 0..4 {
                let mut row = vec![0u8; 64];
                for j in 0..8 {
                    row[8 * (t + 2) + j] = f.a.at(i, j);
                    row[8 * 6 + j] = f.t7.at(i, j);
                    row[8 * 7 + j] = f.t8.at(i, j);
                }
                rows.push(row);
            }
        }
        let rebuilt = Subspace::from_generators(64, &rows);
        if rebuilt != Subspace::from_matrix(original) {
            return Err(Error::verification(
                "echelon blocks do not regenerate the code",
            ));
        }
        Ok(())
    }

    fn row_group1(&self, r: usize) -> Vec<u8> {
        let mut row = vec![0u8; 64];
        row[r] = 1;
        for k in 0..6 {
            for j in 0..8 {
                row[8 * (k + 2) + j] = self.c1[k].at(r, j);
            }
        }
        row
    }

    fn row_group2(&self, r: usize) -> Vec<u8> {
        let mut row = vec![0u8; 64];
        row[8 + r] = 1;
        for k in 0..6 {
            for j in 0..8 {
                row[8 * (k + 2) + j] = self.c2[k].at(r, j);
            }
        }
        row
    }
}

// ---------------------------------------------------------------------------
// Serialization.

pub const CODE_FORMAT: &str = "q64-code-v1";

#[derive(Serialize, Deserialize)]
pub struct CodeFile {
    pub format: String,
    /// Pair type per factor ("I" or "II"); the pairs themselves are the
    /// pinned references.
    pub pair_types: Vec<String>,
    /// 8 rows of 32 trits, V-coordinates, canonical echelon form.
    pub generators: Vec<String>,
    pub provenance: Provenance,
}

impl Code {
    pub fn to_file(&self) -> CodeFile {
        let types = self
            .delta
            .types
            .expect("only reference-pair deltas are serializable");
        CodeFile {
            format: CODE_FORMAT.to_string(),
            pair_types: types.iter().map(|t| t.as_str().to_string()).collect(),
            generators: self.mat.to_row_strings(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn from_file(file: &CodeFile) -> Result<Code> {
        if file.format != CODE_FORMAT {
            return Err(Error::invalid(format!(
                "unsupported code format {:?}",
                file.format
            )));
        }
        if file.pair_types.len() != 8 {
            return Err(Error::invalid("expected 8 pair types"));
        }
        let mut types = [PairType::I; 8];
        for (i, s) in file.pair_types.iter().enumerate() {
            types[i] = PairType::parse(s)?;
        }
        let mat = TritMat::from_row_strings(&file.generators).map_err(Error::invalid)?;
        if (mat.rows(), mat.cols()) != (8, 32) {
            return Err(Error::invalid("generator matrix must be 8×32"));
        }
        Code::from_generators(Delta::from_types(types), &mat, file.provenance.clone())
    }

    /// The recorded order-8 matrix for cyclic codes.
    pub fn gamma(&self) -> Option<Mat8> {
        match &self.provenance {
            Provenance::Cyclic { gamma, .. } => {
                let mut m = [[0i64; 8]; 8];
                for i in 0..8 {
                    for j in 0..8 {
                        m[i][j] = gamma[i][j];
                    }
                }
                Some(m)
            }
            _ => None,
        }
    }
}
