//! Linear algebra over GF(3).
//!
//! Trits are plain `u8` values in `{0, 1, 2}`. Dense matrices ([`TritMat`])
//! store one trit per byte and are used everywhere correctness matters more
//! than speed: reduced row echelon form, kernels, inverses, canonical
//! subspace representatives.
//!
//! Two bit-plane representations serve the hot paths: [`Trit8`] packs a
//! GF(3)^8 vector into two bytes (one bit plane for the 1s, one for the 2s)
//! so that vector addition is six bitwise ops, and [`Trit64`] does the same
//! for GF(3)^64 on a pair of `u64` words.

/// Addition in GF(3).
#[inline]
pub fn add3(a: u8, b: u8) -> u8 {
    let s = a + b;
    if s >= 3 {
        s - 3
    } else {
        s
    }
}

/// Negation in GF(3).
#[inline]
pub fn neg3(a: u8) -> u8 {
    (3 - a) % 3
}

/// Multiplication in GF(3).
#[inline]
pub fn mul3(a: u8, b: u8) -> u8 {
    (a * b) % 3
}

/// Multiplicative inverse; panics on 0. Over GF(3) every nonzero element is
/// its own inverse.
#[inline]
pub fn inv3(a: u8) -> u8 {
    match a {
        1 => 1,
        2 => 2,
        _ => panic!("inv3(0)"),
    }
}

/// Euclidean remainder of an integer mod 3, as a trit.
#[inline]
pub fn trit_of_int(x: i64) -> u8 {
    x.rem_euclid(3) as u8
}

// ---------------------------------------------------------------------------
// Dense matrices.

/// Dense GF(3) matrix, row major, one trit per byte.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TritMat {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for TritMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "TritMat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", row_string(self.row(r)))?;
        }
        write!(f, "]")
    }
}

/// Render a trit slice as a string of `'0'/'1'/'2'`.
pub fn row_string(row: &[u8]) -> String {
    row.iter().map(|&t| char::from(b'0' + t)).collect()
}

/// Parse a string of `'0'/'1'/'2'` into trits.
pub fn parse_row(s: &str) -> Result<Vec<u8>, String> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            '2' => Ok(2),
            _ => Err(format!("invalid trit character {c:?}")),
        })
        .collect()
}

impl TritMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        TritMat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = TritMat::zero(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            debug_assert!(row.iter().all(|&t| t < 3));
            data.extend_from_slice(row);
        }
        TritMat {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut m = TritMat::zero(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u8) {
        debug_assert!(v < 3);
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> TritMat {
        TritMat::from_fn(self.cols, self.rows, |r, c| self.at(c, r))
    }

    /// Matrix product over GF(3).
    pub fn mul(&self, other: &TritMat) -> TritMat {
        assert_eq!(self.cols, other.rows);
        TritMat::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = 0u32;
            for k in 0..self.cols {
                acc += (self.at(r, k) * other.at(k, c)) as u32;
            }
            (acc % 3) as u8
        })
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0u32; self.cols];
        for (r, &coef) in v.iter().enumerate() {
            if coef == 0 {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.row(r)) {
                *o += (coef * m) as u32;
            }
        }
        out.into_iter().map(|x| (x % 3) as u8).collect()
    }

    /// Keep only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> TritMat {
        TritMat::from_fn(self.rows, cols.len(), |r, c| self.at(r, cols[c]))
    }

    /// Stack two matrices with equal column counts.
    pub fn vstack(&self, other: &TritMat) -> TritMat {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        TritMat {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Concatenate two matrices with equal row counts.
    pub fn hstack(&self, other: &TritMat) -> TritMat {
        assert_eq!(self.rows, other.rows);
        TritMat::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.at(r, c)
            } else {
                other.at(r, c - self.cols)
            }
        })
    }

    fn scale_row(&mut self, r: usize, s: u8) {
        for c in 0..self.cols {
            let v = self.at(r, c);
            self.set(r, c, mul3(v, s));
        }
    }

    /// row[dst] += s * row[src]
    fn add_scaled_row(&mut self, dst: usize, src: usize, s: u8) {
        for c in 0..self.cols {
            let v = add3(self.at(dst, c), mul3(s, self.at(src, c)));
            self.set(dst, c, v);
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            let (va, vb) = (self.at(a, c), self.at(b, c));
            self.set(a, c, vb);
            self.set(b, c, va);
        }
    }

    /// In-place reduced row echelon form. Returns (rank, pivot columns).
    pub fn rref_in_place(&mut self) -> (usize, Vec<usize>) {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| self.at(r, col) != 0) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = inv3(self.at(row, col));
            if inv != 1 {
                self.scale_row(row, inv);
            }
            for r in 0..self.rows {
                if r != row {
                    let coef = self.at(r, col);
                    if coef != 0 {
                        self.add_scaled_row(r, row, neg3(coef));
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (row, pivots)
    }

    /// Reduced row echelon form, rank and pivot columns.
    pub fn rref(&self) -> (TritMat, usize, Vec<usize>) {
        let mut m = self.clone();
        let (rank, pivots) = m.rref_in_place();
        (m, rank, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }

    /// Basis of the right kernel `{x : M xᵀ = 0}`, as a canonical subspace.
    pub fn kernel(&self) -> Subspace {
        let (r, rank, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![0u8; self.cols];
            v[f] = 1;
            // Pivot variable value that zeroes each rref row: x[p] = -R[i][f].
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = neg3(r.at(i, f));
            }
            basis.push(v);
        }
        debug_assert_eq!(basis.len(), self.cols - rank);
        Subspace::from_generators(self.cols, &basis)
    }

    /// Left kernel `{x : x M = 0}`.
    pub fn left_kernel(&self) -> Subspace {
        self.transpose().kernel()
    }

    /// Inverse of a square matrix, if it exists.
    pub fn inverse(&self) -> Option<TritMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let aug = self.hstack(&TritMat::identity(n));
        let (r, _, pivots) = aug.rref();
        // Invertible iff every column of the original block is a pivot.
        if pivots.len() < n || pivots[..n] != (0..n).collect::<Vec<_>>()[..] {
            return None;
        }
        Some(TritMat::from_fn(n, n, |i, j| r.at(i, n + j)))
    }

    /// One line per row, trits as characters.
    pub fn to_row_strings(&self) -> Vec<String> {
        (0..self.rows).map(|r| row_string(self.row(r))).collect()
    }

    pub fn from_row_strings<S: AsRef<str>>(lines: &[S]) -> Result<TritMat, String> {
        let rows: Vec<Vec<u8>> = lines
            .iter()
            .map(|l| parse_row(l.as_ref()))
            .collect::<Result<_, _>>()?;
        if rows.is_empty() {
            return Err("empty matrix".into());
        }
        let c = rows[0].len();
        if rows.iter().any(|r| r.len() != c) {
            return Err("ragged rows".into());
        }
        Ok(TritMat::from_rows(&rows))
    }
}

// ---------------------------------------------------------------------------
// Subspaces.

/// A subspace of GF(3)^n held as its canonical reduced-row-echelon basis
/// (no zero rows). Two generator sets spanning the same subspace always
/// produce equal `Subspace` values.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Subspace {
    ambient: usize,
    mat: TritMat,
}

impl Subspace {
    pub fn from_generators(ambient: usize, gens: &[Vec<u8>]) -> Subspace {
        if gens.is_empty() {
            return Subspace {
                ambient,
                mat: TritMat::zero(0, ambient),
            };
        }
        let m = TritMat::from_rows(gens);
        assert_eq!(m.cols(), ambient);
        Subspace::from_matrix(&m)
    }

    /// Subspace spanned by the rows of `m`.
    pub fn from_matrix(m: &TritMat) -> Subspace {
        let (r, rank, _) = m.rref();
        let rows: Vec<Vec<u8>> = (0..rank).map(|i| r.row(i).to_vec()).collect();
        let mat = if rows.is_empty() {
            TritMat::zero(0, m.cols())
        } else {
            TritMat::from_rows(&rows)
        };
        Subspace {
            ambient: m.cols(),
            mat,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// Canonical basis (rref rows, pivot columns ascending).
    pub fn basis(&self) -> &TritMat {
        &self.mat
    }

    /// Reduce `v` against the canonical basis; returns the residue.
    pub fn reduce(&self, v: &[u8]) -> Vec<u8> {
        assert_eq!(v.len(), self.ambient);
        let mut v = v.to_vec();
        for r in 0..self.mat.rows() {
            let pivot = self.mat.row(r).iter().position(|&t| t != 0).unwrap();
            let coef = v[pivot];
            if coef != 0 {
                let neg = neg3(coef);
                for (vc, &mc) in v.iter_mut().zip(self.mat.row(r)) {
                    *vc = add3(*vc, mul3(neg, mc));
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[u8]) -> bool {
        self.reduce(v).iter().all(|&t| t == 0)
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        (0..other.mat.rows()).all(|r| self.contains(other.mat.row(r)))
    }

    /// Coordinates of `v` in the canonical basis, if `v` lies in the
    /// subspace: the entries of `v` at the pivot columns.
    pub fn coordinates(&self, v: &[u8]) -> Option<Vec<u8>> {
        if !self.contains(v) {
            return None;
        }
        let coords = (0..self.mat.rows())
            .map(|r| {
                let pivot = self.mat.row(r).iter().position(|&t| t != 0).unwrap();
                v[pivot]
            })
            .collect();
        Some(coords)
    }

    /// Sum of subspaces.
    pub fn join(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        Subspace::from_matrix(&self.mat.vstack(&other.mat))
    }

    /// Intersection of subspaces (via kernel of the stacked generator
    /// matrix).
    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::from_generators(self.ambient, &[]);
        }
        // x = a·A = b·B  ⇔  (a, b) ∈ ker [A; -B]ᵀ.
        let stacked = self.mat.vstack(&other.mat).transpose();
        let mut neg = stacked.clone();
        for r in 0..neg.rows() {
            for c in self.dim()..neg.cols() {
                let v = neg.at(r, c);
                neg.set(r, c, neg3(v));
            }
        }
        let ker = neg.kernel();
        let gens: Vec<Vec<u8>> = (0..ker.dim())
            .map(|i| {
                let coef = &ker.basis().row(i)[..self.dim()];
                self.mat.vec_mul(coef)
            })
            .collect();
        Subspace::from_generators(self.ambient, &gens)
    }

    /// All 3^dim member vectors, in lexicographic coefficient order.
    pub fn elements(&self) -> Vec<Vec<u8>> {
        let d = self.dim();
        let mut out = Vec::with_capacity(3usize.pow(d as u32));
        let mut coef = vec![0u8; d];
        loop {
            out.push(self.mat.vec_mul(&coef));
            // increment base-3 counter
            let mut i = 0;
            while i < d {
                coef[i] += 1;
                if coef[i] < 3 {
                    break;
                }
                coef[i] = 0;
                i += 1;
            }
            if i == d {
                break;
            }
        }
        out
    }

    /// Packed canonical key: two bits per trit of the basis matrix, row
    /// major, prefixed with the dimension. Ambient × dim must fit 60 trits.
    pub fn packed_key(&self) -> u128 {
        let n = self.mat.rows() * self.mat.cols();
        assert!(n <= 60, "packed_key supports up to 60 trits");
        let mut key: u128 = self.mat.rows() as u128;
        for r in 0..self.mat.rows() {
            for &t in self.mat.row(r) {
                key = key << 2 | t as u128;
            }
        }
        key
    }
}

// ---------------------------------------------------------------------------
// Bit-plane packed vectors.

/// GF(3)^8 packed as two bit planes: bit i of `ones` set iff trit i == 1,
/// bit i of `twos` set iff trit i == 2.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Trit8 {
    pub ones: u8,
    pub twos: u8,
}

impl Trit8 {
    pub const ZERO: Trit8 = Trit8 { ones: 0, twos: 0 };

    #[inline]
    pub fn from_trits(trits: &[u8]) -> Trit8 {
        debug_assert!(trits.len() <= 8);
        let mut ones = 0u8;
        let mut twos = 0u8;
        for (i, &t) in trits.iter().enumerate() {
            match t {
                1 => ones |= 1 << i,
                2 => twos |= 1 << i,
                _ => debug_assert_eq!(t, 0),
            }
        }
        Trit8 { ones, twos }
    }

    #[inline]
    pub fn trit(self, i: usize) -> u8 {
        (self.ones >> i & 1) + 2 * (self.twos >> i & 1)
    }

    pub fn trits(self) -> [u8; 8] {
        std::array::from_fn(|i| self.trit(i))
    }

    /// 16-bit table key: `ones | twos << 8`.
    #[inline]
    pub fn key(self) -> u16 {
        self.ones as u16 | (self.twos as u16) << 8
    }

    #[inline]
    pub fn from_key(k: u16) -> Trit8 {
        Trit8 {
            ones: k as u8,
            twos: (k >> 8) as u8,
        }
    }

    /// Whether the bit planes are disjoint (every valid Trit8 is; useful to
    /// reject arbitrary u16 keys).
    #[inline]
    pub fn key_is_valid(k: u16) -> bool {
        (k as u8) & ((k >> 8) as u8) == 0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.ones == 0 && self.twos == 0
    }

    #[inline]
    pub fn add(self, rhs: Trit8) -> Trit8 {
        let a0 = !(self.ones | self.twos);
        let b0 = !(rhs.ones | rhs.twos);
        Trit8 {
            ones: (a0 & rhs.ones) | (self.ones & b0) | (self.twos & rhs.twos),
            twos: (a0 & rhs.twos) | (self.twos & b0) | (self.ones & rhs.ones),
        }
    }

    #[inline]
    pub fn neg(self) -> Trit8 {
        Trit8 {
            ones: self.twos,
            twos: self.ones,
        }
    }

    #[inline]
    pub fn sub(self, rhs: Trit8) -> Trit8 {
        self.add(rhs.neg())
    }

    #[inline]
    pub fn scale(self, t: u8) -> Trit8 {
        match t {
            0 => Trit8::ZERO,
            1 => self,
            2 => self.neg(),
            _ => panic!("scale by non-trit"),
        }
    }

    /// Base-3 index in 0..6561 (trit 0 is the most significant digit).
    pub fn index(self) -> usize {
        self.trits()
            .iter()
            .fold(0usize, |acc, &t| acc * 3 + t as usize)
    }

    /// Iterate all 6561 vectors.
    pub fn all() -> impl Iterator<Item = Trit8> {
        (0..6561usize).map(|mut i| {
            let mut trits = [0u8; 8];
            for k in (0..8).rev() {
                trits[k] = (i % 3) as u8;
                i /= 3;
            }
            Trit8::from_trits(&trits)
        })
    }
}

/// GF(3)^64 packed as two `u64` bit planes. Used for fast membership
/// reduction of 64-trit vectors against up-to-64 echelon rows.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default)]
pub struct Trit64 {
    pub ones: u64,
    pub twos: u64,
}

impl Trit64 {
    pub const ZERO: Trit64 = Trit64 { ones: 0, twos: 0 };

    pub fn from_trits(trits: &[u8]) -> Trit64 {
        debug_assert!(trits.len() <= 64);
        let mut ones = 0u64;
        let mut twos = 0u64;
        for (i, &t) in trits.iter().enumerate() {
            match t {
                1 => ones |= 1 << i,
                2 => twos |= 1 << i,
                _ => debug_assert_eq!(t, 0),
            }
        }
        Trit64 { ones, twos }
    }

    #[inline]
    pub fn trit(self, i: usize) -> u8 {
        ((self.ones >> i) & 1) as u8 + 2 * ((self.twos >> i) & 1) as u8
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.ones == 0 && self.twos == 0
    }

    #[inline]
    pub fn add(self, rhs: Trit64) -> Trit64 {
        let a0 = !(self.ones | self.twos);
        let b0 = !(rhs.ones | rhs.twos);
        Trit64 {
            ones: (a0 & rhs.ones) | (self.ones & b0) | (self.twos & rhs.twos),
            twos: (a0 & rhs.twos) | (self.twos & b0) | (self.ones & rhs.ones),
        }
    }

    #[inline]
    pub fn neg(self) -> Trit64 {
        Trit64 {
            ones: self.twos,
            twos: self.ones,
        }
    }

    #[inline]
    pub fn sub(self, rhs: Trit64) -> Trit64 {
        self.add(rhs.neg())
    }

    #[inline]
    pub fn scale(self, t: u8) -> Trit64 {
        match t {
            0 => Trit64::ZERO,
            1 => self,
            2 => self.neg(),
            _ => panic!("scale by non-trit"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn field_tables() {
        for a in 0..3u8 {
            for b in 0..3u8 {
                assert_eq!(add3(a, b), (a + b) % 3);
                assert_eq!(mul3(a, b), (a * b) % 3);
            }
            assert_eq!(add3(a, neg3(a)), 0);
        }
        assert_eq!(inv3(1), 1);
        assert_eq!(inv3(2), 2);
        assert_eq!(trit_of_int(-1), 2);
        assert_eq!(trit_of_int(-3), 0);
        assert_eq!(trit_of_int(7), 1);
    }

    #[test]
    fn rref_collapses_dependent_rows() {
        // Second row is twice the first.
        let m = TritMat::from_rows(&[vec![1, 2, 0], vec![2, 1, 0]]);
        let (r, rank, pivots) = m.rref();
        assert_eq!(rank, 1);
        assert_eq!(pivots, vec![0]);
        assert_eq!(r.row(0), &[1, 2, 0]);
    }

    #[test]
    fn rref_hand_example() {
        // Third row is the sum of the first two.
        let m = TritMat::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 2, 1]]);
        let (r, rank, _) = m.rref();
        assert_eq!(rank, 2);
        assert_eq!(r.row(0), &[1, 0, 2]);
        assert_eq!(r.row(1), &[0, 1, 1]);
    }

    #[test]
    fn kernel_hand_example() {
        let m = TritMat::from_rows(&[vec![1, 0, 2], vec![0, 1, 1]]);
        let k = m.kernel();
        assert_eq!(k.dim(), 1);
        assert_eq!(k.basis().row(0), &[1, 2, 1]);
    }

    #[test]
    fn inverse_roundtrip() {
        let m = TritMat::from_rows(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        let inv = m.inverse().expect("invertible");
        assert_eq!(m.mul(&inv), TritMat::identity(3));
        assert_eq!(inv.mul(&m), TritMat::identity(3));

        let singular = TritMat::from_rows(&[vec![1, 2], vec![2, 1]]);
        assert!(singular.inverse().is_none());
    }

    #[test]
    fn subspace_membership_and_coordinates() {
        let s = Subspace::from_generators(4, &[vec![1, 0, 2, 1], vec![0, 1, 1, 0]]);
        assert_eq!(s.dim(), 2);
        let v = s.basis().vec_mul(&[2, 1]);
        assert!(s.contains(&v));
        assert_eq!(s.coordinates(&v), Some(vec![2, 1]));
        assert!(!s.contains(&[0, 0, 1, 0]));
        assert_eq!(s.coordinates(&[0, 0, 1, 0]), None);
    }

    #[test]
    fn subspace_elements_count() {
        let s = Subspace::from_generators(3, &[vec![1, 0, 1], vec![0, 1, 2]]);
        let els = s.elements();
        assert_eq!(els.len(), 9);
        let distinct: std::collections::HashSet<_> = els.iter().cloned().collect();
        assert_eq!(distinct.len(), 9);
    }

    #[test]
    fn intersection_and_join() {
        let a = Subspace::from_generators(4, &[vec![1, 0, 0, 0], vec![0, 1, 0, 0]]);
        let b = Subspace::from_generators(4, &[vec![0, 1, 0, 0], vec![0, 0, 1, 0]]);
        let meet = a.intersect(&b);
        assert_eq!(meet.dim(), 1);
        assert_eq!(meet.basis().row(0), &[0, 1, 0, 0]);
        assert_eq!(a.join(&b).dim(), 3);
    }

    #[test]
    fn row_string_roundtrip() {
        let m = TritMat::from_rows(&[vec![0, 1, 2], vec![2, 2, 0]]);
        let lines = m.to_row_strings();
        assert_eq!(lines, vec!["012", "220"]);
        let back = TritMat::from_row_strings(&lines).unwrap();
        assert_eq!(back, m);
        assert!(TritMat::from_row_strings(&["013"]).is_err());
    }

    #[test]
    fn trit8_add_matches_dense() {
        for a in [0usize, 1, 40, 6560, 3280] {
            for b in [0usize, 2, 81, 6559, 4000] {
                let va: Vec<u8> = index_to_trits(a);
                let vb: Vec<u8> = index_to_trits(b);
                let pa = Trit8::from_trits(&va);
                let pb = Trit8::from_trits(&vb);
                let sum: Vec<u8> = va.iter().zip(&vb).map(|(&x, &y)| add3(x, y)).collect();
                assert_eq!(pa.add(pb), Trit8::from_trits(&sum));
                assert_eq!(pa.add(pa.neg()), Trit8::ZERO);
            }
        }
    }

    fn index_to_trits(mut i: usize) -> Vec<u8> {
        let mut trits = vec![0u8; 8];
        for k in (0..8).rev() {
            trits[k] = (i % 3) as u8;
            i /= 3;
        }
        trits
    }

    #[test]
    fn trit8_index_roundtrip() {
        let mut seen = std::collections::HashSet::new();
        for v in Trit8::all() {
            assert!(Trit8::key_is_valid(v.key()));
            assert_eq!(Trit8::from_key(v.key()), v);
            assert!(seen.insert(v.index()));
        }
        assert_eq!(seen.len(), 6561);
        assert_eq!(seen.iter().max(), Some(&6560));
    }

    fn arb_tritvec(len: usize) -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..3, len)
    }

    fn arb_tritmat(rows: usize, cols: usize) -> impl Strategy<Value = TritMat> {
        proptest::collection::vec(arb_tritvec(cols), rows).prop_map(|r| TritMat::from_rows(&r))
    }

    proptest! {
        #[test]
        fn rref_is_idempotent(m in arb_tritmat(5, 7)) {
            let (r, rank, pivots) = m.rref();
            let (r2, rank2, pivots2) = r.rref();
            prop_assert_eq!(r, r2);
            prop_assert_eq!(rank, rank2);
            prop_assert_eq!(pivots, pivots2);
        }

        #[test]
        fn rank_nullity(m in arb_tritmat(6, 9)) {
            prop_assert_eq!(m.rank() + m.kernel().dim(), 9);
        }

        #[test]
        fn kernel_annihilates(m in arb_tritmat(4, 6)) {
            let k = m.kernel();
            for i in 0..k.dim() {
                let prod = m.mul(&TritMat::from_rows(&[k.basis().row(i).to_vec()]).transpose());
                prop_assert!((0..prod.rows()).all(|r| prod.at(r, 0) == 0));
            }
        }

        #[test]
        fn rref_preserves_rowspace(m in arb_tritmat(5, 6)) {
            let s = Subspace::from_matrix(&m);
            for r in 0..m.rows() {
                prop_assert!(s.contains(m.row(r)));
            }
            prop_assert_eq!(s.dim(), m.rank());
        }

        #[test]
        fn canonical_basis_ignores_generator_presentation(
            m in arb_tritmat(4, 6),
            perm_seed in 0u64..1000,
            coefs in proptest::collection::vec(1u8..3, 4),
        ) {
            // Mix rows: scale each by a unit and add a multiple of another row.
            let mut rows = m.row_vecs();
            let n = rows.len();
            for i in 0..n {
                let j = ((perm_seed as usize) + i * 7) % n;
                if i != j {
                    let src = rows[j].clone();
                    for (d, s) in rows[i].iter_mut().zip(&src) {
                        *d = add3(*d, mul3(coefs[i % coefs.len()], *s));
                    }
                }
            }
            rows.rotate_left((perm_seed as usize) % n.max(1));
            let mixed = TritMat::from_rows(&rows);
            prop_assert_eq!(
                Subspace::from_matrix(&m),
                Subspace::from_matrix(&mixed)
            );
        }

        #[test]
        fn trit8_add_random(a in 0usize..6561, b in 0usize..6561) {
            let va = index_to_trits(a);
            let vb = index_to_trits(b);
            let sum: Vec<u8> = va.iter().zip(&vb).map(|(&x, &y)| add3(x, y)).collect();
            prop_assert_eq!(
                Trit8::from_trits(&va).add(Trit8::from_trits(&vb)),
                Trit8::from_trits(&sum)
            );
        }

        #[test]
        fn trit64_matches_dense(a in arb_tritvec(64), b in arb_tritvec(64)) {
            let pa = Trit64::from_trits(&a);
            let pb = Trit64::from_trits(&b);
            let sum: Vec<u8> = a.iter().zip(&b).map(|(&x, &y)| add3(x, y)).collect();
            prop_assert_eq!(pa.add(pb), Trit64::from_trits(&sum));
            let diff: Vec<u8> = a.iter().zip(&b).map(|(&x, &y)| add3(x, neg3(y))).collect();
            prop_assert_eq!(pa.sub(pb), Trit64::from_trits(&diff));
            for i in 0..64 {
                prop_assert_eq!(pa.trit(i), a[i]);
            }
        }
    }
}
