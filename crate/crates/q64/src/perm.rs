//! Permutation groups on up to 65535 points: orbits, stabilizer chains, and
//! exact group orders via a deterministic incremental Schreier–Sims.
//!
//! Permutations act on the right: `x^(ab) = (x^a)^b`, so
//! `compose(a, b)[x] = b[a[x]]`. The [`Bsgs`] (base and strong generating
//! set) maintains one level per base point. Each level stores the orbit of
//! its base point under the strong generators fixing all earlier base
//! points, an explicit transversal permutation per orbit point, and a queue
//! of (orbit point, generator) pairs whose Schreier generators still have to
//! be sifted. The structure is fully deterministic: base points are the
//! smallest moved points, orbits grow in scan order, and pending pairs are
//! processed FIFO.

use std::collections::VecDeque;

/// A permutation of `0..degree` stored as its image table.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Perm {
    img: Box<[u16]>,
}

impl std::fmt::Debug for Perm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Perm{:?}", &self.img[..self.img.len().min(16)])
    }
}

impl Perm {
    pub fn identity(degree: usize) -> Perm {
        Perm {
            img: (0..degree as u16).collect(),
        }
    }

    pub fn from_images(img: Vec<u16>) -> Perm {
        debug_assert!(is_bijection(&img), "not a permutation");
        Perm {
            img: img.into_boxed_slice(),
        }
    }

    pub fn degree(&self) -> usize {
        self.img.len()
    }

    #[inline]
    pub fn apply(&self, x: u16) -> u16 {
        self.img[x as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(i, &v)| i as u16 == v)
    }

    /// First composition operand applied first: `compose(a, b)[x] = b[a[x]]`.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm {
            img: self.img.iter().map(|&x| other.img[x as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u16; self.img.len()];
        for (i, &v) in self.img.iter().enumerate() {
            inv[v as usize] = i as u16;
        }
        Perm {
            img: inv.into_boxed_slice(),
        }
    }

    /// Smallest moved point, if any.
    pub fn first_moved_point(&self) -> Option<u16> {
        self.img
            .iter()
            .enumerate()
            .find(|(i, &v)| *i as u16 != v)
            .map(|(i, _)| i as u16)
    }

    pub fn order(&self) -> u64 {
        let mut p = self.clone();
        let mut n = 1u64;
        while !p.is_identity() {
            p = p.compose(self);
            n += 1;
            assert!(n < 1_000_000, "order runaway");
        }
        n
    }
}

fn is_bijection(img: &[u16]) -> bool {
    let mut seen = vec![false; img.len()];
    img.iter().all(|&v| {
        let slot = &mut seen[v as usize];
        !std::mem::replace(slot, true)
    })
}

/// Build a permutation from disjoint cycles (points not mentioned are
/// fixed). Convenience for tests.
pub fn perm_from_cycles(degree: usize, cycles: &[&[u16]]) -> Perm {
    let mut img: Vec<u16> = (0..degree as u16).collect();
    for cycle in cycles {
        for w in 0..cycle.len() {
            img[cycle[w] as usize] = cycle[(w + 1) % cycle.len()];
        }
    }
    Perm::from_images(img)
}

const NO_POS: u32 = u32::MAX;

struct Level {
    point: u16,
    /// Indices into the shared strong-generator pool; exactly the pool
    /// members fixing all earlier base points.
    gen_ids: Vec<usize>,
    orbit: Vec<u16>,
    /// Position of each point in `orbit`, or `NO_POS`.
    pos: Vec<u32>,
    /// `transversal[k]` maps `point` to `orbit[k]`.
    transversal: Vec<Perm>,
    /// (orbit position, index into gen_ids) pairs whose Schreier generators
    /// have not been sifted yet.
    pending: VecDeque<(u32, u32)>,
}

impl Level {
    fn new(degree: usize, point: u16) -> Level {
        let mut pos = vec![NO_POS; degree];
        pos[point as usize] = 0;
        Level {
            point,
            gen_ids: Vec::new(),
            orbit: vec![point],
            pos,
            transversal: vec![Perm::identity(degree)],
            pending: VecDeque::new(),
        }
    }
}

/// Base and strong generating set for a permutation group, built
/// incrementally from generators.
pub struct Bsgs {
    degree: usize,
    pool: Vec<Perm>,
    levels: Vec<Level>,
}

impl Bsgs {
    pub fn new(degree: usize) -> Bsgs {
        Bsgs {
            degree,
            pool: Vec::new(),
            levels: Vec::new(),
        }
    }

    pub fn from_generators(degree: usize, gens: &[Perm]) -> Bsgs {
        let mut b = Bsgs::new(degree);
        for g in gens {
            b.add_generator(g.clone());
        }
        b
    }

    pub fn order(&self) -> u128 {
        self.levels.iter().map(|l| l.orbit.len() as u128).product()
    }

    pub fn base(&self) -> Vec<u16> {
        self.levels.iter().map(|l| l.point).collect()
    }

    pub fn strong_generator_count(&self) -> usize {
        self.pool.len()
    }

    pub fn orbit_lengths(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    /// Add a group generator and restore the strong-generation invariant.
    pub fn add_generator(&mut self, g: Perm) {
        assert_eq!(g.degree(), self.degree);
        if self.contains(&g) {
            return;
        }
        // Find the first level whose base point g moves; g belongs to the
        // generator sets of that level and all earlier ones.
        let mut lvl = 0;
        while lvl < self.levels.len() && g.apply(self.levels[lvl].point) == self.levels[lvl].point {
            lvl += 1;
        }
        if lvl == self.levels.len() {
            let point = g
                .first_moved_point()
                .expect("contains() filtered the identity");
            self.levels.push(Level::new(self.degree, point));
        }
        let id = self.pool.len();
        self.pool.push(g);
        for k in 0..=lvl {
            self.install_generator(k, id);
        }
        self.complete();
    }

    /// Append pool generator `id` to level `k`, extend the orbit, and queue
    /// the new Schreier pairs.
    fn install_generator(&mut self, k: usize, id: usize) {
        let gen_idx = self.levels[k].gen_ids.len() as u32;
        self.levels[k].gen_ids.push(id);
        // Pair every existing orbit point with the new generator.
        for p in 0..self.levels[k].orbit.len() as u32 {
            self.levels[k].pending.push_back((p, gen_idx));
        }
        self.extend_orbit(k);
    }

    /// Fixpoint pass growing the orbit of level `k` under its current
    /// generators. New points get a transversal permutation and pending
    /// pairs with every generator.
    fn extend_orbit(&mut self, k: usize) {
        let mut i = 0;
        while i < self.levels[k].orbit.len() {
            let p = self.levels[k].orbit[i];
            for gi in 0..self.levels[k].gen_ids.len() {
                let q = self.pool[self.levels[k].gen_ids[gi]].apply(p);
                if self.levels[k].pos[q as usize] == NO_POS {
                    let level = &mut self.levels[k];
                    level.pos[q as usize] = level.orbit.len() as u32;
                    level.orbit.push(q);
                    let t = level.transversal[i].compose(&self.pool[level.gen_ids[gi]]);
                    level.transversal.push(t);
                    let newpos = (level.orbit.len() - 1) as u32;
                    for g in 0..level.gen_ids.len() as u32 {
                        level.pending.push_back((newpos, g));
                    }
                }
            }
            i += 1;
        }
    }

    /// Sift `g` through levels `from..`; returns the level where it escapes
    /// the chain together with the residue, or Err(residue_is_identity).
    fn sift_from(&self, from: usize, mut g: Perm) -> Result<(), (usize, Perm)> {
        for k in from..self.levels.len() {
            let x = g.apply(self.levels[k].point);
            let pos = self.levels[k].pos[x as usize];
            if pos == NO_POS {
                return Err((k, g));
            }
            g = g.compose(&self.levels[k].transversal[pos as usize].inverse());
        }
        if g.is_identity() {
            Ok(())
        } else {
            Err((self.levels.len(), g))
        }
    }

    /// Process pending Schreier pairs bottom-up until every level is closed.
    fn complete(&mut self) {
        if self.levels.is_empty() {
            return;
        }
        let mut i = self.levels.len() - 1;
        loop {
            match self.check_level(i) {
                None => {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                }
                Some(j) => i = j,
            }
        }
    }

    /// Drain the pending queue of level `i`. If a Schreier generator fails
    /// to sift, install its residue and return the deepest level that
    /// changed so the caller can re-verify from there.
    fn check_level(&mut self, i: usize) -> Option<usize> {
        while let Some((pp, gi)) = self.levels[i].pending.pop_front() {
            let level = &self.levels[i];
            let p = level.orbit[pp as usize];
            let s = &self.pool[level.gen_ids[gi as usize]];
            let q = s.apply(p);
            let qpos = level.pos[q as usize];
            debug_assert_ne!(qpos, NO_POS, "orbit not closed");
            let w = level.transversal[pp as usize].compose(s);
            if w == level.transversal[qpos as usize] {
                continue; // trivial Schreier generator
            }
            let h = w.compose(&level.transversal[qpos as usize].inverse());
            match self.sift_from(i + 1, h) {
                Ok(()) => continue,
                Err((stuck, residue)) => {
                    // Put the pair back: with the residue installed it will
                    // sift cleanly on the next pass.
                    self.levels[i].pending.push_front((pp, gi));
                    if stuck == self.levels.len() {
                        let point = residue.first_moved_point().expect("non-identity residue");
                        self.levels.push(Level::new(self.degree, point));
                    }
                    let id = self.pool.len();
                    self.pool.push(residue);
                    for k in i + 1..=stuck {
                        self.install_generator(k, id);
                    }
                    return Some(stuck);
                }
            }
        }
        None
    }

    /// Exact membership test.
    pub fn contains(&self, g: &Perm) -> bool {
        if g.is_identity() {
            return true;
        }
        self.sift_from(0, g.clone()).is_ok()
    }
}

/// Orbit of a seed value under an abstractly generated action, with a
/// Schreier tree recording which generator produced each point from which
/// parent. Used for orbits of subspaces under matrix groups, where group
/// elements are reconstructed as matrix products along tree paths.
pub struct OrbitTree<P> {
    points: Vec<P>,
    pos: std::collections::HashMap<P, usize>,
    /// (parent position, generator index); the seed has no entry.
    edges: Vec<Option<(usize, usize)>>,
}

impl<P: Clone + Eq + std::hash::Hash> OrbitTree<P> {
    /// Breadth-first orbit of `seed` under `gen_count` generators applied
    /// through `apply(gen_index, point)`.
    pub fn new(seed: P, gen_count: usize, mut apply: impl FnMut(usize, &P) -> P) -> Self {
        let mut tree = OrbitTree {
            points: vec![seed.clone()],
            pos: std::collections::HashMap::from([(seed, 0)]),
            edges: vec![None],
        };
        let mut i = 0;
        while i < tree.points.len() {
            for g in 0..gen_count {
                let q = apply(g, &tree.points[i]);
                if !tree.pos.contains_key(&q) {
                    tree.pos.insert(q.clone(), tree.points.len());
                    tree.points.push(q);
                    tree.edges.push(Some((i, g)));
                }
            }
            i += 1;
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn position(&self, p: &P) -> Option<usize> {
        self.pos.get(p).copied()
    }

    pub fn contains(&self, p: &P) -> bool {
        self.pos.contains_key(p)
    }

    /// Generator indices along the tree path from the seed to point `k`;
    /// composing them in order maps the seed to `points[k]`.
    pub fn word_to(&self, k: usize) -> Vec<usize> {
        let mut word = Vec::new();
        let mut cur = k;
        while let Some((parent, g)) = self.edges[cur] {
            word.push(g);
            cur = parent;
        }
        word.reverse();
        word
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_and_inverse() {
        let a = perm_from_cycles(5, &[&[0, 1, 2]]);
        let b = perm_from_cycles(5, &[&[2, 3]]);
        let ab = a.compose(&b);
        // x=0: a->1, b->1. x=2: a->0, b->0. x=3: a->3, b->2.
        assert_eq!(ab.apply(0), 1);
        assert_eq!(ab.apply(2), 0);
        assert_eq!(ab.apply(3), 2);
        assert!(a.compose(&a.inverse()).is_identity());
        assert_eq!(a.order(), 3);
        assert_eq!(b.order(), 2);
    }

    #[test]
    fn symmetric_group_order() {
        // S_6 from a transposition and a 6-cycle.
        let gens = vec![
            perm_from_cycles(6, &[&[0, 1]]),
            perm_from_cycles(6, &[&[0, 1, 2, 3, 4, 5]]),
        ];
        let b = Bsgs::from_generators(6, &gens);
        assert_eq!(b.order(), 720);
    }

    #[test]
    fn alternating_group_order() {
        // A_5 from two 3-cycles.
        let gens = vec![
            perm_from_cycles(5, &[&[0, 1, 2]]),
            perm_from_cycles(5, &[&[2, 3, 4]]),
        ];
        let b = Bsgs::from_generators(5, &gens);
        assert_eq!(b.order(), 60);
    }

    #[test]
    fn dihedral_group_order() {
        // D_8 acting on the square's corners.
        let gens = vec![
            perm_from_cycles(4, &[&[0, 1, 2, 3]]),
            perm_from_cycles(4, &[&[1, 3]]),
        ];
        let b = Bsgs::from_generators(4, &gens);
        assert_eq!(b.order(), 8);
    }

    #[test]
    fn membership() {
        let r = perm_from_cycles(4, &[&[0, 1, 2, 3]]);
        let f = perm_from_cycles(4, &[&[1, 3]]);
        let b = Bsgs::from_generators(4, &[r.clone(), f.clone()]);
        assert!(b.contains(&r.compose(&f)));
        assert!(b.contains(&Perm::identity(4)));
        // An odd 3-cycle is not in D_8.
        assert!(!b.contains(&perm_from_cycles(4, &[&[0, 1, 2]])));
    }

    #[test]
    fn duplicate_generators_are_ignored() {
        let r = perm_from_cycles(4, &[&[0, 1, 2, 3]]);
        let mut b = Bsgs::new(4);
        b.add_generator(r.clone());
        b.add_generator(r.clone());
        b.add_generator(r.compose(&r));
        assert_eq!(b.order(), 4);
        assert_eq!(b.strong_generator_count(), 1);
    }

    #[test]
    fn direct_product_order() {
        // Z_3 x Z_5 on disjoint supports.
        let gens = vec![
            perm_from_cycles(8, &[&[0, 1, 2]]),
            perm_from_cycles(8, &[&[3, 4, 5, 6, 7]]),
        ];
        let b = Bsgs::from_generators(8, &gens);
        assert_eq!(b.order(), 15);
    }

    #[test]
    fn larger_symmetric_group() {
        let n = 30u16;
        let cycle: Vec<u16> = (0..n).collect();
        let gens = vec![
            perm_from_cycles(n as usize, &[&[0, 1]]),
            perm_from_cycles(n as usize, &[&cycle]),
        ];
        let b = Bsgs::from_generators(n as usize, &gens);
        let fact: u128 = (1..=n as u128).product();
        assert_eq!(b.order(), fact);
    }

    #[test]
    fn orbit_tree_words() {
        // Z_6 acting on itself by +1; generator 0 is the step.
        let tree = OrbitTree::new(0u8, 1, |_, &p| (p + 1) % 6);
        assert_eq!(tree.len(), 6);
        let k = tree.position(&4).unwrap();
        assert_eq!(tree.word_to(k).len(), 4);
    }
}
