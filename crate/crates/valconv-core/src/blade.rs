//! Sparse exterior algebra over a fixed ordered basis e_1, ..., e_n.
//!
//! Blades are strictly increasing index sets, encoded as bitmasks. The
//! volume identification used everywhere is e_1 ^ ... ^ e_n <-> 1, and the
//! inverse Hodge map is defined against that volume:
//! `hodge_inverse(e*_I) = perm_sign(I^c, I) e_{I^c}`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Strictly increasing set of 1-based indices in 1..=n, stored as a bitmask
/// (bit i-1 set means index i is present).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct IndexSet(pub u32);

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet(0)
    }

    pub fn full(n: usize) -> Self {
        IndexSet(((1u64 << n) - 1) as u32)
    }

    pub fn single(i: usize) -> Self {
        IndexSet(1 << (i - 1))
    }

    /// Builds from 1-based indices; rejects repeats, non-increasing order and
    /// indices outside 1..=n.
    pub fn from_indices(indices: &[usize], n: usize) -> Result<Self> {
        let mut bits = 0u32;
        let mut prev = 0usize;
        for &i in indices {
            if i == 0 || i > n {
                return Err(Error::Index(format!("index {i} outside 1..={n}")));
            }
            if i <= prev {
                return Err(Error::Index(format!(
                    "indices must be strictly increasing, got {indices:?}"
                )));
            }
            prev = i;
            bits |= 1 << (i - 1);
        }
        Ok(IndexSet(bits))
    }

    pub fn indices(self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.card());
        let mut bits = self.0;
        while bits != 0 {
            let tz = bits.trailing_zeros() as usize;
            out.push(tz + 1);
            bits &= bits - 1;
        }
        out
    }

    pub fn card(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << (i - 1)) != 0
    }

    pub fn complement(self, n: usize) -> IndexSet {
        IndexSet(IndexSet::full(n).0 & !self.0)
    }

    pub fn union(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 | other.0)
    }

    pub fn intersect(self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & other.0)
    }

    pub fn remove(self, i: usize) -> IndexSet {
        IndexSet(self.0 & !(1 << (i - 1)))
    }

    pub fn is_disjoint(self, other: IndexSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Number of members strictly below index `i` (the 0-based position `i`
    /// would occupy).
    pub fn rank_below(self, i: usize) -> usize {
        (self.0 & ((1u32 << (i - 1)) - 1)).count_ones() as usize
    }

    /// All subsets of {1..n} of the given cardinality, ascending as masks.
    pub fn subsets(n: usize, card: usize) -> Vec<IndexSet> {
        (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize == card)
            .map(IndexSet)
            .collect()
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (t, i) in self.indices().iter().enumerate() {
            if t > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Sign of the concatenation (K, L) read as a permutation of the sorted
/// union; 0 when K and L overlap.
pub fn perm_sign(k: IndexSet, l: IndexSet) -> i32 {
    if !k.is_disjoint(l) {
        return 0;
    }
    // Count inversions: pairs (a in K, b in L) with a > b.
    let mut inversions = 0usize;
    for b in l.indices() {
        inversions += k.card() - k.rank_below(b);
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Space {
    /// Lambda^* g, spanned by wedges of basis vectors e_i.
    Primal,
    /// Lambda^* g*, spanned by wedges of dual covectors e*_i.
    Dual,
}

/// Sparse element of the exterior algebra (mixed grades allowed).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiVector {
    pub n: usize,
    pub space: Space,
    pub terms: BTreeMap<IndexSet, Scalar>,
}

impl MultiVector {
    pub fn zero(n: usize, space: Space) -> Self {
        MultiVector { n, space, terms: BTreeMap::new() }
    }

    pub fn scalar(n: usize, space: Space, c: Scalar) -> Self {
        let mut out = MultiVector::zero(n, space);
        out.add_term(IndexSet::empty(), c);
        out
    }

    pub fn basis(n: usize, space: Space, i: usize) -> Self {
        let mut out = MultiVector::zero(n, space);
        out.add_term(IndexSet::single(i), Scalar::one());
        out
    }

    pub fn blade(n: usize, space: Space, set: IndexSet) -> Self {
        let mut out = MultiVector::zero(n, space);
        out.add_term(set, Scalar::one());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, set: IndexSet, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(set).or_insert_with(Scalar::zero);
        *entry += &c;
        if entry.is_zero() {
            self.terms.remove(&set);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IndexSet, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, set: IndexSet) -> Scalar {
        self.terms.get(&set).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Grade when homogeneous; `None` for 0 or mixed elements.
    pub fn grade(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|s| s.card());
        let first = it.next()?;
        if it.all(|c| c == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Scalar) -> MultiVector {
        let mut out = MultiVector::zero(self.n, self.space);
        for (set, v) in &self.terms {
            out.add_term(*set, v * c);
        }
        out
    }

    pub fn add(&self, other: &MultiVector) -> MultiVector {
        debug_assert_eq!(self.n, other.n);
        debug_assert_eq!(self.space, other.space);
        let mut out = self.clone();
        for (set, v) in &other.terms {
            out.add_term(*set, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &MultiVector) -> MultiVector {
        let mut out = self.clone();
        for (set, v) in &other.terms {
            out.add_term(*set, -v.clone());
        }
        out
    }

    pub fn wedge(&self, other: &MultiVector) -> Result<MultiVector> {
        if self.n != other.n {
            return Err(Error::Dimension(format!("wedge: {} vs {}", self.n, other.n)));
        }
        if self.space != other.space {
            return Err(Error::Space("wedge of primal with dual".into()));
        }
        let mut out = MultiVector::zero(self.n, self.space);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let s = perm_sign(*ka, *kb);
                if s == 0 {
                    continue;
                }
                let mut c = ca * cb;
                if s < 0 {
                    c = -c;
                }
                out.add_term(ka.union(*kb), c);
            }
        }
        Ok(out)
    }

    /// Interior product of a primal element by the dual covector e*_i:
    /// an antiderivation with iota_{e*_i}(e_j) = delta_ij.
    pub fn interior_single(&self, i: usize) -> MultiVector {
        let mut out = MultiVector::zero(self.n, self.space);
        for (set, c) in &self.terms {
            if !set.contains(i) {
                continue;
            }
            let pos = set.rank_below(i);
            let mut v = c.clone();
            if pos % 2 == 1 {
                v = -v;
            }
            out.add_term(set.remove(i), v);
        }
        out
    }

    /// Iterated interior product by e*_K, contracting the smallest index
    /// first. With that order `iota_{e*_K} e_T = perm_sign(K, T \ K) e_{T\K}`.
    pub fn interior_set(&self, k: IndexSet) -> MultiVector {
        let mut out = self.clone();
        for i in k.indices() {
            out = out.interior_single(i);
        }
        out
    }

    /// `hodge_inverse(e*_I) = perm_sign(I^c, I) e_{I^c}` on dual elements,
    /// i.e. the inverse Hodge map against the volume e_{1..n}.
    pub fn hodge_inverse(&self) -> Result<MultiVector> {
        if self.space != Space::Dual {
            return Err(Error::Space("hodge_inverse expects a dual element".into()));
        }
        let mut out = MultiVector::zero(self.n, Space::Primal);
        for (set, c) in &self.terms {
            let comp = set.complement(self.n);
            let s = perm_sign(comp, *set);
            let mut v = c.clone();
            if s < 0 {
                v = -v;
            }
            out.add_term(comp, v);
        }
        Ok(out)
    }

    /// Inverse of `hodge_inverse`: `hodge_forward(e_M) = perm_sign(M, M^c) e*_{M^c}`.
    pub fn hodge_forward(&self) -> Result<MultiVector> {
        if self.space != Space::Primal {
            return Err(Error::Space("hodge_forward expects a primal element".into()));
        }
        let mut out = MultiVector::zero(self.n, Space::Dual);
        for (set, c) in &self.terms {
            let comp = set.complement(self.n);
            let s = perm_sign(*set, comp);
            let mut v = c.clone();
            if s < 0 {
                v = -v;
            }
            out.add_term(comp, v);
        }
        Ok(out)
    }

    /// Coefficient of the top blade under e_{1..n} <-> 1.
    pub fn top_coefficient(&self) -> Scalar {
        self.coeff(IndexSet::full(self.n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iset(ix: &[usize], n: usize) -> IndexSet {
        IndexSet::from_indices(ix, n).unwrap()
    }

    #[test]
    fn perm_sign_examples() {
        // (1,3) then (2): permutation (1,3,2), odd.
        assert_eq!(perm_sign(iset(&[1, 3], 3), iset(&[2], 3)), -1);
        // (2,3) then (1): cyclic, even.
        assert_eq!(perm_sign(iset(&[2, 3], 3), iset(&[1], 3)), 1);
        // Overlap kills the sign.
        assert_eq!(perm_sign(iset(&[1, 2], 3), iset(&[2], 3)), 0);
    }

    /// Brute-force parity of the concatenated sequence, as an independent
    /// oracle for the bit-counting implementation.
    fn perm_sign_brute(k: &[usize], l: &[usize]) -> i32 {
        let mut seq: Vec<usize> = k.iter().chain(l.iter()).copied().collect();
        let m = seq.len();
        for a in 0..m {
            for b in a + 1..m {
                if seq[a] == seq[b] {
                    return 0;
                }
            }
        }
        let mut sign = 1;
        for a in 0..m {
            for b in a + 1..m {
                if seq[a] > seq[b] {
                    sign = -sign;
                    seq.swap(a, b);
                }
            }
        }
        sign
    }

    #[test]
    fn perm_sign_matches_brute_force() {
        let n = 5;
        for ka in 0u32..(1 << n) {
            for la in 0u32..(1 << n) {
                let k = IndexSet(ka);
                let l = IndexSet(la);
                assert_eq!(
                    perm_sign(k, l),
                    perm_sign_brute(&k.indices(), &l.indices()),
                    "K={k:?} L={l:?}"
                );
            }
        }
    }

    #[test]
    fn perm_sign_swap_identity() {
        // eps(K,L) eps(L,K) = (-1)^{|K||L|} on disjoint sets.
        let n = 5;
        for ka in 0u32..(1 << n) {
            for la in 0u32..(1 << n) {
                let k = IndexSet(ka);
                let l = IndexSet(la);
                if !k.is_disjoint(l) {
                    continue;
                }
                let lhs = perm_sign(k, l) * perm_sign(l, k);
                let rhs = if (k.card() * l.card()) % 2 == 0 { 1 } else { -1 };
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn wedge_and_interior() {
        let n = 3;
        let e1 = MultiVector::basis(n, Space::Primal, 1);
        let e2 = MultiVector::basis(n, Space::Primal, 2);
        let e12 = e1.wedge(&e2).unwrap();
        assert_eq!(e12.coeff(iset(&[1, 2], n)), Scalar::one());
        let e21 = e2.wedge(&e1).unwrap();
        assert_eq!(e21.coeff(iset(&[1, 2], n)), Scalar::from_int(-1));
        // iota_{e*_2}(e_1 ^ e_2) = -e_1
        let c = e12.interior_single(2);
        assert_eq!(c.coeff(iset(&[1], n)), Scalar::from_int(-1));
        // iota in increasing order: iota_{e*_{1,2}} e_{123} = eps({1,2},{3}) e_3 = +e_3
        let e123 = MultiVector::blade(n, Space::Primal, IndexSet::full(n));
        let r = e123.interior_set(iset(&[1, 2], n));
        assert_eq!(r.coeff(iset(&[3], n)), Scalar::one());
    }

    #[test]
    fn interior_set_eps_formula() {
        // iota_{e*_K} e_T = perm_sign(K, T\K) e_{T\K}, exhaustive for n <= 5.
        let n = 5;
        for tm in 0u32..(1 << n) {
            let t = IndexSet(tm);
            let blade = MultiVector::blade(n, Space::Primal, t);
            for km in 0u32..(1 << n) {
                let k = IndexSet(km);
                let got = blade.interior_set(k);
                if k.intersect(t) != k {
                    assert!(got.is_zero());
                    continue;
                }
                let rest = IndexSet(t.0 & !k.0);
                let s = perm_sign(k, rest);
                let mut expect = MultiVector::zero(n, Space::Primal);
                expect.add_term(rest, Scalar::from_int(s as i64));
                assert_eq!(got, expect, "K={k:?} T={t:?}");
            }
        }
    }

    #[test]
    fn hodge_inverse_example() {
        // n=3: e*_1 (x) e_{123} -> e_{23}
        let n = 3;
        let v = MultiVector::basis(n, Space::Dual, 1);
        let h = v.hodge_inverse().unwrap();
        assert_eq!(h.coeff(iset(&[2, 3], n)), Scalar::one());
        assert_eq!(h.terms.len(), 1);
    }

    #[test]
    fn hodge_defining_identity_exhaustive() {
        // tau(X) = hodge_inverse(tau) ^ X under e_{1..n} <-> 1, checked on all
        // blade pairs for n <= 5.
        for n in 1..=5usize {
            for im in 0u32..(1 << n) {
                let i = IndexSet(im);
                let tau = MultiVector::blade(n, Space::Dual, i);
                let hi = tau.hodge_inverse().unwrap();
                for jm in 0u32..(1 << n) {
                    let j = IndexSet(jm);
                    if j.card() != i.card() {
                        continue;
                    }
                    let x = MultiVector::blade(n, Space::Primal, j);
                    let lhs = if i == j { Scalar::one() } else { Scalar::zero() };
                    let rhs = hi.wedge(&x).unwrap().top_coefficient();
                    assert_eq!(lhs, rhs, "n={n} I={i:?} J={j:?}");
                }
            }
        }
    }

    #[test]
    fn hodge_round_trip() {
        for n in 1..=5usize {
            for im in 0u32..(1 << n) {
                let v = MultiVector::blade(n, Space::Dual, IndexSet(im));
                let back = v.hodge_inverse().unwrap().hodge_forward().unwrap();
                assert_eq!(back, v);
            }
        }
    }
}
