//! Lie algebras given by rational structure constants, plus the Koszul
//! boundary/coboundary pair and the coadjoint vector fields.
//!
//! Structure constants are stored sparsely for i < j only; antisymmetry is a
//! property of the storage, and the Jacobi identity is validated when a
//! specification is constructed. Invalid input is rejected, never repaired.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::blade::{perm_sign, IndexSet, MultiVector, Space};
use crate::error::{Error, Result};
use crate::scalar::{parse_rational, rat_to_string, Scalar};

/// Linear vector field xi -> A xi on the dual coordinates; used for the
/// coadjoint fields and as the generic argument of interior products on the
/// sphere slot.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearField {
    pub n: usize,
    /// Row-major: mat[r][c] is the coefficient of xi_c in component r.
    pub mat: Vec<Vec<BigRational>>,
}

impl LinearField {
    pub fn zero(n: usize) -> Self {
        LinearField { n, mat: vec![vec![BigRational::zero(); n]; n] }
    }

    pub fn is_zero(&self) -> bool {
        self.mat.iter().all(|row| row.iter().all(|c| c.is_zero()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraSpec {
    pub name: String,
    pub n: usize,
    /// (i, j) with i < j, 1-based, mapped to the expansion of [e_i, e_j]
    /// in the basis: k -> c_{ij}^k.
    brackets: BTreeMap<(usize, usize), BTreeMap<usize, BigRational>>,
}

impl LieAlgebraSpec {
    /// Validates index ranges and the Jacobi identity. The bracket table must
    /// only contain i < j entries.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        entries: Vec<(usize, usize, Vec<(usize, BigRational)>)>,
    ) -> Result<Self> {
        let mut brackets: BTreeMap<(usize, usize), BTreeMap<usize, BigRational>> = BTreeMap::new();
        for (i, j, coeffs) in entries {
            if i >= j {
                return Err(Error::BracketOrder { i, j });
            }
            if j > n || i == 0 {
                return Err(Error::Index(format!("bracket ({i},{j}) outside 1..={n}")));
            }
            let slot = brackets.entry((i, j)).or_default();
            for (k, c) in coeffs {
                if k == 0 || k > n {
                    return Err(Error::Index(format!("bracket target {k} outside 1..={n}")));
                }
                if c.is_zero() {
                    continue;
                }
                let e = slot.entry(k).or_insert_with(BigRational::zero);
                *e += c;
                if e.is_zero() {
                    slot.remove(&k);
                }
            }
        }
        brackets.retain(|_, v| !v.is_empty());
        let spec = LieAlgebraSpec { name: name.into(), n, brackets };
        spec.check_jacobi()?;
        Ok(spec)
    }

    fn check_jacobi(&self) -> Result<()> {
        let n = self.n;
        for i in 1..=n {
            for j in (i + 1)..=n {
                for k in (j + 1)..=n {
                    let mut acc = self.bracket(&self.bracket_basis(i, j), &self.basis_vector(k));
                    acc = acc.add(&self.bracket(&self.bracket_basis(j, k), &self.basis_vector(i)));
                    acc = acc.add(&self.bracket(&self.bracket_basis(k, i), &self.basis_vector(j)));
                    if !acc.is_zero() {
                        return Err(Error::Jacobi { i, j, k });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn basis_vector(&self, i: usize) -> MultiVector {
        MultiVector::basis(self.n, Space::Primal, i)
    }

    /// [e_i, e_j] for any i, j (antisymmetry from storage).
    pub fn bracket_basis(&self, i: usize, j: usize) -> MultiVector {
        let mut out = MultiVector::zero(self.n, Space::Primal);
        if i == j {
            return out;
        }
        let (a, b, flip) = if i < j { (i, j, false) } else { (j, i, true) };
        if let Some(coeffs) = self.brackets.get(&(a, b)) {
            for (k, c) in coeffs {
                let mut s = Scalar::from_rat(c.clone());
                if flip {
                    s = -s;
                }
                out.add_term(IndexSet::single(*k), s);
            }
        }
        out
    }

    /// Bilinear extension to grade-1 elements.
    pub fn bracket(&self, x: &MultiVector, y: &MultiVector) -> MultiVector {
        debug_assert!(x.grade().map_or(true, |g| g == 1));
        debug_assert!(y.grade().map_or(true, |g| g == 1));
        let mut out = MultiVector::zero(self.n, Space::Primal);
        for (sx, cx) in &x.terms {
            for (sy, cy) in &y.terms {
                let i = sx.indices()[0];
                let j = sy.indices()[0];
                let b = self.bracket_basis(i, j).scale(&(cx * cy));
                out = out.add(&b);
            }
        }
        out
    }

    /// ad_{e_i} as a matrix: entry [r][c] is the e_r coefficient of [e_i, e_c].
    pub fn ad_matrix(&self, i: usize) -> Vec<Vec<BigRational>> {
        let mut m = vec![vec![BigRational::zero(); self.n]; self.n];
        for c in 1..=self.n {
            let v = self.bracket_basis(i, c);
            for (set, coeff) in &v.terms {
                let r = set.indices()[0];
                m[r - 1][c - 1] = coeff.as_rational().expect("structure constants are rational");
            }
        }
        m
    }

    pub fn trace_ad(&self, i: usize) -> BigRational {
        let m = self.ad_matrix(i);
        let mut t = BigRational::zero();
        for d in 0..self.n {
            t += &m[d][d];
        }
        t
    }

    /// All traces vanish iff the algebra is unimodular. On failure returns the
    /// first basis witness and its trace.
    pub fn unimodular_witness(&self) -> Option<(usize, BigRational)> {
        (1..=self.n).find_map(|i| {
            let t = self.trace_ad(i);
            if t.is_zero() {
                None
            } else {
                Some((i, t))
            }
        })
    }

    pub fn is_unimodular(&self) -> bool {
        self.unimodular_witness().is_none()
    }

    /// Matrix of the coadjoint field of e_i on dual coordinates: -(ad_{e_i})^T.
    pub fn coadjoint_field(&self, i: usize) -> LinearField {
        let ad = self.ad_matrix(i);
        let mut mat = vec![vec![BigRational::zero(); self.n]; self.n];
        for r in 0..self.n {
            for c in 0..self.n {
                mat[r][c] = -ad[c][r].clone();
            }
        }
        LinearField { n: self.n, mat }
    }

    /// Koszul boundary on Lambda^* g, extended from
    /// d(x_1^...^x_k) = sum_{i<j} (-1)^{i+j+1} [x_i,x_j] ^ x_1^...(omit i,j)...^x_k.
    pub fn koszul_boundary(&self, v: &MultiVector) -> Result<MultiVector> {
        if v.space != Space::Primal {
            return Err(Error::Space("koszul_boundary expects a primal element".into()));
        }
        let mut out = MultiVector::zero(self.n, Space::Primal);
        for (set, c) in &v.terms {
            let ix = set.indices();
            let k = ix.len();
            for a in 0..k {
                for b in (a + 1)..k {
                    // positions are 1-based in the sign convention
                    let sign = if (a + b + 1) % 2 == 0 { 1 } else { -1 };
                    let rest = set.remove(ix[a]).remove(ix[b]);
                    let br = self.bracket_basis(ix[a], ix[b]);
                    for (bset, bc) in &br.terms {
                        let s2 = perm_sign(*bset, rest);
                        if s2 == 0 {
                            continue;
                        }
                        let mut coeff = c * bc;
                        if sign * s2 < 0 {
                            coeff = -coeff;
                        }
                        out.add_term(bset.union(rest), coeff);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Koszul coboundary on Lambda^* g*: the transpose of `koszul_boundary`
    /// in the blade bases (not routed through the Hodge maps, so the Hodge
    /// relation between the two stays an independent cross-check).
    pub fn koszul_coboundary(&self, v: &MultiVector) -> Result<MultiVector> {
        if v.space != Space::Dual {
            return Err(Error::Space("koszul_coboundary expects a dual element".into()));
        }
        let mut out = MultiVector::zero(self.n, Space::Dual);
        for (set, c) in &v.terms {
            let k = set.card();
            for target in IndexSet::subsets(self.n, k + 1) {
                let image = self
                    .koszul_boundary(&MultiVector::blade(self.n, Space::Primal, target))?;
                let pairing = image.coeff(*set);
                if pairing.is_zero() {
                    continue;
                }
                out.add_term(target, &pairing * c);
            }
        }
        Ok(out)
    }

    /// dX ^ Y - (-1)^{k+1} X ^ dY as a scalar under e_{1..n} <-> 1, where
    /// X has grade k+1 and Y grade n-k. Vanishes identically iff the algebra
    /// is unimodular; on a witness pair it equals a trace of some ad_{e_i}
    /// up to sign.
    pub fn leibniz_defect(&self, x: &MultiVector, y: &MultiVector) -> Result<Scalar> {
        let gx = x
            .grade()
            .ok_or_else(|| Error::Dimension("leibniz_defect: X must be homogeneous".into()))?;
        let gy = y
            .grade()
            .ok_or_else(|| Error::Dimension("leibniz_defect: Y must be homogeneous".into()))?;
        if gx + gy != self.n + 1 {
            return Err(Error::Dimension(format!(
                "leibniz_defect: grades {gx} + {gy} != n + 1 = {}",
                self.n + 1
            )));
        }
        let k = gx - 1;
        let lhs = self.koszul_boundary(x)?.wedge(y)?.top_coefficient();
        let rhs = x.wedge(&self.koszul_boundary(y)?)?.top_coefficient();
        let sign = if (k + 1) % 2 == 0 { 1 } else { -1 };
        Ok(lhs - rhs.scale_int(sign))
    }

    pub fn to_json(&self) -> Value {
        let brackets: Vec<Value> = self
            .brackets
            .iter()
            .map(|((i, j), coeffs)| {
                let mut m = serde_json::Map::new();
                for (k, c) in coeffs {
                    m.insert(k.to_string(), Value::String(rat_to_string(c)));
                }
                json!({"i": i, "j": j, "coeffs": Value::Object(m)})
            })
            .collect();
        json!({"name": self.name, "dim": self.n, "brackets": brackets})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("lie spec must be a JSON object".into()))?;
        let name = obj
            .get("name")
            .and_then(|x| x.as_str())
            .ok_or_else(|| Error::Parse("lie spec: missing name".into()))?;
        let n = obj
            .get("dim")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::Parse("lie spec: missing dim".into()))? as usize;
        if n == 0 || n > 16 {
            return Err(Error::Parse(format!("lie spec: unsupported dim {n}")));
        }
        let mut entries = Vec::new();
        if let Some(brs) = obj.get("brackets") {
            let arr = brs
                .as_array()
                .ok_or_else(|| Error::Parse("lie spec: brackets must be an array".into()))?;
            for b in arr {
                let i = b
                    .get("i")
                    .and_then(|x| x.as_u64())
                    .ok_or_else(|| Error::Parse("bracket: missing i".into()))?
                    as usize;
                let j = b
                    .get("j")
                    .and_then(|x| x.as_u64())
                    .ok_or_else(|| Error::Parse("bracket: missing j".into()))?
                    as usize;
                let coeffs = b
                    .get("coeffs")
                    .and_then(|x| x.as_object())
                    .ok_or_else(|| Error::Parse("bracket: missing coeffs".into()))?;
                let mut cs = Vec::new();
                for (k, c) in coeffs {
                    let k: usize = k
                        .parse()
                        .map_err(|_| Error::Parse(format!("bracket: bad target index {k:?}")))?;
                    let c = c
                        .as_str()
                        .ok_or_else(|| Error::Parse("bracket: coefficient must be a string".into()))?;
                    cs.push((k, parse_rational(c)?));
                }
                entries.push((i, j, cs));
            }
        }
        LieAlgebraSpec::new(name, n, entries)
    }
}

fn rat(v: i64) -> BigRational {
    BigRational::from(num_bigint::BigInt::from(v))
}

/// R^n with the zero bracket.
pub fn abelian(n: usize) -> LieAlgebraSpec {
    LieAlgebraSpec::new(format!("abelian{n}"), n, vec![]).unwrap()
}

/// so(3) in the cyclic basis: [e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e2.
pub fn so3() -> LieAlgebraSpec {
    LieAlgebraSpec::new(
        "so3",
        3,
        vec![
            (1, 2, vec![(3, rat(1))]),
            (2, 3, vec![(1, rat(1))]),
            (1, 3, vec![(2, rat(-1))]),
        ],
    )
    .unwrap()
}

/// The Heisenberg algebra h3: [e1,e2]=e3.
pub fn heisenberg3() -> LieAlgebraSpec {
    LieAlgebraSpec::new("h3", 3, vec![(1, 2, vec![(3, rat(1))])]).unwrap()
}

/// aff(1): [e1,e2]=e2. Non-unimodular control case.
pub fn aff1() -> LieAlgebraSpec {
    LieAlgebraSpec::new("aff1", 2, vec![(1, 2, vec![(2, rat(1))])]).unwrap()
}

/// Named corpus used by the CLI and the test suites.
pub fn builtin(name: &str) -> Option<LieAlgebraSpec> {
    match name {
        "abelian1" | "r1" => Some(abelian(1)),
        "abelian2" | "r2" => Some(abelian(2)),
        "abelian3" | "r3" => Some(abelian(3)),
        "abelian4" | "r4" => Some(abelian(4)),
        "so3" => Some(so3()),
        "h3" | "heisenberg3" => Some(heisenberg3()),
        "aff1" => Some(aff1()),
        _ => None,
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["abelian1", "abelian2", "abelian3", "abelian4", "so3", "h3", "aff1"]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iset(ix: &[usize], n: usize) -> IndexSet {
        IndexSet::from_indices(ix, n).unwrap()
    }

    #[test]
    fn jacobi_rejects_inconsistent_table() {
        // [[e2,e3],e1] + [[e3,e1],e2] = -2 e3 here, so Jacobi fails.
        let bad = LieAlgebraSpec::new(
            "bad",
            3,
            vec![
                (1, 2, vec![(3, rat(1))]),
                (1, 3, vec![(1, rat(1))]),
                (2, 3, vec![(2, rat(1))]),
            ],
        );
        assert!(matches!(bad, Err(Error::Jacobi { .. })));
    }

    #[test]
    fn bracket_order_enforced() {
        let bad = LieAlgebraSpec::new("bad", 2, vec![(2, 1, vec![(2, rat(1))])]);
        assert!(matches!(bad, Err(Error::BracketOrder { i: 2, j: 1 })));
    }

    #[test]
    fn unimodularity_verdicts() {
        assert!(so3().is_unimodular());
        assert!(heisenberg3().is_unimodular());
        assert!(abelian(4).is_unimodular());
        let (i, t) = aff1().unimodular_witness().unwrap();
        assert_eq!(i, 1);
        assert_eq!(t, rat(1));
    }

    #[test]
    fn koszul_boundary_examples() {
        let g = so3();
        // d(e1^e2) = [e1,e2] = e3
        let e12 = MultiVector::blade(3, Space::Primal, iset(&[1, 2], 3));
        let b = g.koszul_boundary(&e12).unwrap();
        assert_eq!(b, MultiVector::basis(3, Space::Primal, 3));
        // d(e1^e2^e3) = 0 by cyclic cancellation
        let top = MultiVector::blade(3, Space::Primal, IndexSet::full(3));
        assert!(g.koszul_boundary(&top).unwrap().is_zero());
    }

    #[test]
    fn koszul_boundary_squares_to_zero() {
        for g in [so3(), heisenberg3(), aff1(), abelian(4)] {
            for m in 0u32..(1 << g.n) {
                let v = MultiVector::blade(g.n, Space::Primal, IndexSet(m));
                let dd = g
                    .koszul_boundary(&g.koszul_boundary(&v).unwrap())
                    .unwrap();
                assert!(dd.is_zero(), "{} blade {m:b}", g.name);
            }
        }
    }

    #[test]
    fn coboundary_is_transpose() {
        // <d* v, Y> = <v, d Y> on all blade pairs, n <= 4.
        for g in [so3(), heisenberg3(), aff1(), abelian(3)] {
            let n = g.n;
            for vm in 0u32..(1 << n) {
                let v = IndexSet(vm);
                let dv = g
                    .koszul_coboundary(&MultiVector::blade(n, Space::Dual, v))
                    .unwrap();
                for ym in 0u32..(1 << n) {
                    let y = IndexSet(ym);
                    if y.card() != v.card() + 1 {
                        continue;
                    }
                    let dy = g
                        .koszul_boundary(&MultiVector::blade(n, Space::Primal, y))
                        .unwrap();
                    assert_eq!(dv.coeff(y), dy.coeff(v), "{} v={v:?} y={y:?}", g.name);
                }
            }
        }
    }

    #[test]
    fn coboundary_example_so3() {
        let g = so3();
        let v = MultiVector::basis(3, Space::Dual, 3);
        let dv = g.koszul_coboundary(&v).unwrap();
        let mut expect = MultiVector::zero(3, Space::Dual);
        expect.add_term(iset(&[1, 2], 3), Scalar::one());
        assert_eq!(dv, expect);
    }

    #[test]
    fn coadjoint_so3_is_rotation() {
        let g = so3();
        let f = g.coadjoint_field(3);
        // -(ad_3)^T: xi -> (-xi_2, xi_1, 0)
        assert_eq!(f.mat[0][1], rat(-1));
        assert_eq!(f.mat[1][0], rat(1));
        let zeros: usize = f
            .mat
            .iter()
            .flatten()
            .filter(|c| c.is_zero())
            .count();
        assert_eq!(zeros, 7);
    }

    #[test]
    fn leibniz_defect_dichotomy() {
        // Unimodular: all complementary blade pairs give zero.
        for g in [so3(), heisenberg3(), abelian(3)] {
            let n = g.n;
            for gx in 1..=n {
                for xm in IndexSet::subsets(n, gx) {
                    for ym in IndexSet::subsets(n, n + 1 - gx) {
                        let x = MultiVector::blade(n, Space::Primal, xm);
                        let y = MultiVector::blade(n, Space::Primal, ym);
                        let d = g.leibniz_defect(&x, &y).unwrap();
                        assert!(d.is_zero(), "{} X={xm:?} Y={ym:?} -> {d}", g.name);
                    }
                }
            }
        }
        // aff(1): a nonzero witness exists, of size tr(ad_{e1}) = 1.
        // dX ^ Y = [e1,e2] ^ e1 = e2 ^ e1 = -1, X ^ dY = 0.
        let g = aff1();
        let x = MultiVector::blade(2, Space::Primal, iset(&[1, 2], 2));
        let y = MultiVector::basis(2, Space::Primal, 1);
        let d = g.leibniz_defect(&x, &y).unwrap();
        assert_eq!(d, Scalar::from_int(-1));
    }

    #[test]
    fn json_round_trip() {
        for g in [so3(), heisenberg3(), aff1(), abelian(2)] {
            let v = g.to_json();
            let back = LieAlgebraSpec::from_json(&v).unwrap();
            assert_eq!(back, g);
        }
    }
}
