//! Differential forms on the punctured dual of a Lie algebra, the
//! left-trivialized model of the cosphere bundle. A term is
//! c(xi, r) dxi_I (x) v_J with c a homogeneous sphere coefficient; a form
//! of sphere-degree k is basic when every coefficient has weight -k and the
//! Euler contraction vanishes, which together say the form is pulled back
//! from the unit sphere.
//!
//! A bigraded form of total degree p collects basic components indexed by
//! sphere-degree k, with value grade p - k on the dual side and n - p + k
//! after the fiberwise Hodge identification.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::blade::{perm_sign, IndexSet, MultiVector, Space};
use crate::error::{Error, Result};
use crate::lie::{LieAlgebraSpec, LinearField};
use crate::scalar::Scalar;
use crate::sphere::{sphere_moment, SphereCoeff};

/// What the value slot of a form holds.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Values {
    /// No value slot; the empty set is the only value key.
    None,
    Primal,
    Dual,
}

impl Values {
    pub fn as_str(self) -> &'static str {
        match self {
            Values::None => "scalar",
            Values::Primal => "primal",
            Values::Dual => "dual",
        }
    }

    pub fn parse(s: &str) -> Result<Values> {
        match s {
            "scalar" => Ok(Values::None),
            "primal" => Ok(Values::Primal),
            "dual" => Ok(Values::Dual),
            other => Err(Error::Parse(format!("unknown value kind {other:?}"))),
        }
    }

    fn space(self) -> Option<Space> {
        match self {
            Values::None => None,
            Values::Primal => Some(Space::Primal),
            Values::Dual => Some(Space::Dual),
        }
    }
}

/// Homogeneous form of fixed sphere-degree and value grade.
#[derive(Clone, PartialEq, Debug)]
pub struct BasicForm {
    n: usize,
    k: usize,
    values: Values,
    vgrade: usize,
    terms: BTreeMap<(IndexSet, IndexSet), SphereCoeff>,
}

impl BasicForm {
    pub fn zero(n: usize, k: usize, values: Values, vgrade: usize) -> Self {
        debug_assert!(values != Values::None || vgrade == 0);
        BasicForm { n, k, values, vgrade, terms: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sphere_degree(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> Values {
        self.values
    }

    pub fn value_grade(&self) -> usize {
        self.vgrade
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(IndexSet, IndexSet), &SphereCoeff)> {
        self.terms.iter()
    }

    pub fn coeff(&self, dxi: IndexSet, value: IndexSet) -> SphereCoeff {
        self.terms.get(&(dxi, value)).cloned().unwrap_or_else(|| SphereCoeff::zero(self.n))
    }

    /// Left multiplication of the value slot by the tautological covector,
    /// aggregated per (sphere key, enlarged value key). An empty map means
    /// the component is annihilated, i.e. vertical.
    pub fn vertical_defect(&self) -> BTreeMap<(IndexSet, IndexSet), SphereCoeff> {
        let mut acc: BTreeMap<(IndexSet, IndexSet), SphereCoeff> = BTreeMap::new();
        for ((i, j), c) in self.terms() {
            for idx in 1..=self.n {
                if j.contains(idx) {
                    continue;
                }
                let s = perm_sign(IndexSet::single(idx), *j);
                let mut part = c.mul_xi(idx);
                if s < 0 {
                    part = part.neg();
                }
                let key = (*i, j.union(IndexSet::single(idx)));
                let entry = acc.remove(&key).unwrap_or_else(|| SphereCoeff::zero(self.n));
                let merged = entry.add(&part);
                if !merged.is_zero() {
                    acc.insert(key, merged);
                }
            }
        }
        acc
    }

    /// Accumulating insert; keeps no zero coefficients.
    pub fn add_term(&mut self, dxi: IndexSet, value: IndexSet, c: SphereCoeff) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(dxi.card(), self.k);
        debug_assert_eq!(value.card(), self.vgrade);
        match self.terms.get_mut(&(dxi, value)) {
            Some(old) => {
                let merged = old.add(&c);
                if merged.is_zero() {
                    self.terms.remove(&(dxi, value));
                } else {
                    *old = merged;
                }
            }
            None => {
                self.terms.insert((dxi, value), c);
            }
        }
    }

    /// Validating insert for externally supplied data.
    pub fn insert_term(&mut self, dxi: IndexSet, value: IndexSet, c: SphereCoeff) -> Result<()> {
        let full = IndexSet::full(self.n);
        if dxi.intersect(full) != dxi || value.intersect(full) != value {
            return Err(Error::Index("index outside 1..=n".into()));
        }
        if dxi.card() != self.k {
            return Err(Error::Dimension(format!(
                "dxi set has {} indices, component expects {}",
                dxi.card(),
                self.k
            )));
        }
        if value.card() != self.vgrade {
            return Err(Error::Dimension(format!(
                "value set has {} indices, component expects {}",
                value.card(),
                self.vgrade
            )));
        }
        if self.values == Values::None && value != IndexSet::empty() {
            return Err(Error::Space("scalar-valued form with a nonempty value set".into()));
        }
        if !c.has_weight(-(self.k as i64)) {
            return Err(Error::Weight(format!(
                "coefficient at sphere-degree {} must have weight {}",
                self.k,
                -(self.k as i64)
            )));
        }
        self.add_term(dxi, value, c);
        Ok(())
    }

    pub fn add(&self, other: &BasicForm) -> BasicForm {
        debug_assert!(self.compatible(other));
        let mut out = self.clone();
        for ((i, j), c) in &other.terms {
            out.add_term(*i, *j, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &BasicForm) -> BasicForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> BasicForm {
        self.map_coeffs(|c| c.neg())
    }

    pub fn scale(&self, s: &Scalar) -> BasicForm {
        self.map_coeffs(|c| c.scale(s))
    }

    pub fn scale_int(&self, s: i64) -> BasicForm {
        self.map_coeffs(|c| c.scale(&Scalar::from_int(s)))
    }

    /// Multiply every coefficient by r^e; shifts the weight by e.
    pub fn mul_r(&self, e: i64) -> BasicForm {
        self.map_coeffs(|c| c.mul_r(e))
    }

    fn compatible(&self, other: &BasicForm) -> bool {
        self.n == other.n
            && self.k == other.k
            && self.values == other.values
            && self.vgrade == other.vgrade
    }

    fn map_coeffs(&self, f: impl Fn(&SphereCoeff) -> SphereCoeff) -> BasicForm {
        let mut out = BasicForm::zero(self.n, self.k, self.values, self.vgrade);
        for ((i, j), c) in &self.terms {
            out.add_term(*i, *j, f(c));
        }
        out
    }

    /// Wedge on the sphere slot and the value slot together. The sign is
    /// the permutation sign on each slot separately; the slots do not see
    /// each other.
    pub fn wedge(&self, other: &BasicForm) -> Result<BasicForm> {
        if self.n != other.n {
            return Err(Error::Dimension("wedge across different dimensions".into()));
        }
        let values = match (self.values, other.values) {
            (Values::None, v) => v,
            (v, Values::None) => v,
            (Values::Primal, Values::Primal) => Values::Primal,
            (Values::Dual, Values::Dual) => Values::Dual,
            _ => return Err(Error::Space("wedge mixes primal and dual values".into())),
        };
        let mut out = BasicForm::zero(self.n, self.k + other.k, values, self.vgrade + other.vgrade);
        for ((i1, j1), c1) in &self.terms {
            for ((i2, j2), c2) in &other.terms {
                let s1 = perm_sign(*i1, *i2);
                if s1 == 0 {
                    continue;
                }
                let s2 = perm_sign(*j1, *j2);
                if s2 == 0 {
                    continue;
                }
                let c = c1.mul(c2).scale(&Scalar::from_int((s1 * s2) as i64));
                out.add_term(i1.union(*i2), j1.union(*j2), c);
            }
        }
        Ok(out)
    }

    /// Exterior derivative in the xi coordinates; preserves basicness.
    pub fn d_sphere(&self) -> BasicForm {
        let mut out = BasicForm::zero(self.n, self.k + 1, self.values, self.vgrade);
        for ((i, j), c) in &self.terms {
            for idx in 1..=self.n {
                if i.contains(idx) {
                    continue;
                }
                let dc = c.partial(idx);
                if dc.is_zero() {
                    continue;
                }
                let s = perm_sign(IndexSet::single(idx), *i);
                out.add_term(i.union(IndexSet::single(idx)), *j, dc.scale(&Scalar::from_int(s as i64)));
            }
        }
        out
    }

    /// Contraction of the sphere slot with the linear vector field
    /// V = sum_i (A xi)_i d/dxi_i.
    pub fn contract_sphere(&self, field: &LinearField) -> BasicForm {
        let k_out = self.k.saturating_sub(1);
        let mut out = BasicForm::zero(self.n, k_out, self.values, self.vgrade);
        if self.k == 0 {
            return out;
        }
        for ((i, j), c) in &self.terms {
            for idx in i.indices() {
                let mut comp = SphereCoeff::zero(self.n);
                for col in 1..=self.n {
                    let a = &field.mat[idx - 1][col - 1];
                    if a.is_zero() {
                        continue;
                    }
                    comp = comp.add(&c.mul_xi(col).scale_rat(a));
                }
                if comp.is_zero() {
                    continue;
                }
                if i.rank_below(idx) % 2 == 1 {
                    comp = comp.neg();
                }
                out.add_term(i.remove(idx), *j, comp);
            }
        }
        out
    }

    /// Contraction with the Euler field xi_i d/dxi_i; zero exactly on
    /// horizontal forms.
    pub fn euler_contract(&self) -> BasicForm {
        let k_out = self.k.saturating_sub(1);
        let mut out = BasicForm::zero(self.n, k_out, self.values, self.vgrade);
        if self.k == 0 {
            return out;
        }
        for ((i, j), c) in &self.terms {
            for idx in i.indices() {
                let mut comp = c.mul_xi(idx);
                if i.rank_below(idx) % 2 == 1 {
                    comp = comp.neg();
                }
                out.add_term(i.remove(idx), *j, comp);
            }
        }
        out
    }

    /// Left wedge with alpha = sum_i xi_i dxi_i.
    pub fn alpha_wedge(&self) -> BasicForm {
        let mut out = BasicForm::zero(self.n, self.k + 1, self.values, self.vgrade);
        for ((i, j), c) in &self.terms {
            for idx in 1..=self.n {
                if i.contains(idx) {
                    continue;
                }
                let s = perm_sign(IndexSet::single(idx), *i);
                let comp = c.mul_xi(idx).scale(&Scalar::from_int(s as i64));
                out.add_term(i.union(IndexSet::single(idx)), *j, comp);
            }
        }
        out
    }

    /// Projection of a weight-correct form onto its basic part:
    /// P = id - r^{-2} alpha ^ iota_E. A 0-form is already horizontal.
    pub fn basic_project(&self) -> BasicForm {
        if self.k == 0 {
            return self.clone();
        }
        self.sub(&self.euler_contract().alpha_wedge().mul_r(-2))
    }

    /// True when every coefficient is homogeneous of weight -k.
    pub fn weight_correct(&self) -> bool {
        self.terms.values().all(|c| c.has_weight(-(self.k as i64)))
    }

    pub fn is_horizontal(&self) -> bool {
        self.euler_contract().is_zero()
    }

    pub fn is_basic(&self) -> bool {
        self.weight_correct() && self.is_horizontal()
    }

    /// Rewrites the value slot through `f`; the sphere slot is untouched.
    pub fn value_map(
        &self,
        out_values: Values,
        out_vgrade: usize,
        f: impl Fn(IndexSet) -> Result<MultiVector>,
    ) -> Result<BasicForm> {
        let mut out = BasicForm::zero(self.n, self.k, out_values, out_vgrade);
        for ((i, j), c) in &self.terms {
            let mv = f(*j)?;
            for (set, s) in mv.terms() {
                out.add_term(*i, *set, c.scale(s));
            }
        }
        Ok(out)
    }

    /// Iterated interior product of the value slot by the dual basis
    /// covectors indexed by `set`, applied in increasing order.
    pub fn interior_value(&self, set: IndexSet) -> Result<BasicForm> {
        if self.values != Values::Primal {
            return Err(Error::Space("interior_value expects primal values".into()));
        }
        let drop = set.card();
        if drop > self.vgrade {
            return Ok(BasicForm::zero(self.n, self.k, self.values, 0));
        }
        let n = self.n;
        self.value_map(Values::Primal, self.vgrade - drop, |j| {
            Ok(MultiVector::blade(n, Space::Primal, j).interior_set(set))
        })
    }

    /// Fiber integral over the unit sphere of a scalar-valued form of
    /// sphere-degree n-1, using the orientation with dr outermost:
    /// dr ^ omega = f dxi_1..dxi_n integrates f over the sphere.
    pub fn sphere_integrate(&self) -> Result<Scalar> {
        if self.k + 1 != self.n {
            return Err(Error::Dimension(format!(
                "integrand has sphere-degree {}, expected {}",
                self.k,
                self.n - 1
            )));
        }
        if self.vgrade != 0 {
            return Err(Error::Space("integrand must be scalar-valued".into()));
        }
        let mut density = SphereCoeff::zero(self.n);
        for ((i, _), c) in &self.terms {
            let missing = i.complement(self.n);
            let idx = missing.indices()[0];
            let s = perm_sign(missing, *i);
            let mut part = c.mul_xi(idx).mul_r(-1);
            if s < 0 {
                part = part.neg();
            }
            density = density.add(&part);
        }
        let mut total = Scalar::zero();
        for (alpha, coeff) in density.at_radius_one() {
            let m = sphere_moment(self.n, &alpha);
            if !m.is_zero() {
                total += &(&coeff * &m);
            }
        }
        Ok(total)
    }

    pub fn max_xi_degree(&self) -> usize {
        self.terms.values().map(|c| c.max_xi_degree()).max().unwrap_or(0)
    }
}

impl fmt::Display for BasicForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((i, j), c) in &self.terms {
            if !first {
                write!(f, "  +  ")?;
            }
            first = false;
            write!(f, "[{c}] dxi{:?}", i)?;
            if self.values != Values::None {
                let tag = if self.values == Values::Dual { "e*" } else { "e" };
                write!(f, " (x) {tag}{:?}", j)?;
            }
        }
        Ok(())
    }
}

/// Total-degree form with components graded by sphere-degree.
#[derive(Clone, PartialEq, Debug)]
pub struct BigradedForm {
    n: usize,
    degree: usize,
    values: Values,
    comps: BTreeMap<usize, BasicForm>,
}

impl BigradedForm {
    pub fn zero(n: usize, degree: usize, values: Values) -> Self {
        debug_assert!(values != Values::None);
        BigradedForm { n, degree, values, comps: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> Values {
        self.values
    }

    /// Value grade of the sphere-degree-k component.
    pub fn value_grade_at(&self, k: usize) -> Option<usize> {
        let p = self.degree as i64;
        let k = k as i64;
        let g = match self.values {
            Values::Dual => p - k,
            Values::Primal => self.n as i64 - p + k,
            Values::None => unreachable!(),
        };
        (0..=self.n as i64).contains(&g).then_some(g as usize)
    }

    /// Sphere-degrees that can carry a nonzero component.
    pub fn k_range(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&k| k <= self.degree && self.value_grade_at(k).is_some())
            .collect()
    }

    pub fn component(&self, k: usize) -> Option<&BasicForm> {
        self.comps.get(&k)
    }

    /// Component or a correctly-typed zero.
    pub fn component_or_zero(&self, k: usize) -> BasicForm {
        match self.comps.get(&k) {
            Some(f) => f.clone(),
            None => {
                let g = self.value_grade_at(k).unwrap_or(0);
                BasicForm::zero(self.n, k, self.values, g)
            }
        }
    }

    pub fn components(&self) -> impl Iterator<Item = (&usize, &BasicForm)> {
        self.comps.iter()
    }

    pub fn set_component(&mut self, k: usize, f: BasicForm) -> Result<()> {
        if f.is_zero() {
            self.comps.remove(&k);
            return Ok(());
        }
        if f.n() != self.n {
            return Err(Error::Dimension("component dimension mismatch".into()));
        }
        if f.sphere_degree() != k {
            return Err(Error::Dimension("component sphere-degree mismatch".into()));
        }
        if f.values() != self.values {
            return Err(Error::Space("component value kind mismatch".into()));
        }
        let expected = self
            .value_grade_at(k)
            .ok_or_else(|| Error::Dimension(format!("sphere-degree {k} out of range for degree {}", self.degree)))?;
        if k >= self.n {
            return Err(Error::Dimension(format!("sphere-degree {k} exceeds n-1")));
        }
        if f.value_grade() != expected {
            return Err(Error::Dimension(format!(
                "component {k} has value grade {}, expected {expected}",
                f.value_grade()
            )));
        }
        self.comps.insert(k, f);
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.comps.values().all(|f| f.is_zero())
    }

    pub fn add(&self, other: &BigradedForm) -> BigradedForm {
        debug_assert_eq!((self.n, self.degree, self.values), (other.n, other.degree, other.values));
        let mut out = self.clone();
        for (k, f) in &other.comps {
            let merged = out.component_or_zero(*k).add(f);
            if merged.is_zero() {
                out.comps.remove(k);
            } else {
                out.comps.insert(*k, merged);
            }
        }
        out
    }

    pub fn sub(&self, other: &BigradedForm) -> BigradedForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> BigradedForm {
        let comps = self.comps.iter().map(|(k, f)| (*k, f.neg())).collect();
        BigradedForm { comps, ..self.clone() }
    }

    pub fn scale(&self, s: &Scalar) -> BigradedForm {
        if s.is_zero() {
            return BigradedForm::zero(self.n, self.degree, self.values);
        }
        let comps = self.comps.iter().map(|(k, f)| (*k, f.scale(s))).collect();
        BigradedForm { comps, ..self.clone() }
    }

    /// Fiberwise Hodge on the value slot, dual to primal.
    pub fn tilde(&self) -> Result<BigradedForm> {
        if self.values != Values::Dual {
            return Err(Error::Space("tilde expects dual values".into()));
        }
        let mut out = BigradedForm::zero(self.n, self.degree, Values::Primal);
        let n = self.n;
        for (k, f) in &self.comps {
            let g = out.value_grade_at(*k).expect("grade stays in range");
            let mapped = f.value_map(Values::Primal, g, |j| {
                MultiVector::blade(n, Space::Dual, j).hodge_inverse()
            })?;
            out.comps.insert(*k, mapped);
        }
        Ok(out)
    }

    /// Inverse of `tilde`.
    pub fn untilde(&self) -> Result<BigradedForm> {
        if self.values != Values::Primal {
            return Err(Error::Space("untilde expects primal values".into()));
        }
        let mut out = BigradedForm::zero(self.n, self.degree, Values::Dual);
        let n = self.n;
        for (k, f) in &self.comps {
            let g = out.value_grade_at(*k).expect("grade stays in range");
            let mapped = f.value_map(Values::Dual, g, |j| {
                MultiVector::blade(n, Space::Primal, j).hodge_forward()
            })?;
            out.comps.insert(*k, mapped);
        }
        Ok(out)
    }

    /// Total differential on the dual-valued side:
    /// (d tau)_k = d(tau_{k-1}) + (-1)^{k+1} db(tau_k)
    /// with db the value-slot coboundary of the algebra.
    pub fn d_total(&self, spec: &LieAlgebraSpec) -> Result<BigradedForm> {
        if self.values != Values::Dual {
            return Err(Error::Space("d_total expects dual values".into()));
        }
        if spec.n != self.n {
            return Err(Error::Dimension("algebra dimension mismatch".into()));
        }
        let mut out = BigradedForm::zero(self.n, self.degree + 1, Values::Dual);
        let n = self.n;
        for k in 0..=self.n.saturating_sub(1) {
            let Some(grade) = out.value_grade_at(k) else { continue };
            let mut acc = BasicForm::zero(self.n, k, Values::Dual, grade);
            if k > 0 {
                if let Some(prev) = self.comps.get(&(k - 1)) {
                    acc = acc.add(&prev.d_sphere());
                }
            }
            if let Some(cur) = self.comps.get(&k) {
                let mapped = cur.value_map(Values::Dual, grade, |j| {
                    spec.koszul_coboundary(&MultiVector::blade(n, Space::Dual, j))
                })?;
                let signed = if (k + 1) % 2 == 0 { mapped } else { mapped.neg() };
                acc = acc.add(&signed);
            }
            out.set_component(k, acc)?;
        }
        Ok(out)
    }

    /// Total differential conjugated to the primal-valued side:
    /// (d~ sigma)_k = d(sigma_{k-1}) + (-1)^{n-p+1} db(sigma_k)
    /// with db the value-slot boundary. Satisfies
    /// untilde(d~(tilde tau)) = d_total(tau).
    pub fn tilde_d_total(&self, spec: &LieAlgebraSpec) -> Result<BigradedForm> {
        if self.values != Values::Primal {
            return Err(Error::Space("tilde_d_total expects primal values".into()));
        }
        if spec.n != self.n {
            return Err(Error::Dimension("algebra dimension mismatch".into()));
        }
        let mut out = BigradedForm::zero(self.n, self.degree + 1, Values::Primal);
        let n = self.n;
        let sign_pos = (n + self.degree + 1) % 2 == 0;
        for k in 0..=self.n.saturating_sub(1) {
            let Some(grade) = out.value_grade_at(k) else { continue };
            let mut acc = BasicForm::zero(self.n, k, Values::Primal, grade);
            if k > 0 {
                if let Some(prev) = self.comps.get(&(k - 1)) {
                    acc = acc.add(&prev.d_sphere());
                }
            }
            if let Some(cur) = self.comps.get(&k) {
                let mapped = cur.value_map(Values::Primal, grade, |j| {
                    spec.koszul_boundary(&MultiVector::blade(n, Space::Primal, j))
                })?;
                let signed = if sign_pos { mapped } else { mapped.neg() };
                acc = acc.add(&signed);
            }
            out.set_component(k, acc)?;
        }
        Ok(out)
    }

    /// Closedness of a degree-n dual form checked componentwise on the
    /// primal side: d(sigma_{k-1}) = db(sigma_k) for every k, with sigma
    /// the tilde of the form. Agrees with d_total vanishing.
    pub fn is_closed(&self, spec: &LieAlgebraSpec) -> Result<bool> {
        if self.values != Values::Dual || self.degree != self.n {
            return Err(Error::Space("closedness check expects a dual form of degree n".into()));
        }
        let sigma = self.tilde()?;
        let n = self.n;
        for k in 0..=n {
            let lhs = if k >= 1 {
                sigma.comps.get(&(k - 1)).map(|f| f.d_sphere())
            } else {
                None
            };
            let rhs = match sigma.comps.get(&k) {
                Some(f) if f.value_grade() > 0 => {
                    let g = f.value_grade() - 1;
                    Some(f.value_map(Values::Primal, g, |j| {
                        spec.koszul_boundary(&MultiVector::blade(n, Space::Primal, j))
                    })?)
                }
                _ => None,
            };
            let diff = match (lhs, rhs) {
                (None, None) => continue,
                (Some(l), None) => l,
                (None, r) => r.unwrap().neg(),
                (Some(l), Some(r)) => l.sub(&r),
            };
            if !diff.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Verticality of a degree-n dual form: every component's value part
    /// must be annihilated by left multiplication with the tautological
    /// covector, aggregated over value keys per sphere term.
    pub fn is_vertical(&self) -> Result<bool> {
        if self.values != Values::Dual || self.degree != self.n {
            return Err(Error::Space("verticality check expects a dual form of degree n".into()));
        }
        for f in self.comps.values() {
            if !f.vertical_defect().is_empty() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Fiber integral over the sphere of the sphere-degree n-1 component,
    /// one value key at a time.
    pub fn pushforward(&self) -> Result<MultiVector> {
        let space = self.values.space().expect("bigraded forms carry values");
        let k = self.n - 1;
        self.value_grade_at(k)
            .ok_or_else(|| Error::Dimension("no integrable component at sphere-degree n-1".into()))?;
        let mut out = MultiVector::zero(self.n, space);
        let Some(f) = self.comps.get(&k) else { return Ok(out) };
        let mut by_value: BTreeMap<IndexSet, BasicForm> = BTreeMap::new();
        for ((i, j), c) in f.terms() {
            let slice = by_value
                .entry(*j)
                .or_insert_with(|| BasicForm::zero(self.n, k, Values::None, 0));
            slice.add_term(*i, IndexSet::empty(), c.clone());
        }
        for (j, slice) in by_value {
            let v = slice.sphere_integrate()?;
            out.add_term(j, v);
        }
        Ok(out)
    }

    /// Pushforward of a degree n-1 dual form, landing in scalars.
    pub fn pushforward_scalar(&self) -> Result<Scalar> {
        let mv = self.pushforward()?;
        match mv.grade() {
            None => Ok(Scalar::zero()),
            Some(0) => Ok(mv.coeff(IndexSet::empty())),
            Some(_) => Err(Error::Space("pushforward is not scalar-valued".into())),
        }
    }

    pub fn max_xi_degree(&self) -> usize {
        self.comps.values().map(|f| f.max_xi_degree()).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let mut terms = Vec::new();
        for (k, f) in &self.comps {
            for ((i, j), c) in f.terms() {
                let mut obj = Map::new();
                obj.insert("k".into(), json!(k));
                obj.insert("dxi".into(), json!(i.indices()));
                obj.insert("value".into(), json!(j.indices()));
                let cj = c.to_json();
                obj.insert("num".into(), cj["num"].clone());
                obj.insert("rpow".into(), cj["rpow"].clone());
                terms.push(Value::Object(obj));
            }
        }
        json!({
            "degree": self.degree,
            "values": self.values.as_str(),
            "terms": terms,
        })
    }

    pub fn from_json(v: &Value, n: usize) -> Result<BigradedForm> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("form must be an object".into()))?;
        let degree = obj
            .get("degree")
            .and_then(|d| d.as_u64())
            .ok_or_else(|| Error::Parse("form needs an integer degree".into()))? as usize;
        let values = Values::parse(
            obj.get("values")
                .and_then(|s| s.as_str())
                .ok_or_else(|| Error::Parse("form needs a values kind".into()))?,
        )?;
        if values == Values::None {
            return Err(Error::Parse("bigraded forms must be primal or dual valued".into()));
        }
        let mut out = BigradedForm::zero(n, degree, values);
        let terms = obj
            .get("terms")
            .and_then(|t| t.as_array())
            .ok_or_else(|| Error::Parse("form needs a terms array".into()))?;
        for t in terms {
            let tobj = t.as_object().ok_or_else(|| Error::Parse("term must be an object".into()))?;
            let k = tobj
                .get("k")
                .and_then(|x| x.as_u64())
                .ok_or_else(|| Error::Parse("term needs a sphere-degree k".into()))? as usize;
            let dxi = parse_index_array(tobj.get("dxi"), n, "dxi")?;
            let value = parse_index_array(tobj.get("value"), n, "value")?;
            let coeff = SphereCoeff::from_json(t, n)?;
            let grade = out
                .value_grade_at(k)
                .ok_or_else(|| Error::Dimension(format!("sphere-degree {k} out of range")))?;
            if k >= n {
                return Err(Error::Dimension(format!("sphere-degree {k} exceeds n-1")));
            }
            let mut comp = out.component_or_zero(k);
            if comp.value_grade() != grade {
                return Err(Error::Dimension("inconsistent component grade".into()));
            }
            comp.insert_term(dxi, value, coeff)?;
            out.set_component(k, comp)?;
        }
        for (k, f) in &out.comps {
            if !f.is_basic() {
                return Err(Error::NotBasic(format!("component at sphere-degree {k}")));
            }
        }
        Ok(out)
    }
}

fn parse_index_array(v: Option<&Value>, n: usize, what: &str) -> Result<IndexSet> {
    let arr = v
        .and_then(|x| x.as_array())
        .ok_or_else(|| Error::Parse(format!("term needs an index array {what}")))?;
    let mut indices = Vec::new();
    for e in arr {
        let i = e
            .as_u64()
            .ok_or_else(|| Error::Parse(format!("{what} entries must be integers")))? as usize;
        indices.push(i);
    }
    IndexSet::from_indices(&indices, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{abelian, so3};
    use crate::scalar::big_rat;

    fn xi_coeff(n: usize, i: usize, rexp: i64) -> SphereCoeff {
        let mut a = vec![0u16; n];
        a[i - 1] = 1;
        SphereCoeff::monomial(n, a, rexp, Scalar::one())
    }

    /// The angular form on R^2 \ 0: (xi1 dxi2 - xi2 dxi1) r^{-2}.
    fn angular_form() -> BasicForm {
        let mut f = BasicForm::zero(2, 1, Values::None, 0);
        f.add_term(IndexSet::single(2), IndexSet::empty(), xi_coeff(2, 1, -2));
        f.add_term(IndexSet::single(1), IndexSet::empty(), xi_coeff(2, 2, -2).neg());
        f
    }

    /// Solid angle form on R^3 \ 0.
    fn solid_angle_form() -> BasicForm {
        let mut f = BasicForm::zero(3, 2, Values::None, 0);
        let full = IndexSet::full(3);
        for i in 1..=3 {
            let rest = full.remove(i);
            let s = perm_sign(IndexSet::single(i), rest);
            let mut c = xi_coeff(3, i, -3);
            if s < 0 {
                c = c.neg();
            }
            f.add_term(rest, IndexSet::empty(), c);
        }
        f
    }

    #[test]
    fn angular_form_is_basic_closed_and_integrates_to_two_pi() {
        let f = angular_form();
        assert!(f.is_basic());
        assert!(f.d_sphere().is_zero());
        assert_eq!(f.sphere_integrate().unwrap(), Scalar::pi_term(big_rat(2, 1), 1));
    }

    #[test]
    fn solid_angle_integrates_to_four_pi() {
        let f = solid_angle_form();
        assert!(f.is_basic());
        assert!(f.d_sphere().is_zero());
        assert_eq!(f.sphere_integrate().unwrap(), Scalar::pi_term(big_rat(4, 1), 1));
    }

    #[test]
    fn d_sphere_squares_to_zero_and_preserves_basic() {
        let mut f = BasicForm::zero(3, 0, Values::None, 0);
        f.add_term(IndexSet::empty(), IndexSet::empty(), xi_coeff(3, 1, -1));
        assert!(f.is_basic());
        let df = f.d_sphere();
        assert!(df.is_basic());
        assert!(df.d_sphere().is_zero());
    }

    #[test]
    fn basic_projection_fixes_basic_forms_and_kills_radial_parts() {
        let f = angular_form();
        assert_eq!(f.basic_project(), f);
        // dr-like form: alpha r^{-2} = sum xi_i dxi_i r^{-2} has weight -1
        // and projects to zero.
        let mut radial = BasicForm::zero(2, 0, Values::None, 0);
        radial.add_term(IndexSet::empty(), IndexSet::empty(), SphereCoeff::radius_pow(2, -2));
        let alpha = radial.alpha_wedge();
        assert!(alpha.weight_correct());
        assert!(alpha.basic_project().is_zero());
    }

    #[test]
    fn wedge_signs_match_on_both_slots() {
        let n = 3;
        let mut a = BasicForm::zero(n, 1, Values::Primal, 1);
        a.add_term(IndexSet::single(2), IndexSet::single(3), SphereCoeff::radius_pow(n, -1));
        let mut b = BasicForm::zero(n, 1, Values::Primal, 1);
        b.add_term(IndexSet::single(1), IndexSet::single(2), SphereCoeff::radius_pow(n, -1));
        let w = a.wedge(&b).unwrap();
        // dxi_2 ^ dxi_1 = -dxi_{12}; e_3 ^ e_2 = -e_{23}; signs cancel.
        let c = w.coeff(
            IndexSet::from_indices(&[1, 2], n).unwrap(),
            IndexSet::from_indices(&[2, 3], n).unwrap(),
        );
        assert_eq!(c, SphereCoeff::radius_pow(n, -2));
    }

    #[test]
    fn contraction_drops_degree_with_position_sign() {
        let n = 2;
        let mut f = BasicForm::zero(n, 2, Values::None, 0);
        f.add_term(IndexSet::from_indices(&[1, 2], n).unwrap(), IndexSet::empty(), SphereCoeff::radius_pow(n, -2));
        let g = f.euler_contract();
        // iota_E (dxi1 ^ dxi2) r^{-2} = xi1 dxi2 r^{-2} - xi2 dxi1 r^{-2}
        assert_eq!(g.coeff(IndexSet::single(2), IndexSet::empty()), xi_coeff(n, 1, -2));
        assert_eq!(g.coeff(IndexSet::single(1), IndexSet::empty()), xi_coeff(n, 2, -2).neg());
    }

    #[test]
    fn rotation_field_annihilates_rotation_invariant_forms() {
        // On so(3) the coadjoint field of e_3 is an infinitesimal rotation;
        // the angular-momentum style form below is invariant under it.
        let spec = so3();
        let f = solid_angle_form();
        let field = spec.coadjoint_field(3);
        let lie_derivative = f
            .contract_sphere(&field)
            .d_sphere()
            .add(&f.d_sphere().contract_sphere(&field));
        assert!(lie_derivative.is_zero());
    }

    #[test]
    fn bigraded_grading_rules() {
        let n = 3;
        let tau = BigradedForm::zero(n, 3, Values::Dual);
        assert_eq!(tau.value_grade_at(0), Some(3));
        assert_eq!(tau.value_grade_at(2), Some(1));
        assert_eq!(tau.value_grade_at(4), None);
        let sigma = BigradedForm::zero(n, 3, Values::Primal);
        assert_eq!(sigma.value_grade_at(0), Some(0));
        assert_eq!(sigma.value_grade_at(2), Some(2));
        assert_eq!(tau.k_range(), vec![0, 1, 2]);
        let low = BigradedForm::zero(n, 1, Values::Dual);
        assert_eq!(low.k_range(), vec![0, 1]);
    }

    #[test]
    fn tilde_round_trips() {
        let n = 3;
        let mut tau = BigradedForm::zero(n, n, Values::Dual);
        let mut comp = BasicForm::zero(n, 1, Values::Dual, 2);
        comp.add_term(
            IndexSet::single(2),
            IndexSet::from_indices(&[1, 3], n).unwrap(),
            xi_coeff(n, 1, -2),
        );
        tau.set_component(1, comp).unwrap();
        let back = tau.tilde().unwrap().untilde().unwrap();
        assert_eq!(back, tau);
    }

    #[test]
    fn d_total_squares_to_zero() {
        let spec = so3();
        let n = 3;
        let mut tau = BigradedForm::zero(n, 2, Values::Dual);
        let mut c0 = BasicForm::zero(n, 0, Values::Dual, 2);
        c0.add_term(
            IndexSet::empty(),
            IndexSet::from_indices(&[1, 2], n).unwrap(),
            SphereCoeff::constant(n, Scalar::one()),
        );
        let mut c1 = BasicForm::zero(n, 1, Values::Dual, 1);
        c1.add_term(IndexSet::single(3), IndexSet::single(2), xi_coeff(n, 1, -2));
        tau.set_component(0, c0).unwrap();
        tau.set_component(1, c1).unwrap();
        let d2 = tau.d_total(&spec).unwrap().d_total(&spec).unwrap();
        assert!(d2.is_zero());
    }

    #[test]
    fn tilde_conjugation_matches_d_total() {
        let spec = so3();
        let n = 3;
        let mut tau = BigradedForm::zero(n, n, Values::Dual);
        let mut c1 = BasicForm::zero(n, 1, Values::Dual, 2);
        c1.add_term(
            IndexSet::single(1),
            IndexSet::from_indices(&[2, 3], n).unwrap(),
            xi_coeff(n, 3, -2),
        );
        let mut c2 = BasicForm::zero(n, 2, Values::Dual, 1);
        c2.add_term(
            IndexSet::from_indices(&[1, 2], n).unwrap(),
            IndexSet::single(1),
            xi_coeff(n, 2, -3),
        );
        tau.set_component(1, c1).unwrap();
        tau.set_component(2, c2).unwrap();
        let via_tilde = tau
            .tilde()
            .unwrap()
            .tilde_d_total(&spec)
            .unwrap()
            .untilde()
            .unwrap();
        assert_eq!(via_tilde, tau.d_total(&spec).unwrap());
    }

    #[test]
    fn verticality_examples() {
        let n = 2;
        // tau_0 with top value grade is vertical for free.
        let mut tau = BigradedForm::zero(n, n, Values::Dual);
        let mut c0 = BasicForm::zero(n, 0, Values::Dual, 2);
        c0.add_term(
            IndexSet::empty(),
            IndexSet::from_indices(&[1, 2], n).unwrap(),
            SphereCoeff::constant(n, Scalar::one()),
        );
        tau.set_component(0, c0).unwrap();
        assert!(tau.is_vertical().unwrap());

        // xi1 e*_1 + xi2 e*_2 is proportional to the tautological covector.
        let mut good = BigradedForm::zero(n, n, Values::Dual);
        let mut g1 = BasicForm::zero(n, 1, Values::Dual, 1);
        for i in 1..=n {
            g1.add_term(IndexSet::single(1), IndexSet::single(i), xi_coeff(n, i, -2));
        }
        good.set_component(1, g1).unwrap();
        assert!(good.is_vertical().unwrap());

        // A lone e*_2 value is not vertical.
        let mut bad = BigradedForm::zero(n, n, Values::Dual);
        let mut b1 = BasicForm::zero(n, 1, Values::Dual, 1);
        b1.add_term(IndexSet::single(1), IndexSet::single(2), xi_coeff(n, 1, -2));
        bad.set_component(1, b1).unwrap();
        assert!(!bad.is_vertical().unwrap());
    }

    #[test]
    fn pushforward_integrates_value_slices() {
        let n = 2;
        // Degree n form whose k = n-1 component is the angular form times
        // e*_1: pushforward is 2 pi e*_1.
        let mut tau = BigradedForm::zero(n, n, Values::Dual);
        let mut c1 = BasicForm::zero(n, 1, Values::Dual, 1);
        let ang = angular_form();
        for ((i, _), c) in ang.terms() {
            c1.add_term(*i, IndexSet::single(1), c.clone());
        }
        tau.set_component(1, c1).unwrap();
        let mv = tau.pushforward().unwrap();
        assert_eq!(mv.coeff(IndexSet::single(1)), Scalar::pi_term(big_rat(2, 1), 1));
        assert_eq!(mv.coeff(IndexSet::single(2)), Scalar::zero());
    }

    #[test]
    fn closedness_on_abelian_examples() {
        let spec = abelian(2);
        let n = 2;
        // The vertical volume family: tau_0 = e*_{12}, constant coefficient;
        // d tau has only the k = 1 component d(1) = 0, and the coboundary
        // vanishes on abelian algebras, so tau is closed.
        let mut tau = BigradedForm::zero(n, n, Values::Dual);
        let mut c0 = BasicForm::zero(n, 0, Values::Dual, 2);
        c0.add_term(
            IndexSet::empty(),
            IndexSet::from_indices(&[1, 2], n).unwrap(),
            SphereCoeff::constant(n, Scalar::one()),
        );
        tau.set_component(0, c0).unwrap();
        assert!(tau.is_closed(&spec).unwrap());
        assert!(tau.d_total(&spec).unwrap().is_zero());

        // A non-closed example: basic, but d of the k = 0 part survives.
        let mut rho = BigradedForm::zero(n, n, Values::Dual);
        let mut c0 = BasicForm::zero(n, 0, Values::Dual, 2);
        c0.add_term(
            IndexSet::empty(),
            IndexSet::from_indices(&[1, 2], n).unwrap(),
            xi_coeff(n, 1, -1),
        );
        rho.set_component(0, c0).unwrap();
        assert!(rho.component(0).unwrap().is_basic());
        assert!(!rho.is_closed(&spec).unwrap());
        assert!(!rho.d_total(&spec).unwrap().is_zero());
    }

    #[test]
    fn json_round_trip() {
        let n = 3;
        let mut tau = BigradedForm::zero(n, n, Values::Dual);
        // Horizontal combination xi_1 dxi_2 - xi_2 dxi_1 against two value
        // blades, one with a pi coefficient.
        let mut c1 = BasicForm::zero(n, 1, Values::Dual, 2);
        for (value, s) in [
            (IndexSet::from_indices(&[2, 3], n).unwrap(), Scalar::one()),
            (IndexSet::from_indices(&[1, 2], n).unwrap(), Scalar::pi()),
        ] {
            c1.add_term(IndexSet::single(2), value, xi_coeff(n, 1, -2).scale(&s));
            c1.add_term(IndexSet::single(1), value, xi_coeff(n, 2, -2).scale(&s).neg());
        }
        tau.set_component(1, c1).unwrap();
        assert!(tau.component(1).unwrap().is_basic());
        let j = tau.to_json();
        let back = BigradedForm::from_json(&j, n).unwrap();
        assert_eq!(back, tau);
    }
}
