//! Coefficient ring for sphere-bundle forms: polynomials in the ambient
//! coordinates xi_1..xi_n and integer powers of the radius r, modulo the
//! relation r^2 = |xi|^2, kept in a canonical shape so equality is map
//! equality.
//!
//! Canonical shape: an even global power of r times a numerator
//! A(xi) + B(xi) r where A and B are not both divisible by |xi|^2. Keeping
//! the global power even pins down the representation: the relation can
//! only trade r factors in pairs, so (rpow, A, B) is unique and equality is
//! map equality. Every coefficient appearing in a form of sphere-degree k
//! is homogeneous of weight -k, where weight counts r once.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Scalar};

/// Monomial key: xi exponents plus the parity bit of the r factor that is
/// not absorbed into the global power.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct Mono {
    pub alpha: Vec<u16>,
    pub rbit: u8,
}

/// Polynomial in xi alone, used internally while canonicalizing.
type XiPoly = BTreeMap<Vec<u16>, Scalar>;

#[derive(Clone, PartialEq, Debug)]
pub struct SphereCoeff {
    n: usize,
    rpow: i64,
    terms: BTreeMap<Mono, Scalar>,
}

fn xipoly_insert(p: &mut XiPoly, key: Vec<u16>, c: Scalar) {
    if c.is_zero() {
        return;
    }
    match p.get_mut(&key) {
        Some(v) => {
            *v += &c;
            if v.is_zero() {
                p.remove(&key);
            }
        }
        None => {
            p.insert(key, c);
        }
    }
}

/// |xi|^2 as a polynomial.
fn norm_sq(n: usize) -> XiPoly {
    let mut p = XiPoly::new();
    for i in 0..n {
        let mut a = vec![0u16; n];
        a[i] = 2;
        p.insert(a, Scalar::one());
    }
    p
}

fn xipoly_mul(a: &XiPoly, b: &XiPoly) -> XiPoly {
    let mut out = XiPoly::new();
    for (ka, ca) in a {
        for (kb, cb) in b {
            let key: Vec<u16> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
            xipoly_insert(&mut out, key, ca * cb);
        }
    }
    out
}

fn xipoly_pow(base: &XiPoly, e: usize) -> XiPoly {
    let mut out = XiPoly::new();
    out.insert(vec![0u16; base.keys().next().map_or(0, |k| k.len())], Scalar::one());
    for _ in 0..e {
        out = xipoly_mul(&out, base);
    }
    out
}

/// Exact division by |xi|^2; `None` when not divisible. Reduction by the
/// lexicographically leading divisor term xi_1^2: subtracting a multiple of
/// the divisor strictly lowers the lex-maximal monomial, so this terminates.
fn xipoly_div_norm_sq(p: &XiPoly, n: usize) -> Option<XiPoly> {
    let nsq = norm_sq(n);
    let mut rem = p.clone();
    let mut quot = XiPoly::new();
    while let Some((key, coeff)) = rem.iter().next_back().map(|(k, c)| (k.clone(), c.clone())) {
        if key[0] < 2 {
            return None;
        }
        let mut qk = key.clone();
        qk[0] -= 2;
        for (dk, dc) in &nsq {
            let prod: Vec<u16> = qk.iter().zip(dk).map(|(x, y)| x + y).collect();
            xipoly_insert(&mut rem, prod, -(&coeff * dc));
        }
        xipoly_insert(&mut quot, qk, coeff);
    }
    Some(quot)
}

impl SphereCoeff {
    pub fn zero(n: usize) -> Self {
        SphereCoeff { n, rpow: 0, terms: BTreeMap::new() }
    }

    /// c * xi^alpha * r^rexp.
    pub fn monomial(n: usize, alpha: Vec<u16>, rexp: i64, c: Scalar) -> Self {
        assert_eq!(alpha.len(), n, "exponent vector length");
        SphereCoeff::from_parts(n, vec![(alpha, rexp, c)])
    }

    pub fn constant(n: usize, c: Scalar) -> Self {
        SphereCoeff::monomial(n, vec![0; n], 0, c)
    }

    /// r^e as a coefficient.
    pub fn radius_pow(n: usize, e: i64) -> Self {
        SphereCoeff::monomial(n, vec![0; n], e, Scalar::one())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant term when the coefficient is a plain scalar.
    pub fn as_constant(&self) -> Option<Scalar> {
        if self.is_zero() {
            return Some(Scalar::zero());
        }
        if self.rpow != 0 || self.terms.len() != 1 {
            return None;
        }
        let (k, c) = self.terms.iter().next().unwrap();
        if k.rbit == 0 && k.alpha.iter().all(|&a| a == 0) {
            Some(c.clone())
        } else {
            None
        }
    }

    /// Homogeneity weight (xi-degree plus r-degree), `None` for zero.
    pub fn weight(&self) -> Option<i64> {
        let (mono, _) = self.terms.iter().next()?;
        Some(mono_weight(mono) + self.rpow)
    }

    /// True when every term has the same weight `w`.
    pub fn has_weight(&self, w: i64) -> bool {
        self.terms.iter().all(|(m, _)| mono_weight(m) + self.rpow == w)
    }

    /// Adds c * xi^alpha * r^excess on top of the global power, expanding
    /// even r powers through |xi|^2.
    fn expand_term(&mut self, alpha: Vec<u16>, excess: i64, c: Scalar) {
        debug_assert!(excess >= 0);
        let rbit = (excess % 2) as u8;
        let half = (excess / 2) as usize;
        if half == 0 {
            self.insert_mono(Mono { alpha, rbit }, c);
            return;
        }
        let mut base = XiPoly::new();
        base.insert(alpha, c);
        let expanded = xipoly_mul(&base, &xipoly_pow(&norm_sq(self.n), half));
        for (k, coeff) in expanded {
            self.insert_mono(Mono { alpha: k, rbit }, coeff);
        }
    }

    fn insert_mono(&mut self, m: Mono, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += &c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn split(&self) -> (XiPoly, XiPoly) {
        let mut a = XiPoly::new();
        let mut b = XiPoly::new();
        for (m, c) in &self.terms {
            let target = if m.rbit == 0 { &mut a } else { &mut b };
            xipoly_insert(target, m.alpha.clone(), c.clone());
        }
        (a, b)
    }

    fn canonicalize(&mut self) {
        debug_assert!(self.rpow % 2 == 0, "global r power stays even");
        if self.terms.is_empty() {
            self.rpow = 0;
            return;
        }
        loop {
            let (a, b) = self.split();
            let da = if a.is_empty() { Some(XiPoly::new()) } else { xipoly_div_norm_sq(&a, self.n) };
            let db = if b.is_empty() { Some(XiPoly::new()) } else { xipoly_div_norm_sq(&b, self.n) };
            if let (Some(qa), Some(qb)) = (da, db) {
                self.rpow += 2;
                let mut terms = BTreeMap::new();
                for (k, c) in qa {
                    terms.insert(Mono { alpha: k, rbit: 0 }, c);
                }
                for (k, c) in qb {
                    terms.insert(Mono { alpha: k, rbit: 1 }, c);
                }
                self.terms = terms;
                if self.terms.is_empty() {
                    self.rpow = 0;
                    return;
                }
                continue;
            }
            break;
        }
    }

    pub fn add(&self, other: &SphereCoeff) -> SphereCoeff {
        assert_eq!(self.n, other.n);
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let rpow = self.rpow.min(other.rpow);
        let mut out = SphereCoeff { n: self.n, rpow, terms: BTreeMap::new() };
        for part in [self, other] {
            let excess_base = part.rpow - rpow;
            for (m, c) in &part.terms {
                out.expand_term(m.alpha.clone(), excess_base + m.rbit as i64, c.clone());
            }
        }
        out.canonicalize();
        out
    }

    pub fn sub(&self, other: &SphereCoeff) -> SphereCoeff {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SphereCoeff {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect();
        SphereCoeff { n: self.n, rpow: self.rpow, terms }
    }

    pub fn mul(&self, other: &SphereCoeff) -> SphereCoeff {
        assert_eq!(self.n, other.n);
        let mut out = SphereCoeff { n: self.n, rpow: self.rpow + other.rpow, terms: BTreeMap::new() };
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let alpha: Vec<u16> = m1.alpha.iter().zip(&m2.alpha).map(|(x, y)| x + y).collect();
                out.expand_term(alpha, (m1.rbit + m2.rbit) as i64, c1 * c2);
            }
        }
        out.canonicalize();
        out
    }

    pub fn scale(&self, s: &Scalar) -> SphereCoeff {
        if s.is_zero() {
            return SphereCoeff::zero(self.n);
        }
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect();
        SphereCoeff { n: self.n, rpow: self.rpow, terms }
    }

    pub fn scale_int(&self, s: i64) -> SphereCoeff {
        self.scale(&Scalar::from_int(s))
    }

    pub fn scale_rat(&self, s: &BigRational) -> SphereCoeff {
        if s.is_zero() {
            return SphereCoeff::zero(self.n);
        }
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c.scale_rat(s))).collect();
        SphereCoeff { n: self.n, rpow: self.rpow, terms }
    }

    /// Multiply by xi_i (1-based).
    pub fn mul_xi(&self, i: usize) -> SphereCoeff {
        assert!(i >= 1 && i <= self.n);
        let mut out = SphereCoeff { n: self.n, rpow: self.rpow, terms: BTreeMap::new() };
        for (m, c) in &self.terms {
            let mut alpha = m.alpha.clone();
            alpha[i - 1] += 1;
            out.insert_mono(Mono { alpha, rbit: m.rbit }, c.clone());
        }
        out.canonicalize();
        out
    }

    /// Multiply by r^e.
    pub fn mul_r(&self, e: i64) -> SphereCoeff {
        if self.is_zero() {
            return self.clone();
        }
        if e % 2 == 0 {
            return SphereCoeff { n: self.n, rpow: self.rpow + e, terms: self.terms.clone() };
        }
        let parts = self
            .terms
            .iter()
            .map(|(m, c)| (m.alpha.clone(), self.rpow + m.rbit as i64 + e, c.clone()))
            .collect();
        SphereCoeff::from_parts(self.n, parts)
    }

    /// Partial derivative in xi_i (1-based), using
    /// D_i r^s = s xi_i r^{s-2}.
    pub fn partial(&self, i: usize) -> SphereCoeff {
        assert!(i >= 1 && i <= self.n);
        let mut parts: Vec<(Vec<u16>, i64, Scalar)> = Vec::new();
        for (m, c) in &self.terms {
            let s = self.rpow + m.rbit as i64;
            let a = m.alpha[i - 1];
            if a > 0 {
                let mut alpha = m.alpha.clone();
                alpha[i - 1] -= 1;
                parts.push((alpha, s, c.scale_int(a as i64)));
            }
            if s != 0 {
                let mut alpha = m.alpha.clone();
                alpha[i - 1] += 1;
                parts.push((alpha, s - 2, c.scale_int(s)));
            }
        }
        SphereCoeff::from_parts(self.n, parts)
    }

    /// Assembles from (alpha, total r exponent, coefficient) triples.
    pub fn from_parts(n: usize, parts: Vec<(Vec<u16>, i64, Scalar)>) -> SphereCoeff {
        let mut rpow = i64::MAX;
        for (_, rexp, c) in &parts {
            if !c.is_zero() {
                let aligned = if rexp.rem_euclid(2) == 1 { rexp - 1 } else { *rexp };
                rpow = rpow.min(aligned);
            }
        }
        if rpow == i64::MAX {
            return SphereCoeff::zero(n);
        }
        let mut out = SphereCoeff { n, rpow, terms: BTreeMap::new() };
        for (alpha, rexp, c) in parts {
            if c.is_zero() {
                continue;
            }
            out.expand_term(alpha, rexp - rpow, c);
        }
        out.canonicalize();
        out
    }

    /// Restriction to the unit sphere: r = 1, returning xi-monomial
    /// coefficients.
    pub fn at_radius_one(&self) -> BTreeMap<Vec<u16>, Scalar> {
        let mut out: XiPoly = XiPoly::new();
        for (m, c) in &self.terms {
            xipoly_insert(&mut out, m.alpha.clone(), c.clone());
        }
        out
    }

    /// Unique decomposition c = (A + B r) r^rpow with A, B polynomials in
    /// xi, re-expanded so every retained r power at least `floor_rpow` is
    /// folded into |xi|^2 factors. Linear in c for a fixed floor, which
    /// makes the result usable as coordinates of a linear system.
    pub fn expand_at(&self, floor_rpow: i64) -> BTreeMap<Mono, Scalar> {
        let mut out = BTreeMap::new();
        if self.is_zero() {
            return out;
        }
        assert!(floor_rpow % 2 == 0, "expansion floor must be even");
        assert!(
            floor_rpow <= self.rpow,
            "expansion floor {} above stored power {}",
            floor_rpow,
            self.rpow
        );
        let mut carrier = SphereCoeff { n: self.n, rpow: floor_rpow, terms: BTreeMap::new() };
        let excess_base = self.rpow - floor_rpow;
        for (m, c) in &self.terms {
            carrier.expand_term(m.alpha.clone(), excess_base + m.rbit as i64, c.clone());
        }
        for (m, c) in carrier.terms {
            out.insert(m, c);
        }
        out
    }

    pub fn rpow(&self) -> i64 {
        self.rpow
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Scalar)> {
        self.terms.iter()
    }

    /// Largest xi-degree among the stored monomials.
    pub fn max_xi_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|m| m.alpha.iter().map(|&a| a as usize).sum())
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let mut num = Map::new();
        for (m, c) in &self.terms {
            let alpha: Vec<String> = m.alpha.iter().map(|a| a.to_string()).collect();
            let key = format!("({};{})", alpha.join(","), m.rbit);
            num.insert(key, c.to_json());
        }
        json!({ "num": Value::Object(num), "rpow": self.rpow })
    }

    pub fn from_json(v: &Value, n: usize) -> Result<SphereCoeff> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("coefficient must be an object".into()))?;
        let rpow = obj
            .get("rpow")
            .map(|r| r.as_i64().ok_or_else(|| Error::Parse("rpow must be an integer".into())))
            .transpose()?
            .unwrap_or(0);
        let num = obj
            .get("num")
            .and_then(|x| x.as_object())
            .ok_or_else(|| Error::Parse("coefficient needs a num object".into()))?;
        let mut parts = Vec::new();
        for (key, val) in num {
            let inner = key
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| Error::Parse(format!("bad monomial key {key}")))?;
            let (alpha_part, rbit_part) = inner
                .split_once(';')
                .ok_or_else(|| Error::Parse(format!("bad monomial key {key}")))?;
            let alpha: Vec<u16> = if alpha_part.trim().is_empty() {
                vec![]
            } else {
                alpha_part
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<u16>()
                            .map_err(|_| Error::Parse(format!("bad exponent in {key}")))
                    })
                    .collect::<Result<_>>()?
            };
            if alpha.len() != n {
                return Err(Error::Parse(format!(
                    "monomial {key} has {} exponents, expected {n}",
                    alpha.len()
                )));
            }
            let rbit: i64 = rbit_part
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad r flag in {key}")))?;
            if rbit != 0 && rbit != 1 {
                return Err(Error::Parse(format!("r flag in {key} must be 0 or 1")));
            }
            let coeff = match val {
                Value::String(s) => Scalar::from_rat(parse_rational(s)?),
                other => Scalar::from_json(other)?,
            };
            parts.push((alpha, rpow + rbit, coeff));
        }
        Ok(SphereCoeff::from_parts(n, parts))
    }
}

fn mono_weight(m: &Mono) -> i64 {
    m.alpha.iter().map(|&a| a as i64).sum::<i64>() + m.rbit as i64
}

impl fmt::Display for SphereCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (i, &a) in m.alpha.iter().enumerate() {
                if a == 1 {
                    write!(f, "*x{}", i + 1)?;
                } else if a > 1 {
                    write!(f, "*x{}^{}", i + 1, a)?;
                }
            }
            let rtot = self.rpow + m.rbit as i64;
            if rtot != 0 {
                write!(f, "*r^{rtot}")?;
            }
        }
        Ok(())
    }
}

/// Gamma(m/2) for m >= 1 as (rational part, number of sqrt(pi) factors).
fn gamma_half(m: i64) -> (BigRational, u32) {
    assert!(m >= 1);
    if m % 2 == 0 {
        let k = m / 2;
        let mut acc = BigRational::from_integer(1.into());
        for t in 1..k {
            acc *= BigRational::from_integer(t.into());
        }
        (acc, 0)
    } else {
        // Gamma(k + 1/2) = (2k)! / (4^k k!) sqrt(pi), with m = 2k + 1.
        let k = (m - 1) / 2;
        let mut num = BigRational::from_integer(1.into());
        for t in 1..=(2 * k) {
            num *= BigRational::from_integer(t.into());
        }
        let mut den = BigRational::from_integer(1.into());
        for t in 1..=k {
            den *= BigRational::from_integer(t.into());
        }
        for _ in 0..k {
            den *= BigRational::from_integer(4.into());
        }
        (num / den, 1)
    }
}

/// Integral of xi^alpha over the unit sphere in R^n: zero when any exponent
/// is odd, otherwise 2 prod Gamma((alpha_i+1)/2) / Gamma((n+|alpha|)/2).
pub fn sphere_moment(n: usize, alpha: &[u16]) -> Scalar {
    assert_eq!(alpha.len(), n);
    if alpha.iter().any(|&a| a % 2 == 1) {
        return Scalar::zero();
    }
    let mut rat = BigRational::from_integer(2.into());
    let mut sqrt_pi: i64 = 0;
    for &a in alpha {
        let (r, s) = gamma_half(a as i64 + 1);
        rat *= r;
        sqrt_pi += s as i64;
    }
    let total: i64 = alpha.iter().map(|&a| a as i64).sum();
    let (r, s) = gamma_half(n as i64 + total);
    rat /= r;
    sqrt_pi -= s as i64;
    assert!(sqrt_pi % 2 == 0, "sphere moments are rational multiples of integer pi powers");
    Scalar::pi_term(rat, sqrt_pi / 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::big_rat;

    fn xi(n: usize, i: usize) -> SphereCoeff {
        let mut a = vec![0u16; n];
        a[i - 1] = 1;
        SphereCoeff::monomial(n, a, 0, Scalar::one())
    }

    #[test]
    fn relation_collapses_norm_to_radius() {
        let n = 3;
        let sum: SphereCoeff = (1..=n)
            .map(|i| xi(n, i).mul(&xi(n, i)))
            .fold(SphereCoeff::zero(n), |acc, t| acc.add(&t));
        assert_eq!(sum, SphereCoeff::radius_pow(n, 2));
    }

    #[test]
    fn odd_radius_factor_extracts() {
        let n = 2;
        // (xi1^2 + xi2^2) r = r^3
        let c = SphereCoeff::from_parts(
            n,
            vec![(vec![2, 0], 1, Scalar::one()), (vec![0, 2], 1, Scalar::one())],
        );
        assert_eq!(c, SphereCoeff::radius_pow(n, 3));
        assert_eq!(c.rpow(), 2);
    }

    #[test]
    fn add_aligns_global_powers() {
        let n = 2;
        // Same weight, different stored global powers.
        let a = SphereCoeff::monomial(n, vec![1, 0], -3, Scalar::one());
        let b = SphereCoeff::monomial(n, vec![3, 0], -5, Scalar::one());
        assert_ne!(a.rpow(), b.rpow());
        let s = a.add(&b);
        assert!(s.has_weight(-2) && s.weight() == Some(-2));
        assert_eq!(s.sub(&b), a);
        assert_eq!(s.sub(&a), b);
    }

    #[test]
    fn mul_reduces_r_squared() {
        let n = 2;
        let r = SphereCoeff::radius_pow(n, 1);
        let r2 = r.mul(&r);
        assert_eq!(r2, SphereCoeff::radius_pow(n, 2));
        assert_eq!(r2.rpow(), 2);
        let inv = SphereCoeff::radius_pow(n, -1);
        assert_eq!(r.mul(&inv), SphereCoeff::constant(n, Scalar::one()));
    }

    #[test]
    fn partial_of_unit_vector_field() {
        // D_1 (xi1 / r) = 1/r - xi1^2 r^{-3}
        let n = 3;
        let f = SphereCoeff::monomial(n, vec![1, 0, 0], -1, Scalar::one());
        let d = f.partial(1);
        let expect = SphereCoeff::radius_pow(n, -1).sub(&SphereCoeff::monomial(
            n,
            vec![2, 0, 0],
            -3,
            Scalar::one(),
        ));
        assert_eq!(d, expect);
        // D_2 (xi1 / r) = -xi1 xi2 r^{-3}
        let d2 = f.partial(2);
        assert_eq!(d2, SphereCoeff::monomial(n, vec![1, 1, 0], -3, Scalar::from_int(-1)));
    }

    #[test]
    fn partial_of_radius_power() {
        // D_i r^s = s xi_i r^{s-2}
        let n = 2;
        for s in [-4i64, -1, 1, 3] {
            let f = SphereCoeff::radius_pow(n, s);
            let d = f.partial(1);
            let expect = SphereCoeff::monomial(n, vec![1, 0], s - 2, Scalar::from_int(s));
            assert_eq!(d, expect);
        }
    }

    #[test]
    fn homogeneous_weight_tracks_operations() {
        let n = 3;
        let f = SphereCoeff::monomial(n, vec![1, 1, 0], -4, Scalar::pi());
        assert_eq!(f.weight(), Some(-2));
        assert_eq!(f.partial(2).weight(), Some(-3));
        assert_eq!(f.mul_xi(3).weight(), Some(-1));
        assert_eq!(f.mul_r(-2).weight(), Some(-4));
    }

    #[test]
    fn expansion_is_linear_and_faithful() {
        let n = 2;
        // xi1^2 r^s + xi2^2 r^s equals r^{s+2}; both expansions at a common
        // floor agree.
        let a = SphereCoeff::monomial(n, vec![2, 0], -4, Scalar::one());
        let b = SphereCoeff::monomial(n, vec![0, 2], -4, Scalar::one());
        let lhs = a.add(&b);
        let rhs = SphereCoeff::radius_pow(n, -2);
        assert_eq!(lhs, rhs);
        let ea = a.expand_at(-4);
        let eb = b.expand_at(-4);
        let er = rhs.expand_at(-4);
        let mut sum = ea;
        for (k, v) in eb {
            let entry = sum.entry(k).or_insert_with(Scalar::zero);
            *entry += &v;
        }
        sum.retain(|_, v| !v.is_zero());
        assert_eq!(sum, er);
    }

    #[test]
    fn moments_match_known_surface_areas() {
        // Total measure of S^{n-1}.
        assert_eq!(sphere_moment(2, &[0, 0]), Scalar::pi_term(big_rat(2, 1), 1));
        assert_eq!(sphere_moment(3, &[0, 0, 0]), Scalar::pi_term(big_rat(4, 1), 1));
        assert_eq!(sphere_moment(4, &[0; 4]), Scalar::pi_term(big_rat(2, 1), 2));
        // Odd moments vanish; xi1^2 integrates to area/n.
        assert_eq!(sphere_moment(3, &[1, 0, 0]), Scalar::zero());
        assert_eq!(sphere_moment(3, &[2, 0, 0]), Scalar::pi_term(big_rat(4, 3), 1));
        assert_eq!(sphere_moment(2, &[2, 0]), Scalar::pi_term(big_rat(1, 1), 1));
        assert_eq!(sphere_moment(2, &[2, 2]), Scalar::pi_term(big_rat(1, 4), 1));
    }

    #[test]
    fn json_round_trip() {
        let n = 3;
        let c = SphereCoeff::monomial(n, vec![1, 0, 2], -5, Scalar::pi_term(big_rat(3, 2), 1))
            .add(&SphereCoeff::radius_pow(n, -2));
        let j = c.to_json();
        let back = SphereCoeff::from_json(&j, n).unwrap();
        assert_eq!(back, c);
    }
}
