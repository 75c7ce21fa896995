//! Exact coefficient ring: Laurent polynomials in `pi` with rational
//! coefficients.
//!
//! Every quantity in this crate (structure constants aside, which stay
//! rational) lives in this ring. Zero coefficients are never stored, so an
//! element is zero iff its term map is empty, and equality is plain
//! structural equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{Map as JsonMap, Value};

use crate::error::{Error, Result};

/// A finite sum `sum_m  c_m * pi^m` with `c_m` rational and `m` any integer.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Scalar {
    terms: BTreeMap<i64, BigRational>,
}

pub fn big_rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn from_int(v: i64) -> Self {
        Scalar::from_rat(BigRational::from(BigInt::from(v)))
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Scalar::from_rat(big_rat(num, den))
    }

    pub fn from_rat(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(0, c);
        }
        Scalar { terms }
    }

    /// `c * pi^m`.
    pub fn pi_term(c: BigRational, m: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Scalar { terms }
    }

    pub fn pi() -> Self {
        Scalar::pi_term(BigRational::one(), 1)
    }

    pub fn pi_pow(m: i64) -> Self {
        Scalar::pi_term(BigRational::one(), m)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).map_or(false, |c| c.is_one())
    }

    /// The rational coefficient of `pi^m`.
    pub fn coeff(&self, m: i64) -> BigRational {
        self.terms.get(&m).cloned().unwrap_or_else(BigRational::zero)
    }

    /// If the element is a plain rational (only a `pi^0` term), return it.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.terms.is_empty() {
            return Some(BigRational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&0) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    fn insert_add(&mut self, m: i64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn scale_rat(&self, c: &BigRational) -> Scalar {
        if c.is_zero() {
            return Scalar::zero();
        }
        Scalar {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn scale_int(&self, c: i64) -> Scalar {
        self.scale_rat(&BigRational::from(BigInt::from(c)))
    }

    pub fn mul_pi_pow(&self, m: i64) -> Scalar {
        Scalar {
            terms: self.terms.iter().map(|(e, c)| (*e + m, c.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Exact division in the Laurent ring. Returns `None` when `rhs` is zero
    /// or does not divide `self`.
    pub fn div_exact(&self, rhs: &Scalar) -> Option<Scalar> {
        if rhs.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Scalar::zero());
        }
        // Shift both operands to ordinary polynomials with nonzero constant
        // term, long-divide, and shift back.
        let sa = self.min_exp().unwrap();
        let sb = rhs.min_exp().unwrap();
        let mut rem: BTreeMap<i64, BigRational> =
            self.terms.iter().map(|(m, c)| (*m - sa, c.clone())).collect();
        let div: BTreeMap<i64, BigRational> =
            rhs.terms.iter().map(|(m, c)| (*m - sb, c.clone())).collect();
        let db = *div.keys().next_back().unwrap();
        let lead = div.get(&db).unwrap().clone();
        let mut quot: BTreeMap<i64, BigRational> = BTreeMap::new();
        while let Some(&da) = rem.keys().next_back() {
            if da < db {
                return None;
            }
            let q = rem.get(&da).unwrap() / &lead;
            let shift = da - db;
            quot.insert(shift, q.clone());
            for (m, c) in &div {
                let e = m + shift;
                let entry = rem.entry(e).or_insert_with(BigRational::zero);
                *entry -= &q * c;
                if entry.is_zero() {
                    rem.remove(&e);
                }
            }
        }
        let terms = quot
            .into_iter()
            .map(|(m, c)| (m + sa - sb, c))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Some(Scalar { terms })
    }

    pub fn inverse(&self) -> Option<Scalar> {
        Scalar::one().div_exact(self)
    }

    /// Wire form: a JSON object mapping pi-exponents (as strings) to
    /// rational strings, e.g. `{"0":"1/2","2":"3"}`.
    pub fn to_json(&self) -> Value {
        let mut map = JsonMap::new();
        for (m, c) in &self.terms {
            map.insert(m.to_string(), Value::String(rat_to_string(c)));
        }
        Value::Object(map)
    }

    /// Accepts either the object form or a bare rational string.
    pub fn from_json(v: &Value) -> Result<Scalar> {
        match v {
            Value::String(s) => {
                let c = parse_rational(s)?;
                Ok(Scalar::from_rat(c))
            }
            Value::Number(nj) => {
                let i = nj
                    .as_i64()
                    .ok_or_else(|| Error::Parse(format!("non-integer scalar literal {nj}")))?;
                Ok(Scalar::from_int(i))
            }
            Value::Object(map) => {
                let mut out = Scalar::zero();
                for (k, val) in map {
                    let m: i64 = k
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad pi exponent key {k:?}")))?;
                    let s = val
                        .as_str()
                        .ok_or_else(|| Error::Parse(format!("scalar coefficient must be a string: {val}")))?;
                    out.insert_add(m, parse_rational(s)?);
                }
                Ok(out)
            }
            other => Err(Error::Parse(format!("cannot read scalar from {other}"))),
        }
    }
}

pub fn rat_to_string(c: &BigRational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    BigRational::from_str(s.trim())
        .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let coeff_is_one = abs.is_one();
            match (*m, coeff_is_one) {
                (0, _) => write!(f, "{}", rat_to_string(&abs))?,
                (1, true) => write!(f, "pi")?,
                (1, false) => write!(f, "{}*pi", rat_to_string(&abs))?,
                (e, true) => write!(f, "pi^{e}")?,
                (e, false) => write!(f, "{}*pi^{e}", rat_to_string(&abs))?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::from_int(v)
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert_add(*m, c.clone());
        }
        out
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert_add(*m, -c.clone());
        }
        out
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        let mut out = Scalar::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.insert_add(ma + mb, ca * cb);
            }
        }
        out
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        for (m, c) in &rhs.terms {
            self.insert_add(*m, c.clone());
        }
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        for (m, c) in &rhs.terms {
            self.insert_add(*m, -c.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_basics() {
        let a = Scalar::rational(1, 2) + Scalar::pi_term(big_rat(3, 1), 2);
        let b = Scalar::pi_pow(-1);
        let p = &a * &b;
        assert_eq!(p.coeff(-1), big_rat(1, 2));
        assert_eq!(p.coeff(1), big_rat(3, 1));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn zero_terms_never_stored() {
        let a = Scalar::pi() - Scalar::pi();
        assert!(a.is_zero());
        assert_eq!(a, Scalar::zero());
        let b = Scalar::one() + Scalar::from_int(-1);
        assert!(b.is_zero());
    }

    #[test]
    fn exact_division() {
        // (2 pi) | 2  ->  pi^{-1}
        let q = Scalar::from_int(2).div_exact(&Scalar::pi_term(big_rat(2, 1), 1)).unwrap();
        assert_eq!(q, Scalar::pi_pow(-1));
        // (1 + pi)^2 / (1 + pi)
        let one_pi = Scalar::one() + Scalar::pi();
        let sq = &one_pi * &one_pi;
        assert_eq!(sq.div_exact(&one_pi).unwrap(), one_pi);
        // 1 / (1 + pi) is not Laurent
        assert!(Scalar::one().div_exact(&one_pi).is_none());
        assert!(Scalar::one().div_exact(&Scalar::zero()).is_none());
    }

    #[test]
    fn json_round_trip() {
        let a = Scalar::rational(1, 2) + Scalar::pi_term(big_rat(3, 1), 2);
        let v = a.to_json();
        assert_eq!(v, serde_json::json!({"0": "1/2", "2": "3"}));
        assert_eq!(Scalar::from_json(&v).unwrap(), a);
        let bare = Scalar::from_json(&serde_json::json!("-2/3")).unwrap();
        assert_eq!(bare, Scalar::rational(-2, 3));
    }

    #[test]
    fn display_form() {
        let a = Scalar::rational(-1, 2) + Scalar::pi_pow(2).scale_int(3);
        assert_eq!(a.to_string(), "-1/2 + 3*pi^2");
        assert_eq!(Scalar::zero().to_string(), "0");
        assert_eq!(Scalar::pi_pow(-1).to_string(), "pi^-1");
    }
}
