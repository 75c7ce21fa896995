//! Convolution of bigraded invariant forms. The product is computed on the
//! primal-valued side: contract the sphere slot of one factor with the
//! coadjoint fields of a basis subset, contract the value slot of the other
//! with the dual basis covectors of the same subset, wedge, and sum over
//! subsets with a parity prefactor depending on the bidegrees.

use num_traits::Zero;

use crate::blade::{IndexSet, MultiVector, Space};
use crate::error::{Error, Result};
use crate::forms::{BasicForm, BigradedForm, Values};
use crate::lie::LieAlgebraSpec;
use crate::scalar::Scalar;
use crate::sphere::SphereCoeff;

/// Parity prefactor for the (k, l) -> j block of a degree (p, q)
/// convolution in dimension n:
/// (-1)^{(n+q)(n+p+l+j) + k(l+j+1)}.
pub fn epsilon_sign(n: usize, p: usize, q: usize, k: usize, l: usize, j: usize) -> i64 {
    let e = (n + q) * (n + p + l + j) + k * (l + j + 1);
    if e % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The two-sided unit: the fiberwise volume with constant coefficient,
/// concentrated in sphere-degree zero.
pub fn unit_form(spec: &LieAlgebraSpec) -> BigradedForm {
    let n = spec.n;
    let mut out = BigradedForm::zero(n, n, Values::Dual);
    let mut c0 = BasicForm::zero(n, 0, Values::Dual, n);
    c0.add_term(IndexSet::empty(), IndexSet::full(n), SphereCoeff::constant(n, Scalar::one()));
    out.set_component(0, c0).expect("unit component is well graded");
    out
}

/// One contraction block: sum over basis subsets K of size r of
/// (iota of the coadjoint fields of K, increasing index first, on the
/// sphere slot of `a`) wedge (iota of the dual covectors of K, increasing
/// index first, on the value slot of `b`). Both inputs are primal-valued.
pub fn hat_s(r: usize, a: &BasicForm, b: &BasicForm, spec: &LieAlgebraSpec) -> Result<BasicForm> {
    let n = spec.n;
    if a.values() != Values::Primal || b.values() != Values::Primal {
        return Err(Error::Space("contraction blocks act on primal-valued forms".into()));
    }
    let k_out = (a.sphere_degree() + b.sphere_degree()).saturating_sub(r);
    let g_out = a.value_grade() + b.value_grade().saturating_sub(r);
    let mut acc = BasicForm::zero(n, k_out, Values::Primal, g_out);
    for set in IndexSet::subsets(n, r) {
        let mut left = a.clone();
        for i in set.indices() {
            left = left.contract_sphere(&spec.coadjoint_field(i));
        }
        if left.is_zero() {
            continue;
        }
        let right = b.interior_value(set)?;
        if right.is_zero() {
            continue;
        }
        acc = acc.add(&left.wedge(&right)?);
    }
    Ok(acc)
}

/// Convolution of two dual-valued bigraded forms over a common algebra.
/// Errors when the total degrees sum below n. With `strict` set, both
/// inputs must pass the infinitesimal invariance check.
pub fn convolve_forms(
    tau: &BigradedForm,
    zeta: &BigradedForm,
    spec: &LieAlgebraSpec,
    strict: bool,
) -> Result<BigradedForm> {
    let n = spec.n;
    if tau.n() != n || zeta.n() != n {
        return Err(Error::Dimension("convolution inputs must share the algebra dimension".into()));
    }
    if tau.values() != Values::Dual || zeta.values() != Values::Dual {
        return Err(Error::Space("convolution expects dual-valued forms".into()));
    }
    let (p, q) = (tau.degree(), zeta.degree());
    if p + q < n {
        return Err(Error::DegreeUnderflow { p, q, n });
    }
    if strict {
        if !is_ad_invariant(tau, spec)? {
            return Err(Error::NotInvariant("left convolution factor".into()));
        }
        if !is_ad_invariant(zeta, spec)? {
            return Err(Error::NotInvariant("right convolution factor".into()));
        }
    }
    let t = tau.tilde()?;
    let z = zeta.tilde()?;
    let mut out = BigradedForm::zero(n, p + q - n, Values::Primal);
    for (&k, tk) in t.components() {
        for (&l, zl) in z.components() {
            for j in 0..=(k + l) {
                let r = k + l - j;
                if r > k || r > zl.value_grade() || j >= n {
                    continue;
                }
                if out.value_grade_at(j).is_none() {
                    continue;
                }
                let block = hat_s(r, tk, zl, spec)?;
                if block.is_zero() {
                    continue;
                }
                let signed = block.scale_int(epsilon_sign(n, p, q, k, l, j));
                let merged = out.component_or_zero(j).add(&signed);
                out.set_component(j, merged)?;
            }
        }
    }
    out.untilde()
}

/// Coefficient of the fiberwise volume in the bottom component of a
/// degree-n dual form; errors when the bottom component is not a constant
/// multiple of the volume.
pub fn mu_component(tau: &BigradedForm) -> Result<Scalar> {
    if tau.values() != Values::Dual || tau.degree() != tau.n() {
        return Err(Error::Space("bottom coefficient expects a dual form of degree n".into()));
    }
    let Some(c0) = tau.component(0) else { return Ok(Scalar::zero()) };
    let full = IndexSet::full(tau.n());
    let mut out = Scalar::zero();
    for ((i, j), c) in c0.terms() {
        debug_assert_eq!(*i, IndexSet::empty());
        if *j != full {
            return Err(Error::NotInvariant("bottom component off the fiber volume".into()));
        }
        match c.as_constant() {
            Some(v) => out += &v,
            None => {
                return Err(Error::NotInvariant("bottom component is not constant".into()));
            }
        }
    }
    Ok(out)
}

fn derivation_on_blade(
    n: usize,
    space: Space,
    set: IndexSet,
    rule: &dyn Fn(usize) -> MultiVector,
) -> Result<MultiVector> {
    let indices = set.indices();
    let mut out = MultiVector::zero(n, space);
    for (pos, &idx) in indices.iter().enumerate() {
        let prefix = IndexSet::from_indices(&indices[..pos], n)?;
        let suffix = IndexSet::from_indices(&indices[pos + 1..], n)?;
        let term = MultiVector::blade(n, space, prefix)
            .wedge(&rule(idx))?
            .wedge(&MultiVector::blade(n, space, suffix))?;
        out = out.add(&term);
    }
    Ok(out)
}

/// Lie derivative of one basic component along the action generated by
/// basis element i: Cartan's formula on the sphere slot with the coadjoint
/// field, plus the induced derivation on the value slot.
/// Infinitesimal action of basis direction `i` on one component: the
/// Lie derivative along the coadjoint field in the sphere slot plus the
/// induced derivation on the value slot. Vanishing for every `i` is the
/// invariance criterion.
pub fn invariance_derivative(
    f: &BasicForm,
    spec: &LieAlgebraSpec,
    i: usize,
) -> Result<BasicForm> {
    let n = spec.n;
    let field = spec.coadjoint_field(i);
    let ad = spec.ad_matrix(i);
    let cartan = {
        let half = f.d_sphere().contract_sphere(&field);
        if f.sphere_degree() == 0 {
            half
        } else {
            half.add(&f.contract_sphere(&field).d_sphere())
        }
    };
    let value_part = match f.values() {
        Values::None => BasicForm::zero(n, f.sphere_degree(), f.values(), 0),
        Values::Dual => f.value_map(Values::Dual, f.value_grade(), |set| {
            derivation_on_blade(n, Space::Dual, set, &|j| {
                let mut mv = MultiVector::zero(n, Space::Dual);
                for m in 1..=n {
                    let a = &ad[j - 1][m - 1];
                    if !a.is_zero() {
                        mv.add_term(IndexSet::single(m), Scalar::from_rat(a.clone()));
                    }
                }
                mv
            })
        })?,
        Values::Primal => f.value_map(Values::Primal, f.value_grade(), |set| {
            derivation_on_blade(n, Space::Primal, set, &|j| {
                let mut mv = MultiVector::zero(n, Space::Primal);
                for m in 1..=n {
                    let a = &ad[m - 1][j - 1];
                    if !a.is_zero() {
                        mv.add_term(IndexSet::single(m), -Scalar::from_rat(a.clone()));
                    }
                }
                mv
            })
        })?,
    };
    Ok(cartan.add(&value_part))
}

/// Infinitesimal invariance under the group action: the Lie derivative
/// along every basis direction vanishes on every component.
pub fn is_ad_invariant(form: &BigradedForm, spec: &LieAlgebraSpec) -> Result<bool> {
    if form.n() != spec.n {
        return Err(Error::Dimension("algebra dimension mismatch".into()));
    }
    for i in 1..=spec.n {
        for (_, f) in form.components() {
            if !invariance_derivative(f, spec, i)?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blade::perm_sign;
    use crate::lie::{abelian, so3};
    use crate::scalar::big_rat;

    fn xi_coeff(n: usize, i: usize, rexp: i64) -> SphereCoeff {
        let mut a = vec![0u16; n];
        a[i - 1] = 1;
        SphereCoeff::monomial(n, a, rexp, Scalar::one())
    }

    /// A vertical degree-n form over R^2: angular form tensor the
    /// tautological covector.
    fn taut_valued_form() -> BigradedForm {
        let n = 2;
        let mut tau = BigradedForm::zero(n, n, Values::Dual);
        let mut c1 = BasicForm::zero(n, 1, Values::Dual, 1);
        for vj in 1..=n {
            // (xi1 dxi2 - xi2 dxi1) r^{-2} * (xi_vj / r) r^... total weight -1
            c1.add_term(IndexSet::single(2), IndexSet::single(vj), xi_coeff(n, 1, -1).mul(&xi_coeff(n, vj, -2)));
            c1.add_term(
                IndexSet::single(1),
                IndexSet::single(vj),
                xi_coeff(n, 2, -1).mul(&xi_coeff(n, vj, -2)).neg(),
            );
        }
        tau.set_component(1, c1).unwrap();
        tau
    }

    #[test]
    fn epsilon_identities() {
        // Left unit block: k = 0, j = l gives +1 whenever p = n.
        for n in 1..=4 {
            for q in 0..=n {
                for l in 0..n {
                    assert_eq!(epsilon_sign(n, n, q, 0, l, l), 1);
                }
            }
        }
        // Right unit block: q = n, l = 0, j = k.
        for n in 1..=4 {
            for p in 0..=n {
                for k in 0..n {
                    assert_eq!(epsilon_sign(n, p, n, k, 0, k), 1);
                }
            }
        }
        // Complementary sphere-degrees: the prefactor collapses to
        // (-1)^{n+k} when l = n - k and j = n - 1 is replaced by the
        // constrained value; checked in the form (p + l, q + k) parity.
        for n in 2..=4 {
            for p in 0..=n {
                for k in 0..n {
                    let l = n - 1 - k;
                    let q = n;
                    let j = k + l;
                    let direct = epsilon_sign(n, p, q, k, l, j);
                    let e = (n + q) * (n + p + l + j) + k * (l + j + 1);
                    assert_eq!(direct, if e % 2 == 0 { 1 } else { -1 });
                }
            }
        }
    }

    #[test]
    fn unit_is_two_sided_identity() {
        for spec in [abelian(2), so3()] {
            let e = unit_form(&spec);
            let left = convolve_forms(&e, &e, &spec, false).unwrap();
            assert_eq!(left, e);
        }
        // Against a non-unit form on the abelian plane (everything is
        // invariant there).
        let spec = abelian(2);
        let tau = taut_valued_form();
        let e = unit_form(&spec);
        assert_eq!(convolve_forms(&e, &tau, &spec, true).unwrap(), tau);
        assert_eq!(convolve_forms(&tau, &e, &spec, true).unwrap(), tau);
    }

    #[test]
    fn top_block_is_a_plain_wedge() {
        // For j = k + l only the empty subset contributes, so the top
        // component of the convolution is the signed wedge of the tildes.
        let spec = abelian(3);
        let n = 3;
        let mut tau = BigradedForm::zero(n, n, Values::Dual);
        let mut c0 = BasicForm::zero(n, 0, Values::Dual, 3);
        c0.add_term(IndexSet::empty(), IndexSet::full(n), SphereCoeff::constant(n, Scalar::pi()));
        tau.set_component(0, c0).unwrap();
        let mut c1 = BasicForm::zero(n, 1, Values::Dual, 2);
        c1.add_term(IndexSet::single(2), IndexSet::from_indices(&[1, 2], n).unwrap(), xi_coeff(n, 1, -2));
        c1.add_term(IndexSet::single(1), IndexSet::from_indices(&[1, 2], n).unwrap(), xi_coeff(n, 2, -2).neg());
        tau.set_component(1, c1).unwrap();

        let conv = convolve_forms(&tau, &tau, &spec, false).unwrap();
        assert_eq!(conv.degree(), n);
        let t = tau.tilde().unwrap();
        let expected_top = {
            let a = t.component(1).unwrap();
            let w = a.wedge(a).unwrap();
            w.scale_int(epsilon_sign(n, n, n, 1, 1, 2))
        };
        let got_top = conv.tilde().unwrap().component_or_zero(2);
        assert_eq!(got_top, expected_top);
    }

    #[test]
    fn underflow_is_rejected() {
        let spec = so3();
        let n = 3;
        let low = BigradedForm::zero(n, 1, Values::Dual);
        let err = convolve_forms(&low, &low, &spec, false).unwrap_err();
        assert!(matches!(err, Error::DegreeUnderflow { p: 1, q: 1, n: 3 }));
    }

    #[test]
    fn mu_of_unit_is_one() {
        for spec in [abelian(2), so3()] {
            let e = unit_form(&spec);
            assert_eq!(mu_component(&e).unwrap(), Scalar::one());
            assert_eq!(mu_component(&e.scale(&Scalar::pi())).unwrap(), Scalar::pi());
        }
        // A form with empty bottom component has coefficient zero.
        let tau = taut_valued_form();
        assert_eq!(mu_component(&tau).unwrap(), Scalar::zero());
    }

    #[test]
    fn invariance_judgments_on_so3() {
        let spec = so3();
        let n = 3;
        assert!(is_ad_invariant(&unit_form(&spec), &spec).unwrap());

        // Rotation-invariant: solid angle times the fiber volume value.
        let mut tau = BigradedForm::zero(n, n, Values::Dual);
        let mut c2 = BasicForm::zero(n, 2, Values::Dual, 1);
        let full = IndexSet::full(n);
        for i in 1..=n {
            let rest = full.remove(i);
            let s = perm_sign(IndexSet::single(i), rest);
            for vj in 1..=n {
                let c = xi_coeff(n, i, -1).mul(&xi_coeff(n, vj, -2)).scale_int(s as i64);
                c2.add_term(rest, IndexSet::single(vj), c);
            }
        }
        tau.set_component(2, c2).unwrap();
        assert!(is_ad_invariant(&tau, &spec).unwrap());

        // Singling out one axis breaks invariance.
        let mut bad = BigradedForm::zero(n, n, Values::Dual);
        let mut b2 = BasicForm::zero(n, 2, Values::Dual, 1);
        for i in 1..=n {
            let rest = full.remove(i);
            let s = perm_sign(IndexSet::single(i), rest);
            let c = xi_coeff(n, i, -1).mul(&xi_coeff(n, 1, -2)).scale_int(s as i64);
            b2.add_term(rest, IndexSet::single(1), c);
        }
        bad.set_component(2, b2).unwrap();
        assert!(!is_ad_invariant(&bad, &spec).unwrap());
        assert!(matches!(
            convolve_forms(&bad, &unit_form(&spec), &spec, true),
            Err(Error::NotInvariant(_))
        ));
    }

    #[test]
    fn convolution_descends_mu_multiplicatively_on_units() {
        let spec = so3();
        let e = unit_form(&spec);
        let a = e.scale(&Scalar::pi_term(big_rat(3, 2), 1));
        let b = e.scale(&Scalar::from_int(2));
        let c = convolve_forms(&a, &b, &spec, false).unwrap();
        assert_eq!(mu_component(&c).unwrap(), Scalar::pi_term(big_rat(3, 1), 1));
    }
}
