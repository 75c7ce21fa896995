//! Seeded generators behind the property suites: sparse random forms with
//! bounded coefficient degree (basic-projected), constructed closed inputs
//! for the primitive solver, and a kernel-based sampler for valid invariant
//! valuations. All randomness flows through explicit `ChaCha8Rng` streams so
//! any trial replays from (seed, lane) alone.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blade::{IndexSet, MultiVector, Space};
use crate::conv::invariance_derivative;
use crate::error::{Error, Result};
use crate::forms::{BasicForm, BigradedForm, Values};
use crate::lie::LieAlgebraSpec;
use crate::linalg::rational_kernel;
use crate::scalar::{big_rat, Scalar};
use crate::sphere::{Mono, SphereCoeff};
use crate::valuation::{even_floor, monomials_up_to, InvariantValuation};

/// One reproducible stream per (seed, lane). Suites give each property and
/// trial its own lane so a failure replays without rerunning everything
/// before it.
pub fn rng_for(seed: u64, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(lane);
    rng
}

/// Small nonzero rational, the building block of every random coefficient.
pub fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let num = match rng.gen_range(-4i64..=4) {
        0 => 1,
        v => v,
    };
    let den = *[1i64, 2, 3].choose(rng).unwrap();
    big_rat(num, den)
}

/// Nonzero scalar with one or two pi-monomials of small exponent.
pub fn random_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    let mut s = Scalar::zero();
    for _ in 0..rng.gen_range(1..=2u32) {
        let e = rng.gen_range(-1i64..=2);
        s = &s + &Scalar::pi_term(random_rational(rng), e);
    }
    if s.is_zero() {
        Scalar::one()
    } else {
        s
    }
}

/// Homogeneous random multivector with one or two blade terms.
pub fn random_multivector(
    rng: &mut ChaCha8Rng,
    n: usize,
    space: Space,
    grade: usize,
) -> MultiVector {
    let blades = IndexSet::subsets(n, grade);
    let mut v = MultiVector::zero(n, space);
    for _ in 0..rng.gen_range(1..=2u32) {
        let set = *blades.choose(rng).unwrap();
        v.add_term(set, Scalar::from_rat(random_rational(rng)));
    }
    v
}

fn random_alpha(rng: &mut ChaCha8Rng, n: usize, max_deg: usize) -> Vec<u16> {
    let deg = rng.gen_range(0..=max_deg);
    let mut alpha = vec![0u16; n];
    for _ in 0..deg {
        alpha[rng.gen_range(0..n)] += 1;
    }
    alpha
}

/// Weight-homogeneous coefficient with xi-degree at most `max_deg`; a pi
/// factor appears occasionally so suites also exercise transcendental
/// coefficients.
pub fn random_coeff(rng: &mut ChaCha8Rng, n: usize, weight: i64, max_deg: usize) -> SphereCoeff {
    let mut c = SphereCoeff::zero(n);
    for _ in 0..rng.gen_range(1..=2u32) {
        let alpha = random_alpha(rng, n, max_deg);
        let deg: i64 = alpha.iter().map(|&a| a as i64).sum();
        let mut s = Scalar::from_rat(random_rational(rng));
        if rng.gen_range(0..4u32) == 0 {
            s = s.mul_pi_pow(1);
        }
        c = c.add(&SphereCoeff::monomial(n, alpha, weight - deg, s));
    }
    c
}

/// Sparse random basic form: raw weight-correct terms followed by the basic
/// projection. May come out zero when the projection kills every term.
pub fn random_basic(
    rng: &mut ChaCha8Rng,
    n: usize,
    k: usize,
    values: Values,
    vgrade: usize,
    max_deg: usize,
) -> BasicForm {
    let dxis = IndexSet::subsets(n, k);
    let vals = IndexSet::subsets(n, vgrade);
    let mut f = BasicForm::zero(n, k, values, vgrade);
    for _ in 0..rng.gen_range(1..=3u32) {
        let i = *dxis.choose(rng).unwrap();
        let j = *vals.choose(rng).unwrap();
        f.add_term(i, j, random_coeff(rng, n, -(k as i64), max_deg));
    }
    f.basic_project()
}

/// Random bigraded form with a sparse set of components, every sphere-degree
/// capped at `kcap`. Use `kcap = n` for the full range.
pub fn random_bigraded_capped(
    rng: &mut ChaCha8Rng,
    n: usize,
    degree: usize,
    values: Values,
    max_deg: usize,
    kcap: usize,
) -> BigradedForm {
    let mut form = BigradedForm::zero(n, degree, values);
    let ks: Vec<usize> = form.k_range().into_iter().filter(|&k| k <= kcap).collect();
    if ks.is_empty() {
        return form;
    }
    for _ in 0..3 {
        for &k in &ks {
            if !rng.gen_bool(0.7) {
                continue;
            }
            let vg = form.value_grade_at(k).expect("k_range is valid");
            let f = random_basic(rng, n, k, values, vg, max_deg);
            form.set_component(k, form.component_or_zero(k).add(&f))
                .expect("component shape is valid by construction");
        }
        if !form.is_zero() {
            break;
        }
    }
    form
}

/// Random bigraded form over the full component range.
pub fn random_bigraded(
    rng: &mut ChaCha8Rng,
    n: usize,
    degree: usize,
    values: Values,
    max_deg: usize,
) -> BigradedForm {
    random_bigraded_capped(rng, n, degree, values, max_deg, n)
}

/// Closed degree-n dual form with a known fiber-volume coefficient: the
/// differential of a random degree n-1 form plus mu * unit. Returns the
/// form together with mu.
pub fn random_closed_n_form(
    rng: &mut ChaCha8Rng,
    spec: &LieAlgebraSpec,
    max_deg: usize,
) -> Result<(BigradedForm, Scalar)> {
    let n = spec.n;
    let seed = random_bigraded(rng, n, n - 1, Values::Dual, max_deg);
    let mu = Scalar::from_rat(random_rational(rng));
    let tau = seed.d_total(spec)?.add(&crate::conv::unit_form(spec).scale(&mu));
    Ok((tau, mu))
}

/// Input for the primitive solver with the exact part known by construction:
/// tau = d_total(seed) + mu * unit, plus a random Euler coefficient.
pub fn random_valuation_input(
    rng: &mut ChaCha8Rng,
    spec: &LieAlgebraSpec,
    max_deg: usize,
) -> Result<InvariantValuation> {
    let (tau, _) = random_closed_n_form(rng, spec, max_deg)?;
    InvariantValuation::new(random_scalar(rng), tau, spec)
}

/// Row address in the sampler's constraint matrix: constraint family,
/// two small indices (component, direction), the two index sets of the
/// affected term, the expanded monomial and the pi exponent of its scalar.
type RowKey = (u8, usize, usize, IndexSet, IndexSet, Mono, i64);

const ROW_D: u8 = 0;
const ROW_VERT: u8 = 1;
const ROW_PUSH: u8 = 2;
const ROW_INV: u8 = 3;

/// Per-candidate constraint images, kept unexpanded until the group floors
/// are known.
type RawImage = (u8, usize, usize, IndexSet, IndexSet, SphereCoeff);

fn collect_images(
    t: &BigradedForm,
    spec: &LieAlgebraSpec,
) -> Result<(Vec<RawImage>, Vec<(IndexSet, Scalar)>)> {
    let mut raw: Vec<RawImage> = Vec::new();
    for (&k, f) in t.d_total(spec)?.components() {
        for ((i, j), c) in f.terms() {
            raw.push((ROW_D, k, 0, *i, *j, c.clone()));
        }
    }
    for (&k, f) in t.components() {
        for ((i, j), c) in f.vertical_defect() {
            raw.push((ROW_VERT, k, 0, i, j, c));
        }
        for dir in 1..=spec.n {
            let der = invariance_derivative(f, spec, dir)?;
            for ((i, j), c) in der.terms() {
                raw.push((ROW_INV, k, dir, *i, *j, c.clone()));
            }
        }
    }
    let mut push = Vec::new();
    for (set, c) in t.pushforward()?.terms() {
        push.push((*set, c.clone()));
    }
    Ok((raw, push))
}

/// Sampler over the exact solution space of "valid invariant valuation
/// integrand": closed, vertical, zero fiber integral, Ad-invariant, with
/// coefficient degree at most `max_deg`. The space is computed once as the
/// kernel of one rational constraint matrix over a spanning candidate set.
pub struct ValuationSampler {
    n: usize,
    candidates: Vec<BigradedForm>,
    basis: Vec<Vec<BigRational>>,
}

impl ValuationSampler {
    pub fn new(spec: &LieAlgebraSpec, max_deg: usize) -> Result<ValuationSampler> {
        let n = spec.n;
        if n < 2 {
            return Err(Error::Dimension(
                "valuation sampling needs dimension at least 2".into(),
            ));
        }
        let mut candidates: Vec<BigradedForm> = Vec::new();
        for k in 0..n {
            let vg = n - k;
            for i in IndexSet::subsets(n, k) {
                for j in IndexSet::subsets(n, vg) {
                    for alpha in monomials_up_to(n, max_deg) {
                        let deg: i64 = alpha.iter().map(|&a| a as i64).sum();
                        let coeff =
                            SphereCoeff::monomial(n, alpha, -(k as i64) - deg, Scalar::one());
                        let mut f = BasicForm::zero(n, k, Values::Dual, vg);
                        f.add_term(i, j, coeff);
                        let f = f.basic_project();
                        if f.is_zero() {
                            continue;
                        }
                        let mut t = BigradedForm::zero(n, n, Values::Dual);
                        t.set_component(k, f)?;
                        if !candidates.contains(&t) {
                            candidates.push(t);
                        }
                    }
                }
            }
        }

        // Pass 1: raw images and the expansion floor of every row group.
        let mut raws: Vec<(Vec<RawImage>, Vec<(IndexSet, Scalar)>)> = Vec::new();
        let mut floors: BTreeMap<(u8, usize, usize), i64> = BTreeMap::new();
        for t in &candidates {
            let (raw, push) = collect_images(t, spec)?;
            for (tag, a, b, _, _, c) in &raw {
                let f = even_floor(c.rpow());
                floors
                    .entry((*tag, *a, *b))
                    .and_modify(|m| *m = (*m).min(f))
                    .or_insert(f);
            }
            raws.push((raw, push));
        }

        // Pass 2: expand against the group floors into one rational matrix.
        let ncols = candidates.len();
        let mut rows: BTreeMap<RowKey, Vec<BigRational>> = BTreeMap::new();
        let entry =
            |rows: &mut BTreeMap<RowKey, Vec<BigRational>>, key: RowKey, col: usize, q: BigRational| {
                let r = rows.entry(key).or_insert_with(|| vec![BigRational::zero(); ncols]);
                r[col] += q;
            };
        for (col, (raw, push)) in raws.iter().enumerate() {
            for (tag, a, b, i, j, c) in raw {
                let floor = floors[&(*tag, *a, *b)];
                for (mono, s) in c.expand_at(floor) {
                    for (e, q) in s.terms() {
                        entry(&mut rows, (*tag, *a, *b, *i, *j, mono.clone(), e), col, q.clone());
                    }
                }
            }
            for (set, s) in push {
                for (e, q) in s.terms() {
                    let mono = Mono { alpha: vec![0; n], rbit: 0 };
                    entry(
                        &mut rows,
                        (ROW_PUSH, 0, 0, IndexSet::empty(), *set, mono, e),
                        col,
                        q.clone(),
                    );
                }
            }
        }
        let matrix: Vec<Vec<BigRational>> = rows.into_values().collect();
        let basis = rational_kernel(&matrix, ncols);
        Ok(ValuationSampler { n, candidates, basis })
    }

    /// Dimension of the sampled solution space.
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Random element of the solution space with scalar weights, plus a
    /// random Euler coefficient. Always a valid invariant valuation.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> InvariantValuation {
        let mut tau = BigradedForm::zero(self.n, self.n, Values::Dual);
        if !self.basis.is_empty() {
            let picks = rng.gen_range(1..=2.min(self.basis.len()) as u32);
            for _ in 0..picks {
                let b = &self.basis[rng.gen_range(0..self.basis.len())];
                let w = random_scalar(rng);
                for (col, q) in b.iter().enumerate() {
                    if q.is_zero() {
                        continue;
                    }
                    tau = tau.add(&self.candidates[col].scale(&w.scale_rat(q)));
                }
            }
        }
        InvariantValuation { c: random_scalar(rng), tau }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{abelian, so3};
    use crate::valuation::validate;
    use crate::Gauge;

    #[test]
    fn streams_are_reproducible_and_independent() {
        let mut a = rng_for(7, 3);
        let mut b = rng_for(7, 3);
        let mut c = rng_for(7, 4);
        let (x, y, z): (u64, u64, u64) = (a.gen(), b.gen(), c.gen());
        assert_eq!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn random_basic_forms_are_basic() {
        let mut rng = rng_for(11, 0);
        for k in 0..3 {
            for _ in 0..10 {
                let f = random_basic(&mut rng, 3, k, Values::Dual, 2, 2);
                assert!(f.is_basic(), "projected sphere-degree {k} form must be basic");
            }
        }
    }

    #[test]
    fn random_bigraded_components_fit_the_shape() {
        let mut rng = rng_for(5, 1);
        for _ in 0..10 {
            let t = random_bigraded(&mut rng, 3, 3, Values::Dual, 2);
            for (&k, f) in t.components() {
                assert_eq!(f.sphere_degree(), k);
                assert_eq!(f.value_grade(), 3 - k);
                assert!(f.is_basic());
            }
        }
    }

    #[test]
    fn closed_form_constructor_is_closed_with_known_mu() {
        let spec = so3();
        let mut rng = rng_for(23, 0);
        for _ in 0..5 {
            let (tau, mu) = random_closed_n_form(&mut rng, &spec, 1).unwrap();
            assert!(tau.is_closed(&spec).unwrap());
            assert_eq!(crate::conv::mu_component(&tau).unwrap(), mu);
        }
    }

    #[test]
    fn sampler_emits_valid_valuations_on_so3() {
        let spec = so3();
        let sampler = ValuationSampler::new(&spec, 1).unwrap();
        assert!(sampler.dimension() >= 1, "the fiber-volume direction at least");
        let mut rng = rng_for(41, 0);
        for _ in 0..3 {
            let v = sampler.sample(&mut rng);
            let report = validate(&v, &spec, Gauge::Forward, true).unwrap();
            assert!(report.is_valid(), "sampled valuation failed validation: {report:?}");
        }
    }

    #[test]
    fn sampler_spans_more_than_volume_on_abelian_3() {
        let spec = abelian(3);
        let sampler = ValuationSampler::new(&spec, 2).unwrap();
        assert!(sampler.dimension() > 1);
        let mut rng = rng_for(42, 9);
        let v = sampler.sample(&mut rng);
        let report = validate(&v, &spec, Gauge::Reverse, true).unwrap();
        assert!(report.is_valid());
    }
}
