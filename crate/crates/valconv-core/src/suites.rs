//! Property suites: the randomized and exhaustive identity checks behind
//! `valconv suite`, `valconv s3 verify` and the acceptance tests. Every
//! suite is a pure function of (spec, seed, trials, max_deg); reports are
//! byte-stable for fixed inputs, and a failing property carries a payload
//! with the lane that replays it.

use serde_json::{json, Value};

use crate::blade::{IndexSet, MultiVector, Space};
use crate::conv::{
    convolve_forms, epsilon_sign, is_ad_invariant, mu_component, unit_form,
};
use crate::error::Result;
use crate::forms::{BasicForm, BigradedForm, Values};
use crate::gen::{
    random_basic, random_bigraded, random_bigraded_capped, random_closed_n_form,
    random_multivector, random_valuation_input, rng_for, ValuationSampler,
};
use crate::lie::LieAlgebraSpec;
use crate::linalg::Gauge;
use crate::s3;
use crate::scalar::Scalar;
use crate::valuation::{convolve_valuations, find_primitive, InvariantValuation};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub trials: usize,
    pub detail: String,
    pub counterexample: Option<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub spec: String,
    pub seed: u64,
    pub trials: usize,
    pub max_deg: usize,
    pub properties: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(|p| p.passed)
    }

    pub fn failures(&self) -> Vec<&PropertyResult> {
        self.properties.iter().filter(|p| !p.passed).collect()
    }

    pub fn to_json(&self) -> Value {
        let props: Vec<Value> = self
            .properties
            .iter()
            .map(|p| {
                let mut v = json!({
                    "name": p.name,
                    "passed": p.passed,
                    "trials": p.trials,
                    "detail": p.detail,
                });
                if let Some(cex) = &p.counterexample {
                    v["counterexample"] = cex.clone();
                }
                v
            })
            .collect();
        json!({
            "suite": self.suite,
            "spec": self.spec,
            "seed": self.seed,
            "trials": self.trials,
            "max_deg": self.max_deg,
            "passed": self.passed(),
            "properties": props,
        })
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "## suite {} (spec {}, seed {}, trials {}, max-deg {})\n\n",
            self.suite, self.spec, self.seed, self.trials, self.max_deg
        );
        out.push_str("| property | result | trials | detail |\n|---|---|---|---|\n");
        for p in &self.properties {
            out.push_str(&format!(
                "| {} | {} | {} | {} |\n",
                p.name,
                if p.passed { "pass" } else { "FAIL" },
                p.trials,
                p.detail
            ));
        }
        out
    }
}

/// Lane layout: suites are spaced far apart, properties within a suite by
/// a fixed stride, trials consecutively. A failing trial replays from the
/// reported lane alone.
const PROP_STRIDE: u64 = 1 << 16;

struct Suite {
    report: SuiteReport,
    lane_base: u64,
    prop_index: u64,
}

impl Suite {
    fn new(
        suite: &str,
        spec: &str,
        seed: u64,
        trials: usize,
        max_deg: usize,
        lane_base: u64,
    ) -> Suite {
        Suite {
            report: SuiteReport {
                suite: suite.into(),
                spec: spec.into(),
                seed,
                trials,
                max_deg,
                properties: Vec::new(),
            },
            lane_base,
            prop_index: 0,
        }
    }

    /// Runs one property over `trials` independent lanes. The closure gets
    /// (trial index, rng) and returns Ok(None) on pass or Ok(Some(payload))
    /// with a counterexample; errors also fail the property.
    fn check(
        &mut self,
        name: &str,
        trials: usize,
        detail: &str,
        mut f: impl FnMut(usize, &mut ChaCha8Rng) -> Result<Option<Value>>,
    ) {
        let pi = self.prop_index;
        self.prop_index += 1;
        let mut passed = true;
        let mut counterexample = None;
        for t in 0..trials {
            let lane = self.lane_base + pi * PROP_STRIDE + t as u64;
            let mut rng = rng_for(self.report.seed, lane);
            let outcome = f(t, &mut rng);
            match outcome {
                Ok(None) => {}
                Ok(Some(payload)) => {
                    passed = false;
                    counterexample =
                        Some(json!({"trial": t, "lane": lane, "payload": payload}));
                }
                Err(e) => {
                    passed = false;
                    counterexample =
                        Some(json!({"trial": t, "lane": lane, "error": e.to_string()}));
                }
            }
            if !passed {
                break;
            }
        }
        self.report.properties.push(PropertyResult {
            name: name.into(),
            passed,
            trials,
            detail: detail.into(),
            counterexample,
        });
    }

    fn finish(self) -> SuiteReport {
        self.report
    }
}

fn mv_json(v: &MultiVector) -> Value {
    let mut terms = serde_json::Map::new();
    for (set, c) in v.terms() {
        let key: Vec<String> = set.indices().iter().map(|i| i.to_string()).collect();
        terms.insert(key.join(","), c.to_json());
    }
    Value::Object(terms)
}

fn sign_of(parity: usize) -> i64 {
    if parity % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Exterior-algebra identities; they depend only on the dimension.
pub fn algebra_suite(n: usize, seed: u64, trials: usize) -> SuiteReport {
    let mut s = Suite::new("algebra", &format!("dim{n}"), seed, trials, 0, 1 << 32);

    s.check("wedge_anticommutes", trials, "graded commutativity on random pairs", |_, rng| {
        let ga = rng.gen_range(0..=n);
        let gb = rng.gen_range(0..=n);
        let a = random_multivector(rng, n, Space::Primal, ga);
        let b = random_multivector(rng, n, Space::Primal, gb);
        let lhs = a.wedge(&b)?;
        let rhs = b.wedge(&a)?.scale(&Scalar::from_int(sign_of(ga * gb)));
        if lhs == rhs {
            Ok(None)
        } else {
            Ok(Some(json!({"a": mv_json(&a), "b": mv_json(&b)})))
        }
    });

    s.check("wedge_associates", trials, "associativity on random triples", |_, rng| {
        let ga = rng.gen_range(0..=n.min(3));
        let gb = rng.gen_range(0..=n.min(3));
        let gc = rng.gen_range(0..=n.min(3));
        let a = random_multivector(rng, n, Space::Primal, ga);
        let b = random_multivector(rng, n, Space::Primal, gb);
        let c = random_multivector(rng, n, Space::Primal, gc);
        let lhs = a.wedge(&b)?.wedge(&c)?;
        let rhs = a.wedge(&b.wedge(&c)?)?;
        if lhs == rhs {
            Ok(None)
        } else {
            Ok(Some(json!({"a": mv_json(&a), "b": mv_json(&b), "c": mv_json(&c)})))
        }
    });

    s.check(
        "interior_antiderivation",
        trials,
        "iota(a ^ b) = iota(a) ^ b + (-1)^|a| a ^ iota(b)",
        |_, rng| {
            let ga = rng.gen_range(0..=n);
            let gb = rng.gen_range(0..=n);
            let a = random_multivector(rng, n, Space::Primal, ga);
            let b = random_multivector(rng, n, Space::Primal, gb);
            let i = rng.gen_range(1..=n);
            let lhs = a.wedge(&b)?.interior_single(i);
            let rhs = a
                .interior_single(i)
                .wedge(&b)?
                .add(&a.wedge(&b.interior_single(i))?.scale(&Scalar::from_int(sign_of(ga))));
            if lhs == rhs {
                Ok(None)
            } else {
                Ok(Some(json!({"a": mv_json(&a), "b": mv_json(&b), "i": i})))
            }
        },
    );

    s.check(
        "perm_sign_complement",
        trials,
        "sign(K,L) * sign(L,K) = (-1)^{|K||L|} for disjoint K, L",
        |_, rng| {
            let mut k = IndexSet::empty();
            let mut l = IndexSet::empty();
            for i in 1..=n {
                match rng.gen_range(0..3u32) {
                    0 => k = k.union(IndexSet::single(i)),
                    1 => l = l.union(IndexSet::single(i)),
                    _ => {}
                }
            }
            let prod = (crate::blade::perm_sign(k, l) * crate::blade::perm_sign(l, k)) as i64;
            if prod == sign_of(k.card() * l.card()) {
                Ok(None)
            } else {
                Ok(Some(json!({"k": format!("{:?}", k.indices()), "l": format!("{:?}", l.indices())})))
            }
        },
    );

    // The defining property of the volume pairing picks the Hodge maps out
    // uniquely, so this cross-checks the explicit sign formulas.
    let blade_pairs: usize = (0..=n).map(|g| {
        let c = IndexSet::subsets(n, g).len();
        c * c
    }).sum();
    s.check(
        "hodge_pairing_identity",
        1,
        &format!("hodge_inverse(x) ^ y = <x,y> vol over {blade_pairs} blade pairs"),
        |_, _| {
            for g in 0..=n {
                for i in IndexSet::subsets(n, g) {
                    let x = MultiVector::blade(n, Space::Dual, i);
                    let star = x.hodge_inverse()?;
                    if star.hodge_forward()? != x {
                        return Ok(Some(json!({"blade": format!("{:?}", i.indices()), "law": "roundtrip"})));
                    }
                    for j in IndexSet::subsets(n, g) {
                        let y = MultiVector::blade(n, Space::Primal, j);
                        let top = star.wedge(&y)?.top_coefficient();
                        let expect = if i == j { Scalar::one() } else { Scalar::zero() };
                        if top != expect {
                            return Ok(Some(json!({
                                "x": format!("{:?}", i.indices()),
                                "y": format!("{:?}", j.indices()),
                            })));
                        }
                    }
                }
            }
            Ok(None)
        },
    );

    s.finish()
}

/// Boundary-operator identities and the unimodularity dichotomy.
pub fn lie_suite(spec: &LieAlgebraSpec, seed: u64, trials: usize) -> SuiteReport {
    let n = spec.n;
    let unimodular = spec.is_unimodular();
    let mut s = Suite::new("lie", &spec.name, seed, trials, 0, 2 << 32);

    s.check("boundary_squared_zero", 1, &format!("all {} basis blades", 1 << n), |_, _| {
        for g in 0..=n {
            for i in IndexSet::subsets(n, g) {
                let v = MultiVector::blade(n, Space::Primal, i);
                let ddv = spec.koszul_boundary(&spec.koszul_boundary(&v)?)?;
                if !ddv.is_zero() {
                    return Ok(Some(json!({"blade": format!("{:?}", i.indices())})));
                }
            }
        }
        Ok(None)
    });

    s.check("coboundary_squared_zero", 1, &format!("all {} dual blades", 1 << n), |_, _| {
        for g in 0..=n {
            for i in IndexSet::subsets(n, g) {
                let v = MultiVector::blade(n, Space::Dual, i);
                let ddv = spec.koszul_coboundary(&spec.koszul_coboundary(&v)?)?;
                if !ddv.is_zero() {
                    return Ok(Some(json!({"blade": format!("{:?}", i.indices())})));
                }
            }
        }
        Ok(None)
    });

    // The coboundary is coded as the transpose of the boundary, so agreeing
    // with the Hodge conjugate up to the sign (-1)^{n-m} is an honest
    // cross-check. The identity itself holds exactly when the algebra is
    // unimodular; the non-unimodular corpus member must witness a failure.
    let name = "hodge_boundary_identity";
    if unimodular {
        s.check(name, 1, "coboundary = (-1)^{n-m} hodge o boundary o hodge^{-1}, all dual blades", |_, _| {
            for m in 0..=n {
                for i in IndexSet::subsets(n, m) {
                    let x = MultiVector::blade(n, Space::Dual, i);
                    let lhs = spec.koszul_coboundary(&x)?;
                    let rhs = spec
                        .koszul_boundary(&x.hodge_inverse()?)?
                        .hodge_forward()?
                        .scale(&Scalar::from_int(sign_of(n - m)));
                    if lhs != rhs {
                        return Ok(Some(json!({"blade": format!("{:?}", i.indices()), "grade": m})));
                    }
                }
            }
            Ok(None)
        });
    } else {
        s.check(name, 1, "negative control: identity must fail on a non-unimodular algebra", |_, _| {
            for m in 0..=n {
                for i in IndexSet::subsets(n, m) {
                    let x = MultiVector::blade(n, Space::Dual, i);
                    let lhs = spec.koszul_coboundary(&x)?;
                    let rhs = spec
                        .koszul_boundary(&x.hodge_inverse()?)?
                        .hodge_forward()?
                        .scale(&Scalar::from_int(sign_of(n - m)));
                    if lhs != rhs {
                        return Ok(None);
                    }
                }
            }
            Ok(Some(json!({"missing": "no blade violates the identity"})))
        });
    }

    let name = "leibniz_dichotomy";
    let pairs: usize = (1..=n).map(|g| {
        IndexSet::subsets(n, g).len() * IndexSet::subsets(n, n + 1 - g).len()
    }).sum();
    if unimodular {
        s.check(name, 1, &format!("defect vanishes on all {pairs} complementary blade pairs"), |_, _| {
            for g in 1..=n {
                for i in IndexSet::subsets(n, g) {
                    for j in IndexSet::subsets(n, n + 1 - g) {
                        let x = MultiVector::blade(n, Space::Primal, i);
                        let y = MultiVector::blade(n, Space::Primal, j);
                        if !spec.leibniz_defect(&x, &y)?.is_zero() {
                            return Ok(Some(json!({
                                "x": format!("{:?}", i.indices()),
                                "y": format!("{:?}", j.indices()),
                            })));
                        }
                    }
                }
            }
            Ok(None)
        });
    } else {
        s.check(name, 1, "negative control: a nonzero defect witness must exist", |_, _| {
            for g in 1..=n {
                for i in IndexSet::subsets(n, g) {
                    for j in IndexSet::subsets(n, n + 1 - g) {
                        let x = MultiVector::blade(n, Space::Primal, i);
                        let y = MultiVector::blade(n, Space::Primal, j);
                        if !spec.leibniz_defect(&x, &y)?.is_zero() {
                            return Ok(None);
                        }
                    }
                }
            }
            Ok(Some(json!({"missing": "no complementary pair has a nonzero defect"})))
        });
    }

    s.check(
        "unimodular_witness_consistent",
        1,
        "witness trace agrees with the unimodularity verdict",
        |_, _| {
            match spec.unimodular_witness() {
                None if spec.is_unimodular() => Ok(None),
                Some((i, tr)) if !spec.is_unimodular() && spec.trace_ad(i) == tr => Ok(None),
                other => Ok(Some(json!({"witness": format!("{other:?}")}))),
            }
        },
    );

    s.check(
        "jacobi_rejects_corruption",
        1,
        "a one-slot corruption of the so(3) table fails validation",
        |_, _| {
            let bad = LieAlgebraSpec::new(
                "so3-corrupt",
                3,
                vec![
                    (1, 2, vec![(3, crate::scalar::big_rat(1, 1))]),
                    (2, 3, vec![(2, crate::scalar::big_rat(1, 1))]),
                    (1, 3, vec![(2, crate::scalar::big_rat(-1, 1))]),
                ],
            );
            match bad {
                Err(crate::error::Error::Jacobi { .. }) => Ok(None),
                other => Ok(Some(json!({"got": format!("{:?}", other.map(|s| s.name))}))),
            }
        },
    );

    s.finish()
}

/// Differential and bigraded structure of invariant forms.
pub fn forms_suite(spec: &LieAlgebraSpec, seed: u64, trials: usize, max_deg: usize) -> SuiteReport {
    let n = spec.n;
    let mut s = Suite::new("forms", &spec.name, seed, trials, max_deg, 3 << 32);

    s.check("random_forms_are_basic", trials, "generator output is weight-correct and horizontal", |_, rng| {
        let k = rng.gen_range(0..n.max(1));
        let vg = rng.gen_range(0..=n);
        let f = random_basic(rng, n, k, Values::Dual, vg, max_deg);
        if f.is_basic() {
            Ok(None)
        } else {
            Ok(Some(json!({"k": k, "vgrade": vg})))
        }
    });

    s.check("d_sphere_squared_zero", trials, "on random basic forms", |_, rng| {
        let k = rng.gen_range(0..n.max(1));
        let vg = rng.gen_range(0..=n);
        let f = random_basic(rng, n, k, Values::Dual, vg, max_deg);
        if f.d_sphere().d_sphere().is_zero() {
            Ok(None)
        } else {
            Ok(Some(json!({"k": k, "vgrade": vg})))
        }
    });

    s.check("d_total_squared_zero", trials, "on random bigraded forms of degree n-1 and n", |t, rng| {
        let degree = if t % 2 == 0 { n } else { n - 1 };
        let f = random_bigraded(rng, n, degree, Values::Dual, max_deg);
        if f.d_total(spec)?.d_total(spec)?.is_zero() {
            Ok(None)
        } else {
            Ok(Some(json!({"form": f.to_json()})))
        }
    });

    s.check("tilde_roundtrip", trials, "untilde(tilde(f)) = f and back", |t, rng| {
        let degree = if t % 2 == 0 { n } else { n - 1 };
        let f = random_bigraded(rng, n, degree, Values::Dual, max_deg);
        let g = f.tilde()?;
        if g.untilde()? != f || g.untilde()?.tilde()? != g {
            Ok(Some(json!({"form": f.to_json()})))
        } else {
            Ok(None)
        }
    });

    // The componentwise criterion conjugates the differential through the
    // value-slot dictionary, which matches d_total exactly on unimodular
    // algebras; elsewhere the two notions must be seen to diverge.
    if spec.is_unimodular() {
        s.check(
            "closedness_criterion_agrees",
            trials,
            "is_closed matches vanishing of d_total, random and constructed-closed",
            |t, rng| {
                let tau = if t % 2 == 0 {
                    random_bigraded(rng, n, n, Values::Dual, max_deg)
                } else {
                    let (tau, _) = random_closed_n_form(rng, spec, max_deg)?;
                    tau
                };
                let direct = tau.d_total(spec)?.is_zero();
                let criterion = tau.is_closed(spec)?;
                if direct == criterion && (t % 2 == 0 || direct) {
                    Ok(None)
                } else {
                    Ok(Some(json!({"form": tau.to_json(), "direct": direct, "criterion": criterion})))
                }
            },
        );
    } else {
        s.check(
            "closedness_criterion_agrees",
            1,
            "negative control: the componentwise criterion must diverge without unimodularity",
            |_, rng| {
                // Constant coefficients alone may not separate the two
                // criteria, so the witness hunt uses degree at least one.
                for _ in 0..trials.max(8) {
                    let (tau, _) = random_closed_n_form(rng, spec, max_deg.max(1))?;
                    if tau.d_total(spec)?.is_zero() && !tau.is_closed(spec)? {
                        return Ok(None);
                    }
                }
                Ok(Some(json!({"missing": "no exact form separates the two criteria"})))
            },
        );
    }

    if n >= 2 {
        s.check("stokes_fiber_integral", trials, "integral of d of a scalar (n-2)-form vanishes", |_, rng| {
            let f = random_basic(rng, n, n - 2, Values::None, 0, max_deg);
            let int = f.d_sphere().sphere_integrate()?;
            if int.is_zero() {
                Ok(None)
            } else {
                Ok(Some(json!({"integral": int.to_json()})))
            }
        });
    }

    s.check(
        "wedge_filtration_bound",
        trials,
        "componentwise wedges live below the summed sphere-degrees",
        |_, rng| {
            let a = random_bigraded(rng, n, n, Values::Dual, max_deg);
            let b = random_bigraded(rng, n, n - 1, Values::Dual, max_deg);
            let amax = a.k_range().into_iter().filter(|k| a.component(*k).is_some()).max();
            let bmax = b.k_range().into_iter().filter(|k| b.component(*k).is_some()).max();
            let (Some(amax), Some(bmax)) = (amax, bmax) else { return Ok(None) };
            for (&k1, f1) in a.components() {
                for (&k2, f2) in b.components() {
                    let w = f1.wedge(f2)?;
                    if !w.is_zero() && k1 + k2 > amax + bmax {
                        return Ok(Some(json!({"k1": k1, "k2": k2})));
                    }
                }
            }
            Ok(None)
        },
    );

    s.finish()
}

/// Star the value slot of one component into the wedge-friendly picture:
/// hodge_inverse with the bi-degree sign (-1)^{C(n-g,2) + n l}.
fn bf_star(f: &BasicForm, n: usize) -> Result<BasicForm> {
    let g = f.value_grade();
    let l = f.sphere_degree();
    let sign = sign_of((n - g) * (n - g).saturating_sub(1) / 2 + n * l);
    let starred = f.value_map(Values::Primal, n - g, |j| {
        MultiVector::blade(n, Space::Dual, j).hodge_inverse()
    })?;
    Ok(starred.scale(&Scalar::from_int(sign)))
}

/// Unstar after wedging: hodge_forward with the sign of the target
/// bi-degree (g', l').
fn bf_unstar(f: &BasicForm, n: usize) -> Result<BasicForm> {
    let m = f.value_grade();
    let g = n - m;
    let l = f.sphere_degree();
    let sign = sign_of((n - g) * (n - g).saturating_sub(1) / 2 + n * l);
    let unstarred = f.value_map(Values::Dual, g, |j| {
        MultiVector::blade(n, Space::Primal, j).hodge_forward()
    })?;
    Ok(unstarred.scale(&Scalar::from_int(sign)))
}

/// Independent reference for the abelian case: the convolution as a wedge
/// of value-starred components on the product of the space and the sphere,
/// with the cross sign for commuting the space part of the first factor
/// past the sphere part of the second.
pub fn bf_convolve_reference(
    tau: &BigradedForm,
    zeta: &BigradedForm,
) -> Result<BigradedForm> {
    let n = tau.n();
    let p = tau.degree();
    let q = zeta.degree();
    let mut out = BigradedForm::zero(n, p + q - n, Values::Dual);
    for (&l1, f1) in tau.components() {
        let a = bf_star(f1, n)?;
        let g1 = f1.value_grade();
        for (&l2, f2) in zeta.components() {
            if l1 + l2 >= n {
                continue;
            }
            let b = bf_star(f2, n)?;
            let cross = sign_of((n - g1) * l2);
            let w = a.wedge(&b)?.scale(&Scalar::from_int(cross));
            if w.is_zero() {
                continue;
            }
            let piece = bf_unstar(&w, n)?;
            let k = l1 + l2;
            let merged = out.component_or_zero(k).add(&piece);
            out.set_component(k, merged)?;
        }
    }
    Ok(out)
}

fn max_component(f: &BigradedForm) -> Option<usize> {
    f.components().map(|(&k, _)| k).max()
}

/// Convolution-of-forms laws.
pub fn conv_suite(spec: &LieAlgebraSpec, seed: u64, trials: usize, max_deg: usize) -> SuiteReport {
    let n = spec.n;
    let unimodular = spec.is_unimodular();
    let abelian = (1..=n).all(|i| spec.coadjoint_field(i).is_zero());
    let mut s = Suite::new("conv", &spec.name, seed, trials, max_deg, 4 << 32);

    s.check("epsilon_sign_examples", 1, "pinned sign-identity grid", |_, _| {
        for k in 0..=n {
            for l in 0..=n {
                if epsilon_sign(n, n, n, n - k, n - l, 2 * n - k - l) != 1 {
                    return Ok(Some(json!({"family": "top", "k": k, "l": l})));
                }
                for q in [n - 1, n] {
                    if epsilon_sign(n, n, q, 0, l, l) != 1 {
                        return Ok(Some(json!({"family": "bottom", "q": q, "l": l})));
                    }
                }
            }
            // Mixed-degree sign on the complementary diagonal k + l = n.
            if k >= 1 && epsilon_sign(n, n, n - 1, n - k, k - 1, n - 1) != sign_of(n + k) {
                return Ok(Some(json!({"family": "mixed", "k": k, "l": n - k})));
            }
        }
        Ok(None)
    });

    s.check("unit_two_sided", trials, "unit_form is a unit on random forms", |t, rng| {
        let q = if t % 2 == 0 { n } else { n - 1 };
        let z = random_bigraded(rng, n, q, Values::Dual, max_deg);
        let e = unit_form(spec);
        if convolve_forms(&e, &z, spec, false)? == z && convolve_forms(&z, &e, spec, false)? == z {
            Ok(None)
        } else {
            Ok(Some(json!({"zeta": z.to_json()})))
        }
    });

    if unimodular {
        s.check("convolution_associates", trials, "on random degree-compatible triples", |t, rng| {
            let degs = [(n, n, n), (n, n, n - 1), (n, n - 1, n), (n - 1, n, n)][t % 4];
            let a = random_bigraded(rng, n, degs.0, Values::Dual, max_deg);
            let b = random_bigraded(rng, n, degs.1, Values::Dual, max_deg);
            let c = random_bigraded(rng, n, degs.2, Values::Dual, max_deg);
            let lhs = convolve_forms(&convolve_forms(&a, &b, spec, false)?, &c, spec, false)?;
            let rhs = convolve_forms(&a, &convolve_forms(&b, &c, spec, false)?, spec, false)?;
            if lhs == rhs {
                Ok(None)
            } else {
                Ok(Some(json!({"a": a.to_json(), "b": b.to_json(), "c": c.to_json()})))
            }
        });
    }

    s.check(
        "lowest_term_wedge",
        trials,
        "top sphere-component of the product is the signed wedge of top components",
        |t, rng| {
            let (p, q) = if t % 2 == 0 { (n, n) } else { (n, n - 1) };
            let cap1 = (n - 1) / 2;
            let cap2 = (n - 1) - cap1;
            let a = random_bigraded_capped(rng, n, p, Values::Dual, max_deg, cap1);
            let b = random_bigraded_capped(rng, n, q, Values::Dual, max_deg, cap2);
            let (Some(kmax), Some(lmax)) = (max_component(&a), max_component(&b)) else {
                return Ok(None);
            };
            let j = kmax + lmax;
            let prod = convolve_forms(&a, &b, spec, false)?.tilde()?;
            let eps = epsilon_sign(n, p, q, kmax, lmax, j);
            let expect = a
                .tilde()?
                .component_or_zero(kmax)
                .wedge(&b.tilde()?.component_or_zero(lmax))?
                .scale(&Scalar::from_int(eps));
            if prod.component_or_zero(j) == expect {
                Ok(None)
            } else {
                Ok(Some(json!({"a": a.to_json(), "b": b.to_json(), "j": j})))
            }
        },
    );

    s.check("filtration_degree_law", trials, "components above the summed tops vanish", |t, rng| {
        let (p, q) = [(n, n), (n, n - 1), (n - 1, n)][t % 3];
        let a = random_bigraded(rng, n, p, Values::Dual, max_deg);
        let b = random_bigraded(rng, n, q, Values::Dual, max_deg);
        let (Some(kmax), Some(lmax)) = (max_component(&a), max_component(&b)) else {
            return Ok(None);
        };
        let prod = convolve_forms(&a, &b, spec, false)?;
        match max_component(&prod) {
            Some(j) if j > kmax + lmax => Ok(Some(json!({"j": j, "bound": kmax + lmax}))),
            _ => Ok(None),
        }
    });

    // The fiber-volume coefficient only reads off a constant bottom
    // component, which exact forms guarantee on unimodular algebras.
    if unimodular {
        s.check("mu_multiplicative", trials, "mu of a product of closed forms is the product of mus", |_, rng| {
            let (a, mu_a) = random_closed_n_form(rng, spec, max_deg)?;
            let (b, mu_b) = random_closed_n_form(rng, spec, max_deg)?;
            let prod = convolve_forms(&a, &b, spec, false)?;
            if mu_component(&prod)? == &mu_a * &mu_b {
                Ok(None)
            } else {
                Ok(Some(json!({"a": a.to_json(), "b": b.to_json()})))
            }
        });
    }

    if unimodular && n >= 2 {
        match ValuationSampler::new(spec, max_deg.min(2)) {
            Ok(sampler) => {
                s.check(
                    "invariance_preserved",
                    trials.min(8),
                    "products of invariant forms stay invariant",
                    |_, rng| {
                        let a = sampler.sample(rng).tau;
                        let b = sampler.sample(rng).tau;
                        let prod = convolve_forms(&a, &b, spec, true)?;
                        if is_ad_invariant(&prod, spec)? {
                            Ok(None)
                        } else {
                            Ok(Some(json!({"a": a.to_json(), "b": b.to_json()})))
                        }
                    },
                );
            }
            Err(e) => {
                s.check("invariance_preserved", 1, "sampler construction", move |_, _| {
                    Ok(Some(json!({"error": e.to_string()})))
                });
            }
        }
    }

    if abelian {
        s.check(
            "bf_wedge_reduction",
            trials,
            "matches the independent value-starred wedge convolution",
            |t, rng| {
                let (p, q) = if t % 2 == 0 { (n, n) } else { (n, n - 1) };
                let a = random_bigraded(rng, n, p, Values::Dual, max_deg);
                let b = random_bigraded(rng, n, q, Values::Dual, max_deg);
                let lhs = convolve_forms(&a, &b, spec, false)?;
                let rhs = bf_convolve_reference(&a, &b)?;
                if lhs == rhs {
                    Ok(None)
                } else {
                    Ok(Some(json!({"a": a.to_json(), "b": b.to_json()})))
                }
            },
        );
    }

    s.finish()
}

fn valuation_json(v: &InvariantValuation, spec: &LieAlgebraSpec) -> Value {
    v.to_json(Value::String(spec.name.clone()))
}

/// Primitive-solver and valuation-convolution laws. On algebras where the
/// operations are undefined (dimension 1, non-unimodular) the suite checks
/// the rejections instead.
pub fn valuation_suite(
    spec: &LieAlgebraSpec,
    seed: u64,
    trials: usize,
    max_deg: usize,
) -> SuiteReport {
    let n = spec.n;
    let mut s = Suite::new("valuation", &spec.name, seed, trials, max_deg, 5 << 32);

    if n < 2 {
        s.check("dimension_guard", 1, "solver and beta reject dimension 1", |_, _| {
            if crate::valuation::beta_form(spec).is_err() {
                Ok(None)
            } else {
                Ok(Some(json!({"got": "beta_form accepted dimension 1"})))
            }
        });
        return s.finish();
    }

    if !spec.is_unimodular() {
        s.check(
            "solver_rejects_non_unimodular",
            trials.min(4),
            "find_primitive and convolve_valuations refuse the algebra",
            |_, rng| {
                let v = random_valuation_input(rng, spec, max_deg)?;
                let chi = InvariantValuation::chi(spec);
                if find_primitive(&v.tau, spec, Gauge::Forward).is_err()
                    && convolve_valuations(&chi, &v, spec, false, Gauge::Forward).is_err()
                {
                    Ok(None)
                } else {
                    Ok(Some(json!({"got": "operation accepted a non-unimodular algebra"})))
                }
            },
        );
        return s.finish();
    }

    s.check(
        "primitive_round_trip",
        trials,
        "d(primitive) recovers the input above the fiber-volume part, with zero integral",
        |t, rng| {
            let v = random_valuation_input(rng, spec, max_deg)?;
            let gauge = if t % 2 == 0 { Gauge::Forward } else { Gauge::Reverse };
            let omega = find_primitive(&v.tau, spec, gauge)?;
            let bottom = unit_form(spec).scale(&mu_component(&v.tau)?);
            let ok = omega.d_total(spec)? == v.tau.sub(&bottom)
                && omega.pushforward()?.is_zero();
            if ok {
                Ok(None)
            } else {
                Ok(Some(valuation_json(&v, spec)))
            }
        },
    );

    let sampler = match ValuationSampler::new(spec, max_deg) {
        Ok(sampler) => sampler,
        Err(e) => {
            s.check("valid_valuation_sampler", 1, "sampler construction", move |_, _| {
                Ok(Some(json!({"error": e.to_string()})))
            });
            return s.finish();
        }
    };

    // The convolution is the module action of the invariant algebra, so
    // only the left factor needs to be invariant for the primitive choice
    // to drop out; the right factor ranges over arbitrary exact inputs.
    s.check(
        "gauge_independent_convolution",
        trials,
        "convolve_valuations agrees across both solver gauges",
        |_, rng| {
            let phi = sampler.sample(rng);
            let psi = random_valuation_input(rng, spec, max_deg)?;
            let f = convolve_valuations(&phi, &psi, spec, false, Gauge::Forward)?;
            let r = convolve_valuations(&phi, &psi, spec, false, Gauge::Reverse)?;
            if f == r {
                Ok(None)
            } else {
                Ok(Some(json!({
                    "phi": valuation_json(&phi, spec),
                    "psi": valuation_json(&psi, spec),
                })))
            }
        },
    );

    s.check("haar_two_sided_unit", trials, "Haar is a unit on sampled valid valuations", |_, rng| {
        let psi = sampler.sample(rng);
        let haar = InvariantValuation::haar(spec);
        let left = convolve_valuations(&haar, &psi, spec, true, Gauge::Forward)?;
        let right = convolve_valuations(&psi, &haar, spec, true, Gauge::Forward)?;
        if left == psi && right == psi {
            Ok(None)
        } else {
            Ok(Some(valuation_json(&psi, spec)))
        }
    });

    s.check("chi_laws", trials, "Euler characteristic spans a nilpotent ideal", |_, rng| {
        let phi = sampler.sample(rng);
        let chi = InvariantValuation::chi(spec);
        let right = convolve_valuations(&phi, &chi, spec, false, Gauge::Forward)?;
        let left = convolve_valuations(&chi, &phi, spec, false, Gauge::Forward)?;
        let expect = chi.scale(&phi.mu()?);
        let chi_sq = convolve_valuations(&chi, &chi, spec, false, Gauge::Forward)?;
        if right == expect && left == expect && chi_sq.is_zero() {
            Ok(None)
        } else {
            Ok(Some(valuation_json(&phi, spec)))
        }
    });

    s.check("mu_multiplicative", trials, "the Haar coefficient is a character", |_, rng| {
        let phi = sampler.sample(rng);
        let psi = sampler.sample(rng);
        let prod = convolve_valuations(&phi, &psi, spec, false, Gauge::Forward)?;
        if prod.mu()? == &phi.mu()? * &psi.mu()? {
            Ok(None)
        } else {
            Ok(Some(json!({
                "phi": valuation_json(&phi, spec),
                "psi": valuation_json(&psi, spec),
            })))
        }
    });

    s.check("valuation_filtration", trials, "output components below the summed tops", |_, rng| {
        let phi = sampler.sample(rng);
        let psi = sampler.sample(rng);
        let (Some(kmax), Some(lmax)) = (max_component(&phi.tau), max_component(&psi.tau)) else {
            return Ok(None);
        };
        let prod = convolve_valuations(&phi, &psi, spec, false, Gauge::Forward)?;
        match max_component(&prod.tau) {
            Some(j) if j > kmax + lmax => Ok(Some(json!({"j": j, "bound": kmax + lmax}))),
            _ => Ok(None),
        }
    });

    s.check("convolution_associates", trials.min(4), "on sampled invariant triples", |_, rng| {
        let a = sampler.sample(rng);
        let b = sampler.sample(rng);
        let c = sampler.sample(rng);
        let lhs = convolve_valuations(
            &convolve_valuations(&a, &b, spec, false, Gauge::Forward)?,
            &c,
            spec,
            false,
            Gauge::Forward,
        )?;
        let rhs = convolve_valuations(
            &a,
            &convolve_valuations(&b, &c, spec, false, Gauge::Forward)?,
            spec,
            false,
            Gauge::Forward,
        )?;
        if lhs == rhs {
            Ok(None)
        } else {
            Ok(Some(json!({
                "a": valuation_json(&a, spec),
                "b": valuation_json(&b, spec),
                "c": valuation_json(&c, spec),
            })))
        }
    });

    s.finish()
}

/// The deterministic S^3 table suite behind `valconv s3 verify`.
pub fn s3_suite() -> SuiteReport {
    let mut s = Suite::new("s3", "s3", 0, 1, 0, 6 << 32);
    let nu = s3::nu_table();
    let mu = s3::mu_table();

    s.check("nu_table_identities", 1, "all ten products match the pinned table", |_, _| {
        let c = |num: i64, den: i64, e: i64| Scalar::pi_term(crate::scalar::big_rat(num, den), e);
        let z = Scalar::zero;
        let one = Scalar::one;
        let expect: Vec<(usize, usize, [Scalar; 4])> = vec![
            (0, 0, [z(), z(), z(), z()]),
            (0, 1, [Scalar::from_int(2), z(), z(), z()]),
            (0, 2, [z(), z(), z(), z()]),
            (0, 3, [one(), z(), z(), z()]),
            (1, 1, [z(), z(), z(), Scalar::from_int(4)]),
            (1, 2, [Scalar::from_int(2), z(), Scalar::from_int(-2), z()]),
            (1, 3, [z(), one(), z(), z()]),
            (2, 2, [z(), c(1, 4, 2), z(), c(-1, 2, 2)]),
            (2, 3, [z(), z(), one(), z()]),
            (3, 3, [z(), z(), z(), one()]),
        ];
        for (i, j, want) in expect {
            let got = nu.product_basis(i, j);
            if got != want.to_vec() {
                return Ok(Some(json!({"i": i, "j": j})));
            }
        }
        Ok(None)
    });

    s.check("tables_commutative_associative_unital", 1, "nu and mu tables, all triples", |_, _| {
        for (label, alg) in [("nu", &nu), ("mu", &mu)] {
            if !(alg.is_commutative() && alg.is_associative() && alg.unit_law_holds()) {
                return Ok(Some(json!({"table": label})));
            }
        }
        Ok(None)
    });

    s.check("basis_change_transports_tables", 1, "conjugating nu reproduces mu exactly", |_, _| {
        let moved = nu.change_basis(&s3::basis_change(), "mu", s3::mu_table().basis.clone())?;
        if moved.same_table(&mu) {
            Ok(None)
        } else {
            Ok(Some(json!({"got": "transported table differs"})))
        }
    });

    s.check("template_coefficients", 1, "evaluation templates reproduce the pinned solutions", |_, _| {
        let one_over_pi = Scalar::pi_term(crate::scalar::big_rat(1, 1), -1);
        let cases: Vec<(&str, s3::TemplateData, Vec<Scalar>)> = vec![
            (
                "nu1",
                s3::nu1_template(),
                vec![one_over_pi.clone(), Scalar::pi_term(crate::scalar::big_rat(-1, 2), -2)],
            ),
            (
                "nu2",
                s3::nu2_template(),
                vec![Scalar::zero(), Scalar::pi_term(crate::scalar::big_rat(1, 2), -1)],
            ),
            ("nu1_square", s3::nu1_square_template(), vec![Scalar::zero(), Scalar::from_int(4)]),
        ];
        for (label, data, want) in cases {
            let got = s3::template_solve(&data)?;
            if got != want {
                return Ok(Some(json!({"template": label})));
            }
        }
        Ok(None)
    });

    s.check("character_and_grading", 1, "Haar character and graded involution", |_, _| {
        let ok = s3::character_check(&nu, &s3::nu_character())
            && s3::character_check(&mu, &s3::mu_character())
            && s3::ev_check(&nu, &s3::nu_grading(), 3)?
            && s3::ev_check(&mu, &s3::mu_grading(), 3)?;
        if ok {
            Ok(None)
        } else {
            Ok(Some(json!({"got": "character or grading check failed"})))
        }
    });

    s.check("chi_ideal", 1, "nu0 * x = mu(x) nu0 for all basis elements", |_, _| {
        let chars = s3::nu_character();
        for j in 0..4 {
            let got = nu.product_basis(0, j);
            let mut want = vec![Scalar::zero(); 4];
            want[0] = chars[j].clone();
            if got != want {
                return Ok(Some(json!({"j": j})));
            }
        }
        Ok(None)
    });

    s.check("pairing_nonsingular", 1, "point-evaluation pairing has determinant 4", |_, _| {
        let (_, det, regular) = s3::pairing_matrix(&nu, &s3::nu_point_evaluation())?;
        if regular && det == Scalar::from_int(4) {
            Ok(None)
        } else {
            Ok(Some(json!({"det": det.to_json()})))
        }
    });

    s.check("quotient_and_nilradical", 1, "presentation holds and nilradicals separate", |_, _| {
        let iso = s3::quotient_iso_check(&nu, &s3::quotient_generator(), &s3::quotient_relation())?;
        let nil_model = s3::nilradical_dim(&s3::model_t4_table())?;
        let nil_nu = s3::nilradical_dim(&nu)?;
        let nil_field = s3::nilradical_dim(&s3::field_table())?;
        if iso && nil_model == 3 && nil_nu == 1 && nil_field == 0 {
            Ok(None)
        } else {
            Ok(Some(json!({"iso": iso, "model": nil_model, "nu": nil_nu, "field": nil_field})))
        }
    });

    s.finish()
}

/// Every suite for one algebra, in a fixed order.
pub fn run_all(spec: &LieAlgebraSpec, seed: u64, trials: usize, max_deg: usize) -> Vec<SuiteReport> {
    vec![
        algebra_suite(spec.n, seed, trials),
        lie_suite(spec, seed, trials),
        forms_suite(spec, seed, trials, max_deg),
        conv_suite(spec, seed, trials, max_deg),
        valuation_suite(spec, seed, trials, max_deg),
        s3_suite(),
    ]
}
