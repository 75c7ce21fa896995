//! Invariant valuations presented as an Euler coefficient together with a
//! closed vertical top-degree form on the cosphere bundle, plus the
//! primitive solver that feeds their convolution.
//!
//! A valuation here is the pair `(c, tau)`: `c` scales the Euler
//! characteristic and `tau` is a dual-valued bigraded form of total degree
//! `n`. Convolving two valuations needs a degree `n-1` primitive `omega`
//! with `d_total(omega) = tau - tau_0` (the fiber-volume part `tau_0` is
//! never exact and is bookkept separately through `mu_component`).

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde_json::{json, Value};

use crate::blade::{IndexSet, MultiVector, Space};
use crate::conv::{convolve_forms, is_ad_invariant, mu_component, unit_form};
use crate::error::{Error, Result};
use crate::forms::{BasicForm, BigradedForm, Values};
use crate::lie::LieAlgebraSpec;
use crate::linalg::{Gauge, RatEchelon};
use crate::scalar::Scalar;
use crate::sphere::{sphere_moment, Mono, SphereCoeff};

/// Round down to an even integer.
pub(crate) fn even_floor(x: i64) -> i64 {
    if x % 2 == 0 {
        x
    } else {
        x - 1
    }
}

/// All exponent vectors of length `n` with entries summing to `d`,
/// in a fixed deterministic order.
pub(crate) fn monomials_of_degree(n: usize, d: usize) -> Vec<Vec<u16>> {
    if n == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for rest in monomials_of_degree(n - 1, d - first) {
            let mut v = Vec::with_capacity(n);
            v.push(first as u16);
            v.extend(rest);
            out.push(v);
        }
    }
    out
}

pub(crate) fn monomials_up_to(n: usize, max: usize) -> Vec<Vec<u16>> {
    (0..=max).flat_map(|d| monomials_of_degree(n, d)).collect()
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct TemplateKey {
    n: usize,
    k: usize,
    window: usize,
    gauge: Gauge,
}

/// Precomputed linear system for one rung of the primitive recursion:
/// unknowns are coefficients of `xi^alpha r^(-k-|alpha|) dxi_I`, equations
/// are the expanded coordinates of the sphere differential (block a) and
/// of the Euler contraction, which must vanish (block b). The value slot
/// never enters, so one template serves every value key and every algebra
/// of the same dimension.
struct SolveTemplate {
    cols: Vec<(IndexSet, Vec<u16>)>,
    rows_a: BTreeMap<(IndexSet, Mono), usize>,
    floor_a: i64,
    rows: usize,
    echelon: RatEchelon,
}

fn build_template(n: usize, k: usize, window: usize, gauge: Gauge) -> SolveTemplate {
    let ki = k as i64;
    let wi = window as i64;
    // Images of the unknowns under d have weight -(k+1) and xi-degree at
    // most window+1, hence stored radius power at least -(k+1)-window-2.
    let floor_a = even_floor(-(ki + 1) - wi - 2);
    let cap_a = (-(ki + 1) - floor_a) as usize;
    let floor_b = even_floor(-(ki - 1) - wi - 2);
    let cap_b = (-(ki - 1) - floor_b) as usize;

    let mut cols = Vec::new();
    for iset in IndexSet::subsets(n, k) {
        for alpha in monomials_up_to(n, window) {
            cols.push((iset, alpha));
        }
    }

    let mut rows_a = BTreeMap::new();
    let mut next = 0usize;
    for iset in IndexSet::subsets(n, k + 1) {
        for alpha in monomials_of_degree(n, cap_a) {
            rows_a.insert((iset, Mono { alpha, rbit: 0 }), next);
            next += 1;
        }
        for alpha in monomials_of_degree(n, cap_a - 1) {
            rows_a.insert((iset, Mono { alpha, rbit: 1 }), next);
            next += 1;
        }
    }
    let mut rows_b = BTreeMap::new();
    if k >= 1 {
        for iset in IndexSet::subsets(n, k - 1) {
            for alpha in monomials_of_degree(n, cap_b) {
                rows_b.insert((iset, Mono { alpha, rbit: 0 }), next);
                next += 1;
            }
            for alpha in monomials_of_degree(n, cap_b - 1) {
                rows_b.insert((iset, Mono { alpha, rbit: 1 }), next);
                next += 1;
            }
        }
    }
    let rows = next;

    let mut matrix = vec![vec![crate::linalg::big_rational_from_i64(0); cols.len()]; rows];
    for (ci, (iset, alpha)) in cols.iter().enumerate() {
        let deg = alpha.iter().map(|&e| e as i64).sum::<i64>();
        let mut carrier = BasicForm::zero(n, k, Values::None, 0);
        carrier.add_term(
            *iset,
            IndexSet::empty(),
            SphereCoeff::monomial(n, alpha.clone(), -ki - deg, Scalar::one()),
        );
        for ((dxi, _), coeff) in carrier.d_sphere().terms() {
            for (mono, s) in coeff.expand_at(floor_a) {
                let row = rows_a[&(*dxi, mono)];
                matrix[row][ci] = s
                    .as_rational()
                    .expect("derivative of a rational coefficient stays rational");
            }
        }
        if k >= 1 {
            for ((dxi, _), coeff) in carrier.euler_contract().terms() {
                for (mono, s) in coeff.expand_at(floor_b) {
                    let row = rows_b[&(*dxi, mono)];
                    matrix[row][ci] = s
                        .as_rational()
                        .expect("contraction of a rational coefficient stays rational");
                }
            }
        }
    }

    let echelon = RatEchelon::new(matrix, cols.len(), gauge);
    SolveTemplate { cols, rows_a, floor_a, rows, echelon }
}

fn template(n: usize, k: usize, window: usize, gauge: Gauge) -> Arc<SolveTemplate> {
    static CACHE: OnceLock<Mutex<HashMap<TemplateKey, Arc<SolveTemplate>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = TemplateKey { n, k, window, gauge };
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return Arc::clone(t);
    }
    let built = Arc::new(build_template(n, k, window, gauge));
    let mut guard = cache.lock().unwrap();
    Arc::clone(guard.entry(key).or_insert(built))
}

/// Solve `d_sphere(x) = rhs` with `x` horizontal of sphere-degree `k`,
/// independently per value key. `None` means the window was too small.
fn solve_component(t: &SolveTemplate, rhs: &BasicForm, k: usize) -> Option<BasicForm> {
    let n = rhs.n();
    let ki = k as i64;
    let mut blocks: BTreeMap<IndexSet, Vec<(IndexSet, &SphereCoeff)>> = BTreeMap::new();
    for ((dxi, value), coeff) in rhs.terms() {
        blocks.entry(*value).or_default().push((*dxi, coeff));
    }
    let mut out = BasicForm::zero(n, k, rhs.values(), rhs.value_grade());
    for (value, entries) in blocks {
        let mut b = vec![Scalar::zero(); t.rows];
        for (dxi, coeff) in entries {
            if coeff.rpow() < t.floor_a {
                return None;
            }
            for (mono, s) in coeff.expand_at(t.floor_a) {
                let row = *t.rows_a.get(&(dxi, mono))?;
                b[row] = s;
            }
        }
        let sol = t.echelon.solve(&b)?;
        for (ci, u) in sol.into_iter().enumerate() {
            if u.is_zero() {
                continue;
            }
            let (iset, alpha) = &t.cols[ci];
            let deg = alpha.iter().map(|&e| e as i64).sum::<i64>();
            out.add_term(*iset, value, SphereCoeff::monomial(n, alpha.clone(), -ki - deg, u));
        }
    }
    Some(out)
}

/// One full downward pass of the primitive recursion at a fixed window.
fn primitive_attempt(
    sigma: &BigradedForm,
    spec: &LieAlgebraSpec,
    gauge: Gauge,
    window: usize,
) -> Result<Option<BigradedForm>> {
    let n = spec.n;
    let mut omega_t = BigradedForm::zero(n, n - 1, Values::Primal);
    let mut next = BasicForm::zero(n, n - 1, Values::Primal, n);
    for k in (0..=n - 2).rev() {
        let boundary = next.value_map(Values::Primal, k + 1, |j| {
            spec.koszul_boundary(&MultiVector::blade(n, Space::Primal, j))
        })?;
        let rhs = sigma.component_or_zero(k + 1).sub(&boundary);
        let t = template(n, k, window, gauge);
        let Some(x) = solve_component(&t, &rhs, k) else {
            return Ok(None);
        };
        omega_t.set_component(k, x.clone())?;
        next = x;
    }
    Ok(Some(omega_t.untilde()?))
}

/// Strip the sphere-degree-0 component.
fn minus_bottom(tau: &BigradedForm) -> BigradedForm {
    let mut out = tau.clone();
    let zero = BasicForm::zero(tau.n(), 0, tau.values(), tau.value_grade_at(0).unwrap_or(0));
    out.set_component(0, zero).expect("removing a component cannot fail");
    out
}

/// Find a degree `n-1` dual form `omega` with
/// `d_total(omega) = tau - tau_0`, where `tau_0` is the sphere-degree-0
/// component of `tau`. Requires `tau` closed with vanishing fiber
/// integrals over a unimodular algebra of dimension at least 2; under
/// those hypotheses the recursion on the primal side is always solvable
/// and the result satisfies `pushforward(omega) = 0`.
///
/// The `gauge` selects which particular solution the elimination returns;
/// any two choices differ by a `d_total`-closed form with zero fiber
/// integral.
pub fn find_primitive(
    tau: &BigradedForm,
    spec: &LieAlgebraSpec,
    gauge: Gauge,
) -> Result<BigradedForm> {
    let n = spec.n;
    if tau.n() != n {
        return Err(Error::Dimension("form dimension does not match the algebra".into()));
    }
    if tau.values() != Values::Dual {
        return Err(Error::Space("primitive construction expects dual values".into()));
    }
    if tau.degree() != n {
        return Err(Error::Dimension(format!(
            "primitive construction expects total degree {n}, got {}",
            tau.degree()
        )));
    }
    if n < 2 {
        return Err(Error::Dimension("primitive construction needs dimension at least 2".into()));
    }
    if !spec.is_unimodular() {
        return Err(Error::Algebra("primitive construction requires a unimodular algebra".into()));
    }
    if !tau.is_closed(spec)? {
        return Err(Error::InvalidValuation("form is not closed".into()));
    }
    if !tau.pushforward()?.is_zero() {
        return Err(Error::InvalidValuation("form has a nonzero fiber integral".into()));
    }
    let sigma = tau.tilde()?;
    let target = minus_bottom(tau);
    let base = tau.max_xi_degree() + 1;
    for escalation in 0..3 {
        let window = base + 2 * escalation;
        if let Some(omega) = primitive_attempt(&sigma, spec, gauge, window)? {
            if omega.d_total(spec)? == target {
                return Ok(omega);
            }
        }
    }
    Err(Error::Solver(format!(
        "no polynomial primitive found with coefficient degree up to {}",
        base + 4
    )))
}

/// The normalized fiberwise solid-angle form: a degree `n-1` dual form
/// concentrated in sphere-degree `n-1` with scalar values, closed under
/// `d_total`, with fiber integral exactly 1. Adding `c` times this form
/// to a primitive shifts its fiber integral by `c` without disturbing the
/// differential.
pub fn beta_form(spec: &LieAlgebraSpec) -> Result<BigradedForm> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::Dimension("solid-angle form needs dimension at least 2".into()));
    }
    let volume = sphere_moment(n, &vec![0u16; n]);
    let scale = volume.inverse().expect("sphere volume is a single pi-monomial");
    let full = IndexSet::full(n);
    let mut comp = BasicForm::zero(n, n - 1, Values::Dual, 0);
    for i in 1..=n {
        let sign = if i % 2 == 1 { 1 } else { -1 };
        let mut alpha = vec![0u16; n];
        alpha[i - 1] = 1;
        comp.add_term(
            full.remove(i),
            IndexSet::empty(),
            SphereCoeff::monomial(n, alpha, -(n as i64), Scalar::from_int(sign)),
        );
    }
    let mut out = BigradedForm::zero(n, n - 1, Values::Dual);
    out.set_component(n - 1, comp.scale(&scale))?;
    Ok(out)
}

/// A smooth invariant valuation in the pair presentation: `c` multiplies
/// the Euler characteristic and `tau` is the associated top-degree form.
#[derive(Clone, PartialEq, Debug)]
pub struct InvariantValuation {
    pub c: Scalar,
    pub tau: BigradedForm,
}

impl InvariantValuation {
    pub fn new(c: Scalar, tau: BigradedForm, spec: &LieAlgebraSpec) -> Result<Self> {
        if tau.n() != spec.n || tau.degree() != spec.n {
            return Err(Error::InvalidValuation(format!(
                "valuation form must have total degree {} over this algebra",
                spec.n
            )));
        }
        if tau.values() != Values::Dual {
            return Err(Error::InvalidValuation("valuation form must carry dual values".into()));
        }
        Ok(InvariantValuation { c, tau })
    }

    /// The Euler characteristic.
    pub fn chi(spec: &LieAlgebraSpec) -> Self {
        InvariantValuation {
            c: Scalar::one(),
            tau: BigradedForm::zero(spec.n, spec.n, Values::Dual),
        }
    }

    /// The normalized Haar measure, the unit of convolution.
    pub fn haar(spec: &LieAlgebraSpec) -> Self {
        InvariantValuation { c: Scalar::zero(), tau: unit_form(spec) }
    }

    /// Coefficient of the fiber volume in the bottom component of `tau`.
    pub fn mu(&self) -> Result<Scalar> {
        mu_component(&self.tau)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_zero() && self.tau.is_zero()
    }

    pub fn scale(&self, s: &Scalar) -> InvariantValuation {
        InvariantValuation { c: &self.c * s, tau: self.tau.scale(s) }
    }

    pub fn add(&self, other: &InvariantValuation) -> InvariantValuation {
        InvariantValuation { c: &self.c + &other.c, tau: self.tau.add(&other.tau) }
    }

    pub fn to_json(&self, lie: Value) -> Value {
        json!({ "c": self.c.to_json(), "lie": lie, "tau": self.tau.to_json() })
    }

    /// Parse a valuation together with its algebra. The `lie` field is
    /// either the name of a builtin algebra or an inline algebra object.
    pub fn from_json(v: &Value) -> Result<(InvariantValuation, LieAlgebraSpec)> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("valuation must be a JSON object".into()))?;
        let lie = obj
            .get("lie")
            .ok_or_else(|| Error::Parse("valuation needs a \"lie\" field".into()))?;
        let spec = match lie {
            Value::String(name) => crate::lie::builtin(name)
                .ok_or_else(|| Error::Parse(format!("unknown builtin algebra {name:?}")))?,
            other => LieAlgebraSpec::from_json(other)?,
        };
        let c = match obj.get("c") {
            Some(cv) => Scalar::from_json(cv)?,
            None => Scalar::zero(),
        };
        let tau = match obj.get("tau") {
            Some(tv) => BigradedForm::from_json(tv, spec.n)?,
            None => BigradedForm::zero(spec.n, spec.n, Values::Dual),
        };
        let val = InvariantValuation::new(c, tau, &spec)?;
        Ok((val, spec))
    }
}

/// Outcome of the structural checks on a valuation form.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub shape_ok: bool,
    pub vertical: bool,
    pub closed: bool,
    pub integral_zero: bool,
    pub primitive_found: bool,
    pub invariant: Option<bool>,
    pub messages: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.shape_ok && self.vertical && self.closed && self.integral_zero && self.primitive_found
    }
}

/// Run every structural check on `v.tau`, collecting messages instead of
/// failing on the first defect. Invariance is only examined when
/// `check_invariance` is set.
pub fn validate(
    v: &InvariantValuation,
    spec: &LieAlgebraSpec,
    gauge: Gauge,
    check_invariance: bool,
) -> Result<ValidationReport> {
    let mut report = ValidationReport {
        shape_ok: true,
        vertical: false,
        closed: false,
        integral_zero: false,
        primitive_found: false,
        invariant: None,
        messages: Vec::new(),
    };
    if v.tau.n() != spec.n || v.tau.degree() != spec.n || v.tau.values() != Values::Dual {
        report.shape_ok = false;
        report.messages.push(format!(
            "expected a dual form of total degree {} in dimension {}",
            spec.n, spec.n
        ));
        return Ok(report);
    }
    report.vertical = v.tau.is_vertical()?;
    if !report.vertical {
        report.messages.push("form is not vertical".into());
    }
    report.closed = v.tau.is_closed(spec)?;
    if !report.closed {
        report.messages.push("form is not closed".into());
    }
    report.integral_zero = v.tau.pushforward()?.is_zero();
    if !report.integral_zero {
        report.messages.push("fiber integral of the top component is nonzero".into());
    }
    if report.closed && report.integral_zero && spec.n >= 2 && spec.is_unimodular() {
        match find_primitive(&v.tau, spec, gauge) {
            Ok(_) => report.primitive_found = true,
            Err(e) => report.messages.push(format!("primitive construction failed: {e}")),
        }
    } else if !spec.is_unimodular() {
        report.messages.push("primitive construction skipped: algebra is not unimodular".into());
    } else if spec.n < 2 {
        report.messages.push("primitive construction skipped: dimension below 2".into());
    } else {
        report.messages.push("primitive construction skipped: prerequisites failed".into());
    }
    if check_invariance {
        report.invariant = Some(is_ad_invariant(&v.tau, spec)?);
        if report.invariant == Some(false) {
            report.messages.push("form is not invariant".into());
        }
    }
    Ok(report)
}

/// Convolution of valuations. The form parts convolve directly; the
/// Euler coefficient of the result combines the fiber-volume coefficient
/// of `psi` with the fiber integral of the convolution of `phi.tau`
/// against a primitive of `psi.tau` normalized to fiber integral `psi.c`.
pub fn convolve_valuations(
    phi: &InvariantValuation,
    psi: &InvariantValuation,
    spec: &LieAlgebraSpec,
    strict: bool,
    gauge: Gauge,
) -> Result<InvariantValuation> {
    let n = spec.n;
    if n < 2 {
        return Err(Error::Dimension("valuation convolution needs dimension at least 2".into()));
    }
    if !spec.is_unimodular() {
        return Err(Error::Algebra("valuation convolution requires a unimodular algebra".into()));
    }
    for tau in [&phi.tau, &psi.tau] {
        if tau.n() != n || tau.degree() != n || tau.values() != Values::Dual {
            return Err(Error::InvalidValuation(
                "valuation forms must be dual of total degree n".into(),
            ));
        }
    }
    let tau_out = convolve_forms(&phi.tau, &psi.tau, spec, strict)?;
    let omega = find_primitive(&psi.tau, spec, gauge)?.add(&beta_form(spec)?.scale(&psi.c));
    let mixed = convolve_forms(&phi.tau, &omega, spec, false)?;
    let c_out = &phi.c * &mu_component(&psi.tau)? + mixed.pushforward_scalar()?;
    InvariantValuation::new(c_out, tau_out, spec)
}
