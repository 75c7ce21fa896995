//! The 4-dimensional convolution algebra of bi-invariant valuations on
//! the 3-sphere group: spherical (nu) and intrinsic-volume (mu) bases,
//! the basis change between them, the template method for deriving
//! coefficients from evaluations on model bodies, the parity grading,
//! the Haar character, the evaluation pairing, and the nilradical
//! comparison against the truncated polynomial ring.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::linalg::{det, invert, kernel, rank, solve_unique};
use crate::scalar::{big_rat, Scalar};

/// A finite-dimensional algebra given by its structure table: the entry
/// `table[i][j]` lists the coefficients of `b_i * b_j` in the basis.
/// Bilinearity is built in; commutativity, associativity and the unit law
/// are checkable predicates rather than assumptions.
#[derive(Clone, Debug)]
pub struct FinDimAlgebra {
    pub name: String,
    pub basis: Vec<String>,
    table: Vec<Vec<Vec<Scalar>>>,
    unit: Option<Vec<Scalar>>,
}

impl FinDimAlgebra {
    pub fn new(
        name: &str,
        basis: Vec<String>,
        table: Vec<Vec<Vec<Scalar>>>,
        unit: Option<Vec<Scalar>>,
    ) -> Result<Self> {
        let dim = basis.len();
        if table.len() != dim
            || table.iter().any(|row| row.len() != dim)
            || table.iter().flatten().any(|v| v.len() != dim)
        {
            return Err(Error::Dimension("structure table shape mismatch".into()));
        }
        if let Some(u) = &unit {
            if u.len() != dim {
                return Err(Error::Dimension("unit vector length mismatch".into()));
            }
        }
        Ok(FinDimAlgebra { name: name.to_string(), basis, table, unit })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn product_basis(&self, i: usize, j: usize) -> &[Scalar] {
        &self.table[i][j]
    }

    /// Bilinear extension of the structure table.
    pub fn multiply(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let dim = self.dim();
        let mut out = vec![Scalar::zero(); dim];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let c = xi * yj;
                for (k, m) in self.table[i][j].iter().enumerate() {
                    if !m.is_zero() {
                        out[k] += &(&c * m);
                    }
                }
            }
        }
        out
    }

    pub fn power(&self, x: &[Scalar], e: usize) -> Vec<Scalar> {
        let mut out = match &self.unit {
            Some(u) => u.clone(),
            None => {
                // Without a unit, x^0 is undefined; callers avoid e = 0.
                assert!(e >= 1, "power of 0 needs a unit");
                x.to_vec()
            }
        };
        let start = if self.unit.is_some() { 0 } else { 1 };
        for _ in start..e {
            out = self.multiply(&out, x);
        }
        out
    }

    pub fn unit_vector(&self) -> Option<Vec<Scalar>> {
        self.unit.clone()
    }

    pub fn is_commutative(&self) -> bool {
        let dim = self.dim();
        (0..dim).all(|i| (0..dim).all(|j| self.table[i][j] == self.table[j][i]))
    }

    /// Exhaustive associativity check over all basis triples.
    pub fn is_associative(&self) -> bool {
        let dim = self.dim();
        let b = |i: usize| {
            let mut v = vec![Scalar::zero(); dim];
            v[i] = Scalar::one();
            v
        };
        for i in 0..dim {
            for j in 0..dim {
                let ij = self.table[i][j].clone();
                for k in 0..dim {
                    let left = self.multiply(&ij, &b(k));
                    let right = self.multiply(&b(i), &self.table[j][k]);
                    if left != right {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Verify that the declared unit really is two-sided.
    pub fn unit_law_holds(&self) -> bool {
        let Some(u) = &self.unit else { return false };
        let dim = self.dim();
        (0..dim).all(|i| {
            let mut e = vec![Scalar::zero(); dim];
            e[i] = Scalar::one();
            self.multiply(u, &e) == e && self.multiply(&e, u) == e
        })
    }

    /// Transport the table to the basis whose rows are given in the old
    /// coordinates. Fails if the change matrix is singular over the
    /// scalar ring.
    pub fn change_basis(
        &self,
        change: &[Vec<Scalar>],
        name: &str,
        basis: Vec<String>,
    ) -> Result<FinDimAlgebra> {
        let dim = self.dim();
        if change.len() != dim || change.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("basis change must be square of matching size".into()));
        }
        // Columns of m are the new basis vectors; m * c = v expresses an
        // old-coordinate vector v in the new basis.
        let mut m = vec![vec![Scalar::zero(); dim]; dim];
        for (i, row) in change.iter().enumerate() {
            for (r, entry) in row.iter().enumerate() {
                m[r][i] = entry.clone();
            }
        }
        let minv = invert(&m)?;
        let express = |v: &[Scalar]| -> Vec<Scalar> {
            (0..dim)
                .map(|r| {
                    let mut acc = Scalar::zero();
                    for (c, vc) in v.iter().enumerate() {
                        acc += &(&minv[r][c] * vc);
                    }
                    acc
                })
                .collect()
        };
        let mut table = vec![vec![Vec::new(); dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                let prod = self.multiply(&change[i], &change[j]);
                table[i][j] = express(&prod);
            }
        }
        let unit = self.unit.as_ref().map(|u| express(u));
        FinDimAlgebra::new(name, basis, table, unit)
    }

    pub fn same_table(&self, other: &FinDimAlgebra) -> bool {
        self.table == other.table
    }

    /// Products as JSON, one entry per unordered basis pair, with scalar
    /// coefficients rendered as canonical strings.
    pub fn table_json(&self) -> Value {
        let dim = self.dim();
        let mut products = Map::new();
        for i in 0..dim {
            for j in i..dim {
                let mut entry = Map::new();
                for (k, c) in self.table[i][j].iter().enumerate() {
                    if !c.is_zero() {
                        entry.insert(self.basis[k].clone(), Value::String(c.to_string()));
                    }
                }
                products.insert(
                    format!("{}*{}", self.basis[i], self.basis[j]),
                    Value::Object(entry),
                );
            }
        }
        json!({ "name": self.name, "basis": self.basis, "products": products })
    }

    /// Aligned markdown rendering of the full multiplication table.
    pub fn table_markdown(&self) -> String {
        let dim = self.dim();
        let render = |v: &[Scalar]| -> String {
            let mut parts = Vec::new();
            for (k, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let cs = c.to_string();
                if cs == "1" {
                    parts.push(self.basis[k].clone());
                } else if cs == "-1" {
                    parts.push(format!("-{}", self.basis[k]));
                } else if cs.contains(' ') {
                    parts.push(format!("({cs}) {}", self.basis[k]));
                } else {
                    parts.push(format!("{cs} {}", self.basis[k]));
                }
            }
            if parts.is_empty() {
                "0".to_string()
            } else {
                parts.join(" + ").replace("+ -", "- ")
            }
        };
        let mut cells = vec![vec![String::new(); dim + 1]; dim + 1];
        cells[0][0] = "*".to_string();
        for i in 0..dim {
            cells[0][i + 1] = self.basis[i].clone();
            cells[i + 1][0] = self.basis[i].clone();
            for j in 0..dim {
                cells[i + 1][j + 1] = render(&self.table[i][j]);
            }
        }
        let widths: Vec<usize> = (0..=dim)
            .map(|c| cells.iter().map(|row| row[c].len()).max().unwrap_or(1))
            .collect();
        let mut out = String::new();
        for (r, row) in cells.iter().enumerate() {
            let line: Vec<String> =
                row.iter().enumerate().map(|(c, s)| format!("{:w$}", s, w = widths[c])).collect();
            out.push_str(&format!("| {} |\n", line.join(" | ")));
            if r == 0 {
                let sep: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                out.push_str(&format!("|-{}-|\n", sep.join("-|-")));
            }
        }
        out
    }
}

fn s(v: i64) -> Scalar {
    Scalar::from_int(v)
}

fn spi(num: i64, den: i64, e: i64) -> Scalar {
    Scalar::pi_term(big_rat(num, den), e)
}

fn vec4(a: Scalar, b: Scalar, c: Scalar, d: Scalar) -> Vec<Scalar> {
    vec![a, b, c, d]
}

fn zero4() -> Vec<Scalar> {
    vec![Scalar::zero(), Scalar::zero(), Scalar::zero(), Scalar::zero()]
}

fn basis_labels(stem: &str) -> Vec<String> {
    (0..4).map(|k| format!("{stem}{k}")).collect()
}

/// Convolution table of the spherical basis nu_0..nu_3; nu_3 is the
/// normalized Haar measure and the unit.
pub fn nu_table() -> FinDimAlgebra {
    let mut table = vec![vec![zero4(); 4]; 4];
    let mut set = |i: usize, j: usize, v: Vec<Scalar>| {
        table[i][j] = v.clone();
        table[j][i] = v;
    };
    set(0, 0, zero4());
    set(0, 1, vec4(s(2), s(0), s(0), s(0)));
    set(0, 2, zero4());
    set(0, 3, vec4(s(1), s(0), s(0), s(0)));
    set(1, 1, vec4(s(0), s(0), s(0), s(4)));
    set(1, 2, vec4(s(2), s(0), s(-2), s(0)));
    set(1, 3, vec4(s(0), s(1), s(0), s(0)));
    set(2, 2, vec4(s(0), spi(1, 4, 2), s(0), spi(-1, 2, 2)));
    set(2, 3, vec4(s(0), s(0), s(1), s(0)));
    set(3, 3, vec4(s(0), s(0), s(0), s(1)));
    let unit = vec4(s(0), s(0), s(0), s(1));
    FinDimAlgebra::new("nu", basis_labels("nu"), table, Some(unit)).expect("fixed shape")
}

/// Convolution table of the intrinsic-volume basis mu_0..mu_3; the unit
/// is mu_3 / (2 pi^2).
pub fn mu_table() -> FinDimAlgebra {
    let mut table = vec![vec![zero4(); 4]; 4];
    let mut set = |i: usize, j: usize, v: Vec<Scalar>| {
        table[i][j] = v.clone();
        table[j][i] = v;
    };
    set(0, 0, zero4());
    set(0, 1, vec4(spi(3, 1, 1), s(0), s(0), s(0)));
    set(0, 2, zero4());
    set(0, 3, vec4(spi(2, 1, 2), s(0), s(0), s(0)));
    set(1, 1, vec4(s(0), spi(2, 1, 1), s(0), Scalar::from_rat(big_rat(3, 2))));
    set(1, 2, vec4(spi(4, 1, 2), s(0), spi(-1, 1, 1), s(0)));
    set(1, 3, vec4(s(0), spi(2, 1, 2), s(0), s(0)));
    set(2, 2, vec4(s(0), spi(1, 1, 3), s(0), spi(-3, 2, 2)));
    set(2, 3, vec4(s(0), s(0), spi(2, 1, 2), s(0)));
    set(3, 3, vec4(s(0), s(0), s(0), spi(2, 1, 2)));
    let unit = vec4(s(0), s(0), s(0), spi(1, 2, -2));
    FinDimAlgebra::new("mu", basis_labels("mu"), table, Some(unit)).expect("fixed shape")
}

/// Rows express mu_i through the nu basis:
/// mu_0 = nu_0, mu_1 = pi nu_1 + pi nu_3, mu_2 = 2 pi nu_2,
/// mu_3 = 2 pi^2 nu_3.
pub fn basis_change() -> Vec<Vec<Scalar>> {
    vec![
        vec4(s(1), s(0), s(0), s(0)),
        vec4(s(0), spi(1, 1, 1), s(0), spi(1, 1, 1)),
        vec4(s(0), s(0), spi(2, 1, 1), s(0)),
        vec4(s(0), s(0), s(0), spi(2, 1, 2)),
    ]
}

/// The truncated polynomial ring on 1, t, t^2, t^3 with t^4 = 0, used as
/// the comparison model for the classification.
pub fn model_t4_table() -> FinDimAlgebra {
    let mut table = vec![vec![zero4(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            if i + j < 4 {
                table[i][j][i + j] = Scalar::one();
            }
        }
    }
    let unit = vec4(s(1), s(0), s(0), s(0));
    FinDimAlgebra::new(
        "t4",
        vec!["1".into(), "t".into(), "t^2".into(), "t^3".into()],
        table,
        Some(unit),
    )
    .expect("fixed shape")
}

/// The scalar field itself as a 1-dimensional algebra.
pub fn field_table() -> FinDimAlgebra {
    FinDimAlgebra::new("field", vec!["1".into()], vec![vec![vec![Scalar::one()]]], Some(vec![s(1)]))
        .expect("fixed shape")
}

/// Parity of each basis element under the grading involution.
#[derive(Clone, Debug)]
pub struct GradedInvolution {
    pub signs: Vec<i8>,
}

impl GradedInvolution {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::Algebra("grading signs must be +1 or -1".into()));
        }
        Ok(GradedInvolution { signs })
    }
}

/// Check that every product lands in the eigenspace predicted by
/// `(-1)^dim_g` times the eigenvalue product of its factors.
pub fn ev_check(alg: &FinDimAlgebra, grading: &GradedInvolution, dim_g: usize) -> Result<bool> {
    if grading.signs.len() != alg.dim() {
        return Err(Error::Algebra("every basis element must be graded".into()));
    }
    let group_sign = if dim_g % 2 == 0 { 1 } else { -1 };
    for i in 0..alg.dim() {
        for j in 0..alg.dim() {
            let predicted = group_sign * grading.signs[i] * grading.signs[j];
            for (k, c) in alg.product_basis(i, j).iter().enumerate() {
                if !c.is_zero() && grading.signs[k] != predicted {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Check that the given values define an algebra character:
/// value(x * y) = value(x) value(y) on all basis pairs.
pub fn character_check(alg: &FinDimAlgebra, values: &[Scalar]) -> bool {
    if values.len() != alg.dim() {
        return false;
    }
    for i in 0..alg.dim() {
        for j in 0..alg.dim() {
            let mut lhs = Scalar::zero();
            for (k, c) in alg.product_basis(i, j).iter().enumerate() {
                lhs += &(c * &values[k]);
            }
            if lhs != &values[i] * &values[j] {
                return false;
            }
        }
    }
    true
}

/// The evaluation pairing M[i][j] = eval(b_i * b_j), with its exact
/// determinant; the pairing is perfect iff the determinant is nonzero.
pub fn pairing_matrix(
    alg: &FinDimAlgebra,
    eval_at_e: &[Scalar],
) -> Result<(Vec<Vec<Scalar>>, Scalar, bool)> {
    if eval_at_e.len() != alg.dim() {
        return Err(Error::Dimension("evaluation vector length mismatch".into()));
    }
    let dim = alg.dim();
    let mut m = vec![vec![Scalar::zero(); dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            for (k, c) in alg.product_basis(i, j).iter().enumerate() {
                m[i][j] += &(c * &eval_at_e[k]);
            }
        }
    }
    let d = det(&m)?;
    let regular = !d.is_zero();
    Ok((m, d, regular))
}

/// Check that `generator` realizes the quotient ring presentation: its
/// powers 1, g, .., g^(dim-1) are linearly independent and it satisfies
/// the relation polynomial (coefficients indexed by power).
pub fn quotient_iso_check(
    alg: &FinDimAlgebra,
    generator: &[Scalar],
    relation: &[Scalar],
) -> Result<bool> {
    if alg.unit_vector().is_none() {
        return Err(Error::Algebra("quotient comparison needs a unital algebra".into()));
    }
    let dim = alg.dim();
    let powers: Vec<Vec<Scalar>> = (0..relation.len().max(dim))
        .map(|e| alg.power(generator, e))
        .collect();
    let low: Vec<Vec<Scalar>> = powers[..dim].to_vec();
    if rank(&low) != dim {
        return Ok(false);
    }
    let mut value = vec![Scalar::zero(); dim];
    for (e, c) in relation.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for (k, p) in powers[e].iter().enumerate() {
            value[k] += &(c * p);
        }
    }
    Ok(value.iter().all(Scalar::is_zero))
}

/// Dimension of the nilradical, via the kernel of the trace form
/// B(x, y) = tr(L_(x y)) with every kernel basis vector certified
/// nilpotent by exact powering. In a commutative algebra sums of
/// nilpotents are nilpotent and nilpotents always pair to zero, so a
/// fully certified kernel equals the nilradical.
pub fn nilradical_dim(alg: &FinDimAlgebra) -> Result<usize> {
    if !alg.is_commutative() {
        return Err(Error::Algebra("nilradical computation expects a commutative table".into()));
    }
    let dim = alg.dim();
    // tr(L_{b_k}) for each basis element.
    let traces: Vec<Scalar> = (0..dim)
        .map(|k| {
            let mut t = Scalar::zero();
            for j in 0..dim {
                t += &alg.product_basis(k, j)[j];
            }
            t
        })
        .collect();
    let mut gram = vec![vec![Scalar::zero(); dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            for (k, c) in alg.product_basis(i, j).iter().enumerate() {
                gram[i][j] += &(c * &traces[k]);
            }
        }
    }
    let ker = kernel(&gram, dim);
    for v in &ker {
        let p = alg.power(v, dim + 1);
        if !p.iter().all(Scalar::is_zero) {
            return Err(Error::Solver(
                "trace-form kernel contains a non-nilpotent element".into(),
            ));
        }
    }
    Ok(ker.len())
}

/// Evaluations of candidate valuations on model bodies, driving the
/// template method: the target column must be an exact linear
/// combination of the candidate columns.
#[derive(Clone, Debug)]
pub struct TemplateData {
    pub bodies: Vec<String>,
    pub target: Vec<Scalar>,
    pub candidates: Vec<(String, Vec<Scalar>)>,
}

/// Solve the evaluation system for the ansatz coefficients. Fails on
/// inconsistent or underdetermined data.
pub fn template_solve(data: &TemplateData) -> Result<Vec<Scalar>> {
    let rows = data.bodies.len();
    if data.target.len() != rows || data.candidates.iter().any(|(_, col)| col.len() != rows) {
        return Err(Error::Dimension("template columns must match the body list".into()));
    }
    let matrix: Vec<Vec<Scalar>> = (0..rows)
        .map(|r| data.candidates.iter().map(|(_, col)| col[r].clone()).collect())
        .collect();
    solve_unique(&matrix, &data.target)
}

/// Evaluation data determining nu_1 = a mu_1 + b mu_3: values of both
/// sides on the circle and on the 3-sphere. The target values are Euler
/// characteristics of equators; the candidate values are classical
/// intrinsic-volume evaluations.
pub fn nu1_template() -> TemplateData {
    TemplateData {
        bodies: vec!["S1".into(), "S3".into()],
        target: vec![s(2), s(2)],
        candidates: vec![
            ("mu1".into(), vec![spi(2, 1, 1), spi(3, 1, 1)]),
            ("mu3".into(), vec![s(0), spi(2, 1, 2)]),
        ],
    }
}

/// Evaluation data determining nu_2 = c mu_0 + d mu_2 from a point and
/// the 2-sphere.
pub fn nu2_template() -> TemplateData {
    TemplateData {
        bodies: vec!["point".into(), "S2".into()],
        target: vec![s(0), s(2)],
        candidates: vec![
            ("mu0".into(), vec![s(1), s(2)]),
            ("mu2".into(), vec![s(0), spi(4, 1, 1)]),
        ],
    }
}

/// Evaluation data for the linear stage of the squared-Crofton product:
/// nu_1 * nu_1 = a1 nu_1 + a3 nu_3 evaluated on the full group and on a
/// great circle.
pub fn nu1_square_template() -> TemplateData {
    TemplateData {
        bodies: vec!["S3".into(), "S1".into()],
        target: vec![s(4), s(0)],
        candidates: vec![
            ("nu1".into(), vec![s(2), s(2)]),
            ("nu3".into(), vec![s(1), s(0)]),
        ],
    }
}

/// The parity signs of the nu basis under the grading involution.
pub fn nu_grading() -> GradedInvolution {
    GradedInvolution::new(vec![1, -1, 1, -1]).expect("valid signs")
}

/// The parity signs of the mu basis under the grading involution.
pub fn mu_grading() -> GradedInvolution {
    GradedInvolution::new(vec![1, -1, 1, -1]).expect("valid signs")
}

/// Haar-component character on the nu basis: values on the full group.
pub fn nu_character() -> Vec<Scalar> {
    vec4(s(0), s(2), s(0), s(1))
}

/// Haar-component character on the mu basis.
pub fn mu_character() -> Vec<Scalar> {
    vec4(s(0), spi(3, 1, 1), s(0), spi(2, 1, 2))
}

/// Point evaluation on the nu basis: only the Euler characteristic sees
/// a point.
pub fn nu_point_evaluation() -> Vec<Scalar> {
    vec4(s(1), s(0), s(0), s(0))
}

/// The generator pi^-1 nu_2 of the quotient presentation.
pub fn quotient_generator() -> Vec<Scalar> {
    vec4(s(0), s(0), spi(1, 1, -1), s(0))
}

/// Coefficients of the relation polynomial t^2 + t^4.
pub fn quotient_relation() -> Vec<Scalar> {
    vec![s(0), s(0), s(1), s(0), s(1)]
}
