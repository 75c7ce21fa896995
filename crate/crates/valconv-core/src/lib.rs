//! Exact kernel for convolution of invariant forms and smooth invariant
//! valuations on unimodular Lie groups, together with the closed-form
//! product tables for the bi-invariant valuations on the 3-sphere.
//!
//! All arithmetic is exact: scalars are Laurent polynomials in pi with
//! rational coefficients, and sphere-bundle coefficients live in a
//! canonical quotient ring where equality is structural.

pub mod blade;
pub mod error;
pub mod conv;
pub mod forms;
pub mod lie;
pub mod linalg;
pub mod gen;
pub mod s3;
pub mod scalar;
pub mod sphere;
pub mod suites;
pub mod valuation;

pub use blade::{perm_sign, IndexSet, MultiVector, Space};
pub use conv::{convolve_forms, epsilon_sign, hat_s, is_ad_invariant, mu_component, unit_form};
pub use error::{Error, Result};
pub use forms::{BasicForm, BigradedForm, Values};
pub use lie::{builtin, builtin_names, LieAlgebraSpec, LinearField};
pub use scalar::Scalar;
pub use sphere::{sphere_moment, SphereCoeff};
pub use valuation::{
    beta_form, convolve_valuations, find_primitive, validate, InvariantValuation,
    ValidationReport,
};
pub use linalg::Gauge;
