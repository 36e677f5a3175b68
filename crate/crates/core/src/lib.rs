//! Sign-indefinite quadratic forms `b[x,y] = ⟨A^{1/2}x, H A^{1/2}y⟩` on
//! finite truncations of block-diagonal operator families.
//!
//! The crate builds the associated operator `B = A^{1/2} H A^{1/2}`, checks
//! the representation identities and resolvent gap numerically, and judges
//! form-domain stability `Dom(A^{1/2}) = Dom(|B|^{1/2})` from the growth of the
//! criteria operators `X`, `Y`, `K` across increasing truncations.

pub mod constructions;
pub mod dsl;
pub mod forms;
pub mod linalg;
pub mod model;
pub mod report;
pub mod sampling;
pub mod stability;

use thiserror::Error;

pub use dsl::{load_scenario, load_scenario_with_params, Scenario};
pub use forms::{build_context, FormContext};
pub use linalg::{GeneralMatrix, SymmetricMatrix, Tolerances};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Scenario(#[from] dsl::ScenarioError),
    #[error("evaluating {operator} block k={k}, entry ({row}, {col}): {source}")]
    Eval {
        operator: String,
        k: usize,
        row: usize,
        col: usize,
        source: dsl::EvalError,
    },
    #[error("operator is not positive definite: eigenvalue {eigenvalue:e}")]
    NotPositiveDefinite { eigenvalue: f64 },
    #[error("S·B differs from the identity by {residual:e} (limit {limit:e})")]
    InversionMismatch { residual: f64, limit: f64 },
    #[error("coercivity fails on sample {sample}: |b[x,x]| = {form:e} < α·a[x,x] = {bound:e}")]
    CoercivityViolation {
        sample: usize,
        form: f64,
        bound: f64,
    },
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("{value} lies outside the open interval ({lower}, {upper})")]
    OutsideInterval { value: f64, lower: f64, upper: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
