//! Off-diagonal perturbations of the signature operator.
//!
//! On `𝔥 = 𝔥₊ ⊕ 𝔥₋` with `A = diag(a₊, a₋)` and `J = diag(I, −I)`, the pair
//! `H = [[I, T], [Tᵀ, −I]]` never has spectrum in `(−1, 1)`, and the
//! resulting `B` keeps `(−m₋, m₊)` free, `m± = min spec(a±)`.

use serde::Serialize;

use super::MatrixFamily;
use crate::forms::{build_context_with, FormContext};
use crate::linalg::{sym_eig_with, GeneralMatrix, SymmetricMatrix, Tolerances};
use crate::model::{check_positive_definite_with, OperatorFamily};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct OffDiagSpec {
    pub a_plus: OperatorFamily,
    pub a_minus: OperatorFamily,
    /// Coupling `T: 𝔥₋ → 𝔥₊`, one `dim(a₊ block) × dim(a₋ block)` block per `k`.
    pub coupling: MatrixFamily,
}

/// Eigenvalues found inside the two forbidden intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffDiagGap {
    pub m_plus: f64,
    pub m_minus: f64,
    /// Smallest `|λ|` over `spec(H)`; at least 1 when the claim holds.
    pub h_min_abs: f64,
    pub h_margin: f64,
    pub h_violations: Vec<f64>,
    /// Closest eigenvalues of `B` on each side of zero.
    pub b_negative_max: f64,
    pub b_positive_min: f64,
    pub b_margin: f64,
    pub b_violations: Vec<f64>,
}

impl OffDiagGap {
    pub fn passed(&self) -> bool {
        self.h_violations.is_empty() && self.b_violations.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct OffDiagBuild {
    pub a: SymmetricMatrix,
    pub h: SymmetricMatrix,
    pub j: SymmetricMatrix,
    pub ctx: FormContext,
    pub gap: OffDiagGap,
}

pub fn offdiagonal_build(spec: &OffDiagSpec, n: usize) -> Result<OffDiagBuild> {
    offdiagonal_build_with(spec, n, &Tolerances::default())
}

pub fn offdiagonal_build_with(
    spec: &OffDiagSpec,
    n: usize,
    tol: &Tolerances,
) -> Result<OffDiagBuild> {
    let a_plus = spec.a_plus.truncate(n)?;
    let a_minus = spec.a_minus.truncate(n)?;
    let t = spec.coupling.truncate(n)?;
    let (p, m) = (a_plus.dim(), a_minus.dim());
    if (t.rows(), t.cols()) != (p, m) {
        return Err(Error::DimensionMismatch(format!(
            "coupling is {}x{} but the halves have dimensions {p} and {m}",
            t.rows(),
            t.cols()
        )));
    }
    let m_plus = check_positive_definite_with(&a_plus, tol)?;
    let m_minus = check_positive_definite_with(&a_minus, tol)?;

    let dim = p + m;
    let mut a = GeneralMatrix::zeros(dim, dim);
    a.set_block(0, 0, a_plus.as_general());
    a.set_block(p, p, a_minus.as_general());
    let a = SymmetricMatrix::from_general(&a)?;

    let mut signs = vec![1.0; p];
    signs.extend(std::iter::repeat_n(-1.0, m));
    let j = SymmetricMatrix::from_diagonal(&signs)?;

    let mut h = j.as_general().clone();
    h.set_block(0, p, &t);
    h.set_block(p, 0, &t.transpose());
    let h = SymmetricMatrix::from_general(&h)?;

    let ctx = build_context_with(&a, &h, tol)?;

    let h_eig = sym_eig_with(&h, tol)?;
    let h_margin = tol.gap_threshold(h_eig.max_abs());
    let h_violations = h_eig
        .eigenvalues()
        .iter()
        .copied()
        .filter(|l| l.abs() < 1.0 - h_margin)
        .collect();

    let b_values = ctx.b_eig().eigenvalues();
    let b_margin = tol.gap_threshold(ctx.norm_b());
    let b_violations = b_values
        .iter()
        .copied()
        .filter(|&l| l > -m_minus + b_margin && l < m_plus - b_margin)
        .collect();
    let b_negative_max = b_values
        .iter()
        .copied()
        .filter(|&l| l < 0.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let b_positive_min = b_values
        .iter()
        .copied()
        .filter(|&l| l > 0.0)
        .fold(f64::INFINITY, f64::min);

    Ok(OffDiagBuild {
        gap: OffDiagGap {
            m_plus,
            m_minus,
            h_min_abs: h_eig.min_abs(),
            h_margin,
            h_violations,
            b_negative_max,
            b_positive_min,
            b_margin,
            b_violations,
        },
        a,
        h,
        j,
        ctx,
    })
}
