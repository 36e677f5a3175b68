//! Operator families and their finite truncations.

use crate::dsl::{EvalError, Expr, OperatorSpec, Program, Scenario};
use crate::linalg::{
    gap_from_decomposition, sym_eig_with, GeneralMatrix, SymmetricMatrix, Tolerances,
};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum FamilyKind {
    /// `⊕_k F_k` with `F_k` given entrywise by expressions in `k`.
    BlockDiagonal {
        block_size: usize,
        entries: Vec<Vec<Program>>,
    },
    /// A fixed matrix; the truncation size is ignored.
    Dense(SymmetricMatrix),
}

#[derive(Debug, Clone)]
pub struct OperatorFamily {
    pub label: String,
    pub kind: FamilyKind,
}

impl OperatorFamily {
    pub fn block_diagonal(label: impl Into<String>, entries: &[Vec<Expr>]) -> Self {
        let compiled = entries
            .iter()
            .map(|row| row.iter().map(Expr::compile).collect())
            .collect();
        Self {
            label: label.into(),
            kind: FamilyKind::BlockDiagonal {
                block_size: entries.len(),
                entries: compiled,
            },
        }
    }

    pub fn dense(label: impl Into<String>, matrix: SymmetricMatrix) -> Self {
        Self {
            label: label.into(),
            kind: FamilyKind::Dense(matrix),
        }
    }

    pub fn from_spec(label: impl Into<String>, spec: &OperatorSpec) -> Self {
        match spec {
            OperatorSpec::Entries(e) => Self::block_diagonal(label, e),
            OperatorSpec::Dense(m) => Self::dense(label, m.clone()),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.kind, FamilyKind::Dense(_))
    }

    /// Dimension of the truncation to `n` blocks.
    pub fn dim_at(&self, n: usize) -> usize {
        match &self.kind {
            FamilyKind::BlockDiagonal { block_size, .. } => n * block_size,
            FamilyKind::Dense(m) => m.dim(),
        }
    }

    /// The `k`-th diagonal block (1-based).
    pub fn block(&self, k: usize) -> Result<SymmetricMatrix> {
        match &self.kind {
            FamilyKind::BlockDiagonal {
                block_size,
                entries,
            } => {
                let mut m = GeneralMatrix::zeros(*block_size, *block_size);
                for (i, row) in entries.iter().enumerate() {
                    for (j, p) in row.iter().enumerate() {
                        m[(i, j)] = p
                            .run(k as u64)
                            .map_err(|source| self.eval_error(k, i, j, source))?;
                    }
                }
                Ok(SymmetricMatrix::from_general(&m)?)
            }
            FamilyKind::Dense(m) => Ok(m.clone()),
        }
    }

    fn eval_error(&self, k: usize, row: usize, col: usize, source: EvalError) -> Error {
        Error::Eval {
            operator: self.label.clone(),
            k,
            row,
            col,
            source,
        }
    }

    /// Restriction to the first `n` blocks. Dense families return their
    /// matrix unchanged.
    pub fn truncate(&self, n: usize) -> Result<SymmetricMatrix> {
        if n == 0 {
            return Err(Error::DimensionMismatch(
                "truncation needs at least one block".into(),
            ));
        }
        match &self.kind {
            FamilyKind::BlockDiagonal { .. } => {
                let blocks = (1..=n).map(|k| self.block(k)).collect::<Result<Vec<_>>>()?;
                Ok(SymmetricMatrix::block_diagonal(&blocks)?)
            }
            FamilyKind::Dense(m) => Ok(m.clone()),
        }
    }
}

/// The `(A, H)` families of a scenario.
pub fn scenario_families(scenario: &Scenario) -> (OperatorFamily, OperatorFamily) {
    (
        OperatorFamily::from_spec("A", &scenario.a),
        OperatorFamily::from_spec("H", &scenario.h),
    )
}

/// Returns `α = min spec(S)`, failing unless `α > 0`.
pub fn check_positive_definite(s: &SymmetricMatrix) -> Result<f64> {
    check_positive_definite_with(s, &Tolerances::default())
}

pub fn check_positive_definite_with(s: &SymmetricMatrix, tol: &Tolerances) -> Result<f64> {
    let alpha = sym_eig_with(s, tol)?.min();
    if alpha > 0.0 {
        Ok(alpha)
    } else {
        Err(Error::NotPositiveDefinite { eigenvalue: alpha })
    }
}

/// Certificate that a truncated pair satisfies the standing hypotheses:
/// `A > 0` and `H` boundedly invertible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisCert {
    pub alpha: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    pub norm_h: f64,
    pub norm_h_inv: f64,
}

pub fn check_hypothesis(a: &SymmetricMatrix, h: &SymmetricMatrix) -> Result<HypothesisCert> {
    check_hypothesis_with(a, h, &Tolerances::default())
}

pub fn check_hypothesis_with(
    a: &SymmetricMatrix,
    h: &SymmetricMatrix,
    tol: &Tolerances,
) -> Result<HypothesisCert> {
    if a.dim() != h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "A is {0}x{0} but H is {1}x{1}",
            a.dim(),
            h.dim()
        )));
    }
    let alpha = check_positive_definite_with(a, tol)?;
    let h_eig = sym_eig_with(h, tol)?;
    let (h_minus, h_plus) = gap_from_decomposition(&h_eig, tol)?;
    Ok(HypothesisCert {
        alpha,
        h_minus,
        h_plus,
        norm_h: h_eig.max_abs(),
        norm_h_inv: 1.0 / h_eig.min_abs(),
    })
}
