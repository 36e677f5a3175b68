//! Named constructions built on top of the form machinery: off-diagonal
//! perturbations of a signature operator, Lax-Milgram extraction of `H`,
//! polar decompositions and the μ-family they generate, Krein space
//! diagnostics, and the bundled reference scenarios.

pub mod builtin;
pub mod krein;
pub mod laxmilgram;
pub mod mu_family;
pub mod offdiag;
pub mod polar;

pub use builtin::{
    builtin, builtin_examples, builtin_names, Builtin, Expectations, SpectrumFormula,
};
pub use krein::{krein_diagnose, krein_sample, KreinReport, KreinSample, KreinVariant};
pub use laxmilgram::{laxmilgram_extract, laxmilgram_extract_with, LaxMilgram, LaxMilgramCert};
pub use mu_family::{mu_block, mu_family_build, mu_family_operators};
pub use offdiag::{offdiagonal_build, OffDiagBuild, OffDiagGap, OffDiagSpec};
pub use polar::{interpolation_identity, polar_decompose, Interpolation, PolarData};

use crate::dsl::{parse_expr, Program, ScenarioError};
use crate::linalg::GeneralMatrix;
use crate::{Error, Result};

/// A family of general (possibly rectangular, possibly non-symmetric)
/// blocks `F_k`, given by expressions in `k` or as one fixed matrix.
#[derive(Debug, Clone)]
pub enum MatrixFamily {
    Blocks {
        label: String,
        rows: usize,
        cols: usize,
        entries: Vec<Vec<Program>>,
    },
    Dense(GeneralMatrix),
}

impl MatrixFamily {
    /// Parses a rectangular table of entry expressions.
    pub fn from_exprs(label: impl Into<String>, table: &[&[&str]]) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, |r| r.len());
        if rows == 0 || cols == 0 || table.iter().any(|r| r.len() != cols) {
            return Err(
                ScenarioError::Schema("block table must be a nonempty rectangle".into()).into(),
            );
        }
        let mut entries = Vec::with_capacity(rows);
        for row in table {
            let mut compiled = Vec::with_capacity(cols);
            for text in *row {
                let expr = parse_expr(text)
                    .map_err(|e| ScenarioError::Schema(format!("entry '{text}': {e}")))?;
                compiled.push(expr.compile());
            }
            entries.push(compiled);
        }
        Ok(MatrixFamily::Blocks {
            label: label.into(),
            rows,
            cols,
            entries,
        })
    }

    /// Shape of one block (or of the fixed matrix).
    pub fn block_shape(&self) -> (usize, usize) {
        match self {
            MatrixFamily::Blocks { rows, cols, .. } => (*rows, *cols),
            MatrixFamily::Dense(m) => (m.rows(), m.cols()),
        }
    }

    /// The `k`-th block (1-based).
    pub fn block(&self, k: usize) -> Result<GeneralMatrix> {
        match self {
            MatrixFamily::Blocks {
                label,
                rows,
                cols,
                entries,
            } => {
                let mut m = GeneralMatrix::zeros(*rows, *cols);
                for (i, row) in entries.iter().enumerate() {
                    for (j, p) in row.iter().enumerate() {
                        m[(i, j)] = p.run(k as u64).map_err(|source| Error::Eval {
                            operator: label.clone(),
                            k,
                            row: i,
                            col: j,
                            source,
                        })?;
                    }
                }
                Ok(m)
            }
            MatrixFamily::Dense(m) => Ok(m.clone()),
        }
    }

    /// Block-diagonal assembly of the first `n` blocks; a dense family
    /// returns its matrix.
    pub fn truncate(&self, n: usize) -> Result<GeneralMatrix> {
        match self {
            MatrixFamily::Blocks { rows, cols, .. } => {
                let mut out = GeneralMatrix::zeros(n * rows, n * cols);
                for k in 1..=n {
                    out.set_block((k - 1) * rows, (k - 1) * cols, &self.block(k)?);
                }
                Ok(out)
            }
            MatrixFamily::Dense(m) => Ok(m.clone()),
        }
    }
}
