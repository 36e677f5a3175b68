//! The μ-family generated by an invertible `D`:
//!
//! ```text
//! A_μ = diag(|D|^{2−2μ}, |D*|^{2μ}),   H = [[0, Uᵀ], [U, 0]],   D = U|D|
//! ```
//!
//! Every member has the same operator `B = [[0, Dᵀ], [D, 0]]`, while form
//! domain stability holds only at `μ = 1/2`.

use super::polar::polar_decompose_with;
use super::MatrixFamily;
use crate::forms::{build_context_with, FormContext};
use crate::linalg::{
    apply_to_decomposition, sym_eig_with, GeneralMatrix, SpectralFn, SymmetricMatrix, Tolerances,
};
use crate::{Error, Result};

/// `(A_μ, H)` for one block `D`.
pub fn mu_block(d: &GeneralMatrix, mu: f64) -> Result<(SymmetricMatrix, SymmetricMatrix)> {
    mu_block_with(d, mu, &Tolerances::default())
}

pub fn mu_block_with(
    d: &GeneralMatrix,
    mu: f64,
    tol: &Tolerances,
) -> Result<(SymmetricMatrix, SymmetricMatrix)> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::PreconditionViolation(format!(
            "mu must lie in [0, 1], got {mu}"
        )));
    }
    let polar = polar_decompose_with(d, tol)?;
    let m = d.rows();
    let upper = power(&polar.abs_d, 2.0 - 2.0 * mu, tol)?;
    let lower = power(&polar.abs_d_star, 2.0 * mu, tol)?;

    let mut a = GeneralMatrix::zeros(2 * m, 2 * m);
    a.set_block(0, 0, upper.as_general());
    a.set_block(m, m, lower.as_general());
    let mut h = GeneralMatrix::zeros(2 * m, 2 * m);
    h.set_block(0, m, &polar.u.transpose());
    h.set_block(m, 0, &polar.u);
    Ok((
        SymmetricMatrix::from_general(&a)?,
        SymmetricMatrix::from_general(&h)?,
    ))
}

fn power(s: &SymmetricMatrix, p: f64, tol: &Tolerances) -> Result<SymmetricMatrix> {
    if p == 0.0 {
        return Ok(SymmetricMatrix::identity(s.dim())?);
    }
    Ok(apply_to_decomposition(
        &sym_eig_with(s, tol)?,
        SpectralFn::Power(p),
        tol,
    )?)
}

/// Block-diagonal `(A_μ, H)` over the first `n` blocks `D_1, …, D_n`.
pub fn mu_family_operators(
    d_family: &MatrixFamily,
    mu: f64,
    n: usize,
) -> Result<(SymmetricMatrix, SymmetricMatrix)> {
    let (rows, cols) = d_family.block_shape();
    if rows != cols {
        return Err(Error::DimensionMismatch(format!(
            "D blocks must be square, got {rows}x{cols}"
        )));
    }
    let tol = Tolerances::default();
    let mut a_blocks = Vec::with_capacity(n);
    let mut h_blocks = Vec::with_capacity(n);
    let count = if matches!(d_family, MatrixFamily::Dense(_)) {
        1
    } else {
        n
    };
    for k in 1..=count {
        let (a, h) = mu_block_with(&d_family.block(k)?, mu, &tol)?;
        a_blocks.push(a);
        h_blocks.push(h);
    }
    Ok((
        SymmetricMatrix::block_diagonal(&a_blocks)?,
        SymmetricMatrix::block_diagonal(&h_blocks)?,
    ))
}

pub fn mu_family_build(d_family: &MatrixFamily, mu: f64, n: usize) -> Result<FormContext> {
    let (a, h) = mu_family_operators(d_family, mu, n)?;
    build_context_with(&a, &h, &Tolerances::default())
}
