//! Dense real symmetric linear algebra: eigendecomposition and spectral
//! calculus.

mod eigen;
mod matrix;

pub use eigen::{sym_eig, sym_eig_with, SpectralDecomposition};
pub use matrix::{dot, norm2, GeneralMatrix, SymmetricMatrix};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:e})")]
    NonConvergence { sweeps: usize, off_diagonal: f64 },
    #[error("{operation} is undefined: eigenvalue {eigenvalue:e} violates the gap tolerance {tolerance:e}")]
    DomainViolation {
        operation: &'static str,
        eigenvalue: f64,
        tolerance: f64,
    },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix must have at least one row")]
    Empty,
    #[error("{what} residual {residual:e} exceeds {limit:e}")]
    InvariantViolated {
        what: &'static str,
        residual: f64,
        limit: f64,
    },
}

/// Numerical tolerances shared by the spectral routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative gap tolerance: an eigenvalue counts as zero when
    /// `|λ| ≤ gap · ‖S‖`.
    pub gap: f64,
    /// Relative reconstruction tolerance for `‖QΛQᵀ − S‖ / ‖S‖`.
    pub recon: f64,
    /// Per-dimension orthogonality tolerance for `‖QᵀQ − I‖`.
    pub ortho: f64,
    pub max_sweeps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gap: 1e-8,
            recon: 1e-10,
            ortho: 1e-10,
            max_sweeps: 64,
        }
    }
}

impl Tolerances {
    /// Absolute gap threshold for a spectrum whose norm is `norm`.
    pub fn gap_threshold(&self, norm: f64) -> f64 {
        self.gap * norm
    }
}

/// Scalar functions available to [`spectral_apply`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralFn {
    Sqrt,
    InvSqrt,
    Abs,
    Sign,
    Inverse,
    Power(f64),
    /// `|λ|^p`; used for `|B|^{1/2}` and `|B|^{-1/2}`.
    AbsPower(f64),
}

impl SpectralFn {
    fn name(self) -> &'static str {
        match self {
            SpectralFn::Sqrt => "sqrt",
            SpectralFn::InvSqrt => "inv_sqrt",
            SpectralFn::Abs => "abs",
            SpectralFn::Sign => "sign",
            SpectralFn::Inverse => "inverse",
            SpectralFn::Power(_) => "power",
            SpectralFn::AbsPower(_) => "abs_power",
        }
    }
}

/// `f(S)` via the eigendecomposition of `S`.
pub fn spectral_apply(s: &SymmetricMatrix, f: SpectralFn) -> Result<SymmetricMatrix, LinalgError> {
    spectral_apply_with(s, f, &Tolerances::default())
}

pub fn spectral_apply_with(
    s: &SymmetricMatrix,
    f: SpectralFn,
    tol: &Tolerances,
) -> Result<SymmetricMatrix, LinalgError> {
    let decomp = sym_eig_with(s, tol)?;
    apply_to_decomposition(&decomp, f, tol)
}

/// Applies `f` to an existing decomposition after checking its domain.
pub fn apply_to_decomposition(
    decomp: &SpectralDecomposition,
    f: SpectralFn,
    tol: &Tolerances,
) -> Result<SymmetricMatrix, LinalgError> {
    let delta = tol.gap_threshold(decomp.max_abs());
    let violation = |eigenvalue: f64| LinalgError::DomainViolation {
        operation: f.name(),
        eigenvalue,
        tolerance: delta,
    };
    let needs_nonnegative = match f {
        SpectralFn::Sqrt | SpectralFn::InvSqrt => true,
        SpectralFn::Power(p) => p.fract() != 0.0,
        _ => false,
    };
    let needs_gap = match f {
        SpectralFn::InvSqrt | SpectralFn::Sign | SpectralFn::Inverse => true,
        SpectralFn::Power(p) | SpectralFn::AbsPower(p) => p < 0.0,
        SpectralFn::Sqrt | SpectralFn::Abs => false,
    };
    for &l in decomp.eigenvalues() {
        if needs_nonnegative && l < -delta {
            return Err(violation(l));
        }
        if needs_gap && l.abs() <= delta {
            return Err(violation(l));
        }
    }
    Ok(match f {
        SpectralFn::Sqrt => decomp.map(|l| l.max(0.0).sqrt()),
        SpectralFn::InvSqrt => decomp.map(|l| 1.0 / l.sqrt()),
        SpectralFn::Abs => decomp.map(f64::abs),
        SpectralFn::Sign => decomp.map(f64::signum),
        SpectralFn::Inverse => decomp.map(|l| 1.0 / l),
        SpectralFn::Power(p) => {
            if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
                decomp.map(|l| l.powi(p as i32))
            } else {
                decomp.map(|l| l.max(0.0).powf(p))
            }
        }
        SpectralFn::AbsPower(p) => decomp.map(|l| l.abs().powf(p)),
    })
}

/// Largest singular value, `sqrt(λ_max(MᵀM))`.
pub fn operator_norm(m: &GeneralMatrix) -> Result<f64, LinalgError> {
    let (_, max) = singular_value_range(m)?;
    Ok(max)
}

/// `(σ_min, σ_max)` of `m`, from the eigenvalues of `MᵀM`.
pub fn singular_value_range(m: &GeneralMatrix) -> Result<(f64, f64), LinalgError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(LinalgError::Empty);
    }
    let gram = SymmetricMatrix::from_general(&m.transpose().matmul(m)?)?;
    let d = sym_eig(&gram)?;
    Ok((d.min().max(0.0).sqrt(), d.max().max(0.0).sqrt()))
}

/// The maximal spectral gap `(h₋, h₊)` of `S` around zero. Infinite
/// endpoints mean the spectrum lies entirely on one side.
pub fn gap_around_zero(s: &SymmetricMatrix) -> Result<(f64, f64), LinalgError> {
    gap_from_decomposition(&sym_eig(s)?, &Tolerances::default())
}

pub fn gap_from_decomposition(
    decomp: &SpectralDecomposition,
    tol: &Tolerances,
) -> Result<(f64, f64), LinalgError> {
    let delta = tol.gap_threshold(decomp.max_abs());
    let mut h_minus = f64::NEG_INFINITY;
    let mut h_plus = f64::INFINITY;
    for &l in decomp.eigenvalues() {
        if l.abs() <= delta {
            return Err(LinalgError::DomainViolation {
                operation: "gap_around_zero",
                eigenvalue: l,
                tolerance: delta,
            });
        }
        if l < 0.0 {
            h_minus = h_minus.max(l);
        } else {
            h_plus = h_plus.min(l);
        }
    }
    Ok((h_minus, h_plus))
}
