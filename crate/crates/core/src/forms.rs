//! The form `b[x,y] = ⟨A^{1/2}x, H A^{1/2}y⟩`, its associated operator
//! `B = A^{1/2} H A^{1/2}`, and numeric checks of the representation
//! identities and the resolvent gap `(α h₋, α h₊)`.

use crate::linalg::{
    apply_to_decomposition, dot, sym_eig_with, GeneralMatrix, LinalgError, SpectralDecomposition,
    SpectralFn, SymmetricMatrix, Tolerances,
};
use crate::model::{check_hypothesis_with, HypothesisCert};
use crate::sampling::{stream, unit_vector};
use crate::{Error, Result};

/// Everything derived from one truncated pair `(A, H)`.
#[derive(Debug, Clone)]
pub struct FormContext {
    pub a: SymmetricMatrix,
    pub h: SymmetricMatrix,
    pub a_half: SymmetricMatrix,
    pub a_half_inv: SymmetricMatrix,
    pub b: SymmetricMatrix,
    pub cert: HypothesisCert,
    pub tol: Tolerances,
    /// `max |(A½HA½)_ij − (A½HA½)_ji|` before symmetrization.
    pub b_asymmetry: f64,
    /// `‖S·B − I‖_F` with `S = A^{-1/2} H^{-1} A^{-1/2}`.
    pub inversion_residual: f64,
    a_eig: SpectralDecomposition,
    h_eig: SpectralDecomposition,
    b_eig: SpectralDecomposition,
}

pub fn build_context(a: &SymmetricMatrix, h: &SymmetricMatrix) -> Result<FormContext> {
    build_context_with(a, h, &Tolerances::default())
}

pub fn build_context_with(
    a: &SymmetricMatrix,
    h: &SymmetricMatrix,
    tol: &Tolerances,
) -> Result<FormContext> {
    let cert = check_hypothesis_with(a, h, tol)?;
    let a_eig = sym_eig_with(a, tol)?;
    let h_eig = sym_eig_with(h, tol)?;
    let a_half = apply_to_decomposition(&a_eig, SpectralFn::Sqrt, tol)?;
    let a_half_inv = apply_to_decomposition(&a_eig, SpectralFn::InvSqrt, tol)?;

    let (b, b_asymmetry) = h.congruence(&a_half)?;
    let b_eig = sym_eig_with(&b, tol)?;
    let delta = tol.gap_threshold(b_eig.max_abs());
    if b_eig.min_abs() <= delta {
        let worst = b_eig
            .eigenvalues()
            .iter()
            .copied()
            .min_by(|x, y| x.abs().total_cmp(&y.abs()))
            .unwrap_or(0.0);
        return Err(LinalgError::DomainViolation {
            operation: "build_context",
            eigenvalue: worst,
            tolerance: delta,
        }
        .into());
    }

    let h_inv = apply_to_decomposition(&h_eig, SpectralFn::Inverse, tol)?;
    let (s, _) = h_inv.congruence(&a_half_inv)?;
    let inversion_residual = s.matmul(b.as_general())?.distance_from_identity();
    let cond_b = b_eig.max_abs() / b_eig.min_abs();
    let limit = 1e-8 * cond_b;
    if inversion_residual > limit {
        return Err(Error::InversionMismatch {
            residual: inversion_residual,
            limit,
        });
    }

    Ok(FormContext {
        a: a.clone(),
        h: h.clone(),
        a_half,
        a_half_inv,
        b,
        cert,
        tol: *tol,
        b_asymmetry,
        inversion_residual,
        a_eig,
        h_eig,
        b_eig,
    })
}

impl FormContext {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn a_eig(&self) -> &SpectralDecomposition {
        &self.a_eig
    }

    pub fn h_eig(&self) -> &SpectralDecomposition {
        &self.h_eig
    }

    pub fn b_eig(&self) -> &SpectralDecomposition {
        &self.b_eig
    }

    /// `f(B)` from the cached decomposition.
    pub fn b_function(&self, f: SpectralFn) -> Result<SymmetricMatrix> {
        Ok(apply_to_decomposition(&self.b_eig, f, &self.tol)?)
    }

    pub fn h_function(&self, f: SpectralFn) -> Result<SymmetricMatrix> {
        Ok(apply_to_decomposition(&self.h_eig, f, &self.tol)?)
    }

    pub fn a_function(&self, f: SpectralFn) -> Result<SymmetricMatrix> {
        Ok(apply_to_decomposition(&self.a_eig, f, &self.tol)?)
    }

    /// `S = A^{-1/2} H^{-1} A^{-1/2}`, the bounded inverse of `B`.
    pub fn s_operator(&self) -> Result<SymmetricMatrix> {
        let h_inv = self.h_function(SpectralFn::Inverse)?;
        Ok(h_inv.congruence(&self.a_half_inv)?.0)
    }

    /// Spectral norm of `B`.
    pub fn norm_b(&self) -> f64 {
        self.b_eig.max_abs()
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim(),
                actual: v.len(),
            }
            .into());
        }
        Ok(())
    }
}

/// `⟨A^{1/2}x, H A^{1/2}y⟩`.
pub fn form_value(ctx: &FormContext, x: &[f64], y: &[f64]) -> Result<f64> {
    ctx.check_len(x)?;
    ctx.check_len(y)?;
    let ax = ctx.a_half.matvec(x)?;
    let ay = ctx.a_half.matvec(y)?;
    Ok(ctx.h.bilinear(&ax, &ay)?)
}

fn relative_gap(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / (1.0 + rhs.abs())
}

/// Largest `|b[x,y] − ⟨x, By⟩| / (1 + |⟨x, By⟩|)` over seeded unit pairs.
pub fn first_rep_residual(ctx: &FormContext, samples: usize, seed: u64) -> Result<f64> {
    let n = ctx.dim();
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let mut rng = stream(seed, i as u64);
        let x = unit_vector(&mut rng, n);
        let y = unit_vector(&mut rng, n);
        let lhs = form_value(ctx, &x, &y)?;
        let rhs = ctx.b.bilinear(&x, &y)?;
        worst = worst.max(relative_gap(lhs, rhs));
    }
    Ok(worst)
}

/// Largest `|b[x,y] − ⟨|B|^{1/2}x, sign(B)|B|^{1/2}y⟩|` (relative) over
/// seeded unit pairs. Always tiny in finite dimension; a large value means
/// the spectral calculus is broken.
pub fn second_rep_residual(ctx: &FormContext, samples: usize, seed: u64) -> Result<f64> {
    let abs_half = ctx.b_function(SpectralFn::AbsPower(0.5))?;
    let sign = ctx.b_function(SpectralFn::Sign)?;
    let n = ctx.dim();
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let mut rng = stream(seed, i as u64);
        let x = unit_vector(&mut rng, n);
        let y = unit_vector(&mut rng, n);
        let lhs = form_value(ctx, &x, &y)?;
        let u = abs_half.matvec(&x)?;
        let v = abs_half.matvec(&y)?;
        let rhs = sign.bilinear(&u, &v)?;
        worst = worst.max(relative_gap(lhs, rhs));
    }
    Ok(worst)
}

/// Rebuilds `B` entrywise from form values on the standard basis and returns
/// `‖B_rec − B‖_F / ‖B‖`.
pub fn uniqueness_residual(ctx: &FormContext) -> Result<f64> {
    // b[e_i, e_j] = ⟨A½ e_i, H A½ e_j⟩ = (A½ᵀ (H A½))_ij
    let h_a = ctx.h.matmul(ctx.a_half.as_general())?;
    let rebuilt = ctx.a_half.as_general().transpose().matmul(&h_a)?;
    Ok(rebuilt.sub(ctx.b.as_general())?.frobenius_norm() / ctx.norm_b())
}

/// `‖A^{-1/2} B A^{-1/2} − H‖_F / ‖H‖`.
pub fn recover_h(ctx: &FormContext) -> Result<f64> {
    let (recovered, _) = ctx.b.congruence(&ctx.a_half_inv)?;
    Ok(recovered.sub(&ctx.h)?.frobenius_norm() / ctx.cert.norm_h)
}

/// `‖sign(B)|B| − B‖_F / ‖B‖`.
pub fn sign_abs_residual(ctx: &FormContext) -> Result<f64> {
    let sign = ctx.b_function(SpectralFn::Sign)?;
    let abs = ctx.b_function(SpectralFn::Abs)?;
    let product = sign.matmul(abs.as_general())?;
    Ok(product.sub(ctx.b.as_general())?.frobenius_norm() / ctx.norm_b())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapVerdict {
    /// `α h₋` (may be `-inf`).
    pub lower: f64,
    /// `α h₊` (may be `+inf`).
    pub upper: f64,
    pub margin: f64,
    /// Eigenvalues of `B` strictly inside `(lower + margin, upper − margin)`.
    pub violations: Vec<f64>,
}

impl GapVerdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// No eigenvalue of `B` may fall inside `(α h₋, α h₊)`.
pub fn resolvent_gap_check(ctx: &FormContext) -> GapVerdict {
    let alpha = ctx.cert.alpha;
    let lower = alpha * ctx.cert.h_minus;
    let upper = alpha * ctx.cert.h_plus;
    let margin = ctx.tol.gap_threshold(ctx.norm_b());
    let violations = ctx
        .b_eig
        .eigenvalues()
        .iter()
        .copied()
        .filter(|&l| l > lower + margin && l < upper - margin)
        .collect();
    GapVerdict {
        lower,
        upper,
        margin,
        violations,
    }
}

/// Evidence that `H_λ = H − λA^{-1}` stays boundedly invertible for `λ`
/// inside the gap, together with the spectral enclosure of `I − λS`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftCert {
    pub lambda: f64,
    pub min_abs_eig_shifted: f64,
    pub gap_threshold: f64,
    /// Extreme eigenvalues of `I − λS`.
    pub spectrum: (f64, f64),
    /// Enclosure derived from `1/(α h₋) ≤ S ≤ 1/(α h₊)`.
    pub bound: (f64, f64),
    pub holds: bool,
}

/// Checks the shifted form for a `λ` in the open interval `(α h₋, α h₊)`.
pub fn shifted_invertibility(ctx: &FormContext, lambda: f64) -> Result<ShiftCert> {
    let alpha = ctx.cert.alpha;
    let lower = alpha * ctx.cert.h_minus;
    let upper = alpha * ctx.cert.h_plus;
    if !(lambda > lower && lambda < upper) {
        return Err(LinalgError::DomainViolation {
            operation: "shifted_invertibility",
            eigenvalue: lambda,
            tolerance: 0.0,
        }
        .into());
    }

    let a_inv = ctx.a_function(SpectralFn::Inverse)?;
    let shifted = ctx.h.sub(&a_inv.scale(lambda))?;
    let shifted_eig = sym_eig_with(&shifted, &ctx.tol)?;
    let min_abs = shifted_eig.min_abs();
    let gap_threshold = ctx.tol.gap_threshold(shifted_eig.max_abs());

    let s = ctx.s_operator()?;
    let n = ctx.dim();
    let pencil = SymmetricMatrix::from_general(
        &GeneralMatrix::identity(n).sub(s.scale(lambda).as_general())?,
    )?;
    let pencil_eig = sym_eig_with(&pencil, &ctx.tol)?;
    let spectrum = (pencil_eig.min(), pencil_eig.max());

    // S ranges over [1/(α h₋), 1/(α h₊)]; an infinite endpoint contributes 0.
    let s_lo = 1.0 / lower;
    let s_hi = 1.0 / upper;
    let e1 = 1.0 - lambda * s_lo;
    let e2 = 1.0 - lambda * s_hi;
    let bound = (e1.min(e2), e1.max(e2));
    let slack = 1e-10 * bound.0.abs().max(bound.1.abs()).max(1.0);
    let holds = min_abs > gap_threshold
        && bound.0 > 0.0
        && spectrum.0 >= bound.0 - slack
        && spectrum.1 <= bound.1 + slack;

    Ok(ShiftCert {
        lambda,
        min_abs_eig_shifted: min_abs,
        gap_threshold,
        spectrum,
        bound,
        holds,
    })
}

/// `points` equally spaced values strictly inside `(α h₋, α h₊)`. Infinite
/// endpoints are replaced by `∓(|finite end| + ‖B‖)`.
pub fn lambda_grid(ctx: &FormContext, points: usize) -> Vec<f64> {
    let alpha = ctx.cert.alpha;
    let mut lower = alpha * ctx.cert.h_minus;
    let mut upper = alpha * ctx.cert.h_plus;
    let span = ctx.norm_b().max(1.0);
    if !lower.is_finite() {
        lower = -(upper.abs() + span);
    }
    if !upper.is_finite() {
        upper = lower.abs() + span;
    }
    (1..=points)
        .map(|i| lower + (upper - lower) * i as f64 / (points + 1) as f64)
        .collect()
}

/// Inner product helper shared by diagnostics.
pub(crate) fn quad(m: &SymmetricMatrix, x: &[f64]) -> Result<f64> {
    Ok(dot(x, &m.matvec(x)?))
}
