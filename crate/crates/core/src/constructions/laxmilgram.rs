//! Lax-Milgram extraction: a bounded coercive symmetric form `b` relative to
//! `a[x,y] = ⟨Ax, y⟩` is represented as `b[x,y] = a[x, My]` and as
//! `⟨A^{1/2}x, H A^{1/2}y⟩` with `‖H‖ ≤ β`, `‖H⁻¹‖ ≤ 1/α`.
//!
//! Coercivity is probed on sample vectors (the standard basis, then seeded
//! unit vectors), so acceptance here is a necessary condition only.

use serde::Serialize;

use crate::forms::quad;
use crate::linalg::{
    apply_to_decomposition, sym_eig_with, GeneralMatrix, SpectralFn, SymmetricMatrix, Tolerances,
};
use crate::sampling::{stream, unit_vector};
use crate::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_SEED: u64 = 0x1a4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaxMilgramCert {
    pub alpha: f64,
    pub beta: f64,
    pub samples: usize,
    /// Smallest `|xᵀbx| / xᵀAx` seen over the samples.
    pub min_coercivity_ratio: f64,
    pub norm_h: f64,
    pub norm_h_inv: f64,
    /// `‖A^{1/2} H A^{1/2} − b‖_F / ‖b‖`.
    pub roundtrip_residual: f64,
    pub h_asymmetry: f64,
    pub inverse_bound_holds: bool,
    pub norm_bound_holds: bool,
}

#[derive(Debug, Clone)]
pub struct LaxMilgram {
    /// `M = A⁻¹ b`, so that `b[x,y] = a[x, My]`.
    pub m: GeneralMatrix,
    pub h: SymmetricMatrix,
    pub cert: LaxMilgramCert,
}

pub fn laxmilgram_extract(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    alpha: f64,
    beta: f64,
) -> Result<LaxMilgram> {
    laxmilgram_extract_with(a, b, alpha, beta, DEFAULT_SAMPLES, DEFAULT_SEED)
}

pub fn laxmilgram_extract_with(
    a: &SymmetricMatrix,
    b: &SymmetricMatrix,
    alpha: f64,
    beta: f64,
    samples: usize,
    seed: u64,
) -> Result<LaxMilgram> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "a is {0}x{0} but b is {1}x{1}",
            a.dim(),
            b.dim()
        )));
    }
    if !(alpha > 0.0 && beta >= alpha) {
        return Err(Error::PreconditionViolation(format!(
            "need 0 < alpha <= beta, got alpha={alpha}, beta={beta}"
        )));
    }
    let tol = Tolerances::default();
    let a_eig = sym_eig_with(a, &tol)?;
    if a_eig.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            eigenvalue: a_eig.min(),
        });
    }

    let n = a.dim();
    let mut min_ratio = f64::INFINITY;
    for i in 0..samples {
        let x = if i < n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        } else {
            unit_vector(&mut stream(seed, i as u64), n)
        };
        let form = quad(b, &x)?.abs();
        let energy = quad(a, &x)?;
        let bound = alpha * energy;
        if form < bound * (1.0 - 1e-12) {
            return Err(Error::CoercivityViolation {
                sample: i,
                form,
                bound,
            });
        }
        min_ratio = min_ratio.min(form / energy);
    }

    let a_inv = apply_to_decomposition(&a_eig, SpectralFn::Inverse, &tol)?;
    let a_half = apply_to_decomposition(&a_eig, SpectralFn::Sqrt, &tol)?;
    let a_half_inv = apply_to_decomposition(&a_eig, SpectralFn::InvSqrt, &tol)?;
    let m = a_inv.matmul(b.as_general())?;
    let (h, h_asymmetry) = b.congruence(&a_half_inv)?;
    let (rebuilt, _) = h.congruence(&a_half)?;
    let roundtrip_residual =
        rebuilt.sub(b)?.frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE);

    let h_eig = sym_eig_with(&h, &tol)?;
    let norm_h = h_eig.max_abs();
    let norm_h_inv = 1.0 / h_eig.min_abs();

    Ok(LaxMilgram {
        m,
        h,
        cert: LaxMilgramCert {
            alpha,
            beta,
            samples,
            min_coercivity_ratio: min_ratio,
            norm_h,
            norm_h_inv,
            roundtrip_residual,
            h_asymmetry,
            inverse_bound_holds: norm_h_inv <= 1.0 / alpha + 1e-8,
            norm_bound_holds: norm_h <= beta + 1e-8,
        },
    })
}
