//! Polar decomposition `D = U|D|` of an invertible square matrix and the
//! interpolation identities `D = |D*|^μ U |D|^{1−μ}`,
//! `D* = |D|^{1−μ} U* |D*|^μ`.

use serde::Serialize;

use crate::linalg::{
    apply_to_decomposition, sym_eig_with, GeneralMatrix, LinalgError, SpectralFn, SymmetricMatrix,
    Tolerances,
};
use crate::Result;

#[derive(Debug, Clone)]
pub struct PolarData {
    pub u: GeneralMatrix,
    pub abs_d: SymmetricMatrix,
    pub abs_d_star: SymmetricMatrix,
    /// `‖UᵀU − I‖_F`.
    pub orthogonality_residual: f64,
    /// `‖U|D| − D‖_F / ‖D‖`.
    pub factor_residual: f64,
    /// `‖Dᵀ − |D|Uᵀ‖_F / ‖D‖`.
    pub adjoint_residual: f64,
    /// `‖D‖`.
    pub norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interpolation {
    pub mu: f64,
    /// `‖|D*|^μ U |D|^{1−μ} − D‖_F / ‖D‖`.
    pub primal: f64,
    /// `‖|D|^{1−μ} Uᵀ |D*|^μ − Dᵀ‖_F / ‖D‖`.
    pub dual: f64,
}

pub fn polar_decompose(d: &GeneralMatrix) -> Result<PolarData> {
    polar_decompose_with(d, &Tolerances::default())
}

pub fn polar_decompose_with(d: &GeneralMatrix, tol: &Tolerances) -> Result<PolarData> {
    if !d.is_square() {
        return Err(LinalgError::NotSquare {
            rows: d.rows(),
            cols: d.cols(),
        }
        .into());
    }
    let gram = SymmetricMatrix::from_general(&d.transpose().matmul(d)?)?;
    let gram_eig = sym_eig_with(&gram, tol)?;
    let sigma_max = gram_eig.max().max(0.0).sqrt();
    let sigma_min = gram_eig.min().max(0.0).sqrt();
    let threshold = tol.gap_threshold(sigma_max);
    if sigma_min <= threshold {
        return Err(LinalgError::DomainViolation {
            operation: "polar_decompose",
            eigenvalue: sigma_min,
            tolerance: threshold,
        }
        .into());
    }
    let abs_d = apply_to_decomposition(&gram_eig, SpectralFn::Sqrt, tol)?;
    let abs_d_inv = apply_to_decomposition(&gram_eig, SpectralFn::InvSqrt, tol)?;
    let u = d.matmul(abs_d_inv.as_general())?;
    let co_gram = SymmetricMatrix::from_general(&d.matmul(&d.transpose())?)?;
    let abs_d_star = apply_to_decomposition(&sym_eig_with(&co_gram, tol)?, SpectralFn::Sqrt, tol)?;

    let norm = sigma_max;
    let orthogonality_residual = u.transpose().matmul(&u)?.distance_from_identity();
    let factor_residual = u.matmul(abs_d.as_general())?.sub(d)?.frobenius_norm() / norm;
    let adjoint_residual = d
        .transpose()
        .sub(&abs_d.matmul(&u.transpose())?)?
        .frobenius_norm()
        / norm;

    for (what, residual, limit) in [
        ("polar orthogonality", orthogonality_residual, 1e-10),
        ("polar factor", factor_residual, 1e-8),
        ("polar adjoint", adjoint_residual, 1e-8),
    ] {
        if residual > limit {
            return Err(LinalgError::InvariantViolated {
                what,
                residual,
                limit,
            }
            .into());
        }
    }

    Ok(PolarData {
        u,
        abs_d,
        abs_d_star,
        orthogonality_residual,
        factor_residual,
        adjoint_residual,
        norm,
    })
}

pub fn interpolation_identity(p: &PolarData, d: &GeneralMatrix, mu: f64) -> Result<Interpolation> {
    let tol = Tolerances::default();
    let star_mu = power(&p.abs_d_star, mu, &tol)?;
    let abs_rest = power(&p.abs_d, 1.0 - mu, &tol)?;
    let primal = star_mu
        .matmul(&p.u)?
        .matmul(abs_rest.as_general())?
        .sub(d)?
        .frobenius_norm()
        / p.norm;
    let dual = abs_rest
        .matmul(&p.u.transpose())?
        .matmul(star_mu.as_general())?
        .sub(&d.transpose())?
        .frobenius_norm()
        / p.norm;
    Ok(Interpolation { mu, primal, dual })
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_invertible, stream};

    fn close(m: &GeneralMatrix, want: &[f64]) -> bool {
        m.as_slice()
            .iter()
            .zip(want)
            .all(|(a, b)| (a - b).abs() < 1e-13)
    }

    #[test]
    fn scalar_polar() {
        let d = GeneralMatrix::from_rows(&[vec![3.0]]).unwrap();
        let p = polar_decompose(&d).unwrap();
        assert!(close(&p.u, &[1.0]));
        assert!(close(p.abs_d.as_general(), &[3.0]));
        assert!(close(p.abs_d_star.as_general(), &[3.0]));
    }

    #[test]
    fn rotation_polar_and_interpolation() {
        let d = GeneralMatrix::from_rows(&[vec![0.0, 2.0], vec![-2.0, 0.0]]).unwrap();
        let p = polar_decompose(&d).unwrap();
        assert!(close(p.abs_d.as_general(), &[2.0, 0.0, 0.0, 2.0]));
        assert!(close(p.abs_d_star.as_general(), &[2.0, 0.0, 0.0, 2.0]));
        assert!(close(&p.u, &[0.0, 1.0, -1.0, 0.0]));
        for mu in [0.0, 0.5, 1.0] {
            let r = interpolation_identity(&p, &d, mu).unwrap();
            assert!(r.primal <= 1e-12 && r.dual <= 1e-12, "{r:?}");
        }
    }

    #[test]
    fn random_invertible_polar() {
        let d = random_invertible(&mut stream(11, 0), 5, 0.3, 3.0);
        let p = polar_decompose(&d).unwrap();
        assert!(p.orthogonality_residual < 1e-9);
        assert!(p.factor_residual < 1e-9);
        assert!(p.adjoint_residual < 1e-9);
        for i in 0..=10 {
            let r = interpolation_identity(&p, &d, i as f64 / 10.0).unwrap();
            assert!(r.primal < 1e-9 && r.dual < 1e-9);
        }
    }

    #[test]
    fn singular_is_rejected() {
        let d = GeneralMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(
            polar_decompose(&d),
            Err(crate::Error::Linalg(LinalgError::DomainViolation { .. }))
        ));
    }
}
