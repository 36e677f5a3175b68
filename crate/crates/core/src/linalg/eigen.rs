//! Cyclic Jacobi eigensolver for dense symmetric matrices.
//!
//! Each sweep visits every off-diagonal pair `(p, q)` once and annihilates
//! `a_pq` with a plane rotation, unless the entry is already negligible
//! relative to `sqrt(|a_pp a_qq|)`. The iteration stops after the first sweep
//! that performs no rotation. Rotations never couple indices from different
//! diagonal blocks, so block-diagonal input stays block-diagonal and its
//! eigenvectors come out block-sparse.

use super::matrix::{GeneralMatrix, SymmetricMatrix};
use super::{LinalgError, Tolerances};

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: GeneralMatrix,
    sweeps: usize,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &GeneralMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of Jacobi sweeps it took to converge.
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Smallest eigenvalue in absolute value.
    pub fn min_abs(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|v| v.abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest eigenvalue in absolute value, i.e. the spectral norm.
    pub fn max_abs(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// `Q f(Λ) Qᵀ`, symmetrized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymmetricMatrix {
        let n = self.dim();
        let q = &self.eigenvectors;
        let values: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = GeneralMatrix::zeros(n, n);
        // Q is block-sparse for block-diagonal input; iterate over its nonzeros.
        for k in 0..n {
            let fk = values[k];
            if fk == 0.0 {
                continue;
            }
            let support: Vec<(usize, f64)> = (0..n)
                .filter_map(|i| {
                    let v = q[(i, k)];
                    (v != 0.0).then_some((i, v))
                })
                .collect();
            for &(i, qi) in &support {
                let scaled = fk * qi;
                for &(j, qj) in &support {
                    out[(i, j)] += scaled * qj;
                }
            }
        }
        SymmetricMatrix::from_general(&out).expect("square by construction")
    }

    /// `‖QᵀQ − I‖_F`.
    pub fn orthogonality_residual(&self) -> f64 {
        let q = &self.eigenvectors;
        q.transpose()
            .matmul(q)
            .expect("square")
            .distance_from_identity()
    }

    /// `‖QΛQᵀ − S‖_F / ‖S‖_2`.
    pub fn reconstruction_residual(&self, s: &SymmetricMatrix) -> f64 {
        let rebuilt = self.map(|l| l);
        let diff = rebuilt.sub(s).expect("same shape").frobenius_norm();
        let scale = self.max_abs();
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }

    /// Checks both invariants against the configured tolerances.
    pub fn verify(&self, s: &SymmetricMatrix, tol: &Tolerances) -> Result<(), LinalgError> {
        let ortho = self.orthogonality_residual();
        let limit = tol.ortho * self.dim() as f64;
        if ortho > limit {
            return Err(LinalgError::InvariantViolated {
                what: "orthogonality",
                residual: ortho,
                limit,
            });
        }
        let recon = self.reconstruction_residual(s);
        if recon > tol.recon {
            return Err(LinalgError::InvariantViolated {
                what: "reconstruction",
                residual: recon,
                limit: tol.recon,
            });
        }
        Ok(())
    }
}

/// Eigendecomposition with the default sweep budget.
pub fn sym_eig(s: &SymmetricMatrix) -> Result<SpectralDecomposition, LinalgError> {
    sym_eig_with(s, &Tolerances::default())
}

pub fn sym_eig_with(
    s: &SymmetricMatrix,
    tol: &Tolerances,
) -> Result<SpectralDecomposition, LinalgError> {
    let n = s.dim();
    let mut a = s.as_general().clone();
    let mut v = GeneralMatrix::identity(n);

    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                if apq.abs() <= f64::EPSILON * 0.5 * (app.abs() * aqq.abs()).sqrt() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotate(&mut a, &mut v, p, q);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps >= tol.max_sweeps {
            let off = off_diagonal_norm(&a);
            if off > 0.0 {
                return Err(LinalgError::NonConvergence {
                    sweeps,
                    off_diagonal: off,
                });
            }
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = GeneralMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors[(row, col)] = v[(row, src)];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

fn rotate(a: &mut GeneralMatrix, v: &mut GeneralMatrix, p: usize, q: usize) {
    let n = a.rows();
    let apq = a[(p, q)];
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        if arp == 0.0 && arq == 0.0 {
            continue;
        }
        let new_p = c * arp - s * arq;
        let new_q = s * arp + c * arq;
        a[(r, p)] = new_p;
        a[(p, r)] = new_p;
        a[(r, q)] = new_q;
        a[(q, r)] = new_q;
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        if vrp == 0.0 && vrq == 0.0 {
            continue;
        }
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}

fn off_diagonal_norm(a: &GeneralMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)] * a[(i, j)];
            }
        }
    }
    acc.sqrt()
}
