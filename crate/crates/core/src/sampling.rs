//! Deterministic random streams and random test objects.
//!
//! Every sampled quantity is drawn from a ChaCha stream selected by
//! `(seed, index)`, so parallel and sequential sampling agree bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{sym_eig, GeneralMatrix, SymmetricMatrix};

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Uniform point on the unit sphere in `R^n`.
pub fn unit_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vector(rng, n);
        let norm = crate::linalg::norm2(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> GeneralMatrix {
    let data = gaussian_vector(rng, rows * cols);
    GeneralMatrix::from_row_major(rows, cols, data).expect("sized")
}

/// Orthogonal matrix from modified Gram-Schmidt on a Gaussian matrix.
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> GeneralMatrix {
    loop {
        let g = gaussian_matrix(rng, n, n);
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| g.column(j)).collect();
        let mut ok = true;
        for j in 0..n {
            for i in 0..j {
                let proj = crate::linalg::dot(&cols[i], &cols[j]);
                let (head, tail) = cols.split_at_mut(j);
                for (x, y) in tail[0].iter_mut().zip(&head[i]) {
                    *x -= proj * y;
                }
            }
            let norm = crate::linalg::norm2(&cols[j]);
            if norm < 1e-10 {
                ok = false;
                break;
            }
            cols[j].iter_mut().for_each(|x| *x /= norm);
        }
        if ok {
            let mut q = GeneralMatrix::zeros(n, n);
            for (j, col) in cols.iter().enumerate() {
                for (i, &v) in col.iter().enumerate() {
                    q[(i, j)] = v;
                }
            }
            return q;
        }
    }
}

/// `Q diag(spectrum) Qᵀ` with a random orthogonal `Q`.
pub fn with_spectrum(rng: &mut impl Rng, spectrum: &[f64]) -> SymmetricMatrix {
    let n = spectrum.len();
    let q = random_orthogonal(rng, n);
    let d = GeneralMatrix::from_diagonal(spectrum);
    let m = q
        .matmul(&d)
        .and_then(|qd| qd.matmul(&q.transpose()))
        .expect("square");
    SymmetricMatrix::from_general(&m).expect("square")
}

/// Positive definite matrix with eigenvalues log-uniform in `[1, cond]`.
pub fn random_spd(rng: &mut impl Rng, n: usize, cond: f64) -> SymmetricMatrix {
    let spectrum: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => 1.0,
            1 => cond,
            _ => cond.powf(rng.random::<f64>()),
        })
        .collect();
    with_spectrum(rng, &spectrum)
}

/// Invertible symmetric matrix with `min_abs ≤ |λ| ≤ max_abs` and random
/// signs (at least one of each sign when `n ≥ 2`).
pub fn random_invertible_symmetric(
    rng: &mut impl Rng,
    n: usize,
    min_abs: f64,
    max_abs: f64,
) -> SymmetricMatrix {
    let spectrum: Vec<f64> = (0..n)
        .map(|i| {
            let mag = min_abs + (max_abs - min_abs) * rng.random::<f64>();
            let sign = match i {
                0 => 1.0,
                1 => -1.0,
                _ if rng.random::<bool>() => 1.0,
                _ => -1.0,
            };
            sign * mag
        })
        .collect();
    with_spectrum(rng, &spectrum)
}

/// Random square matrix with singular values in `[min_sv, max_sv]`.
pub fn random_invertible(rng: &mut impl Rng, n: usize, min_sv: f64, max_sv: f64) -> GeneralMatrix {
    let u = random_orthogonal(rng, n);
    let v = random_orthogonal(rng, n);
    let s: Vec<f64> = (0..n)
        .map(|_| min_sv + (max_sv - min_sv) * rng.random::<f64>())
        .collect();
    u.matmul(&GeneralMatrix::from_diagonal(&s))
        .and_then(|us| us.matmul(&v.transpose()))
        .expect("square")
}

/// Largest eigenvalue magnitude, for sanity checks on generated matrices.
pub fn spectral_radius(s: &SymmetricMatrix) -> f64 {
    sym_eig(s).map(|d| d.max_abs()).unwrap_or(f64::NAN)
}
