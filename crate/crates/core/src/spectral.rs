//! Spectral estimates: power iteration for 2-norms and Lanczos bounds for
//! extremal eigenvalues of Hermitian operators.
//!
//! Dense 2-norms go through SVD up to `DENSE_SVD_LIMIT`; above that a
//! seeded power iteration on A^T A is used (relative tolerance 1e-8,
//! 10_000 iteration cap).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense;
use crate::sparse::Csr;

pub const DENSE_SVD_LIMIT: usize = 1000;
const POWER_TOL: f64 = 1e-8;
const POWER_MAX_IT: usize = 10_000;

fn seeded_unit_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= nrm;
    }
    v
}

/// 2-norm of a sparse real matrix via power iteration on A^T A.
pub fn two_norm_power(a: &Csr, seed: u64) -> f64 {
    let mut x = seeded_unit_vector(a.ncols(), seed);
    let mut ax = vec![0.0; a.nrows()];
    let mut y = vec![0.0; a.ncols()];
    let mut sigma2 = 0.0f64;
    for _ in 0..POWER_MAX_IT {
        a.matvec(&x, &mut ax);
        a.matvec_transpose(&ax, &mut y);
        let new_sigma2 = y.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm == 0.0 {
            return 0.0;
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / nrm;
        }
        if (new_sigma2 - sigma2).abs() <= POWER_TOL * new_sigma2.abs() {
            sigma2 = new_sigma2;
            break;
        }
        sigma2 = new_sigma2;
    }
    sigma2.max(0.0).sqrt()
}

/// 2-norm of a sparse real matrix: dense SVD below `DENSE_SVD_LIMIT`,
/// power iteration otherwise.
pub fn two_norm_sparse(a: &Csr, seed: u64) -> f64 {
    if a.nrows().max(a.ncols()) <= DENSE_SVD_LIMIT {
        dense::two_norm(&a.to_dense())
    } else {
        two_norm_power(a, seed)
    }
}

/// Extremal eigenvalue estimates of a Hermitian operator given through a
/// matvec closure, by Lanczos with full reorthogonalization.
///
/// Returns (lambda_min, lambda_max) Ritz estimates. These are inner
/// approximations; callers that need an outer enclosure should widen by a
/// margin (the Chebyshev propagator does).
pub fn lanczos_extremal<F>(dim: usize, mut apply: F, iters: usize, seed: u64) -> (f64, f64)
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    let m = iters.min(dim).max(1);
    let v0 = seeded_unit_vector(dim, seed);
    let mut v: Vec<Complex64> = v0.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut alphas: Vec<f64> = Vec::with_capacity(m);
    let mut betas: Vec<f64> = Vec::with_capacity(m);
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    for j in 0..m {
        basis.push(v.clone());
        apply(&v, &mut w);
        let alpha: f64 = w.iter().zip(&v).map(|(wi, vi)| (wi * vi.conj()).re).sum();
        alphas.push(alpha);
        // subtract projections onto all previous basis vectors (full reorth)
        for b in &basis {
            let c: Complex64 = w.iter().zip(b).map(|(wi, bi)| wi * bi.conj()).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
        let beta = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if beta < 1e-14 || j + 1 == m {
            betas.push(beta);
            break;
        }
        betas.push(beta);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / beta;
        }
    }
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for j in 0..k {
        t[(j, j)] = alphas[j];
        if j + 1 < k {
            t[(j, j + 1)] = betas[j];
            t[(j + 1, j)] = betas[j];
        }
    }
    let (vals, _) = dense::symmetric_eigen(&t);
    let resid = betas.last().copied().unwrap_or(0.0);
    (vals[0] - resid, vals[k - 1] + resid)
}

/// Largest positive eigenvalue estimate of a Hermitian operator (zero if
/// the spectrum is non-positive).
pub fn lambda_plus_max<F>(dim: usize, apply: F, seed: u64) -> f64
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    let (_, hi) = lanczos_extremal(dim, apply, 60, seed);
    hi.max(0.0)
}
