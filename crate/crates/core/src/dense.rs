//! Dense kernels built on nalgebra: matrix exponential (scaling and
//! squaring with Padé 13), 2-norms, and eigen wrappers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, TransportError};

/// e^A for a real square matrix, Higham's scaling-and-squaring with the
/// degree-13 Padé approximant.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), a.ncols(), "expm needs a square matrix");
    let n = a.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    const THETA_13: f64 = 5.371920351148152;
    let norm = one_norm(a);
    let mut s = 0u32;
    let mut a_scaled = a.clone();
    if norm > THETA_13 {
        s = (norm / THETA_13).log2().ceil() as u32;
        a_scaled /= 2f64.powi(s as i32);
    }
    let b: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let id = DMatrix::identity(n, n);
    let a2 = &a_scaled * &a_scaled;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (b[13] * &a6 + b[11] * &a4 + b[9] * &a2)
        + b[7] * &a6
        + b[5] * &a4
        + b[3] * &a2
        + b[1] * &id;
    let u = &a_scaled * u_inner;
    let v = &a6 * (b[12] * &a6 + b[10] * &a4 + b[8] * &a2)
        + b[6] * &a6
        + b[4] * &a4
        + b[2] * &a2
        + b[0] * &id;
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .clone()
        .lu()
        .solve(&p)
        .unwrap_or_else(|| q.full_piv_lu().solve(&p).expect("expm: singular Padé denominator"));
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest singular value of a real matrix by full SVD.
pub fn two_norm(a: &DMatrix<f64>) -> f64 {
    a.clone().singular_values().iter().fold(0.0f64, |m, &s| m.max(s))
}

/// Eigendecomposition of a complex Hermitian matrix.
/// Returns (eigenvalues ascending, eigenvectors as columns).
pub fn hermitian_eigen(h: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let se = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let n = h.nrows();
    let mut vals = Vec::with_capacity(n);
    let mut vecs = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vals.push(se.eigenvalues[i]);
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Eigendecomposition of a real symmetric matrix (ascending eigenvalues).
pub fn symmetric_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let se = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let n = a.nrows();
    let mut vals = Vec::with_capacity(n);
    let mut vecs = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vals.push(se.eigenvalues[i]);
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Spectrum of a real antisymmetric matrix: purely imaginary, returned as
/// the imaginary parts in ascending order. Uses the Hermitian matrix i*K.
pub fn antisymmetric_spectrum_imag(k: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = k.nrows();
    let skew_residual = (k + k.transpose()).norm();
    if skew_residual > 1e-12 * (1.0 + k.norm()) {
        return Err(TransportError::InvalidArgument("matrix is not antisymmetric".into()));
    }
    let ik = DMatrix::from_fn(n, n, |i, j| Complex64::new(0.0, k[(i, j)]));
    let (vals, _) = hermitian_eigen(&ik);
    // i*K v = lam v  =>  K v = -i lam v, so Im(spec K) = -lam
    let mut ims: Vec<f64> = vals.iter().map(|&l| -l).collect();
    ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ims)
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn expm_zero_is_identity() {
        let e = expm(&DMatrix::zeros(4, 4));
        assert_abs_diff_eq!((e - DMatrix::<f64>::identity(4, 4)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn expm_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0, 0.5]));
        let e = expm(&a);
        for (i, lam) in [1.0f64, -2.0, 0.5].iter().enumerate() {
            assert_abs_diff_eq!(e[(i, i)], lam.exp(), epsilon = 1e-13);
        }
    }

    #[test]
    fn expm_rotation_block() {
        // exp of [[0, -t],[t, 0]] is a rotation by t
        let t = 1.3;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let e = expm(&a);
        assert_abs_diff_eq!(e[(0, 0)], t.cos(), epsilon = 1e-13);
        assert_abs_diff_eq!(e[(1, 0)], t.sin(), epsilon = 1e-13);
    }

    #[test]
    fn expm_group_property() {
        let a = DMatrix::from_row_slice(3, 3, &[0.1, 2.0, -1.0, 0.3, -0.5, 0.7, -2.0, 0.2, 0.4]);
        let e1 = expm(&a);
        let e2 = expm(&(2.0 * &a));
        assert_abs_diff_eq!(((&e1 * &e1) - e2).norm(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn expm_large_norm_scaling() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -40.0, 40.0, 0.0]);
        let e = expm(&a);
        assert_abs_diff_eq!(e[(0, 0)], 40.0f64.cos(), epsilon = 1e-9);
    }

    #[test]
    fn two_norm_of_diag() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -7.0, 1.0]));
        assert_abs_diff_eq!(two_norm(&a), 7.0, epsilon = 1e-12);
    }

    #[test]
    fn antisymmetric_spectrum() {
        let k = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let ims = antisymmetric_spectrum_imag(&k).unwrap();
        assert_abs_diff_eq!(ims[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ims[1], 1.0, epsilon = 1e-12);
    }
}
