//! Minimal CSR sparse matrices over `f64`.
//!
//! Assembly is deterministic: triplets are sorted row-major with column
//! ties broken by insertion order before duplicates are summed, so the
//! same input always produces the same bit pattern. Exact zeros are
//! dropped (an underflowed `e^{-tau/eps^2}` block disappears from the
//! pattern, which is what the sparsity counters should see).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, TransportError};

#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Csr {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut trips: Vec<(usize, usize, f64)> =
            d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), d.len(), &mut trips)
    }

    /// Build from (row, col, value) triplets. Duplicates are summed,
    /// exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, trips: &mut Vec<(usize, usize, f64)>) -> Self {
        trips.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(trips.len());
        let mut values: Vec<f64> = Vec::with_capacity(trips.len());
        let mut it = trips.iter().peekable();
        while let Some(&(r, c, v)) = it.next() {
            debug_assert!(r < nrows && c < ncols, "triplet out of bounds");
            let mut acc = v;
            while let Some(&&(r2, c2, v2)) = it.peek() {
                if r2 == r && c2 == c {
                    acc += v2;
                    it.next();
                } else {
                    break;
                }
            }
            if acc != 0.0 {
                indices.push(c);
                values.push(acc);
                indptr[r + 1] += 1;
            }
        }
        for i in 0..nrows {
            indptr[i + 1] += indptr[i];
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut trips = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    trips.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), &mut trips)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn iter_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let (cols, vals) = (
                &self.indices[self.indptr[i]..self.indptr[i + 1]],
                &self.values[self.indptr[i]..self.indptr[i + 1]],
            );
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    /// y = A^T x without materializing the transpose.
    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        y.fill(0.0);
        for i in 0..self.nrows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for p in self.indptr[i]..self.indptr[i + 1] {
                y[self.indices[p]] += self.values[p] * xi;
            }
        }
    }

    pub fn transpose(&self) -> Csr {
        let mut trips: Vec<(usize, usize, f64)> =
            self.iter_triplets().map(|(i, j, v)| (j, i, v)).collect();
        Csr::from_triplets(self.ncols, self.nrows, &mut trips)
    }

    pub fn scaled(&self, alpha: f64) -> Csr {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= alpha;
        }
        out
    }

    /// self + alpha * other
    pub fn add_scaled(&self, other: &Csr, alpha: f64) -> Csr {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols), "add: shape mismatch");
        let mut trips: Vec<(usize, usize, f64)> = self.iter_triplets().collect();
        trips.extend(other.iter_triplets().map(|(i, j, v)| (i, j, alpha * v)));
        Csr::from_triplets(self.nrows, self.ncols, &mut trips)
    }

    /// Classical row-by-row sparse product (Gustavson), sorted output.
    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.ncols, other.nrows, "matmul: inner dimension mismatch");
        let n = other.ncols;
        let mut acc = vec![0.0f64; n];
        let mut marked: Vec<usize> = Vec::new();
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nrows {
            marked.clear();
            for p in self.indptr[i]..self.indptr[i + 1] {
                let k = self.indices[p];
                let v = self.values[p];
                for q in other.indptr[k]..other.indptr[k + 1] {
                    let j = other.indices[q];
                    if acc[j] == 0.0 {
                        marked.push(j);
                    }
                    acc[j] += v * other.values[q];
                }
            }
            marked.sort_unstable();
            for &j in &marked {
                if acc[j] != 0.0 {
                    indices.push(j);
                    values.push(acc[j]);
                }
                acc[j] = 0.0;
            }
            indptr[i + 1] = indices.len();
        }
        Csr { nrows: self.nrows, ncols: n, indptr, indices, values }
    }

    pub fn kron(&self, other: &Csr) -> Csr {
        let mut trips = Vec::with_capacity(self.nnz() * other.nnz());
        for (i, j, v) in self.iter_triplets() {
            for (p, q, w) in other.iter_triplets() {
                trips.push((i * other.nrows + p, j * other.ncols + q, v * w));
            }
        }
        Csr::from_triplets(self.nrows * other.nrows, self.ncols * other.ncols, &mut trips)
    }

    /// Assemble a block matrix; `None` stands for a zero block. Every row
    /// of blocks must agree on heights, every column on widths.
    pub fn from_blocks(blocks: &[Vec<Option<&Csr>>]) -> Result<Csr> {
        let brows = blocks.len();
        let bcols = blocks[0].len();
        let mut row_h = vec![0usize; brows];
        let mut col_w = vec![0usize; bcols];
        for (bi, row) in blocks.iter().enumerate() {
            if row.len() != bcols {
                return Err(TransportError::Dimension("ragged block row".into()));
            }
            for (bj, blk) in row.iter().enumerate() {
                if let Some(m) = blk {
                    if row_h[bi] == 0 {
                        row_h[bi] = m.nrows;
                    } else if row_h[bi] != m.nrows {
                        return Err(TransportError::Dimension(format!(
                            "block ({bi},{bj}) height {} != {}",
                            m.nrows, row_h[bi]
                        )));
                    }
                    if col_w[bj] == 0 {
                        col_w[bj] = m.ncols;
                    } else if col_w[bj] != m.ncols {
                        return Err(TransportError::Dimension(format!(
                            "block ({bi},{bj}) width {} != {}",
                            m.ncols, col_w[bj]
                        )));
                    }
                }
            }
        }
        if row_h.iter().any(|&h| h == 0) || col_w.iter().any(|&w| w == 0) {
            return Err(TransportError::Dimension(
                "block row/column with no sized block".into(),
            ));
        }
        let mut row_off = vec![0usize; brows];
        let mut col_off = vec![0usize; bcols];
        for i in 1..brows {
            row_off[i] = row_off[i - 1] + row_h[i - 1];
        }
        for j in 1..bcols {
            col_off[j] = col_off[j - 1] + col_w[j - 1];
        }
        let nrows = row_off[brows - 1] + row_h[brows - 1];
        let ncols = col_off[bcols - 1] + col_w[bcols - 1];
        let mut trips = Vec::new();
        for (bi, row) in blocks.iter().enumerate() {
            for (bj, blk) in row.iter().enumerate() {
                if let Some(m) = blk {
                    for (i, j, v) in m.iter_triplets() {
                        trips.push((row_off[bi] + i, col_off[bj] + j, v));
                    }
                }
            }
        }
        Ok(Csr::from_triplets(nrows, ncols, &mut trips))
    }

    /// Column vector (n x 1) from a dense slice.
    pub fn column(v: &[f64]) -> Csr {
        let mut trips: Vec<(usize, usize, f64)> = v
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != 0.0)
            .map(|(i, &x)| (i, 0, x))
            .collect();
        Csr::from_triplets(v.len(), 1, &mut trips)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.iter_triplets() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_row_nnz(&self) -> usize {
        (0..self.nrows).map(|i| self.indptr[i + 1] - self.indptr[i]).max().unwrap_or(0)
    }

    /// In-place row scaling: row i multiplied by d[i].
    pub fn scale_rows(&mut self, d: &[f64]) {
        assert_eq!(d.len(), self.nrows);
        for i in 0..self.nrows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                self.values[p] *= d[i];
            }
        }
    }

    /// In-place column scaling: column j multiplied by d[j].
    pub fn scale_cols(&mut self, d: &[f64]) {
        assert_eq!(d.len(), self.ncols);
        for p in 0..self.values.len() {
            self.values[p] *= d[self.indices[p]];
        }
    }

    /// Symmetric/skew decomposition: (A+A^T)/2 and (A-A^T)/2.
    pub fn sym_skew_split(&self) -> (Csr, Csr) {
        let t = self.transpose();
        (self.add_scaled(&t, 1.0).scaled(0.5), self.add_scaled(&t, -1.0).scaled(0.5))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// The per-Fourier-mode Hamiltonian family `H(mu) = mu*Hs + i*K`, with
/// `Hs` real symmetric and `K` real skew-symmetric, stored on one shared
/// CSR pattern with two value arrays so a mode matvec is a single pass.
#[derive(Debug, Clone)]
pub struct SymSkewPair {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    sym: Vec<f64>,
    skew: Vec<f64>,
}

impl SymSkewPair {
    pub fn new(hs: &Csr, k: &Csr) -> Result<Self> {
        if hs.nrows != hs.ncols || k.nrows != k.ncols || hs.nrows != k.nrows {
            return Err(TransportError::Dimension("SymSkewPair needs equal square inputs".into()));
        }
        let n = hs.nrows;
        // pattern union, preserving per-row sorted order
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::new();
        let mut sym = Vec::new();
        let mut skew = Vec::new();
        for i in 0..n {
            let (ca, va) = hs.row(i);
            let (cb, vb) = k.row(i);
            let (mut p, mut q) = (0usize, 0usize);
            while p < ca.len() || q < cb.len() {
                let ja = ca.get(p).copied().unwrap_or(usize::MAX);
                let jb = cb.get(q).copied().unwrap_or(usize::MAX);
                if ja < jb {
                    indices.push(ja);
                    sym.push(va[p]);
                    skew.push(0.0);
                    p += 1;
                } else if jb < ja {
                    indices.push(jb);
                    sym.push(0.0);
                    skew.push(vb[q]);
                    q += 1;
                } else {
                    indices.push(ja);
                    sym.push(va[p]);
                    skew.push(vb[q]);
                    p += 1;
                    q += 1;
                }
            }
            indptr[i + 1] = indices.len();
        }
        Ok(Self { dim: n, indptr, indices, sym, skew })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// y = (mu*Hs + i*K) x
    pub fn apply_mode(&self, mu: f64, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for i in 0..self.dim {
            let mut re = 0.0;
            let mut im = 0.0;
            for p in self.indptr[i]..self.indptr[i + 1] {
                let xr = x[self.indices[p]].re;
                let xi = x[self.indices[p]].im;
                let a = mu * self.sym[p];
                let s = self.skew[p];
                // (a + i s)(xr + i xi)
                re += a * xr - s * xi;
                im += a * xi + s * xr;
            }
            y[i] = Complex64::new(re, im);
        }
    }

    pub fn mode_dense(&self, mu: f64) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for p in self.indptr[i]..self.indptr[i + 1] {
                m[(i, self.indices[p])] = Complex64::new(mu * self.sym[p], self.skew[p]);
            }
        }
        m
    }

    pub fn mode_max_abs(&self, mu: f64) -> f64 {
        let mut m = 0.0f64;
        for p in 0..self.indices.len() {
            let v = (mu * self.sym[p]).hypot(self.skew[p]);
            if v > m {
                m = v;
            }
        }
        m
    }

    /// Structural nonzeros per row of `mu*Hs + i*K` maximized over rows,
    /// for a generic (nonzero) mu.
    pub fn mode_max_row_nnz(&self) -> usize {
        (0..self.dim).map(|i| self.indptr[i + 1] - self.indptr[i]).max().unwrap_or(0)
    }

    /// Hermiticity residual max_ij |H(mu) - H(mu)^dagger| for one mode.
    pub fn hermiticity_residual(&self, mu: f64) -> f64 {
        let m = self.mode_dense(mu);
        let mut r = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small() -> Csr {
        let mut t = vec![(0, 0, 1.0), (0, 2, 2.0), (1, 1, -3.0), (2, 0, 4.0), (2, 2, 5.0)];
        Csr::from_triplets(3, 3, &mut t)
    }

    #[test]
    fn triplets_sum_and_drop_zeros() {
        let mut t = vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 5.0), (1, 1, -5.0)];
        let a = Csr::from_triplets(2, 2, &mut t);
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn matvec_matches_dense() {
        let a = small();
        let x = vec![1.0, 2.0, 3.0];
        let y = a.apply(&x);
        let yd = a.to_dense() * nalgebra::DVector::from_vec(x);
        for i in 0..3 {
            assert_abs_diff_eq!(y[i], yd[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn matmul_matches_dense() {
        let a = small();
        let b = small().transpose();
        let c = a.matmul(&b);
        let cd = a.to_dense() * b.to_dense();
        assert_abs_diff_eq!((c.to_dense() - cd).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn kron_matches_dense() {
        let a = small();
        let b = Csr::diag(&[1.0, -2.0]);
        let k = a.kron(&b);
        let kd = a.to_dense().kronecker(&b.to_dense());
        assert_abs_diff_eq!((k.to_dense() - kd).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn transpose_matvec_agree() {
        let a = small();
        let x = vec![1.0, -1.0, 0.5];
        let mut y1 = vec![0.0; 3];
        a.matvec_transpose(&x, &mut y1);
        let y2 = a.transpose().apply(&x);
        assert_eq!(y1, y2);
    }

    #[test]
    fn block_assembly() {
        let i2 = Csr::identity(2);
        let z = Csr::zeros(2, 2);
        let m = Csr::from_blocks(&[
            vec![Some(&i2), Some(&z)],
            vec![None, Some(&i2.scaled(3.0))],
        ])
        .unwrap();
        assert_eq!(m.nrows(), 4);
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(3, 3), 3.0);
        assert_eq!(m.get(2, 0), 0.0);
    }

    #[test]
    fn sym_skew_recompose() {
        let a = small();
        let (s, k) = a.sym_skew_split();
        let back = s.add_scaled(&k, 1.0);
        assert_abs_diff_eq!((back.to_dense() - a.to_dense()).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((s.to_dense().transpose() - s.to_dense()).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((k.to_dense().transpose() + k.to_dense()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mode_family_matches_dense() {
        let a = small();
        let (s, k) = a.sym_skew_split();
        let fam = SymSkewPair::new(&s, &k).unwrap();
        let mu = 1.7;
        let x: Vec<Complex64> =
            vec![Complex64::new(1.0, 0.5), Complex64::new(-2.0, 1.0), Complex64::new(0.0, -1.0)];
        let mut y = vec![Complex64::new(0.0, 0.0); 3];
        fam.apply_mode(mu, &x, &mut y);
        let hd = fam.mode_dense(mu);
        let yd = hd * nalgebra::DVector::from_vec(x);
        for i in 0..3 {
            assert_abs_diff_eq!((y[i] - yd[i]).norm(), 0.0, epsilon = 1e-14);
        }
        assert!(fam.hermiticity_residual(mu) < 1e-15);
    }
}
