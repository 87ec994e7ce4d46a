//! Evolves d psi/dt = -i H psi for Hermitian H, the computational core
//! standing in for the quantum processor.
//!
//! Four propagators are available: exact diagonalization (small dense
//! systems), a Chebyshev polynomial expansion of e^{-iHt} (the default
//! workhorse for the large sparse mode blocks), a Lanczos Krylov
//! propagator with fixed subspace dimension 30 and adaptive substeps, and
//! an adaptive Dormand-Prince integrator kept as a cross-check path. All
//! of them meet the unitarity contract | ||psi(t)|| - ||psi0|| | <=
//! 1e-10 (1 + t).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense;
use crate::error::{Result, TransportError};
use crate::sparse::SymSkewPair;
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Exact diagonalization below `max_dim_exact`, Chebyshev above.
    Auto,
    ExactDiag,
    Krylov,
    Chebyshev,
    RkAdaptive,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub method: Method,
    /// 2-norm error target against the exact flow.
    pub tol: f64,
    /// Dimension cutoff for the exact-diagonalization path.
    pub max_dim_exact: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { method: Method::Auto, tol: 1e-10, max_dim_exact: 512 }
    }
}

impl EvolutionConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol <= 1e-2) {
            return Err(TransportError::InvalidArgument(format!(
                "evolution tol {} outside (0, 1e-2]",
                self.tol
            )));
        }
        if self.max_dim_exact < 2 {
            return Err(TransportError::InvalidArgument("max_dim_exact must be >= 2".into()));
        }
        Ok(())
    }
}

/// A Hermitian operator handed to the propagators: either an explicit
/// dense matrix or one Fourier-mode block mu*Hs + i*K of a
/// Schrödingerized family.
#[derive(Clone)]
pub enum HermitianOp<'a> {
    Dense(&'a DMatrix<Complex64>),
    Mode {
        family: &'a SymSkewPair,
        mu: f64,
        /// Optional spectral enclosure (lo, hi) of the mode; estimated
        /// on demand when absent.
        interval: Option<(f64, f64)>,
    },
}

impl HermitianOp<'_> {
    pub fn dim(&self) -> usize {
        match self {
            HermitianOp::Dense(m) => m.nrows(),
            HermitianOp::Mode { family, .. } => family.dim(),
        }
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        match self {
            HermitianOp::Dense(m) => {
                let xv = DVector::from_column_slice(x);
                let yv = *m * xv;
                y.copy_from_slice(yv.as_slice());
            }
            HermitianOp::Mode { family, mu, .. } => family.apply_mode(*mu, x, y),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        match self {
            HermitianOp::Dense(m) => (*m).clone(),
            HermitianOp::Mode { family, mu, .. } => family.mode_dense(*mu),
        }
    }

    pub fn hermiticity_residual(&self) -> f64 {
        match self {
            HermitianOp::Dense(m) => {
                let mut r = 0.0f64;
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
                    }
                }
                r
            }
            HermitianOp::Mode { family, mu, .. } => family.hermiticity_residual(*mu),
        }
    }

    fn spectral_interval(&self) -> (f64, f64) {
        match self {
            HermitianOp::Mode { interval: Some(iv), .. } => *iv,
            _ => {
                let dim = self.dim();
                let (lo, hi) =
                    spectral::lanczos_extremal(dim, |x, y| self.apply(x, y), 60.min(dim), 0x5eed);
                widen_interval(lo, hi)
            }
        }
    }
}

pub fn widen_interval(lo: f64, hi: f64) -> (f64, f64) {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let margin = 0.05 * half + 0.1;
    (mid - half - margin, mid + half + margin)
}

fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// psi(t) = e^{-iHt} psi0 with the configured method, enforcing the
/// Hermiticity and norm-conservation contracts.
pub fn evolve(
    h: &HermitianOp,
    psi0: &[Complex64],
    t: f64,
    cfg: &EvolutionConfig,
) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    if t < 0.0 {
        return Err(TransportError::InvalidArgument("evolution time must be >= 0".into()));
    }
    if psi0.len() != h.dim() {
        return Err(TransportError::Dimension(format!(
            "state length {} vs operator dimension {}",
            psi0.len(),
            h.dim()
        )));
    }
    if let HermitianOp::Dense(m) = h {
        let scale = 1.0 + m.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        if h.hermiticity_residual() > 1e-12 * scale {
            return Err(TransportError::Numerical("operator is not Hermitian".into()));
        }
    }
    if t == 0.0 {
        return Ok(psi0.to_vec());
    }
    let method = match cfg.method {
        Method::Auto => {
            if h.dim() <= cfg.max_dim_exact {
                Method::ExactDiag
            } else {
                Method::Chebyshev
            }
        }
        m => m,
    };
    let psi = match method {
        Method::ExactDiag => evolve_exact(h, psi0, t),
        Method::Chebyshev => evolve_chebyshev(h, psi0, t, cfg.tol),
        Method::Krylov => evolve_krylov(h, psi0, t, cfg.tol),
        Method::RkAdaptive => evolve_rk(h, psi0, t, cfg.tol),
        Method::Auto => unreachable!(),
    };
    let drift = (norm2(&psi) - norm2(psi0)).abs();
    if drift > 1e-10 * (1.0 + t) * (1.0 + norm2(psi0)) {
        return Err(TransportError::Numerical(format!(
            "norm conservation violated: drift {drift:.3e} at t = {t}"
        )));
    }
    Ok(psi)
}

fn evolve_exact(h: &HermitianOp, psi0: &[Complex64], t: f64) -> Vec<Complex64> {
    let hd = h.to_dense();
    let (vals, vecs) = dense::hermitian_eigen(&hd);
    let psi = DVector::from_column_slice(psi0);
    let coeffs = vecs.adjoint() * psi;
    let mut out = DVector::from_element(h.dim(), Complex64::new(0.0, 0.0));
    for (i, &lam) in vals.iter().enumerate() {
        let phase = Complex64::new(0.0, -lam * t).exp();
        out += vecs.column(i) * (coeffs[i] * phase);
    }
    out.as_slice().to_vec()
}

/// Bessel functions J_0..J_kmax(x) by Miller's backward recurrence.
fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    if x == 0.0 {
        let mut j = vec![0.0; kmax + 1];
        j[0] = 1.0;
        return j;
    }
    let start = kmax + 20 + (2.0 * (kmax as f64).sqrt()) as usize;
    let mut jp = 0.0f64;
    let mut jc = 1e-300f64;
    let mut out = vec![0.0; kmax + 1];
    let mut norm = 0.0f64;
    for k in (0..=start).rev() {
        let jm = 2.0 * (k as f64 + 1.0) / x * jc - jp;
        jp = jc;
        jc = jm;
        if jc.abs() > 1e250 {
            jc *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            for v in &mut out {
                *v *= 1e-250;
            }
        }
        if k <= kmax {
            out[k] = jc;
        }
        if k > 0 && k % 2 == 0 {
            norm += 2.0 * jc;
        }
    }
    norm += jc; // J_0 term
    for v in &mut out {
        *v /= norm;
    }
    out
}

fn evolve_chebyshev(h: &HermitianOp, psi0: &[Complex64], t: f64, tol: f64) -> Vec<Complex64> {
    let (lo, hi) = h.spectral_interval();
    let c = 0.5 * (hi + lo);
    let r = (0.5 * (hi - lo)).max(1e-12);
    let n = h.dim();
    let z = r * t;
    let kmax = (z + 8.0 * z.cbrt() + 40.0).ceil() as usize;
    let bessel = bessel_j_sequence(z, kmax);
    let tail_tol = (tol / (kmax as f64 + 1.0)).max(1e-16);

    // phi_k recurrence on Hhat = (H - cI)/r, accumulating
    // e^{-ict} sum_k (2 - delta_k0)(-i)^k J_k(z) T_k(Hhat) psi0
    let mut phi_prev: Vec<Complex64> = psi0.to_vec();
    let mut phi = vec![Complex64::new(0.0, 0.0); n];
    let mut acc: Vec<Complex64> = psi0.iter().map(|&v| v * bessel[0]).collect();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    h.apply(&phi_prev, &mut w);
    for i in 0..n {
        phi[i] = (w[i] - c * phi_prev[i]) / r;
    }
    let mut quiet = 0usize;
    for k in 1..=kmax {
        let coeff = 2.0 * bessel[k];
        let ik = match k % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
        let a = ik * coeff;
        for i in 0..n {
            acc[i] += a * phi[i];
        }
        if k as f64 >= z && bessel[k].abs() < tail_tol {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        if k < kmax {
            // phi_{k+1} = 2 Hhat phi_k - phi_{k-1}
            h.apply(&phi, &mut w);
            for i in 0..n {
                let next = (w[i] - c * phi[i]) * (2.0 / r) - phi_prev[i];
                phi_prev[i] = phi[i];
                phi[i] = next;
            }
        }
    }
    let global_phase = Complex64::new(0.0, -c * t).exp();
    for v in &mut acc {
        *v *= global_phase;
    }
    acc
}

const KRYLOV_DIM: usize = 30;

fn evolve_krylov(h: &HermitianOp, psi0: &[Complex64], t: f64, tol: f64) -> Vec<Complex64> {
    let n = h.dim();
    let mut psi = psi0.to_vec();
    let mut remaining = t;
    let mut dt = t;
    let step_tol = |dt: f64| tol * (dt / t).max(1e-3);
    while remaining > 1e-14 * t {
        dt = dt.min(remaining);
        let beta = norm2(&psi);
        if beta == 0.0 {
            break;
        }
        // Lanczos basis from psi (full reorthogonalization)
        let m = KRYLOV_DIM.min(n);
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut alphas = Vec::with_capacity(m);
        let mut betas = Vec::with_capacity(m);
        let mut v: Vec<Complex64> = psi.iter().map(|&x| x / beta).collect();
        let mut w = vec![Complex64::new(0.0, 0.0); n];
        let mut breakdown = false;
        for _ in 0..m {
            basis.push(v.clone());
            h.apply(&v, &mut w);
            let alpha: f64 = w.iter().zip(&v).map(|(wi, vi)| (wi * vi.conj()).re).sum();
            alphas.push(alpha);
            for b in &basis {
                let c: Complex64 = w.iter().zip(b).map(|(wi, bi)| wi * bi.conj()).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
            let b = norm2(&w);
            betas.push(b);
            if b < 1e-13 {
                breakdown = true;
                break;
            }
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / b;
            }
        }
        let k = alphas.len();
        let mut tmat = DMatrix::zeros(k, k);
        for j in 0..k {
            tmat[(j, j)] = alphas[j];
            if j + 1 < k {
                tmat[(j, j + 1)] = betas[j];
                tmat[(j + 1, j)] = betas[j];
            }
        }
        let (tvals, tvecs) = dense::symmetric_eigen(&tmat);
        let small_exp = |dt: f64| -> Vec<Complex64> {
            // e^{-i T dt} e_1 in the Ritz basis
            let mut out = vec![Complex64::new(0.0, 0.0); k];
            for j in 0..k {
                let phase = Complex64::new(0.0, -tvals[j] * dt).exp();
                let cj = tvecs[(0, j)];
                for (i, o) in out.iter_mut().enumerate() {
                    *o += phase * (tvecs[(i, j)] * cj);
                }
            }
            out
        };
        let mut y = small_exp(dt);
        if !breakdown {
            let b_last = betas[k - 1];
            let mut tries = 0;
            while b_last * y[k - 1].norm() > step_tol(dt) && dt > 1e-12 * t && tries < 60 {
                dt *= 0.5;
                y = small_exp(dt);
                tries += 1;
            }
        }
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, b) in basis.iter().enumerate() {
                acc += y[j] * b[i];
            }
            psi[i] = acc * beta;
        }
        remaining -= dt;
        dt *= 1.5;
    }
    psi
}

fn evolve_rk(h: &HermitianOp, psi0: &[Complex64], t: f64, tol: f64) -> Vec<Complex64> {
    // Dormand-Prince 5(4) on psi' = -i H psi
    let n = h.dim();
    let rhs = |x: &[Complex64], out: &mut [Complex64]| {
        h.apply(x, out);
        for v in out.iter_mut() {
            *v *= Complex64::new(0.0, -1.0);
        }
    };
    let local_tol = (tol.min(1e-10) / (1.0 + t) * 0.1).max(1e-14);
    let mut psi = psi0.to_vec();
    let mut time = 0.0f64;
    let mut k1 = vec![Complex64::new(0.0, 0.0); n];
    rhs(&psi, &mut k1);
    let nrm_rhs = norm2(&k1).max(1e-30);
    let mut dt = (0.1 / nrm_rhs).min(t);
    let a: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    let b5 = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    let b4 = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut ks: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    while time < t {
        dt = dt.min(t - time);
        rhs(&psi, &mut ks[0]);
        for s in 0..6 {
            let mut stage = psi.clone();
            for (j, kj) in ks.iter().enumerate().take(s + 1) {
                let c = a[s][j] * dt;
                if c != 0.0 {
                    for i in 0..n {
                        stage[i] += kj[i] * c;
                    }
                }
            }
            let mut out = std::mem::take(&mut ks[s + 1]);
            rhs(&stage, &mut out);
            ks[s + 1] = out;
        }
        let mut err = 0.0f64;
        let mut next = psi.clone();
        for i in 0..n {
            let mut y5 = Complex64::new(0.0, 0.0);
            let mut y4 = Complex64::new(0.0, 0.0);
            for s in 0..7 {
                y5 += ks[s][i] * b5[s];
                y4 += ks[s][i] * b4[s];
            }
            next[i] += y5 * dt;
            err += ((y5 - y4) * dt).norm_sqr();
        }
        let err = err.sqrt() / (1.0 + norm2(&psi));
        if err <= local_tol || dt <= 1e-13 * t {
            psi = next;
            time += dt;
        }
        let factor = if err > 0.0 { 0.9 * (local_tol / err).powf(0.2) } else { 2.0 };
        dt *= factor.clamp(0.2, 2.5);
    }
    psi
}

/// Evolve all Fourier-mode blocks of a Schrödingerized family to time t.
///
/// `psi0_modes` is mode-major, length N_p * n. When the mode stack has
/// the conjugate symmetry of a real p-space state, only the mu >= 0
/// half is propagated and the rest mirrored via
/// psi_{-mu}(t) = conj(psi_mu(t)), which is exact.
pub fn evolve_all_modes(
    family: &SymSkewPair,
    mus: &[f64],
    h1_interval: (f64, f64),
    skew_radius: f64,
    psi0_modes: &[Complex64],
    t: f64,
    cfg: &EvolutionConfig,
) -> Result<Vec<Complex64>> {
    let n = family.dim();
    let n_p = mus.len();
    if psi0_modes.len() != n * n_p {
        return Err(TransportError::Dimension("mode stack length mismatch".into()));
    }
    let mirror = has_conjugate_symmetry(psi0_modes, n_p, n);
    let (l1, u1) = h1_interval;
    let mode_interval = |mu: f64| {
        let (a, b) = if mu >= 0.0 { (mu * l1, mu * u1) } else { (mu * u1, mu * l1) };
        widen_interval(a - skew_radius, b + skew_radius)
    };
    let evolve_one = |k: usize| -> Result<Vec<Complex64>> {
        let op = HermitianOp::Mode { family, mu: mus[k], interval: Some(mode_interval(mus[k])) };
        evolve(&op, &psi0_modes[k * n..(k + 1) * n], t, cfg)
    };
    let mut out = vec![Complex64::new(0.0, 0.0); n * n_p];
    if mirror {
        // evolve k = 0 (unpaired most-negative mode) and the mu >= 0 half
        let half: Vec<usize> = std::iter::once(0).chain(n_p / 2..n_p).collect();
        let results: Vec<(usize, Result<Vec<Complex64>>)> =
            half.par_iter().map(|&k| (k, evolve_one(k))).collect();
        for (k, res) in results {
            let psi = res?;
            if k > n_p / 2 {
                let km = n_p - k;
                for i in 0..n {
                    out[km * n + i] = psi[i].conj();
                }
            }
            out[k * n..(k + 1) * n].copy_from_slice(&psi);
        }
    } else {
        let results: Vec<Result<Vec<Complex64>>> =
            (0..n_p).into_par_iter().map(evolve_one).collect();
        for (k, res) in results.into_iter().enumerate() {
            out[k * n..(k + 1) * n].copy_from_slice(&res?);
        }
    }
    Ok(out)
}

fn has_conjugate_symmetry(modes: &[Complex64], n_p: usize, n: usize) -> bool {
    let scale = modes.iter().map(|v| v.norm()).fold(0.0f64, f64::max).max(1e-300);
    for k in 1..n_p {
        let km = n_p - k;
        if km <= k {
            break;
        }
        for i in 0..n {
            if (modes[k * n + i] - modes[km * n + i].conj()).norm() > 1e-13 * scale {
                return false;
            }
        }
    }
    // k = 0 and the mu = 0 block must be self-conjugate (real)
    for &k in &[0usize, n_p / 2] {
        if k >= n_p {
            continue;
        }
        for i in 0..n {
            if modes[k * n + i].im.abs() > 1e-13 * scale {
                return false;
            }
        }
    }
    true
}

/// Hamiltonian-simulation cost counters: sparsity (max nonzeros per
/// row), max entry modulus, dimension, and qubit count. The chi factor
/// sparsity * max_abs * t is assembled by the caller.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ComplexityCounters {
    pub sparsity: usize,
    pub max_abs: f64,
    pub dim: usize,
    pub qubits: u32,
}

impl ComplexityCounters {
    pub fn chi(&self, t: f64) -> f64 {
        self.sparsity as f64 * self.max_abs * t
    }

    pub fn of_dense(h: &DMatrix<Complex64>) -> Self {
        let mut sparsity = 0usize;
        let mut max_abs = 0.0f64;
        for i in 0..h.nrows() {
            let nnz = (0..h.ncols()).filter(|&j| h[(i, j)].norm() > 0.0).count();
            sparsity = sparsity.max(nnz);
            for j in 0..h.ncols() {
                max_abs = max_abs.max(h[(i, j)].norm());
            }
        }
        Self::finish(sparsity, max_abs, h.nrows())
    }

    /// Counters for the block-diagonal H_total = D_mu (x) A1 - I (x) A2
    /// without materializing it.
    pub fn of_mode_family(family: &SymSkewPair, mus: &[f64]) -> Self {
        let sparsity = family.mode_max_row_nnz();
        let mut max_abs = 0.0f64;
        for &mu in mus {
            // per-entry modulus is monotone in |mu|; scanning every mode
            // is cheap and exact
            max_abs = max_abs.max(family.mode_max_abs(mu));
        }
        Self::finish(sparsity, max_abs, family.dim() * mus.len())
    }

    fn finish(sparsity: usize, max_abs: f64, dim: usize) -> Self {
        let qubits = (dim as f64).log2().ceil() as u32;
        Self { sparsity, max_abs, dim, qubits }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Csr;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            for j in 0..=i {
                let re = rng.random_range(-1.0..1.0);
                let im = if i == j { 0.0 } else { rng.random_range(-1.0..1.0) };
                h[(i, j)] = Complex64::new(re, im);
                h[(j, i)] = Complex64::new(re, -im);
            }
        }
        h
    }

    fn random_state(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn zero_hamiltonian_identity() {
        let h = DMatrix::from_element(4, 4, Complex64::new(0.0, 0.0));
        let psi0 = random_state(4, 1);
        let out = evolve(&HermitianOp::Dense(&h), &psi0, 2.5, &EvolutionConfig::default()).unwrap();
        for (a, b) in out.iter().zip(&psi0) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn scalar_phase() {
        let h = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let psi0 = vec![Complex64::new(1.0, 0.0)];
        let out = evolve(
            &HermitianOp::Dense(&h),
            &psi0,
            std::f64::consts::PI,
            &EvolutionConfig::default(),
        )
        .unwrap();
        assert_abs_diff_eq!((out[0] - Complex64::new(-1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut h = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
        h[(0, 1)] = Complex64::new(1.0, 0.0);
        let psi0 = random_state(2, 2);
        assert!(evolve(&HermitianOp::Dense(&h), &psi0, 1.0, &EvolutionConfig::default()).is_err());
    }

    #[test]
    fn methods_agree_with_exact_diagonalization() {
        let n = 24;
        let h = random_hermitian(n, 7);
        let psi0 = random_state(n, 8);
        let t = 3.7;
        let op = HermitianOp::Dense(&h);
        let exact = evolve(
            &op,
            &psi0,
            t,
            &EvolutionConfig { method: Method::ExactDiag, ..Default::default() },
        )
        .unwrap();
        for method in [Method::Chebyshev, Method::Krylov, Method::RkAdaptive] {
            let cfg = EvolutionConfig { method, tol: 1e-10, max_dim_exact: 512 };
            let got = evolve(&op, &psi0, t, &cfg).unwrap();
            let err: f64 =
                got.iter().zip(&exact).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            assert!(err < 1e-8, "{method:?} error {err:.3e}");
        }
    }

    #[test]
    fn random_8x8_matches_eigendecomposition_oracle() {
        let h = random_hermitian(8, 3);
        let psi0 = random_state(8, 4);
        let t = 2.0;
        // independent oracle: eigendecompose and phase directly
        let (vals, vecs) = dense::hermitian_eigen(&h);
        let c = vecs.adjoint() * DVector::from_column_slice(&psi0);
        let mut oracle = DVector::from_element(8, Complex64::new(0.0, 0.0));
        for i in 0..8 {
            oracle += vecs.column(i) * (c[i] * Complex64::new(0.0, -vals[i] * t).exp());
        }
        for method in [Method::ExactDiag, Method::Chebyshev, Method::Krylov] {
            let cfg = EvolutionConfig { method, tol: 1e-10, max_dim_exact: 512 };
            let got = evolve(&HermitianOp::Dense(&h), &psi0, t, &cfg).unwrap();
            let err: f64 =
                got.iter().zip(oracle.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            assert!(err < 1e-9, "{method:?} vs oracle {err:.3e}");
        }
    }

    #[test]
    fn time_additivity() {
        let h = random_hermitian(12, 11);
        let psi0 = random_state(12, 12);
        let op = HermitianOp::Dense(&h);
        let cfg = EvolutionConfig { method: Method::Chebyshev, tol: 1e-12, max_dim_exact: 4 };
        let (t1, t2) = (0.8, 1.9);
        let once = evolve(&op, &psi0, t1 + t2, &cfg).unwrap();
        let mid = evolve(&op, &psi0, t1, &cfg).unwrap();
        let twice = evolve(&op, &mid, t2, &cfg).unwrap();
        let err: f64 = once.iter().zip(&twice).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 2e-9, "additivity error {err:.3e}");
    }

    #[test]
    fn unitarity_over_long_time() {
        let h = random_hermitian(16, 21);
        let psi0 = random_state(16, 22);
        let t = 50.0;
        for method in [Method::ExactDiag, Method::Chebyshev, Method::Krylov] {
            let cfg = EvolutionConfig { method, tol: 1e-10, max_dim_exact: 512 };
            let out = evolve(&HermitianOp::Dense(&h), &psi0, t, &cfg).unwrap();
            assert!(
                (norm2(&out) - norm2(&psi0)).abs() <= 1e-10 * (1.0 + t) * (1.0 + norm2(&psi0))
            );
        }
    }

    #[test]
    fn bessel_sequence_sanity() {
        let j = bessel_j_sequence(1.0, 6);
        // reference values of J_k(1)
        assert_abs_diff_eq!(j[0], 0.7651976865579666, epsilon = 1e-12);
        assert_abs_diff_eq!(j[1], 0.4400505857449335, epsilon = 1e-12);
        assert_abs_diff_eq!(j[2], 0.1149034849319005, epsilon = 1e-12);
        let j = bessel_j_sequence(25.0, 60);
        assert_abs_diff_eq!(j[0], 0.0962667832759581, epsilon = 1e-10);
    }

    #[test]
    fn mode_family_evolution_and_mirror() {
        let mut trips = vec![
            (0, 0, -0.4),
            (0, 1, 0.7),
            (1, 0, -0.2),
            (1, 1, -0.1),
            (2, 2, -0.9),
            (0, 2, 0.3),
        ];
        let m = Csr::from_triplets(3, 3, &mut trips);
        let (hs, k) = m.sym_skew_split();
        let fam = SymSkewPair::new(&hs, &k).unwrap();
        let n_p = 8;
        let mus: Vec<f64> = (0..n_p).map(|k| 0.5 * (k as f64 - n_p as f64 / 2.0)).collect();
        // conjugate-symmetric mode stack (real profile x real base vector)
        let base = [1.0, -0.5, 0.25];
        let mut modes = vec![Complex64::new(0.0, 0.0); n_p * 3];
        for k in 0..n_p {
            let c = Complex64::new(1.0 / (1.0 + mus[k] * mus[k]), 0.0);
            for i in 0..3 {
                modes[k * 3 + i] = c * base[i];
            }
        }
        let h1 = hs.to_dense().symmetric_eigen().eigenvalues;
        let (l1, u1) = (h1.min(), h1.max());
        let sk = crate::dense::two_norm(&k.to_dense());
        let cfg = EvolutionConfig { method: Method::ExactDiag, ..Default::default() };
        let mirrored = evolve_all_modes(&fam, &mus, (l1, u1), sk, &modes, 1.3, &cfg).unwrap();
        let direct: Vec<Complex64> = (0..n_p)
            .flat_map(|k| {
                let op = HermitianOp::Mode { family: &fam, mu: mus[k], interval: None };
                evolve(&op, &modes[k * 3..(k + 1) * 3], 1.3, &cfg).unwrap()
            })
            .collect();
        for (a, b) in mirrored.iter().zip(&direct) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn counters_identity() {
        let h = DMatrix::from_fn(8, 8, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let c = ComplexityCounters::of_dense(&h);
        assert_eq!(c.sparsity, 1);
        assert_eq!(c.max_abs, 1.0);
        assert_eq!(c.qubits, 3);
        assert_abs_diff_eq!(c.chi(2.0), 2.0, epsilon = 1e-15);
    }
}
