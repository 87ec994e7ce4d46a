//! Exponential-integrator AP discretization of the parity transport
//! system: relaxation step, upwind convection step, incoming-boundary
//! terms, the combined one-step matrices, and the magnitude-unifying
//! preprocessing.
//!
//! Parity vectors are stored k-major: block k holds the N_x spatial
//! values for ordinate v_k. The one-step update is
//!
//!   r^{n+1} = A1 r^n + B1 j^n + b_r,
//!   j^{n+1} = A2 r^n + B2 j^n + b_j,
//!
//! and the matrices are produced by composing the two verified step
//! operators rather than transcribing their expanded forms; the expanded
//! forms are checked against the composition in the test suite.

use std::sync::Arc;

use crate::error::{Result, TransportError};
use crate::mesh::Discretization;
use crate::sparse::Csr;

/// Scalar coefficient function of position (sigma_S, sigma_A, Q) or of
/// velocity (incoming boundary data).
pub type CoefFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Continuous problem data: coefficients, source, and incoming boundary
/// distributions.
#[derive(Clone)]
pub struct TransportProblem {
    pub sigma_s: CoefFn,
    pub sigma_a: CoefFn,
    pub source: CoefFn,
    /// F_L(v), prescribed for v > 0 at x_lo.
    pub incoming_left: CoefFn,
    /// F_R(v), prescribed for v < 0 at x_hi (parity variable v in (0,1)).
    pub incoming_right: CoefFn,
    pub constant_coefficient: bool,
}

impl std::fmt::Debug for TransportProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransportProblem")
            .field("constant_coefficient", &self.constant_coefficient)
            .finish_non_exhaustive()
    }
}

impl TransportProblem {
    /// sigma_S = 1, sigma_A = 0, Q = 0 with the given incoming data.
    pub fn constant_unit(incoming_left: CoefFn, incoming_right: CoefFn) -> Self {
        Self {
            sigma_s: Arc::new(|_| 1.0),
            sigma_a: Arc::new(|_| 0.0),
            source: Arc::new(|_| 0.0),
            incoming_left,
            incoming_right,
            constant_coefficient: true,
        }
    }

    /// Total coefficient sigma = sigma_S + eps^2 sigma_A.
    pub fn sigma(&self, x: f64, epsilon: f64) -> f64 {
        (self.sigma_s)(x) + epsilon * epsilon * (self.sigma_a)(x)
    }
}

/// Even/odd parity vectors (length N_v * N_x each) plus the scaling flag
/// toggled by the preprocessing transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityState {
    pub r: Vec<f64>,
    pub j: Vec<f64>,
    pub scaled: bool,
}

impl ParityState {
    pub fn zero(disc: &Discretization) -> Self {
        Self { r: vec![0.0; disc.nvx()], j: vec![0.0; disc.nvx()], scaled: false }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    fn check_dim(&self, disc: &Discretization) -> Result<()> {
        if self.r.len() != disc.nvx() || self.j.len() != disc.nvx() {
            return Err(TransportError::Dimension(format!(
                "parity state length {} / {} vs N_v*N_x = {}",
                self.r.len(),
                self.j.len(),
                disc.nvx()
            )));
        }
        Ok(())
    }
}

/// Relaxation weights per spatial cell. In the constant-coefficient case
/// all entries coincide with the scalar triple
/// beta1 = e^{-tau/eps^2}, beta2 = 1 - (1 + tau/eps^2) e^{-tau/eps^2},
/// beta3 = (tau/eps^2) e^{-tau/eps^2} (1 - eps^2).
#[derive(Debug, Clone)]
pub struct Betas {
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub beta3: Vec<f64>,
}

/// Relaxation weights at one point. The general case uses
/// beta1 = e^{-sigma_S tau/eps^2} and divides beta2's bracket by sigma.
/// Overflow guard: for sigma_S tau/eps^2 > 700 the analytic limits
/// (0, 1/sigma, 0) are returned instead of NaN.
pub fn betas(tau: f64, epsilon: f64, sigma_s_at_x: f64, sigma_at_x: f64) -> (f64, f64, f64) {
    assert!(tau > 0.0 && epsilon > 0.0 && sigma_s_at_x > 0.0 && sigma_at_x > 0.0);
    let z = sigma_s_at_x * tau / (epsilon * epsilon);
    if z > 700.0 {
        return (0.0, 1.0 / sigma_at_x, 0.0);
    }
    let ez = (-z).exp();
    let beta1 = ez;
    // 1 - (1+z) e^{-z} cancels catastrophically for small z
    let bracket = if z < 1e-4 {
        z * z * (0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0)
    } else {
        1.0 - (1.0 + z) * ez
    };
    let beta2 = bracket / sigma_at_x;
    let beta3 = (tau / (epsilon * epsilon)) * ez * (1.0 - epsilon * epsilon);
    (beta1, beta2, beta3)
}

impl Betas {
    /// Evaluate the weights at every cell center.
    pub fn evaluate(disc: &Discretization, prob: &TransportProblem) -> Self {
        let xs = disc.x_points();
        let mut beta1 = Vec::with_capacity(disc.n_x);
        let mut beta2 = Vec::with_capacity(disc.n_x);
        let mut beta3 = Vec::with_capacity(disc.n_x);
        for &x in &xs {
            let (b1, b2, b3) =
                betas(disc.tau, disc.epsilon, (prob.sigma_s)(x), prob.sigma(x, disc.epsilon));
            beta1.push(b1);
            beta2.push(b2);
            beta3.push(b3);
        }
        Self { beta1, beta2, beta3 }
    }

    /// The eps -> 0 limit (0, 1/sigma, 0) used by the H = Hbar + E split.
    pub fn stiff_limit(disc: &Discretization, prob: &TransportProblem) -> Self {
        let xs = disc.x_points();
        Self {
            beta1: vec![0.0; disc.n_x],
            beta2: xs.iter().map(|&x| 1.0 / prob.sigma(x, disc.epsilon)).collect(),
            beta3: vec![0.0; disc.n_x],
        }
    }
}

/// Beta-independent operators of the two-step scheme, all in the k-major
/// N_v*N_x layout unless noted.
#[derive(Debug, Clone)]
pub struct BuildingBlocks {
    /// Central difference matrix (N_x), antisymmetric.
    pub d_h: Csr,
    /// Second-derivative matrix (N_x), tridiag(1, -2, 1).
    pub l_h: Csr,
    /// Corner diagonals diag(-1,0,..,0,1) and diag(1,0,..,0,1) (N_x).
    pub i1: Csr,
    pub i2: Csr,
    /// eps v_k / (eps v_k + sigma h) per ordinate, left/right boundary.
    pub e_nabla_left: Vec<f64>,
    pub e_nabla_right: Vec<f64>,
    /// Boundary-modified gradient nabla_{eps,x} (already includes 1/2h).
    pub grad_eps_x: Csr,
    /// Boundary-modified Laplacian/gradient, block diag over k.
    pub l_bdry: Csr,
    pub d_bdry: Csr,
    /// Boundary source vectors.
    pub b_n: Vec<f64>,
    pub f_star: Vec<f64>,
    pub g_star: Vec<f64>,
    // kron factors used by the relaxation composition
    w_kron_i: Csr,
    vw_kron_i: Csr,
    v_kron_i: Csr,
    // convection affine map
    conv_rr: Csr,
    conv_rj: Csr,
    conv_jr: Csr,
    conv_jj: Csr,
    conv_r_const: Vec<f64>,
    conv_j_const: Vec<f64>,
}

fn d_h_matrix(n_x: usize) -> Csr {
    let mut trips = Vec::new();
    for m in 0..n_x {
        if m > 0 {
            trips.push((m, m - 1, -1.0));
        }
        if m + 1 < n_x {
            trips.push((m, m + 1, 1.0));
        }
    }
    Csr::from_triplets(n_x, n_x, &mut trips)
}

fn l_h_matrix(n_x: usize) -> Csr {
    let mut trips = Vec::new();
    for m in 0..n_x {
        trips.push((m, m, -2.0));
        if m > 0 {
            trips.push((m, m - 1, 1.0));
        }
        if m + 1 < n_x {
            trips.push((m, m + 1, 1.0));
        }
    }
    Csr::from_triplets(n_x, n_x, &mut trips)
}

fn corner_diag(n_x: usize, left: f64, right: f64) -> Csr {
    let mut trips = vec![(0, 0, left), (n_x - 1, n_x - 1, right)];
    Csr::from_triplets(n_x, n_x, &mut trips)
}

/// Assemble every beta-independent operator of the scheme.
pub fn build_blocks(disc: &Discretization, prob: &TransportProblem) -> Result<BuildingBlocks> {
    let (n_v, n_x) = (disc.n_v, disc.n_x);
    let n = disc.nvx();
    let (h, eps, tau) = (disc.h, disc.epsilon, disc.tau);
    let lambda = disc.lambda();
    let xs = disc.x_points();

    let sigma: Vec<f64> = xs.iter().map(|&x| prob.sigma(x, eps)).collect();
    if sigma.iter().any(|&s| s <= 0.0) {
        return Err(TransportError::Config("sigma must be positive on the domain".into()));
    }
    let sigma_l = sigma[0];
    let sigma_r = sigma[n_x - 1];
    let sigma_a: Vec<f64> = xs.iter().map(|&x| (prob.sigma_a)(x)).collect();
    let q: Vec<f64> = xs.iter().map(|&x| (prob.source)(x)).collect();

    let d_h = d_h_matrix(n_x);
    let l_h = l_h_matrix(n_x);
    let i1 = corner_diag(n_x, -1.0, 1.0);
    let i2 = corner_diag(n_x, 1.0, 1.0);

    let e_nabla_left: Vec<f64> =
        disc.v_nodes.iter().map(|&v| eps * v / (eps * v + sigma_l * h)).collect();
    let e_nabla_right: Vec<f64> =
        disc.v_nodes.iter().map(|&v| eps * v / (eps * v + sigma_r * h)).collect();

    // nabla_{eps,x} = (1/2h) blockdiag_k [ D_h + diag(-aL_k, 0, .., 0, aR_k) ]
    let mut grad_trips = Vec::new();
    let mut lb_trips = Vec::new();
    let mut db_trips = Vec::new();
    let mut b_n = vec![0.0; n];
    let mut f_star = vec![0.0; n];
    let mut g_star = vec![0.0; n];
    for (k, &v) in disc.v_nodes.iter().enumerate() {
        let off = k * n_x;
        let den_l = eps * v + sigma_l * h;
        let den_r = eps * v + sigma_r * h;
        for (mi, mj, val) in d_h.iter_triplets() {
            grad_trips.push((off + mi, off + mj, val / (2.0 * h)));
            db_trips.push((off + mi, off + mj, val));
        }
        grad_trips.push((off, off, -e_nabla_left[k] / (2.0 * h)));
        grad_trips.push((off + n_x - 1, off + n_x - 1, e_nabla_right[k] / (2.0 * h)));
        for (mi, mj, val) in l_h.iter_triplets() {
            lb_trips.push((off + mi, off + mj, val));
        }
        // L^bdry corners (eps v - v)/(eps v + sigma h), D^bdry corners
        // +/-(v - eps v)/(eps v + sigma h)
        lb_trips.push((off, off, (eps * v - v) / den_l));
        lb_trips.push((off + n_x - 1, off + n_x - 1, (eps * v - v) / den_r));
        db_trips.push((off, off, (v - eps * v) / den_l));
        db_trips.push((off + n_x - 1, off + n_x - 1, -(v - eps * v) / den_r));

        let fl = (prob.incoming_left)(v);
        let fr = (prob.incoming_right)(v);
        b_n[off] = -sigma_l / (2.0 * den_l) * fl;
        b_n[off + n_x - 1] = sigma_r / (2.0 * den_r) * fr;
        f_star[off] = (sigma_l * h * v + v * v) / den_l * fl;
        f_star[off + n_x - 1] = (sigma_r * h * v + v * v) / den_r * fr;
        g_star[off] = (sigma_l * h * v + v * v) / den_l * fl;
        g_star[off + n_x - 1] = -(sigma_r * h * v + v * v) / den_r * fr;
    }
    let grad_eps_x = Csr::from_triplets(n, n, &mut grad_trips);
    let l_bdry = Csr::from_triplets(n, n, &mut lb_trips);
    let d_bdry = Csr::from_triplets(n, n, &mut db_trips);

    // velocity kron factors
    let mut w_trips = Vec::new();
    let mut vw_trips = Vec::new();
    let mut v_trips = Vec::new();
    for k in 0..n_v {
        for kp in 0..n_v {
            for mi in 0..n_x {
                w_trips.push((k * n_x + mi, kp * n_x + mi, disc.v_weights[kp]));
                vw_trips.push((k * n_x + mi, kp * n_x + mi, disc.v_nodes[k] * disc.v_weights[kp]));
            }
        }
        for mi in 0..n_x {
            v_trips.push((k * n_x + mi, k * n_x + mi, disc.v_nodes[k]));
        }
    }
    let w_kron_i = Csr::from_triplets(n, n, &mut w_trips);
    let vw_kron_i = Csr::from_triplets(n, n, &mut vw_trips);
    let v_kron_i = Csr::from_triplets(n, n, &mut v_trips);

    // diag (1 - tau sigma_A) replicated over ordinates
    let mut decay = vec![0.0; n];
    for k in 0..n_v {
        for mi in 0..n_x {
            decay[k * n_x + mi] = 1.0 - tau * sigma_a[mi];
        }
    }
    let decay_diag = Csr::diag(&decay);

    let v_lbdry = v_kron_i.matmul(&l_bdry);
    let v_dbdry = v_kron_i.matmul(&d_bdry);
    let mut v_dh_trips = Vec::new();
    let mut v_lh_trips = Vec::new();
    for k in 0..n_v {
        let off = k * n_x;
        let v = disc.v_nodes[k];
        for (mi, mj, val) in d_h.iter_triplets() {
            v_dh_trips.push((off + mi, off + mj, v * val));
        }
        for (mi, mj, val) in l_h.iter_triplets() {
            v_lh_trips.push((off + mi, off + mj, v * val));
        }
    }
    let v_dh = Csr::from_triplets(n, n, &mut v_dh_trips);
    let v_lh = Csr::from_triplets(n, n, &mut v_lh_trips);

    let conv_rr = decay_diag.add_scaled(&v_lbdry, lambda / 2.0);
    let conv_rj = v_dh.scaled(-lambda / 2.0);
    let conv_jr = v_dbdry.scaled(-lambda / 2.0);
    let conv_jj = decay_diag.add_scaled(&v_lh, lambda / 2.0);
    let mut conv_r_const = vec![0.0; n];
    let mut conv_j_const = vec![0.0; n];
    for k in 0..n_v {
        for mi in 0..n_x {
            let i = k * n_x + mi;
            conv_r_const[i] = lambda / 2.0 * f_star[i] + tau * q[mi];
            conv_j_const[i] = lambda / 2.0 * g_star[i];
        }
    }

    Ok(BuildingBlocks {
        d_h,
        l_h,
        i1,
        i2,
        e_nabla_left,
        e_nabla_right,
        grad_eps_x,
        l_bdry,
        d_bdry,
        b_n,
        f_star,
        g_star,
        w_kron_i,
        vw_kron_i,
        v_kron_i,
        conv_rr,
        conv_rj,
        conv_jr,
        conv_jj,
        conv_r_const,
        conv_j_const,
    })
}

impl BuildingBlocks {
    fn n(&self) -> usize {
        self.grad_eps_x.nrows()
    }

    fn n_x(&self) -> usize {
        self.d_h.nrows()
    }

    /// diag over (k, m) of a per-cell coefficient vector.
    fn x_diag(&self, per_cell: &[f64]) -> Csr {
        let n_x = self.n_x();
        let n = self.n();
        let mut d = vec![0.0; n];
        for i in 0..n {
            d[i] = per_cell[i % n_x];
        }
        let _ = &mut d;
        Csr::diag(&d)
    }

    /// r* map: beta1 I + (1 - beta1)(W (x) I), with per-cell betas.
    fn rel_rr(&self, betas: &Betas) -> Csr {
        let n_x = self.n_x();
        let n = self.n();
        let mut trips = Vec::new();
        for (i, j, w) in self.w_kron_i.iter_triplets() {
            trips.push((i, j, (1.0 - betas.beta1[i % n_x]) * w));
        }
        for i in 0..n {
            trips.push((i, i, betas.beta1[i % n_x]));
        }
        Csr::from_triplets(n, n, &mut trips)
    }

    /// j* gradient map: -(D_b2 (VW (x) I) + D_b3 (V (x) I)) nabla_{eps,x}.
    fn rel_jr(&self, betas: &Betas) -> Csr {
        let front = self
            .x_diag(&betas.beta2)
            .matmul(&self.vw_kron_i)
            .add_scaled(&self.x_diag(&betas.beta3).matmul(&self.v_kron_i), 1.0);
        front.matmul(&self.grad_eps_x).scaled(-1.0)
    }

    fn rel_jj(&self, betas: &Betas) -> Csr {
        self.x_diag(&betas.beta1)
    }

    fn rel_j_const(&self, betas: &Betas) -> Vec<f64> {
        let front = self
            .x_diag(&betas.beta2)
            .matmul(&self.vw_kron_i)
            .add_scaled(&self.x_diag(&betas.beta3).matmul(&self.v_kron_i), 1.0);
        front.apply(&self.b_n).iter().map(|v| -v).collect()
    }
}

/// Relaxation half-step (r^n, j^n) -> (r*, j*).
pub fn relaxation_step(
    state: &ParityState,
    blocks: &BuildingBlocks,
    betas: &Betas,
    disc: &Discretization,
) -> Result<ParityState> {
    state.check_dim(disc)?;
    if state.scaled {
        return Err(TransportError::State("relaxation_step expects an unscaled state".into()));
    }
    let r_star = blocks.rel_rr(betas).apply(&state.r);
    let mut j_star = blocks.rel_jj(betas).apply(&state.j);
    let grad_part = blocks.rel_jr(betas).apply(&state.r);
    let c = blocks.rel_j_const(betas);
    for i in 0..j_star.len() {
        j_star[i] += grad_part[i] + c[i];
    }
    Ok(ParityState { r: r_star, j: j_star, scaled: false })
}

/// Convection half-step (r*, j*) -> (r^{n+1}, j^{n+1}).
pub fn convection_step(
    state_star: &ParityState,
    blocks: &BuildingBlocks,
    disc: &Discretization,
) -> Result<ParityState> {
    state_star.check_dim(disc)?;
    if state_star.scaled {
        return Err(TransportError::State("convection_step expects an unscaled state".into()));
    }
    let n = blocks.n();
    let mut r = blocks.conv_rr.apply(&state_star.r);
    let rj = blocks.conv_rj.apply(&state_star.j);
    let mut j = blocks.conv_jj.apply(&state_star.j);
    let jr = blocks.conv_jr.apply(&state_star.r);
    for i in 0..n {
        r[i] += rj[i] + blocks.conv_r_const[i];
        j[i] += jr[i] + blocks.conv_j_const[i];
    }
    Ok(ParityState { r, j, scaled: false })
}

/// The one-step update operators A1, B1, A2, B2 and boundary vectors,
/// raw or preprocessed.
#[derive(Debug, Clone)]
pub struct StepMatrices {
    pub a1: Csr,
    pub b1: Csr,
    pub a2: Csr,
    pub b2: Csr,
    pub b_r: Vec<f64>,
    pub b_j: Vec<f64>,
    /// Relaxation weights at the first interior cell (diagnostics).
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub n_v: usize,
    pub n_x: usize,
    pub preprocessed: bool,
}

impl StepMatrices {
    pub fn dim(&self) -> usize {
        self.n_v * self.n_x
    }

    /// Apply the one-step affine map to an unscaled (raw matrices) or
    /// scaled (preprocessed matrices) state.
    pub fn apply(&self, state: &ParityState) -> Result<ParityState> {
        if state.scaled != self.preprocessed {
            return Err(TransportError::State(
                "state scaling does not match matrix preprocessing".into(),
            ));
        }
        let mut r = self.a1.apply(&state.r);
        let rb = self.b1.apply(&state.j);
        let mut j = self.a2.apply(&state.r);
        let jb = self.b2.apply(&state.j);
        for i in 0..r.len() {
            r[i] += rb[i] + self.b_r[i];
            j[i] += jb[i] + self.b_j[i];
        }
        Ok(ParityState { r, j, scaled: state.scaled })
    }
}

/// Combined one-step matrices by composing relaxation and convection.
pub fn assemble_step_matrices(
    disc: &Discretization,
    prob: &TransportProblem,
) -> Result<StepMatrices> {
    let blocks = build_blocks(disc, prob)?;
    let betas = Betas::evaluate(disc, prob);
    assemble_from_parts(disc, &blocks, &betas)
}

/// Same composition with caller-supplied betas (the Hbar split uses the
/// stiff-limit weights here).
pub fn assemble_from_parts(
    disc: &Discretization,
    blocks: &BuildingBlocks,
    betas: &Betas,
) -> Result<StepMatrices> {
    let rel_rr = blocks.rel_rr(betas);
    let rel_jr = blocks.rel_jr(betas);
    let rel_jj = blocks.rel_jj(betas);
    let rel_j_const = blocks.rel_j_const(betas);

    let a1 = blocks.conv_rr.matmul(&rel_rr).add_scaled(&blocks.conv_rj.matmul(&rel_jr), 1.0);
    let b1 = blocks.conv_rj.matmul(&rel_jj);
    let a2 = blocks.conv_jr.matmul(&rel_rr).add_scaled(&blocks.conv_jj.matmul(&rel_jr), 1.0);
    let b2 = blocks.conv_jj.matmul(&rel_jj);

    let n = blocks.n();
    let mut b_r = blocks.conv_rj.apply(&rel_j_const);
    let mut b_j = blocks.conv_jj.apply(&rel_j_const);
    for i in 0..n {
        b_r[i] += blocks.conv_r_const[i];
        b_j[i] += blocks.conv_j_const[i];
    }

    Ok(StepMatrices {
        a1,
        b1,
        a2,
        b2,
        b_r,
        b_j,
        beta1: betas.beta1[0],
        beta2: betas.beta2[0],
        beta3: betas.beta3[0],
        n_v: disc.n_v,
        n_x: disc.n_x,
        preprocessed: false,
    })
}

/// Magnitude-unifying transforms: r -> (W_d^{1/2} (x) I) r, j -> j/N_x,
/// with the matching similarity/scaling of the step matrices.
pub fn preprocess(sm: &StepMatrices, disc: &Discretization) -> Result<StepMatrices> {
    if sm.preprocessed {
        return Err(TransportError::State("step matrices already preprocessed".into()));
    }
    let n = sm.dim();
    let n_x = sm.n_x;
    let nx_f = n_x as f64;
    let mut sqrt_w = vec![0.0; n];
    let mut inv_sqrt_w = vec![0.0; n];
    for k in 0..sm.n_v {
        let s = disc.v_weights[k].sqrt();
        for mi in 0..n_x {
            sqrt_w[k * n_x + mi] = s;
            inv_sqrt_w[k * n_x + mi] = 1.0 / s;
        }
    }
    let mut a1 = sm.a1.clone();
    a1.scale_rows(&sqrt_w);
    a1.scale_cols(&inv_sqrt_w);
    let mut b1 = sm.b1.scaled(nx_f);
    b1.scale_rows(&sqrt_w);
    let mut a2 = sm.a2.scaled(1.0 / nx_f);
    a2.scale_cols(&inv_sqrt_w);
    let b2 = sm.b2.clone();
    let b_r: Vec<f64> = sm.b_r.iter().zip(&sqrt_w).map(|(v, s)| v * s).collect();
    let b_j: Vec<f64> = sm.b_j.iter().map(|v| v / nx_f).collect();
    Ok(StepMatrices {
        a1,
        b1,
        a2,
        b2,
        b_r,
        b_j,
        beta1: sm.beta1,
        beta2: sm.beta2,
        beta3: sm.beta3,
        n_v: sm.n_v,
        n_x: sm.n_x,
        preprocessed: true,
    })
}

/// Apply the preprocessing transforms to a state.
pub fn scale_state(state: &ParityState, disc: &Discretization) -> Result<ParityState> {
    state.check_dim(disc)?;
    if state.scaled {
        return Err(TransportError::State("state already scaled".into()));
    }
    let n_x = disc.n_x;
    let r = state
        .r
        .iter()
        .enumerate()
        .map(|(i, v)| v * disc.v_weights[i / n_x].sqrt())
        .collect();
    let j = state.j.iter().map(|v| v / disc.n_x as f64).collect();
    Ok(ParityState { r, j, scaled: true })
}

/// Undo [`scale_state`].
pub fn unscale_state(state: &ParityState, disc: &Discretization) -> Result<ParityState> {
    state.check_dim(disc)?;
    if !state.scaled {
        return Err(TransportError::State("state is not scaled".into()));
    }
    let n_x = disc.n_x;
    let r = state
        .r
        .iter()
        .enumerate()
        .map(|(i, v)| v / disc.v_weights[i / n_x].sqrt())
        .collect();
    let j = state.j.iter().map(|v| v * disc.n_x as f64).collect();
    Ok(ParityState { r, j, scaled: false })
}

/// rho_m = sum_k w_k r_{k,m}; requires an unscaled state.
pub fn mass_density(state: &ParityState, disc: &Discretization) -> Result<Vec<f64>> {
    state.check_dim(disc)?;
    if state.scaled {
        return Err(TransportError::State("mass_density expects an unscaled state".into()));
    }
    let mut rho = vec![0.0; disc.n_x];
    for k in 0..disc.n_v {
        let w = disc.v_weights[k];
        for mi in 0..disc.n_x {
            rho[mi] += w * state.r[k * disc.n_x + mi];
        }
    }
    Ok(rho)
}

/// Mass flux j(x_m) = sum_k w_k v_k j_{k,m} (quadrature of int_0^1 v j dv),
/// the quantity plotted against rho; requires an unscaled state.
pub fn mass_flux(state: &ParityState, disc: &Discretization) -> Result<Vec<f64>> {
    state.check_dim(disc)?;
    if state.scaled {
        return Err(TransportError::State("mass_flux expects an unscaled state".into()));
    }
    let mut flux = vec![0.0; disc.n_x];
    for k in 0..disc.n_v {
        let wv = disc.v_weights[k] * disc.v_nodes[k];
        for mi in 0..disc.n_x {
            flux[mi] += wv * state.j[k * disc.n_x + mi];
        }
    }
    Ok(flux)
}
