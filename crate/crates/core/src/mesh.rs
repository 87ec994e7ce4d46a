//! Spatial/temporal grids and the discrete-ordinate velocity quadrature.
//!
//! The spatial grid has N_x interior points x_m = x_lo + m h, m = 1..N_x,
//! with h = (x_hi - x_lo)/(N_x + 1); the two boundary positions carry
//! ghost values only and are never stored. Velocities are Gauss-Legendre
//! nodes on (0, 1) with weights normalized to sum to 1, so the density
//! quadrature rho = sum_k w_k r_k is a convex combination.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TransportError};

/// Which solver the time step must satisfy the CFL restriction for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverKind {
    Iterative,
    Steady,
}

impl SolverKind {
    /// Stability limit on tau/h^2: 1 for the iterative path, 10/11 for
    /// the steady-state path.
    pub fn cfl_limit(self) -> f64 {
        match self {
            SolverKind::Iterative => 1.0,
            SolverKind::Steady => 10.0 / 11.0,
        }
    }
}

/// Grid/quadrature/time-step bundle consumed by every other module.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Discretization {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n_x: usize,
    pub n_v: usize,
    pub n_t: usize,
    pub h: f64,
    pub tau: f64,
    pub epsilon: f64,
    pub v_nodes: Vec<f64>,
    pub v_weights: Vec<f64>,
}

impl Discretization {
    pub fn lambda(&self) -> f64 {
        self.tau / self.h
    }

    /// Length of one parity vector, N_v * N_x (k-major).
    pub fn nvx(&self) -> usize {
        self.n_v * self.n_x
    }

    /// Interior grid positions x_1..x_{N_x}.
    pub fn x_points(&self) -> Vec<f64> {
        (1..=self.n_x).map(|m| self.x_lo + m as f64 * self.h).collect()
    }

    pub fn index(&self, k: usize, m: usize) -> usize {
        debug_assert!(k < self.n_v && m < self.n_x);
        k * self.n_x + m
    }

    fn check_invariants(&self, require_even_nx: bool, kind: SolverKind) -> Result<()> {
        let wsum: f64 = self.v_weights.iter().sum();
        if (wsum - 1.0).abs() > 1e-14 {
            return Err(TransportError::Config(format!(
                "velocity weights sum to {wsum}, expected 1"
            )));
        }
        for w in &self.v_weights {
            if *w <= 0.0 {
                return Err(TransportError::Config("nonpositive quadrature weight".into()));
            }
        }
        for pair in self.v_nodes.windows(2) {
            if pair[1] <= pair[0] {
                return Err(TransportError::Config("velocity nodes not strictly increasing".into()));
            }
        }
        if self.v_nodes.first().is_none_or(|&v| v <= 0.0)
            || self.v_nodes.last().is_none_or(|&v| v >= 1.0)
        {
            return Err(TransportError::Config("velocity nodes must lie in (0,1)".into()));
        }
        if require_even_nx && self.n_x % 2 != 0 {
            return Err(TransportError::Config(format!(
                "N_x = {} must be even for the norm-bound analysis",
                self.n_x
            )));
        }
        let limit = kind.cfl_limit();
        let ratio = self.tau / (self.h * self.h);
        if ratio > limit * (1.0 + 1e-12) {
            return Err(TransportError::Config(format!(
                "CFL {} violated: tau/h^2 = {ratio:.6} > {limit:.6}",
                if matches!(kind, SolverKind::Steady) { "10/11" } else { "1" }
            )));
        }
        Ok(())
    }
}

/// Parameters for [`build_discretization`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshParams {
    pub x_lo: f64,
    pub x_hi: f64,
    pub n_x: usize,
    pub n_v: usize,
    pub tau: f64,
    pub t_final: f64,
    pub epsilon: f64,
    /// Enforced on the bounds/appendix verification path only; the
    /// figure presets use N_x = 9 (h = 1/10).
    pub require_even_nx: bool,
    pub solver: SolverKind,
}

/// Build and validate a [`Discretization`]; N_t = ceil(t_final / tau).
pub fn build_discretization(p: &MeshParams) -> Result<Discretization> {
    if p.x_hi <= p.x_lo {
        return Err(TransportError::Config("x_hi must exceed x_lo".into()));
    }
    if p.n_x == 0 || p.n_v == 0 {
        return Err(TransportError::Config("N_x and N_v must be positive".into()));
    }
    if !(p.tau > 0.0) || !(p.t_final > 0.0) || !(p.epsilon > 0.0) {
        return Err(TransportError::Config("tau, t_final, epsilon must be positive".into()));
    }
    let (v_nodes, v_weights) = gauss_legendre_01(p.n_v)?;
    let h = (p.x_hi - p.x_lo) / (p.n_x as f64 + 1.0);
    let n_t = (p.t_final / p.tau).ceil() as usize;
    let disc = Discretization {
        x_lo: p.x_lo,
        x_hi: p.x_hi,
        n_x: p.n_x,
        n_v: p.n_v,
        n_t,
        h,
        tau: p.tau,
        epsilon: p.epsilon,
        v_nodes,
        v_weights,
    };
    disc.check_invariants(p.require_even_nx, p.solver)?;
    Ok(disc)
}

/// Gauss-Legendre nodes/weights on (0, 1), weights summing to 1.
///
/// Newton iteration on the Legendre polynomial over [-1, 1] (Abramowitz &
/// Stegun initial guesses, 1e-15 tolerance), then the affine map to (0,1)
/// with halved weights. Exact for polynomials up to degree 2 N_v - 1.
pub fn gauss_legendre_01(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(TransportError::InvalidArgument("quadrature order must be >= 1".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // roots come out descending in this loop; store symmetric pair
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    // map [-1,1] -> (0,1); total weight 2 -> 1
    let v: Vec<f64> = nodes.iter().map(|&x| 0.5 * (x + 1.0)).collect();
    let w: Vec<f64> = weights.iter().map(|&w| 0.5 * w).collect();
    Ok((v, w))
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn one_point_rule_is_midpoint() {
        let (v, w) = gauss_legendre_01(1).unwrap();
        assert_abs_diff_eq!(v[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-15);
    }

    /// Independent oracle for the 2-point rule: bisection on the shifted
    /// Legendre polynomial P2(v) = 6v^2 - 6v + 1 on (0,1).
    fn bisect_root(mut lo: f64, mut hi: f64) -> f64 {
        let f = |v: f64| 6.0 * v * v - 6.0 * v + 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn two_point_rule_matches_root_finding_oracle() {
        let (v, w) = gauss_legendre_01(2).unwrap();
        let r1 = bisect_root(0.0, 0.5);
        let r2 = bisect_root(0.5, 1.0);
        assert_abs_diff_eq!(v[0], r1, epsilon = 1e-12);
        assert_abs_diff_eq!(v[1], r2, epsilon = 1e-12);
        assert_abs_diff_eq!(v[0], 0.5 - 1.0 / (2.0 * 3.0f64.sqrt()), epsilon = 1e-14);
        assert_abs_diff_eq!(w[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(w[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn second_moment_is_one_third() {
        for n in 2..=12 {
            let (v, w) = gauss_legendre_01(n).unwrap();
            let m2: f64 = v.iter().zip(&w).map(|(vi, wi)| wi * vi * vi).sum();
            assert_abs_diff_eq!(m2, 1.0 / 3.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn moment_identities_match_appendix() {
        // 1^T W_d^{1/2} V^k W_d^{1/2} 1 = 1/(k+1) for k within exactness
        let (v, w) = gauss_legendre_01(8).unwrap();
        for k in 0..=15 {
            let mk: f64 = v.iter().zip(&w).map(|(vi, wi)| wi * vi.powi(k)).sum();
            assert_abs_diff_eq!(mk, 1.0 / (k as f64 + 1.0), epsilon = 1e-13);
        }
    }

    #[test]
    fn zero_order_rejected() {
        assert!(gauss_legendre_01(0).is_err());
    }

    proptest! {
        /// Quadrature exactness for random polynomials of degree <= 2n-1,
        /// against the analytic integral of v^p on (0,1).
        #[test]
        fn exactness_random_polynomials(n in 1usize..10, coeffs in proptest::collection::vec(-1.0f64..1.0, 20)) {
            let (v, w) = gauss_legendre_01(n).unwrap();
            let deg = 2 * n - 1;
            let quad: f64 = v.iter().zip(&w).map(|(vi, wi)| {
                let mut s = 0.0;
                for (p, c) in coeffs.iter().take(deg + 1).enumerate() {
                    s += c * vi.powi(p as i32);
                }
                wi * s
            }).sum();
            let exact: f64 = coeffs.iter().take(deg + 1).enumerate()
                .map(|(p, c)| c / (p as f64 + 1.0)).sum();
            prop_assert!((quad - exact).abs() <= 1e-12);
        }
    }

    fn params() -> MeshParams {
        MeshParams {
            x_lo: 0.0,
            x_hi: 1.0,
            n_x: 10,
            n_v: 4,
            tau: 0.005,
            t_final: 0.05,
            epsilon: 0.1,
            require_even_nx: false,
            solver: SolverKind::Iterative,
        }
    }

    #[test]
    fn h_and_nt_arithmetic() {
        let d = build_discretization(&params()).unwrap();
        assert_abs_diff_eq!(d.h, 1.0 / 11.0, epsilon = 1e-15);
        assert_eq!(d.n_t, 10);
    }

    #[test]
    fn problem1_paper_parameters() {
        // Delta x = 1/10, Delta t = Delta x^2 from the Fig. 1 setup
        let mut p = params();
        p.n_x = 9;
        p.tau = 0.01;
        let d = build_discretization(&p).unwrap();
        assert_abs_diff_eq!(d.h, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(d.tau, 0.01, epsilon = 1e-15);
        assert_eq!(d.n_t, 5);
    }

    #[test]
    fn even_nx_flag() {
        let mut p = params();
        p.n_x = 9;
        p.tau = 0.01;
        p.require_even_nx = true;
        assert!(build_discretization(&p).is_err());
        p.n_x = 10;
        p.tau = 0.005;
        assert!(build_discretization(&p).is_ok());
    }

    #[test]
    fn cfl_guards() {
        let mut p = params();
        p.n_x = 9;
        p.tau = 0.01; // tau/h^2 = 1
        assert!(build_discretization(&p).is_ok());
        p.solver = SolverKind::Steady;
        let err = build_discretization(&p).unwrap_err();
        assert!(err.to_string().contains("10/11"));
        p.tau = 0.01 * 10.0 / 11.0;
        assert!(build_discretization(&p).is_ok());
        p.solver = SolverKind::Iterative;
        p.tau = 1.01 * 0.01;
        assert!(build_discretization(&p).is_err());
    }
}
