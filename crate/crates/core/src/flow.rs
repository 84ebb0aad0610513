//! Entropy gradient flows ∂_t ρ = Qφ(ρ) = −K(ρ)D𝓔(ρ) on the probability
//! simplex over the grid nodes.
//!
//! Two system families share the machinery:
//!
//! * the nonlinear drift-diffusion scheme
//!   ∂_t ρ_i = h⁻²κ_i(u_{i+1} − u_i) − h⁻²κ_{i−1}(u_i − u_{i−1}),
//!   u_i = φ(ρ_i)/w_i, whose entropy is 𝓔(ρ) = Σ (f(ρ_i) + V(x_i)ρ_i) with
//!   f'(s) = ln φ(s), Onsager operator K(ρ) = Gᵀ diag(κ_e Λ(u_e, u_{e+1})) G
//!   with the logarithmic mean Λ, and gradient D𝓔(ρ) = ln u;
//!
//! * the linear scheme ∂_t ρ_i = h⁻²(ρ_{i−1} − 2ρ_i + ρ_{i+1}) with a general
//!   convex entropy density f, where the edge weights use the mean Λ^f and
//!   D𝓔(ρ)_i = f'(ρ_i).
//!
//! The gradient-flow identity Qφ(ρ) = −K(ρ)D𝓔(ρ) holds to rounding because
//! Λ^f(a,b)(f'(a) − f'(b)) = a − b is the definition of the mean.

use crate::error::{Error, Result};
use crate::markov::{build_rate_matrix, build_weights, Grid, Potential, Gradient, RateMatrix, Weights};
use crate::means::{Density, Mean};
use crate::ode::{self, AdaptiveOptions, OdeError};
use crate::report::Check;
use rand::Rng;
use serde::Serialize;
use std::ops::Deref;

/// A point of X_n: strictly positive entries summing to one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct State(Vec<f64>);

impl State {
    /// Validates positivity and normalization (within 1e-6), then rescales
    /// so the sum is 1 to rounding.
    pub fn new(rho: Vec<f64>) -> Result<Self> {
        if rho.len() < 2 {
            return Err(Error::Domain("state needs at least two entries".into()));
        }
        for (i, &r) in rho.iter().enumerate() {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::Domain(format!("ρ_{i} = {r} is not positive")));
            }
        }
        let sum: f64 = rho.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::Domain(format!(
                "state mass is {sum}, expected 1 (tolerance 1e-6)"
            )));
        }
        let rho = rho.iter().map(|r| r / sum).collect();
        Ok(State(rho))
    }

    pub fn uniform(node_count: usize) -> Self {
        State(vec![1.0 / node_count as f64; node_count])
    }

    /// Normalized Gaussian bump exp(−(x_i − center)²/(2 width²)).
    pub fn gaussian_bump(grid: &Grid, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Domain(format!("bump width must be positive, got {width}")));
        }
        let raw: Vec<f64> = (0..grid.node_count())
            .map(|i| {
                let d = grid.x(i) - center;
                (-d * d / (2.0 * width * width)).exp()
            })
            .collect();
        let sum: f64 = raw.iter().sum();
        Ok(State(raw.iter().map(|v| v / sum).collect()))
    }

    /// Uniform sample of the open simplex (normalized Exp(1) draws).
    pub fn sample(node_count: usize, rng: &mut impl Rng) -> Self {
        let raw: Vec<f64> = (0..node_count)
            .map(|_| (-(1.0 - rng.random::<f64>()).ln()).max(1e-12))
            .collect();
        let sum: f64 = raw.iter().sum();
        State(raw.iter().map(|v| v / sum).collect())
    }

    /// Random state bounded away from the simplex boundary: a 9:1 mixture of
    /// a uniform-simplex sample with the uniform state, so every entry is at
    /// least 0.1/(n+1).
    pub fn sample_interior(node_count: usize, rng: &mut impl Rng) -> Self {
        let s = Self::sample(node_count, rng);
        let u = 1.0 / node_count as f64;
        State(s.0.iter().map(|v| 0.9 * v + 0.1 * u).collect())
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for State {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Nonlinearity φ in the flux φ(ρ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Phi {
    Identity,
    /// φ(s) = s^α, α > 0.
    Power { alpha: f64 },
}

impl Phi {
    pub fn power(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::Config(format!(
                "φ exponent must be positive, got {alpha}"
            )));
        }
        if alpha == 1.0 {
            Ok(Phi::Identity)
        } else {
            Ok(Phi::Power { alpha })
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Phi::Identity => s,
            Phi::Power { alpha } => s.powf(*alpha),
        }
    }

    pub fn d1(&self, s: f64) -> f64 {
        match self {
            Phi::Identity => 1.0,
            Phi::Power { alpha } => alpha * s.powf(alpha - 1.0),
        }
    }

    pub fn d2(&self, s: f64) -> f64 {
        match self {
            Phi::Identity => 0.0,
            Phi::Power { alpha } => alpha * (alpha - 1.0) * s.powf(alpha - 2.0),
        }
    }

    pub fn inverse(&self, v: f64) -> f64 {
        match self {
            Phi::Identity => v,
            Phi::Power { alpha } => v.powf(1.0 / alpha),
        }
    }

    /// Exponent of the log-derivative: ln φ(s) = c ln s.
    fn log_scale(&self) -> f64 {
        match self {
            Phi::Identity => 1.0,
            Phi::Power { alpha } => *alpha,
        }
    }

    /// Whether φ' ∘ φ⁻¹ is nonincreasing (the convexity-constant hypothesis);
    /// analytic for the kinds carried here and double-checked on a sample.
    pub fn dphi_of_inverse_nonincreasing(&self) -> bool {
        let analytic = match self {
            Phi::Identity => true,
            Phi::Power { alpha } => *alpha <= 1.0,
        };
        let mut ok = true;
        let mut prev = f64::INFINITY;
        for k in 1..=32 {
            let v = k as f64 / 32.0 * 4.0;
            let g = self.d1(self.inverse(v));
            if g > prev * (1.0 + 1e-12) {
                ok = false;
            }
            prev = g;
        }
        debug_assert_eq!(analytic, ok);
        analytic && ok
    }
}

/// Which gradient-flow family the system belongs to.
#[derive(Clone, Copy, Debug, Serialize)]
pub enum SystemKind {
    /// ∂_t ρ = h⁻²Δ₂ρ with entropy density f and edge mean Λ^f. Zero
    /// potential and φ = id are built in.
    Heat { density: Density },
    /// ∂_t ρ = Qφ(ρ) with the logarithmic mean on u = φ(ρ)/w.
    FokkerPlanck { phi: Phi },
}

/// Immutable system description: grid, weights, nonlinearity and entropy.
#[derive(Clone, Debug)]
pub struct FlowSystem {
    grid: Grid,
    potential: Potential,
    weights: Weights,
    rate: RateMatrix,
    kind: SystemKind,
}

impl FlowSystem {
    /// Linear-diffusion system with a general convex entropy density
    /// (Boltzmann, or a power s^α with α > 1 so that f' is increasing).
    pub fn heat(grid: Grid, density: Density) -> Result<Self> {
        if let Density::Power { alpha } = density {
            if alpha <= 1.0 {
                return Err(Error::Config(format!(
                    "heat-path power density needs α > 1 for an increasing f', got {alpha}"
                )));
            }
        }
        let potential = Potential::Zero;
        let weights = build_weights(&grid, &potential)?;
        let rate = build_rate_matrix(&grid, &weights)?;
        Ok(FlowSystem {
            grid,
            potential,
            weights,
            rate,
            kind: SystemKind::Heat { density },
        })
    }

    /// Nonlinear drift-diffusion system with nonlinearity φ and confinement
    /// potential V.
    pub fn fokker_planck(grid: Grid, potential: Potential, phi: Phi) -> Result<Self> {
        let weights = build_weights(&grid, &potential)?;
        let rate = build_rate_matrix(&grid, &weights)?;
        Ok(FlowSystem {
            grid,
            potential,
            weights,
            rate,
            kind: SystemKind::FokkerPlanck { phi },
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn rate_matrix(&self) -> &RateMatrix {
        &self.rate
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn gradient(&self) -> Gradient {
        Gradient::new(&self.grid)
    }

    pub fn phi(&self) -> Phi {
        match self.kind {
            SystemKind::Heat { .. } => Phi::Identity,
            SystemKind::FokkerPlanck { phi } => phi,
        }
    }

    /// The mean the Onsager operator is built from.
    pub fn mean(&self) -> Mean {
        match self.kind {
            SystemKind::Heat { density } => Mean::F(density),
            SystemKind::FokkerPlanck { .. } => Mean::Logarithmic,
        }
    }

    pub fn quadratic_gamma(&self) -> Option<f64> {
        match self.potential {
            Potential::Quadratic { gamma } => Some(gamma),
            _ => None,
        }
    }

    fn check_state(&self, rho: &[f64]) -> Result<()> {
        if rho.len() != self.grid.node_count() {
            return Err(Error::SizeMismatch(format!(
                "state has {} entries, grid has {} nodes",
                rho.len(),
                self.grid.node_count()
            )));
        }
        for (i, &r) in rho.iter().enumerate() {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::Domain(format!("ρ_{i} = {r} is not positive")));
            }
        }
        Ok(())
    }

    /// u_i = φ(ρ_i)/w_i.
    pub fn u(&self, rho: &[f64]) -> Vec<f64> {
        let phi = self.phi();
        rho.iter()
            .zip(self.weights.w())
            .map(|(&r, &w)| phi.eval(r) / w)
            .collect()
    }

    /// 𝓔(ρ) = Σ (f(ρ_i) + V(x_i)ρ_i), with f normalized by f(1) = 0.
    pub fn entropy(&self, rho: &[f64]) -> Result<f64> {
        self.check_state(rho)?;
        Ok(match self.kind {
            SystemKind::Heat { density } => rho.iter().map(|&r| density.eval(r)).sum(),
            SystemKind::FokkerPlanck { phi } => {
                let c = phi.log_scale();
                rho.iter()
                    .enumerate()
                    .map(|(i, &r)| c * Density::Boltzmann.eval(r) + self.potential.value(self.grid.x(i)) * r)
                    .sum()
            }
        })
    }

    /// D𝓔(ρ): ln u_i on the drift-diffusion path, f'(ρ_i) on the linear path.
    pub fn entropy_gradient(&self, rho: &[f64]) -> Result<Vec<f64>> {
        self.check_state(rho)?;
        Ok(match self.kind {
            SystemKind::Heat { density } => rho.iter().map(|&r| density.d1(r)).collect(),
            SystemKind::FokkerPlanck { phi } => {
                let c = phi.log_scale();
                rho.iter()
                    .enumerate()
                    .map(|(i, &r)| c * r.ln() + self.potential.value(self.grid.x(i)))
                    .collect()
            }
        })
    }

    /// Diagonal of L(ρ) on the edge space: κ_e Λ(u_e, u_{e+1}) for the
    /// drift-diffusion path, Λ^f(ρ_e, ρ_{e+1}) for the linear path.
    pub fn edge_conductivity(&self, rho: &[f64]) -> Result<Vec<f64>> {
        self.check_state(rho)?;
        let mean = self.mean();
        match self.kind {
            SystemKind::Heat { .. } => (0..self.grid.edge_count())
                .map(|e| mean.eval(rho[e], rho[e + 1]))
                .collect(),
            SystemKind::FokkerPlanck { .. } => {
                let u = self.u(rho);
                let kappa = self.weights.kappa();
                (0..self.grid.edge_count())
                    .map(|e| Ok(kappa[e] * mean.eval(u[e], u[e + 1])?))
                    .collect()
            }
        }
    }

    /// Per-edge derivatives (∂L_e/∂ρ_e, ∂L_e/∂ρ_{e+1}).
    pub fn edge_conductivity_partials(&self, rho: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_state(rho)?;
        let n = self.grid.edge_count();
        let mean = self.mean();
        let mut left = Vec::with_capacity(n);
        let mut right = Vec::with_capacity(n);
        match self.kind {
            SystemKind::Heat { .. } => {
                for e in 0..n {
                    let (p1, p2) = mean.partials(rho[e], rho[e + 1])?;
                    left.push(p1);
                    right.push(p2);
                }
            }
            SystemKind::FokkerPlanck { phi } => {
                let u = self.u(rho);
                let w = self.weights.w();
                let kappa = self.weights.kappa();
                for e in 0..n {
                    let (p1, p2) = mean.partials(u[e], u[e + 1])?;
                    left.push(kappa[e] * p1 * phi.d1(rho[e]) / w[e]);
                    right.push(kappa[e] * p2 * phi.d1(rho[e + 1]) / w[e + 1]);
                }
            }
        }
        Ok((left, right))
    }

    /// Onsager operator K(ρ) = Gᵀ L(ρ) G.
    pub fn onsager(&self, rho: &[f64]) -> Result<Onsager> {
        Ok(Onsager {
            grad: self.gradient(),
            l: self.edge_conductivity(rho)?,
        })
    }

    /// Right-hand side Qφ(ρ) of the flow.
    pub fn rhs(&self, rho: &[f64]) -> Result<Vec<f64>> {
        self.check_state(rho)?;
        Ok(self.rhs_raw(rho))
    }

    /// Unvalidated right-hand side for the inner stepping loop; callers
    /// guarantee positivity (nonpositive entries propagate NaN, which the
    /// step controller rejects).
    pub(crate) fn rhs_raw(&self, rho: &[f64]) -> Vec<f64> {
        let phi = self.phi();
        let phival: Vec<f64> = rho.iter().map(|&r| phi.eval(r)).collect();
        self.rate.apply(&phival)
    }

    /// Same right-hand side through the gradient structure, −K(ρ)D𝓔(ρ).
    pub fn rhs_via_gradient_flow(&self, rho: &[f64]) -> Result<Vec<f64>> {
        let k = self.onsager(rho)?;
        let de = self.entropy_gradient(rho)?;
        Ok(k.apply(&de).iter().map(|v| -v).collect())
    }
}

/// Symmetric positive-semidefinite edge-weighted Laplacian Gᵀ L G.
#[derive(Clone, Debug)]
pub struct Onsager {
    grad: Gradient,
    l: Vec<f64>,
}

impl Onsager {
    pub fn edge_weights(&self) -> &[f64] {
        &self.l
    }

    pub fn apply(&self, psi: &[f64]) -> Vec<f64> {
        let g = self.grad.apply(psi);
        let flux: Vec<f64> = g.iter().zip(&self.l).map(|(gi, li)| gi * li).collect();
        self.grad.apply_transpose(&flux)
    }

    /// ⟨K ψ, ψ⟩ = Σ_e L_e (Gψ)_e².
    pub fn quadratic_form(&self, psi: &[f64]) -> f64 {
        self.grad
            .apply(psi)
            .iter()
            .zip(&self.l)
            .map(|(gi, li)| li * gi * gi)
            .sum()
    }

    pub fn dense(&self) -> nalgebra::DMatrix<f64> {
        let g = self.grad.dense();
        let l = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.l.clone()));
        g.transpose() * l * g
    }
}

/// Per-sample diagnostics of a computed trajectory.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SampleStats {
    pub entropy: f64,
    pub min_rho: f64,
    pub max_rho: f64,
    /// |∇_h φ(ρ)|₂ = (Σ_e h |(φ(ρ_{e+1})−φ(ρ_e))/h|²)^{1/2}
    pub grad_phi_l2: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: Vec<SampleStats>,
}

impl Trajectory {
    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least one sample")
    }
}

fn grad_phi_l2(phi: Phi, h: f64, rho: &[f64]) -> f64 {
    let sq: f64 = rho
        .windows(2)
        .map(|p| {
            let d = phi.eval(p[1]) - phi.eval(p[0]);
            d * d
        })
        .sum();
    (sq / h).sqrt()
}

fn stats_for(sys: &FlowSystem, rho: &[f64]) -> SampleStats {
    let phi = sys.phi();
    SampleStats {
        entropy: sys.entropy(rho).unwrap_or(f64::NAN),
        min_rho: rho.iter().cloned().fold(f64::INFINITY, f64::min),
        max_rho: rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        grad_phi_l2: grad_phi_l2(phi, sys.grid().h(), rho),
    }
}

/// Integrates ∂_t ρ = Qφ(ρ) from ρ0 to time `t_end` with an adaptive
/// embedded Runge–Kutta pair at absolute/relative tolerance `tol`. A trial
/// step producing a nonpositive entry is rejected and retried at half the
/// step, so mass conservation (the right-hand side has zero column sums)
/// is never touched by projections.
pub fn integrate(sys: &FlowSystem, rho0: &State, t_end: f64, tol: f64) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::Config(format!("t_end must be positive, got {t_end}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    sys.check_state(rho0)?;

    let opts = AdaptiveOptions {
        rtol: tol,
        atol: tol,
        max_steps: 50_000_000,
    };
    let mut times = Vec::new();
    let mut states: Vec<Vec<f64>> = Vec::new();

    let result = ode::dopri5(
        |_, y| {
            if y.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return vec![f64::NAN; y.len()];
            }
            sys.rhs_raw(y)
        },
        rho0,
        0.0,
        t_end,
        &opts,
        |y| y.iter().all(|&v| v > 0.0 && v.is_finite()),
        |t, y| {
            times.push(t);
            states.push(y.to_vec());
        },
    );

    match result {
        Ok(_) => {
            let stats = states.iter().map(|s| stats_for(sys, s)).collect();
            Ok(Trajectory { times, states, stats })
        }
        Err(OdeError::StepUnderflow { t, state }) => Err(Error::IntegrationFailure {
            t,
            reason: "step size underflow (stiffness or positivity barrier)".into(),
            last_state: state,
        }),
        Err(OdeError::StateRejected { t }) => Err(Error::IntegrationFailure {
            t,
            reason: "state rejected".into(),
            last_state: states.last().cloned().unwrap_or_default(),
        }),
    }
}

/// Slack allowed on the a priori estimates (they are exact statements; the
/// slack absorbs integrator and rounding error).
pub const ESTIMATE_SLACK: f64 = 1e-8;

/// Report of the zero-potential a priori estimates along a trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub checks: Vec<Check>,
    /// Smallest state entry seen anywhere; conditioning indicator for
    /// degenerate φ.
    pub min_rho_overall: f64,
}

impl EstimateReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Checks, at every sample of a zero-potential trajectory:
/// the maximum principle min ρ(0) ≤ ρ_i(t) ≤ max ρ(0); the gradient bound
/// max_e |∇_h φ(ρ(t))| ≤ h^{−1/2} |∇_h φ(ρ(0))|₂; monotone decay of
/// Σ_e (φ(ρ_{e+1}) − φ(ρ_e))²; the log-Lipschitz bound
/// max_e |∇_h φ'(ρ(t))| ≤ h^{−1/2} max_{[φ⁻¹(m), φ⁻¹(M)]} |φ''/φ'| · |∇_h ρ(0)|₂;
/// and for φ(s) = s^α with α < 1 the explicit bounds
/// min_i φ'(ρ_i(t)) ≥ α M^{α−1} and
/// max_e |∇_h φ'(ρ(t))| ≤ (1−α) m^{−2/α} h^{−1/2} |∇_h ρ(0)|₂.
pub fn apriori_monitor(sys: &FlowSystem, traj: &Trajectory) -> Result<EstimateReport> {
    if !sys.potential().is_zero() {
        return Err(Error::Scope(
            "a priori estimates are only available for the zero potential".into(),
        ));
    }
    if traj.states.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    let phi = sys.phi();
    let h = sys.grid().h();
    let rho0 = &traj.states[0];
    let m0 = rho0.iter().cloned().fold(f64::INFINITY, f64::min);
    let cap0 = rho0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let gphi0_l2 = grad_phi_l2(phi, h, rho0);
    let grho0_l2 = grad_phi_l2(Phi::Identity, h, rho0);
    let grad_inf_bound = gphi0_l2 / h.sqrt();

    let grad_inf = |rho: &[f64]| -> f64 {
        rho.windows(2)
            .map(|p| ((phi.eval(p[1]) - phi.eval(p[0])) / h).abs())
            .fold(0.0, f64::max)
    };
    let grad_dphi_inf = |rho: &[f64]| -> f64 {
        rho.windows(2)
            .map(|p| ((phi.d1(p[1]) - phi.d1(p[0])) / h).abs())
            .fold(0.0, f64::max)
    };
    let sq_sum = |rho: &[f64]| -> f64 {
        rho.windows(2)
            .map(|p| {
                let d = phi.eval(p[1]) - phi.eval(p[0]);
                d * d
            })
            .sum()
    };

    let mut max_over = 0.0f64;
    let mut min_under = 0.0f64;
    let mut grad_excess = f64::NEG_INFINITY;
    let mut decay_violation = f64::NEG_INFINITY;
    let mut prev_sq = f64::INFINITY;
    let mut worst_dphi_grad = 0.0f64;
    let mut min_dphi = f64::INFINITY;
    let mut min_rho_overall = f64::INFINITY;

    for rho in &traj.states {
        let mn = rho.iter().cloned().fold(f64::INFINITY, f64::min);
        let mx = rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        min_rho_overall = min_rho_overall.min(mn);
        max_over = max_over.max(mx - cap0);
        min_under = min_under.max(m0 - mn);
        grad_excess = grad_excess.max(grad_inf(rho) - grad_inf_bound);
        let sq = sq_sum(rho);
        decay_violation = decay_violation.max(sq - prev_sq);
        prev_sq = sq;
        worst_dphi_grad = worst_dphi_grad.max(grad_dphi_inf(rho));
        min_dphi = min_dphi.min(rho.iter().map(|&r| phi.d1(r)).fold(f64::INFINITY, f64::min));
    }

    let mut checks = Vec::new();
    let res_max = max_over.max(min_under);
    checks.push(Check::new("maximum_principle", res_max <= ESTIMATE_SLACK, res_max.max(0.0)));
    checks.push(Check::new(
        "gradient_sup_bound",
        grad_excess <= ESTIMATE_SLACK,
        grad_excess.max(0.0),
    ));
    checks.push(Check::new(
        "gradient_square_sum_monotone",
        decay_violation <= ESTIMATE_SLACK,
        decay_violation.max(0.0),
    ));

    // |φ''/φ'| is monotone in s for the carried kinds; its maximum over
    // [φ⁻¹(m), φ⁻¹(M)] sits at the left endpoint.
    let log_lipschitz = match phi {
        Phi::Identity => 0.0,
        Phi::Power { alpha } => (alpha - 1.0).abs() / phi.inverse(m0),
    };
    let grad2_bound = log_lipschitz * grho0_l2 / h.sqrt();
    let res_grad2 = worst_dphi_grad - grad2_bound;
    checks.push(Check::new(
        "dphi_gradient_bound",
        res_grad2 <= ESTIMATE_SLACK,
        res_grad2.max(0.0),
    ));

    if let Phi::Power { alpha } = phi {
        if alpha < 1.0 {
            // min φ'(ρ_i(t)) = α (max_i ρ_i(t))^{α−1} ≥ α M^{α−1} by the
            // maximum principle (s ↦ s^{α−1} is decreasing).
            let lower = alpha * cap0.powf(alpha - 1.0);
            let res = lower - min_dphi;
            checks.push(Check::new(
                "power_min_dphi_lower_bound",
                res <= ESTIMATE_SLACK,
                res.max(0.0),
            ));
            let bound = (1.0 - alpha) * m0.powf(-2.0 / alpha) * grho0_l2 / h.sqrt();
            let res = worst_dphi_grad - bound;
            checks.push(Check::new(
                "power_dphi_gradient_bound",
                res <= ESTIMATE_SLACK,
                res.max(0.0),
            ));
        }
    }

    Ok(EstimateReport {
        checks,
        min_rho_overall,
    })
}

/// Convenience used by the CLI and test suites: a full property report from
/// a fresh simulation.
pub fn simulate_and_monitor(
    sys: &FlowSystem,
    rho0: &State,
    t_end: f64,
    tol: f64,
) -> Result<(Trajectory, EstimateReport)> {
    let traj = integrate(sys, rho0, t_end, tol)?;
    let report = apriori_monitor(sys, &traj)?;
    Ok((traj, report))
}
