//! Discrete geometry of the path graph on [0, 1]: uniform grid, potential
//! weights, forward-difference gradient, and the reversible rate matrix.
//!
//! Nodes are indexed 0..=n and edges 0..n, edge e joining nodes e and e+1.
//! The gradient G is the n×(n+1) forward-difference operator
//! (Gv)_e = (v_e − v_{e+1})/h, so tridiagonal operators on the edge space
//! have size n. The rate matrix is Q = −Gᵀ diag(κ) G diag(w⁻¹) with
//! κ_e = √(w_e w_{e+1}); for w ≡ 1 it reduces to the second-difference
//! stencil h⁻²(v_{i−1} − 2v_i + v_{i+1}) with no-flux boundaries.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Uniform grid on [0, 1] with n intervals, x_i = i·h, h = 1/n.
#[derive(Clone, Copy, Debug)]
pub struct Grid {
    n: usize,
    h: f64,
}

impl Grid {
    /// A grid needs at least 2 intervals for the tridiagonal structure.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 intervals, got {n}"
            )));
        }
        Ok(Grid {
            n,
            h: 1.0 / n as f64,
        })
    }

    /// Minimal two-node chain (n = 1). Not reachable from configuration;
    /// used where the single-edge metric has a closed quadrature form.
    pub fn two_point() -> Self {
        Grid { n: 1, h: 1.0 }
    }

    pub fn intervals(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.n + 1
    }

    pub fn edge_count(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }
}

/// Confinement potential evaluated at grid nodes.
#[derive(Clone)]
pub enum Potential {
    Zero,
    /// V(x) = γ x²/2 with γ ≥ 0.
    Quadratic { gamma: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Potential {
    pub fn quadratic(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::Config(format!(
                "quadratic potential strength must be nonnegative, got {gamma}"
            )));
        }
        Ok(Potential::Quadratic { gamma })
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Quadratic { gamma } => 0.5 * gamma * x * x,
            Potential::Custom(f) => f(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Potential::Zero)
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Zero => write!(f, "Zero"),
            Potential::Quadratic { gamma } => write!(f, "Quadratic {{ gamma: {gamma} }}"),
            Potential::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Node weights w_i = e^{−V(x_i)} and edge weights κ_e = √(w_e w_{e+1}).
#[derive(Clone, Debug)]
pub struct Weights {
    w: Vec<f64>,
    kappa: Vec<f64>,
}

pub fn build_weights(grid: &Grid, potential: &Potential) -> Result<Weights> {
    let w: Vec<f64> = (0..grid.node_count())
        .map(|i| (-potential.value(grid.x(i))).exp())
        .collect();
    for (i, &wi) in w.iter().enumerate() {
        if !wi.is_finite() || wi <= 0.0 {
            return Err(Error::Domain(format!(
                "weight w_{i} = {wi} is not positive and finite"
            )));
        }
    }
    let kappa: Vec<f64> = (0..grid.edge_count())
        .map(|e| (w[e] * w[e + 1]).sqrt())
        .collect();
    Ok(Weights { w, kappa })
}

impl Weights {
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn is_uniform(&self) -> bool {
        self.w.iter().all(|&wi| wi == 1.0)
    }
}

/// Forward-difference gradient, shape edges × nodes.
#[derive(Clone, Copy, Debug)]
pub struct Gradient {
    n: usize,
    h: f64,
}

impl Gradient {
    pub fn new(grid: &Grid) -> Self {
        Gradient {
            n: grid.edge_count(),
            h: grid.h(),
        }
    }

    /// (Gv)_e = (v_e − v_{e+1})/h; annihilates constants exactly.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n + 1);
        (0..self.n).map(|e| (v[e] - v[e + 1]) / self.h).collect()
    }

    /// (Gᵀg)_i = (g_i − g_{i−1})/h with out-of-range entries zero.
    pub fn apply_transpose(&self, g: &[f64]) -> Vec<f64> {
        debug_assert_eq!(g.len(), self.n);
        (0..=self.n)
            .map(|i| {
                let right = if i < self.n { g[i] } else { 0.0 };
                let left = if i > 0 { g[i - 1] } else { 0.0 };
                (right - left) / self.h
            })
            .collect()
    }

    pub fn dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n + 1);
        for e in 0..self.n {
            m[(e, e)] = 1.0 / self.h;
            m[(e, e + 1)] = -1.0 / self.h;
        }
        m
    }
}

/// Tridiagonal rate matrix Q = −Gᵀ diag(κ) G diag(w⁻¹), stored as bands.
///
/// Satisfies Q_ij ≥ 0 off the diagonal, vanishing column sums (identically,
/// by construction of the diagonal), detailed balance Q_ij w_j = Q_ji w_i,
/// and Q w = 0.
#[derive(Clone, Debug)]
pub struct RateMatrix {
    /// sub[e] = Q_{e+1,e} = κ_e/(h² w_e)
    sub: Vec<f64>,
    diag: Vec<f64>,
    /// sup[e] = Q_{e,e+1} = κ_e/(h² w_{e+1})
    sup: Vec<f64>,
}

pub fn build_rate_matrix(grid: &Grid, weights: &Weights) -> Result<RateMatrix> {
    let n = grid.edge_count();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let w = weights.w();
    let kappa = weights.kappa();

    let sub: Vec<f64> = (0..n).map(|e| kappa[e] * inv_h2 / w[e]).collect();
    let sup: Vec<f64> = (0..n).map(|e| kappa[e] * inv_h2 / w[e + 1]).collect();
    // Column i holds sub[i] (from row i+1) and sup[i−1] (from row i−1);
    // building the diagonal from those same values makes column sums vanish
    // identically in floating point.
    let diag: Vec<f64> = (0..=n)
        .map(|i| {
            let below = if i < n { sub[i] } else { 0.0 };
            let above = if i > 0 { sup[i - 1] } else { 0.0 };
            -(below + above)
        })
        .collect();

    let q = RateMatrix { sub, diag, sup };
    q.verify(weights)?;
    Ok(q)
}

impl RateMatrix {
    pub fn node_count(&self) -> usize {
        self.diag.len()
    }

    /// (Qv)_i for a nodal vector v.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.diag.len() - 1;
        debug_assert_eq!(v.len(), n + 1);
        (0..=n)
            .map(|i| {
                let mut acc = self.diag[i] * v[i];
                if i > 0 {
                    acc += self.sub[i - 1] * v[i - 1];
                }
                if i < n {
                    acc += self.sup[i] * v[i + 1];
                }
                acc
            })
            .collect()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if j + 1 == i {
            self.sub[j]
        } else if i + 1 == j {
            self.sup[i]
        } else {
            0.0
        }
    }

    pub fn dense(&self) -> nalgebra::DMatrix<f64> {
        let m = self.diag.len();
        nalgebra::DMatrix::from_fn(m, m, |i, j| self.entry(i, j))
    }

    fn verify(&self, weights: &Weights) -> Result<()> {
        let n = self.diag.len() - 1;
        let w = weights.w();
        let scale = self
            .sub
            .iter()
            .chain(self.sup.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()));
        let tol = (1e-12f64).max(64.0 * f64::EPSILON * scale);

        for e in 0..n {
            if self.sub[e] < 0.0 || self.sup[e] < 0.0 {
                return Err(Error::Assembly(format!(
                    "negative off-diagonal rate at edge {e}"
                )));
            }
            // detailed balance: Q_{e,e+1} w_{e+1} = Q_{e+1,e} w_e
            let residual = (self.sup[e] * w[e + 1] - self.sub[e] * w[e]).abs();
            if residual > tol {
                return Err(Error::Assembly(format!(
                    "detailed balance violated at edge {e}: residual {residual:.3e}"
                )));
            }
        }
        for j in 0..=n {
            let mut col = self.diag[j];
            if j < n {
                col += self.sub[j];
            }
            if j > 0 {
                col += self.sup[j - 1];
            }
            if col.abs() > tol {
                return Err(Error::Assembly(format!(
                    "column sum {j} is {col:.3e}"
                )));
            }
        }
        let qw = self.apply(w);
        let worst = qw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if worst > tol {
            return Err(Error::Assembly(format!("‖Qw‖∞ = {worst:.3e}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grid_nodes() {
        let g = Grid::new(4).unwrap();
        let xs: Vec<f64> = (0..=4).map(|i| g.x(i)).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(Grid::new(100).unwrap().h(), 0.01);
    }

    #[test]
    fn grid_too_small() {
        assert!(Grid::new(1).is_err());
        assert!(Grid::new(0).is_err());
    }

    #[test]
    fn zero_potential_weights_are_one() {
        let g = Grid::new(4).unwrap();
        let w = build_weights(&g, &Potential::Zero).unwrap();
        assert_eq!(w.w(), &[1.0; 5]);
        assert!(w.is_uniform());
    }

    #[test]
    fn quadratic_weight_value() {
        let g = Grid::new(2).unwrap();
        let w = build_weights(&g, &Potential::quadratic(2.0).unwrap()).unwrap();
        // at x = 0.5: e^{−γ x²/2} = e^{−0.25}
        assert_abs_diff_eq!(w.w()[1], (-0.25f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn quadratic_kappa_ratio_identity() {
        // κ_{e+1} w_e / (κ_e w_{e+1}) = e^{−γh²/2} for the quadratic potential
        let gamma = 1.0;
        let g = Grid::new(8).unwrap();
        let wts = build_weights(&g, &Potential::quadratic(gamma).unwrap()).unwrap();
        let (w, k) = (wts.w(), wts.kappa());
        let expected = (-gamma * g.h() * g.h() / 2.0).exp();
        for e in 0..g.edge_count() - 1 {
            let ratio = k[e + 1] * w[e] / (k[e] * w[e + 1]);
            assert_abs_diff_eq!(ratio, expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn custom_potential_rejects_nonfinite() {
        let g = Grid::new(4).unwrap();
        let p = Potential::Custom(Arc::new(|x: f64| if x > 0.5 { f64::NAN } else { 0.0 }));
        assert!(build_weights(&g, &p).is_err());
    }

    #[test]
    fn custom_potential_builds_weights_and_rates() {
        let g = Grid::new(8).unwrap();
        let p = Potential::Custom(Arc::new(|x: f64| x));
        let w = build_weights(&g, &p).unwrap();
        for i in 0..g.node_count() {
            assert_abs_diff_eq!(w.w()[i], (-g.x(i)).exp(), epsilon = 1e-15);
        }
        // the rate matrix invariants hold for any admissible weights
        build_rate_matrix(&g, &w).unwrap();
    }

    #[test]
    fn gradient_annihilates_constants() {
        let g = Grid::new(5).unwrap();
        let grad = Gradient::new(&g);
        let out = grad.apply(&[3.0; 6]);
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rate_matrix_uniform_is_second_difference() {
        let g = Grid::new(4).unwrap();
        let w = build_weights(&g, &Potential::Zero).unwrap();
        let q = build_rate_matrix(&g, &w).unwrap();
        let v = vec![0.1, 0.3, 0.2, 0.25, 0.15];
        let qv = q.apply(&v);
        let h2 = g.h() * g.h();
        for i in 1..4 {
            let stencil = (v[i - 1] - 2.0 * v[i] + v[i + 1]) / h2;
            assert_abs_diff_eq!(qv[i], stencil, epsilon = 1e-9);
        }
        // no-flux boundary rows: ghost values v_{−1} = v_0, v_{n+1} = v_n
        assert_abs_diff_eq!(qv[0], (v[1] - v[0]) / h2, epsilon = 1e-9);
        assert_abs_diff_eq!(qv[4], (v[3] - v[4]) / h2, epsilon = 1e-9);
    }

    #[test]
    fn rate_matrix_invariants_hold() {
        for n in [4usize, 16, 32, 64] {
            let g = Grid::new(n).unwrap();
            let w = build_weights(&g, &Potential::quadratic(1.5).unwrap()).unwrap();
            let q = build_rate_matrix(&g, &w).unwrap();
            // 1e-12 at desk scales; the residual grows like ε/h² beyond
            let tol = if n <= 32 { 1e-12 } else { 8.0 * f64::EPSILON * (n * n) as f64 };
            let qw = q.apply(w.w());
            assert!(qw.iter().all(|v| v.abs() <= tol), "{qw:?}");
            for e in 0..g.edge_count() {
                let db = q.entry(e, e + 1) * w.w()[e + 1] - q.entry(e + 1, e) * w.w()[e];
                assert!(db.abs() <= tol);
            }
            for j in 0..g.node_count() {
                let col: f64 = (0..g.node_count()).map(|i| q.entry(i, j)).sum();
                assert!(col.abs() <= tol);
            }
        }
    }

    #[test]
    fn zero_potential_q_is_negative_gtg() {
        let g = Grid::new(6).unwrap();
        let w = build_weights(&g, &Potential::Zero).unwrap();
        let q = build_rate_matrix(&g, &w).unwrap();
        let grad = Gradient::new(&g);
        let gtg = grad.dense().transpose() * grad.dense();
        let qd = q.dense();
        for i in 0..g.node_count() {
            for j in 0..g.node_count() {
                assert_abs_diff_eq!(qd[(i, j)], -gtg[(i, j)], epsilon = 1e-14 * (1.0 + gtg[(i, j)].abs()));
            }
        }
    }
}
