//! The quadratic-flux construction whose convexity matrix fails to be
//! positive semidefinite.
//!
//! Setup: φ(s) = s², U'(s) = 2s, unit weights, arithmetic edge mean
//! Λ(s,t) = (s+t)/2 (the mean with Λ(ρ_i,ρ_{i+1})(U'(ρ_i) − U'(ρ_{i+1})) =
//! φ(ρ_i) − φ(ρ_{i+1})). The 2×2 minor d₁d₂ − c₁² built below is a
//! homogeneous quartic in (ρ₀,…,ρ₄) whose ρ₂⁴ coefficient is −13/4, so the
//! minor is negative on ρ₂-dominant states and the matrix cannot be PSD.
//!
//! `minor_polynomial` reconstructs the quartic exactly from point values by
//! tensor-grid interpolation in rational arithmetic; `reference_coefficients`
//! is the known expansion it must reproduce coefficient by coefficient.

use crate::error::{Error, Result};
use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

type Q = Ratio<i64>;

fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

/// First diagonal entry of the minor. Uses the no-flux ghost value
/// ρ_{−1} = ρ₀ in the left second difference and a single mean factor in
/// the leading term:
/// d₁ = Λ(ρ₀,ρ₁)(φ'(ρ₀)+φ'(ρ₁)) + ½(φ(ρ₀)−2φ(ρ₀)+φ(ρ₁)) + ½(φ(ρ₀)−2φ(ρ₁)+φ(ρ₂)).
fn d1(r: &[f64]) -> f64 {
    let lam = 0.5 * (r[0] + r[1]);
    let phi = |s: f64| s * s;
    let dphi = |s: f64| 2.0 * s;
    lam * (dphi(r[0]) + dphi(r[1]))
        + 0.5 * (phi(r[1]) - phi(r[0]))
        + 0.5 * (phi(r[0]) - 2.0 * phi(r[1]) + phi(r[2]))
}

/// Interior diagonal entry on the edge joining ρ₂ and ρ₃:
/// d₂ = 2Λ(ρ₂,ρ₃)(φ'(ρ₂)+φ'(ρ₃)) + ½(φ(ρ₁)−2φ(ρ₂)+φ(ρ₃)) + ½(φ(ρ₂)−2φ(ρ₃)+φ(ρ₄)).
fn d2(r: &[f64]) -> f64 {
    let lam = 0.5 * (r[2] + r[3]);
    let phi = |s: f64| s * s;
    let dphi = |s: f64| 2.0 * s;
    2.0 * lam * (dphi(r[2]) + dphi(r[3]))
        + 0.5 * (phi(r[1]) - 2.0 * phi(r[2]) + phi(r[3]))
        + 0.5 * (phi(r[2]) - 2.0 * phi(r[3]) + phi(r[4]))
}

/// Coupling between the two edges: c₁ = −φ'(ρ₂)(Λ(ρ₁,ρ₂) + Λ(ρ₂,ρ₃)).
fn c1(r: &[f64]) -> f64 {
    -2.0 * r[2] * (0.5 * (r[1] + r[2]) + 0.5 * (r[2] + r[3]))
}

/// Second principal minor d₁d₂ − c₁² (without the 1/h² scale) at a state
/// with at least five components; only the first five are used.
pub fn minor_value(rho: &[f64]) -> Result<f64> {
    if rho.len() < 5 {
        return Err(Error::Scope(format!(
            "the minor needs at least five state components, got {}",
            rho.len()
        )));
    }
    for (i, &v) in rho.iter().take(5).enumerate() {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Domain(format!("ρ_{i} = {v} is not positive")));
        }
    }
    let r = &rho[..5];
    Ok(d1(r) * d2(r) - c1(r) * c1(r))
}

/// Exact-rational twin of `minor_value`, defined for any rational point
/// (the minor is a polynomial).
pub fn minor_value_exact(r: &[Q; 5]) -> Q {
    let half = q(1, 2);
    let two = q(2, 1);
    let phi = |s: Q| s * s;
    let dphi = |s: Q| two * s;
    let am = |a: Q, b: Q| half * (a + b);

    let lam01 = am(r[0], r[1]);
    let d1 = lam01 * (dphi(r[0]) + dphi(r[1]))
        + half * (phi(r[1]) - phi(r[0]))
        + half * (phi(r[0]) - two * phi(r[1]) + phi(r[2]));
    let lam23 = am(r[2], r[3]);
    let d2 = two * lam23 * (dphi(r[2]) + dphi(r[3]))
        + half * (phi(r[1]) - two * phi(r[2]) + phi(r[3]))
        + half * (phi(r[2]) - two * phi(r[3]) + phi(r[4]));
    let c1 = -dphi(r[2]) * (am(r[1], r[2]) + am(r[2], r[3]));
    d1 * d2 - c1 * c1
}

/// Exact inverse of the 5×5 Vandermonde matrix on nodes 0..4.
fn vandermonde_inverse() -> [[Q; 5]; 5] {
    let mut a = [[q(0, 1); 10]; 5];
    for (i, row) in a.iter_mut().enumerate() {
        for j in 0..5 {
            row[j] = q((i as i64).pow(j as u32), 1);
            row[5 + j] = if i == j { q(1, 1) } else { q(0, 1) };
        }
    }
    // Gauss-Jordan
    for col in 0..5 {
        let piv_row = (col..5)
            .find(|&r| a[r][col] != q(0, 1))
            .expect("Vandermonde on distinct nodes is invertible");
        a.swap(col, piv_row);
        let piv = a[col][col];
        for j in 0..10 {
            a[col][j] /= piv;
        }
        for r in 0..5 {
            if r != col && a[r][col] != q(0, 1) {
                let factor = a[r][col];
                for j in 0..10 {
                    let v = a[col][j];
                    a[r][j] -= factor * v;
                }
            }
        }
    }
    let mut inv = [[q(0, 1); 5]; 5];
    for i in 0..5 {
        for j in 0..5 {
            inv[i][j] = a[i][5 + j];
        }
    }
    inv
}

/// Exact monomial expansion of the minor: evaluates it on the grid
/// {0,…,4}⁵ and inverts the Vandermonde system along each axis. Keys are
/// exponent tuples (e₀,…,e₄) of ρ₀^{e₀}···ρ₄^{e₄}; only nonzero
/// coefficients are kept.
pub fn minor_polynomial() -> BTreeMap<[u8; 5], Q> {
    let vinv = vandermonde_inverse();
    let mut vals = vec![q(0, 1); 3125];
    for idx in 0..3125usize {
        let mut rem = idx;
        let mut point = [q(0, 1); 5];
        for a in (0..5).rev() {
            point[a] = q((rem % 5) as i64, 1);
            rem /= 5;
        }
        vals[idx] = minor_value_exact(&point);
    }

    // values → coefficients, one axis at a time
    for axis in 0..5usize {
        let stride = 5usize.pow((4 - axis) as u32);
        let block = stride * 5;
        let mut out = vals.clone();
        for base in (0..3125).step_by(block) {
            for offset in 0..stride {
                let line: Vec<Q> = (0..5).map(|j| vals[base + offset + j * stride]).collect();
                for (k, row) in vinv.iter().enumerate() {
                    let mut acc = q(0, 1);
                    for (j, &v) in line.iter().enumerate() {
                        acc += row[j] * v;
                    }
                    out[base + offset + k * stride] = acc;
                }
            }
        }
        vals = out;
    }

    let mut coeffs = BTreeMap::new();
    for idx in 0..3125usize {
        if vals[idx] != q(0, 1) {
            let mut rem = idx;
            let mut exps = [0u8; 5];
            for a in (0..5).rev() {
                exps[a] = (rem % 5) as u8;
                rem /= 5;
            }
            coeffs.insert(exps, vals[idx]);
        }
    }
    coeffs
}

/// The known expansion of d₁d₂ − c₁²: twenty monomials, all of total
/// degree four.
pub fn reference_coefficients() -> BTreeMap<[u8; 5], Q> {
    let entries: [([u8; 5], Q); 20] = [
        ([2, 2, 0, 0, 0], q(1, 2)),
        ([2, 0, 2, 0, 0], q(3, 2)),
        ([2, 0, 1, 1, 0], q(4, 1)),
        ([2, 0, 0, 2, 0], q(3, 2)),
        ([2, 0, 0, 0, 2], q(1, 2)),
        ([1, 3, 0, 0, 0], q(1, 1)),
        ([1, 1, 2, 0, 0], q(3, 1)),
        ([1, 1, 1, 1, 0], q(8, 1)),
        ([1, 1, 0, 2, 0], q(3, 1)),
        ([1, 1, 0, 0, 2], q(1, 1)),
        ([0, 4, 0, 0, 0], q(1, 4)),
        ([0, 2, 1, 1, 0], q(2, 1)),
        ([0, 2, 0, 2, 0], q(3, 4)),
        ([0, 2, 0, 0, 2], q(1, 4)),
        ([0, 1, 3, 0, 0], q(-4, 1)),
        ([0, 1, 2, 1, 0], q(-2, 1)),
        ([0, 0, 4, 0, 0], q(-13, 4)),
        ([0, 0, 3, 1, 0], q(-2, 1)),
        ([0, 0, 2, 2, 0], q(-1, 4)),
        ([0, 0, 2, 0, 2], q(1, 4)),
    ];
    entries.into_iter().collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub draw_index: usize,
    pub rho: Vec<f64>,
    pub minor: f64,
}

/// Randomized search for a simplex state with negative minor. Draws are
/// indexed and independently seeded so the result does not depend on
/// evaluation order; the proposal boosts ρ₂, where the quartic's negative
/// coefficient dominates.
pub fn search_witness(max_draws: usize, seed: u64) -> Option<Witness> {
    for i in 0..max_draws {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ 0xc2b2_ae3d_27d4_eb4fu64.wrapping_mul(i as u64 + 1));
        let mut rho: Vec<f64> = (0..5)
            .map(|_| (-(1.0 - rng.random::<f64>()).ln()).max(1e-12))
            .collect();
        let boost = 10f64.powf(2.0 * rng.random::<f64>());
        rho[2] *= boost;
        let sum: f64 = rho.iter().sum();
        for v in rho.iter_mut() {
            *v /= sum;
        }
        if let Ok(m) = minor_value(&rho) {
            if m < 0.0 {
                return Some(Witness {
                    draw_index: i,
                    rho,
                    minor: m,
                });
            }
        }
    }
    None
}
