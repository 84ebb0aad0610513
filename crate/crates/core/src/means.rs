//! Mean functions on the positive quadrant.
//!
//! The transport metrics in this crate are built from two-variable means:
//! the logarithmic mean Λ(s,t) = (s−t)/(ln s − ln t), the f-mean
//! Λ^f(s,t) = (s−t)/(f'(s)−f'(t)) attached to an entropy density f, and the
//! power mean Λ^α(s,t) = (α−1)/α · (s^α−t^α)/(s^{α−1}−t^{α−1}) induced by the
//! nonlinearity φ(s) = s^α. All of them agree with their diagonal limits and
//! are evaluated through a Taylor branch near s = t so that values and
//! partial derivatives stay finite and C¹ across the diagonal.
//!
//! The checkers at the bottom verify the identities the convexity
//! certificates rely on: the closed-form partials, the sum rule
//! ∂₁Λ + ∂₂Λ = Λ²/(st), the Legendre-type maximum identity, the
//! 2√(ab)-lower bound, and joint concavity via the second-difference
//! inequality.

use crate::error::{Error, Result};
use crate::report::{Check, PropertyReport};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Relative distance below which the diagonal (Taylor) branch is used.
/// Keeps the evaluation C¹ across s = t without a measurable accuracy loss.
const DIAGONAL_THRESHOLD: f64 = 1e-8;

/// Pass threshold for the property checkers.
const CHECK_TOL: f64 = 1e-6;

fn ensure_positive(label: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Domain(format!(
            "{label} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

/// Entropy densities with analytic derivatives, normalized so that f(1) = 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Density {
    /// s ln s − s + 1
    Boltzmann,
    /// s^α − 1
    Power { alpha: f64 },
}

impl Density {
    pub fn power(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::Config(format!(
                "power density exponent must be positive, got {alpha}"
            )));
        }
        Ok(Density::Power { alpha })
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Density::Boltzmann => s * s.ln() - s + 1.0,
            Density::Power { alpha } => s.powf(*alpha) - 1.0,
        }
    }

    pub fn d1(&self, s: f64) -> f64 {
        match self {
            Density::Boltzmann => s.ln(),
            Density::Power { alpha } => alpha * s.powf(alpha - 1.0),
        }
    }

    pub fn d2(&self, s: f64) -> f64 {
        match self {
            Density::Boltzmann => 1.0 / s,
            Density::Power { alpha } => alpha * (alpha - 1.0) * s.powf(alpha - 2.0),
        }
    }

    pub fn d3(&self, s: f64) -> f64 {
        match self {
            Density::Boltzmann => -1.0 / (s * s),
            Density::Power { alpha } => {
                alpha * (alpha - 1.0) * (alpha - 2.0) * s.powf(alpha - 3.0)
            }
        }
    }

    /// f'(s) − f'(t) without cancellation: the difference is routed through
    /// ln1p/expm1 so its relative accuracy does not degrade near s = t.
    /// Arguments are ordered internally, making the antisymmetry exact.
    pub fn d1_diff(&self, s: f64, t: f64) -> f64 {
        if s < t {
            return -self.d1_diff(t, s);
        }
        let log_ratio = ((s - t) / t).ln_1p();
        match self {
            Density::Boltzmann => log_ratio,
            Density::Power { alpha } => {
                alpha * t.powf(alpha - 1.0) * ((alpha - 1.0) * log_ratio).exp_m1()
            }
        }
    }
}

/// Logarithmic mean (s − t)/(ln s − ln t), with Λ(s, s) = s.
pub fn log_mean(s: f64, t: f64) -> Result<f64> {
    ensure_positive("s", s)?;
    ensure_positive("t", t)?;
    Ok(log_mean_unchecked(s, t))
}

pub(crate) fn log_mean_unchecked(s: f64, t: f64) -> f64 {
    // ordered arguments make the symmetry Λ(s,t) = Λ(t,s) bitwise exact
    let (a, b) = if s >= t { (s, t) } else { (t, s) };
    let diff = a - b;
    if diff <= DIAGONAL_THRESHOLD * a {
        // Λ = m − δ²/(3m) + O(δ⁴/m³) around the midpoint m, δ = (s−t)/2
        let m = 0.5 * (a + b);
        let d = 0.5 * diff;
        return m - d * d / (3.0 * m);
    }
    // ln(a/b) = ln1p((a−b)/b) keeps the log difference fully accurate when
    // a/b is close to 1 (a − b is exact there by Sterbenz)
    diff / (diff / b).ln_1p()
}

/// Partial derivatives (∂₁Λ, ∂₂Λ) of the logarithmic mean, using the closed
/// form ∂₁Λ(s,t) = Λ(s,t)(s − Λ(s,t))/(s(s−t)) off the diagonal and the
/// limit value 1/2 on it.
pub fn log_mean_partials(s: f64, t: f64) -> Result<(f64, f64)> {
    ensure_positive("s", s)?;
    ensure_positive("t", t)?;
    Ok(log_mean_partials_unchecked(s, t))
}

pub(crate) fn log_mean_partials_unchecked(s: f64, t: f64) -> (f64, f64) {
    let diff = s - t;
    if diff.abs() <= DIAGONAL_THRESHOLD * s.max(t) {
        let m = 0.5 * (s + t);
        let d = 0.5 * diff;
        // ∂₁Λ = 1/2 − δ/(3m) + O(δ²), ∂₂Λ = 1/2 + δ/(3m) + O(δ²)
        return (0.5 - d / (3.0 * m), 0.5 + d / (3.0 * m));
    }
    let lam = log_mean_unchecked(s, t);
    let d1 = lam * (s - lam) / (s * diff);
    let d2 = lam * (lam - t) / (t * diff);
    (d1, d2)
}

/// f-mean Λ^f(s,t) = (s−t)/(f'(s)−f'(t)), with Λ^f(s,s) = 1/f''(s).
pub fn f_mean(f: &Density, s: f64, t: f64) -> Result<f64> {
    ensure_positive("s", s)?;
    ensure_positive("t", t)?;
    let diff = s - t;
    if diff.abs() <= DIAGONAL_THRESHOLD * s.max(t) {
        let f2 = f.d2(0.5 * (s + t));
        if f2 <= 0.0 || !f2.is_finite() {
            return Err(Error::DegenerateMean(format!(
                "f''({s}) = {f2} is not positive on the diagonal"
            )));
        }
        return Ok(1.0 / f2);
    }
    let denom = f.d1_diff(s, t);
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::DegenerateMean(format!(
            "f'(s) = f'(t) with s = {s}, t = {t}"
        )));
    }
    let v = diff / denom;
    if v <= 0.0 {
        return Err(Error::DegenerateMean(format!(
            "f' is not increasing between {t} and {s}"
        )));
    }
    Ok(v)
}

/// Partial derivatives of the f-mean:
/// ∂₁Λ^f = Λ^f(1 − Λ^f f''(s))/(s−t), diagonal value −f'''/(2f''²).
pub fn f_mean_partials(f: &Density, s: f64, t: f64) -> Result<(f64, f64)> {
    ensure_positive("s", s)?;
    ensure_positive("t", t)?;
    let diff = s - t;
    if diff.abs() <= DIAGONAL_THRESHOLD * s.max(t) {
        let m = 0.5 * (s + t);
        let f2 = f.d2(m);
        if f2 <= 0.0 || !f2.is_finite() {
            return Err(Error::DegenerateMean(format!(
                "f''({m}) = {f2} is not positive on the diagonal"
            )));
        }
        let d = -f.d3(m) / (2.0 * f2 * f2);
        return Ok((d, d));
    }
    let lam = f_mean(f, s, t)?;
    let d1 = lam * (1.0 - lam * f.d2(s)) / diff;
    let d2 = lam * (lam * f.d2(t) - 1.0) / diff;
    Ok((d1, d2))
}

/// Power mean Λ^α(s,t) = (α−1)/α · (s^α−t^α)/(s^{α−1}−t^{α−1}), the mean
/// induced by the nonlinearity φ(s) = s^α; Λ^α(s,s) = s. The α → 1 limit is
/// the logarithmic mean and is taken as an explicit branch; α = 2 reduces to
/// the arithmetic mean exactly.
pub fn power_mean(alpha: f64, s: f64, t: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "power mean exponent must be positive, got {alpha}"
        )));
    }
    ensure_positive("s", s)?;
    ensure_positive("t", t)?;
    if alpha == 1.0 {
        return Ok(log_mean_unchecked(s, t));
    }
    if alpha == 2.0 {
        return Ok(0.5 * (s + t));
    }
    let diff = s - t;
    if diff.abs() <= DIAGONAL_THRESHOLD * s.max(t) {
        return Ok(0.5 * (s + t));
    }
    // ordered arguments for bitwise symmetry;
    // a^α − b^α = b^α·expm1(α·ln(a/b)) keeps both differences accurate
    let (a, b) = if s >= t { (s, t) } else { (t, s) };
    let log_ratio = ((a - b) / b).ln_1p();
    let num = (alpha * log_ratio).exp_m1();
    let den = ((alpha - 1.0) * log_ratio).exp_m1();
    if den == 0.0 || !den.is_finite() {
        return Err(Error::DegenerateMean(format!(
            "power mean denominator vanished at ({s}, {t})"
        )));
    }
    Ok((alpha - 1.0) / alpha * b * num / den)
}

/// Partial derivatives of the power mean, via its ratio structure with
/// φ(s) = s^α and U'(s) = α/(α−1) s^{α−1}: ∂₁Λ = α s^{α−2}(s − Λ)/(U'(s)−U'(t)).
pub fn power_mean_partials(alpha: f64, s: f64, t: f64) -> Result<(f64, f64)> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::Domain(format!(
            "power mean exponent must be positive, got {alpha}"
        )));
    }
    ensure_positive("s", s)?;
    ensure_positive("t", t)?;
    if alpha == 1.0 {
        return Ok(log_mean_partials_unchecked(s, t));
    }
    let diff = s - t;
    if alpha == 2.0 || diff.abs() <= DIAGONAL_THRESHOLD * s.max(t) {
        return Ok((0.5, 0.5));
    }
    let lam = power_mean(alpha, s, t)?;
    let du = alpha / (alpha - 1.0) * (s.powf(alpha - 1.0) - t.powf(alpha - 1.0));
    let d1 = alpha * s.powf(alpha - 2.0) * (s - lam) / du;
    let d2 = alpha * t.powf(alpha - 2.0) * (lam - t) / du;
    Ok((d1, d2))
}

/// Mean Λ(s,t) = (φ(s)−φ(t))/(U'(s)−U'(t)) for a pair (φ, U) with
/// s U''(s) = φ'(s), evaluated from caller-supplied handles. The diagonal
/// branch is the l'Hôpital value φ'(s)/U''(s).
pub fn em_mean(
    phi: impl Fn(f64) -> f64,
    dphi: impl Fn(f64) -> f64,
    uprime: impl Fn(f64) -> f64,
    d2u: impl Fn(f64) -> f64,
    s: f64,
    t: f64,
) -> Result<f64> {
    ensure_positive("s", s)?;
    ensure_positive("t", t)?;
    let diff = s - t;
    if diff.abs() <= DIAGONAL_THRESHOLD * s.max(t) {
        let m = 0.5 * (s + t);
        let den = d2u(m);
        if den == 0.0 || !den.is_finite() {
            return Err(Error::DegenerateMean(format!(
                "U''({m}) = {den} on the diagonal"
            )));
        }
        return Ok(dphi(m) / den);
    }
    let den = uprime(s) - uprime(t);
    if den == 0.0 || !den.is_finite() {
        return Err(Error::DegenerateMean(format!(
            "U'(s) = U'(t) with s = {s}, t = {t}"
        )));
    }
    Ok((phi(s) - phi(t)) / den)
}

/// The mean functions the flow systems are built from.
#[derive(Clone, Copy, Debug, Serialize)]
pub enum Mean {
    Logarithmic,
    /// Λ^f for an entropy density f.
    F(Density),
    /// Λ^α induced by φ(s) = s^α (arithmetic mean at α = 2).
    Power { alpha: f64 },
}

impl Mean {
    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        match self {
            Mean::Logarithmic => log_mean(s, t),
            Mean::F(f) => f_mean(f, s, t),
            Mean::Power { alpha } => power_mean(*alpha, s, t),
        }
    }

    pub fn partials(&self, s: f64, t: f64) -> Result<(f64, f64)> {
        match self {
            Mean::Logarithmic => log_mean_partials(s, t),
            Mean::F(f) => f_mean_partials(f, s, t),
            Mean::Power { alpha } => power_mean_partials(*alpha, s, t),
        }
    }
}

/// 64-point log-spaced grid over [1e-3·t, 1e3·t], the coarse stage of the
/// maximum-identity check.
pub fn default_r_grid(t: f64) -> Vec<f64> {
    let lo = (1e-3 * t).ln();
    let hi = (1e3 * t).ln();
    (0..64)
        .map(|k| (lo + (hi - lo) * k as f64 / 63.0).exp())
        .collect()
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..120 {
        if (b - a).abs() <= 1e-13 * (a.abs() + b.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

/// Verifies the structural identities of the logarithmic mean at (s, t):
/// (i) symmetry, (ii) the closed-form first partial against central finite
/// differences, (iii) the sum rule ∂₁Λ + ∂₂Λ = Λ²/(st), (iv) the maximum
/// identity max_{r≥0}(Λ(r,t) − ∂₁Λ(t,s)·r) = t·∂₁Λ(s,t) by grid search plus
/// golden-section refinement, (v) Λ(s,t)(a/s + b/t) ≥ 2√(ab).
pub fn check_lemma_a1(s: f64, t: f64, a: f64, b: f64, r_grid: &[f64]) -> Result<PropertyReport> {
    ensure_positive("s", s)?;
    ensure_positive("t", t)?;
    ensure_positive("a", a)?;
    ensure_positive("b", b)?;
    if r_grid.is_empty() || r_grid.iter().any(|&r| r <= 0.0) {
        return Err(Error::Domain("r_grid must be a finite positive grid".into()));
    }

    let mut report = PropertyReport::default();
    let lam = log_mean_unchecked(s, t);
    let (d1, d2) = log_mean_partials_unchecked(s, t);

    // (i) Λ(s,t) = Λ(t,s) and ∂₁Λ(s,t) = ∂₂Λ(t,s)
    let lam_swap = log_mean_unchecked(t, s);
    let (_, d2_swap) = log_mean_partials_unchecked(t, s);
    let res_i = ((lam - lam_swap) / lam).abs().max(((d1 - d2_swap) / d1.abs().max(1e-300)).abs());
    report.push(Check::new("symmetry", res_i <= CHECK_TOL, res_i).with_witness(vec![s, t]));

    // (ii) closed-form ∂₁Λ against a central difference at step 1e-5·s
    let h = 1e-5 * s;
    let fd = (log_mean_unchecked(s + h, t) - log_mean_unchecked(s - h, t)) / (2.0 * h);
    let res_ii = ((d1 - fd) / d1.abs().max(1e-300)).abs();
    report.push(Check::new("partial_closed_form", res_ii <= CHECK_TOL, res_ii).with_witness(vec![s, t]));

    // (iii) ∂₁Λ + ∂₂Λ = Λ²/(st)
    let res_iii = ((d1 + d2 - lam * lam / (s * t)) / (lam * lam / (s * t))).abs();
    report.push(Check::new("partial_sum_rule", res_iii <= CHECK_TOL, res_iii).with_witness(vec![s, t]));

    // (iv) max_{r≥0}(Λ(r,t) − ∂₁Λ(t,s)·r) = t·∂₁Λ(s,t); the slope uses the
    // swapped arguments, i.e. ∂₁Λ(t,s) = ∂₂Λ(s,t). The objective is concave
    // in r, so a coarse grid pass plus golden-section refinement finds the
    // maximum value (no claim is made about the maximizer itself).
    let slope = d2;
    let objective = |r: f64| log_mean_unchecked(r, t) - slope * r;
    let mut best_k = 0;
    let mut best = f64::NEG_INFINITY;
    for (k, &r) in r_grid.iter().enumerate() {
        let v = objective(r);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let lo = if best_k == 0 { r_grid[0] * 0.5 } else { r_grid[best_k - 1] };
    let hi = if best_k + 1 == r_grid.len() {
        r_grid[best_k] * 2.0
    } else {
        r_grid[best_k + 1]
    };
    let found = golden_max(objective, lo, hi).max(best);
    let expected = t * d1;
    let res_iv = ((found - expected) / expected.abs().max(1e-300)).abs();
    report.push(Check::new("maximum_identity", res_iv <= CHECK_TOL, res_iv).with_witness(vec![s, t]));

    // (v) Λ(s,t)(a/s + b/t) ≥ 2√(ab)
    let margin = lam * (a / s + b / t) - 2.0 * (a * b).sqrt();
    let res_v = (-margin).max(0.0) / (a * b).sqrt().max(1e-300);
    report.push(Check::new("sqrt_lower_bound", res_v <= CHECK_TOL, res_v).with_witness(vec![s, t, a, b]));

    Ok(report)
}

/// Checks joint concavity of a mean on random samples: the second-difference
/// inequality
///   −Λ(u₀,u₁) + 2Λ(u₁,u₂) − Λ(u₂,u₃)
///     ≥ ∂₁Λ(u₁,u₂)(−u₀+2u₁−u₂) + ∂₂Λ(u₁,u₂)(−u₁+2u₂−u₃)
/// on random positive quadruples, and negative semidefiniteness of the
/// finite-difference Hessian at random points (step 1e-4·scale, eigenvalue
/// tolerance 1e-6).
pub fn check_concavity(mean: &Mean, samples: usize, seed: u64) -> Result<PropertyReport> {
    let mut report = PropertyReport::default();

    let mut worst_soineq = 0.0f64;
    let mut soineq_witness = None;
    let mut worst_eig = f64::NEG_INFINITY;
    let mut eig_witness = None;

    let draw = |rng: &mut ChaCha8Rng| -> f64 {
        // log-uniform over [1e-2, 1e2]
        let e: f64 = rng.random_range(-2.0..2.0);
        10f64.powf(e)
    };

    for k in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(k as u64 + 1)));
        let u: Vec<f64> = (0..4).map(|_| draw(&mut rng)).collect();

        let lhs = -mean.eval(u[0], u[1])? + 2.0 * mean.eval(u[1], u[2])? - mean.eval(u[2], u[3])?;
        let (p1, p2) = mean.partials(u[1], u[2])?;
        let rhs = p1 * (-u[0] + 2.0 * u[1] - u[2]) + p2 * (-u[1] + 2.0 * u[2] - u[3]);
        let scale = u.iter().cloned().fold(1.0f64, f64::max);
        let violation = (rhs - lhs) / scale;
        if violation > worst_soineq {
            worst_soineq = violation;
            soineq_witness = Some(u.clone());
        }

        // Hessian of Λ at a random point by second central differences
        let (s, t) = (u[0], u[1]);
        let hs = 1e-4 * s;
        let ht = 1e-4 * t;
        let f = |a: f64, b: f64| mean.eval(a, b);
        let h11 = (f(s + hs, t)? - 2.0 * f(s, t)? + f(s - hs, t)?) / (hs * hs);
        let h22 = (f(s, t + ht)? - 2.0 * f(s, t)? + f(s, t - ht)?) / (ht * ht);
        let h12 = (f(s + hs, t + ht)? - f(s + hs, t - ht)? - f(s - hs, t + ht)?
            + f(s - hs, t - ht)?)
            / (4.0 * hs * ht);
        let tr = h11 + h22;
        let det = h11 * h22 - h12 * h12;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        let max_eig = 0.5 * (tr + disc);
        // Second differences of Λ carry rounding noise ~ ε·Λ/h² per entry;
        // only a violation beyond that floor counts, measured against the
        // Hessian's own scale.
        let lam = f(s, t)?;
        let noise = 32.0
            * f64::EPSILON
            * lam.abs()
            * (1.0 / (hs * hs) + 1.0 / (ht * ht) + 1.0 / (hs * ht));
        let hnorm = (h11 * h11 + h22 * h22 + 2.0 * h12 * h12).sqrt();
        let rel = (max_eig - noise).max(0.0) / (1.0 + hnorm);
        if rel > worst_eig {
            worst_eig = rel;
            eig_witness = Some(vec![s, t]);
        }
    }

    let mut soineq_check = Check::new(
        "second_difference_inequality",
        worst_soineq <= 1e-10,
        worst_soineq.max(0.0),
    );
    if let Some(w) = soineq_witness {
        soineq_check = soineq_check.with_witness(w);
    }
    report.push(soineq_check);

    let mut hess_check = Check::new(
        "hessian_negative_semidefinite",
        worst_eig <= CHECK_TOL,
        worst_eig.max(0.0),
    );
    if let Some(w) = eig_witness {
        hess_check = hess_check.with_witness(w);
    }
    report.push(hess_check);

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_mean_diagonal() {
        assert_eq!(log_mean(2.0, 2.0).unwrap(), 2.0);
    }

    #[test]
    fn log_mean_at_one_and_e() {
        let e = std::f64::consts::E;
        assert_relative_eq!(log_mean(1.0, e).unwrap(), e - 1.0, max_relative = 1e-15);
    }

    #[test]
    fn log_mean_one_four() {
        // 3/ln 4, cross-checked against quadrature of ∫₀¹ s^θ t^{1−θ} dθ
        assert_relative_eq!(
            log_mean(1.0, 4.0).unwrap(),
            2.164042561333445,
            max_relative = 1e-14
        );
    }

    #[test]
    fn log_mean_rejects_nonpositive() {
        assert!(log_mean(0.0, 1.0).is_err());
        assert!(log_mean(1.0, -2.0).is_err());
        assert!(log_mean(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn log_mean_continuous_across_diagonal_branch() {
        let s = 1.0;
        for &t in &[1.0 + 0.9e-8, 1.0 + 1.1e-8] {
            let v = log_mean(s, t).unwrap();
            assert_relative_eq!(v, 0.5 * (s + t), max_relative = 1e-12);
        }
    }

    #[test]
    fn f_mean_boltzmann_is_log_mean() {
        let f = Density::Boltzmann;
        assert_relative_eq!(
            f_mean(&f, 1.0, 4.0).unwrap(),
            log_mean(1.0, 4.0).unwrap(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn f_mean_quadratic_is_constant_half() {
        let f = Density::Power { alpha: 2.0 };
        assert_relative_eq!(f_mean(&f, 0.3, 1.7).unwrap(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(f_mean(&f, 5.0, 5.0).unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn f_mean_power_example() {
        let f = Density::Power { alpha: 1.5 };
        assert_relative_eq!(
            f_mean(&f, 1.0, 2.0).unwrap(),
            1.60947570824873,
            max_relative = 1e-14
        );
        // finite-difference limit check toward the diagonal
        let diag = f_mean(&f, 2.0, 2.0).unwrap();
        let near = f_mean(&f, 2.0 + 1e-7, 2.0).unwrap();
        assert_relative_eq!(diag, near, max_relative = 1e-6);
    }

    #[test]
    fn f_mean_degenerate_detected() {
        // f concave makes f' decreasing, so the off-diagonal ratio is negative
        let f = Density::Power { alpha: 0.5 };
        assert!(matches!(
            f_mean(&f, 1.0, 2.0),
            Err(Error::DegenerateMean(_))
        ));
    }

    #[test]
    fn power_mean_alpha_two_is_arithmetic_exactly() {
        for &(s, t) in &[(1.0, 3.0), (0.1, 0.7), (2.5, 2.5)] {
            assert_eq!(power_mean(2.0, s, t).unwrap(), 0.5 * (s + t));
        }
        assert_eq!(power_mean(2.0, 1.0, 3.0).unwrap(), 2.0);
    }

    #[test]
    fn power_mean_alpha_one_is_log_mean() {
        assert_eq!(
            power_mean(1.0, 1.0, 4.0).unwrap(),
            log_mean(1.0, 4.0).unwrap()
        );
    }

    #[test]
    fn power_mean_half_on_one_four() {
        // (α−1)/α (s^α−t^α)/(s^{α−1}−t^{α−1}) at α=1/2 on (1,4) equals 2,
        // matching the pair (φ, U') with φ(s)=√s, U'(s) = −s^{−1/2}
        assert_relative_eq!(power_mean(0.5, 1.0, 4.0).unwrap(), 2.0, max_relative = 1e-14);
        let em = em_mean(
            |s| s.sqrt(),
            |s| 0.5 / s.sqrt(),
            |s| -1.0 / s.sqrt(),
            |s| 0.5 * s.powf(-1.5),
            1.0,
            4.0,
        )
        .unwrap();
        assert_relative_eq!(em, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn power_mean_rejects_bad_alpha() {
        assert!(power_mean(0.0, 1.0, 2.0).is_err());
        assert!(power_mean(-1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn power_mean_diagonal_is_identity() {
        assert_relative_eq!(power_mean(0.7, 3.0, 3.0).unwrap(), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn em_mean_examples() {
        // φ(s)=s², U'(s)=2s reduces to the arithmetic mean
        let v = em_mean(|s| s * s, |s| 2.0 * s, |s| 2.0 * s, |_| 2.0, 1.0, 3.0).unwrap();
        assert_eq!(v, 2.0);
        // φ(s)=s, U(s)=s(ln s − 1) reduces to the logarithmic mean
        let e = std::f64::consts::E;
        let v = em_mean(|s| s, |_| 1.0, |s| s.ln(), |s| 1.0 / s, 1.0, e).unwrap();
        assert_relative_eq!(v, e - 1.0, max_relative = 1e-14);
    }

    #[test]
    fn em_mean_degenerate() {
        assert!(matches!(
            em_mean(|s| s, |_| 1.0, |_| 1.0, |_| 0.0, 1.0, 2.0),
            Err(Error::DegenerateMean(_))
        ));
    }

    #[test]
    fn log_partials_on_diagonal_are_half() {
        let (d1, d2) = log_mean_partials(3.0, 3.0).unwrap();
        assert_eq!((d1, d2), (0.5, 0.5));
    }

    #[test]
    fn log_partials_sum_rule_at_one_two() {
        let (d1, d2) = log_mean_partials(1.0, 2.0).unwrap();
        let lam = log_mean(1.0, 2.0).unwrap();
        assert_relative_eq!(d1 + d2, lam * lam / 2.0, max_relative = 1e-14);
        assert_relative_eq!(d1, 0.6386739401166444, max_relative = 1e-13);
        assert_relative_eq!(d2, 0.4020105503861595, max_relative = 1e-13);
    }

    #[test]
    fn arithmetic_mean_partials_are_half() {
        let (d1, d2) = power_mean_partials(2.0, 0.4, 7.0).unwrap();
        assert_eq!((d1, d2), (0.5, 0.5));
    }

    #[test]
    fn f_mean_partials_match_finite_differences() {
        let f = Density::Power { alpha: 1.5 };
        let (s, t) = (1.3, 0.4);
        let (d1, d2) = f_mean_partials(&f, s, t).unwrap();
        let h = 1e-6;
        let fd1 = (f_mean(&f, s + h, t).unwrap() - f_mean(&f, s - h, t).unwrap()) / (2.0 * h);
        let fd2 = (f_mean(&f, s, t + h).unwrap() - f_mean(&f, s, t - h).unwrap()) / (2.0 * h);
        assert_relative_eq!(d1, fd1, max_relative = 1e-8);
        assert_relative_eq!(d2, fd2, max_relative = 1e-8);
        // closed form for α = 3/2: Λ^f = (2/3)(√s+√t), ∂₁ = 1/(3√s)
        assert_relative_eq!(d1, 1.0 / (3.0 * s.sqrt()), max_relative = 1e-12);
    }

    #[test]
    fn lemma_a1_diagonal_sum_rule_residual_zero() {
        let report = check_lemma_a1(1.0, 1.0, 1.0, 1.0, &default_r_grid(1.0)).unwrap();
        let sum_rule = &report.checks[2];
        assert!(sum_rule.passed);
        assert!(sum_rule.residual <= 1e-14);
    }

    #[test]
    fn lemma_a1_lower_bound_at_one_four() {
        // Λ(1,4)(1 + 1/4) ≈ 2.705 ≥ 2
        let report = check_lemma_a1(1.0, 4.0, 1.0, 1.0, &default_r_grid(4.0)).unwrap();
        assert!(report.all_passed(), "{report:?}");
        let lam = log_mean(1.0, 4.0).unwrap();
        assert_relative_eq!(lam * 1.25, 2.7050532016668064, max_relative = 1e-14);
    }

    #[test]
    fn lemma_a1_maximum_identity_at_two_five() {
        let report = check_lemma_a1(2.0, 5.0, 1.0, 1.0, &default_r_grid(5.0)).unwrap();
        let max_identity = &report.checks[3];
        assert!(max_identity.passed, "{max_identity:?}");
    }

    #[test]
    fn concavity_log_mean() {
        let report = check_concavity(&Mean::Logarithmic, 2000, 7).unwrap();
        assert!(report.all_passed(), "{report:?}");
    }

    #[test]
    fn concavity_power_density_mean() {
        let report = check_concavity(&Mean::F(Density::Power { alpha: 1.5 }), 2000, 11).unwrap();
        assert!(report.all_passed(), "{report:?}");
    }

    #[test]
    fn soineq_equality_on_constant_quadruple() {
        let mean = Mean::Logarithmic;
        let u = 1.3;
        let lhs = -mean.eval(u, u).unwrap() + 2.0 * mean.eval(u, u).unwrap() - mean.eval(u, u).unwrap();
        let (p1, p2) = mean.partials(u, u).unwrap();
        let rhs = p1 * 0.0 + p2 * 0.0;
        assert_eq!(lhs, rhs);
    }
}
