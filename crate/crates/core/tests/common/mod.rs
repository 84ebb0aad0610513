//! Shared oracles for the integration suites: dense matrix assemblies of the
//! convexity operators (with the conductivity derivative taken by finite
//! differences, independent of the closed-form mean partials), and adaptive
//! quadrature for the single-edge distance.

// each test binary uses its own subset
#![allow(dead_code)]

use entroflow::flow::FlowSystem;
use nalgebra::DMatrix;

/// diag(v) as a dense matrix.
pub fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v))
}

/// Directional derivative DL(ρ)[ξ] of the edge conductivities by
/// Richardson-extrapolated central finite differences along the
/// (normalized) direction ξ.
pub fn dl_fd(sys: &FlowSystem, rho: &[f64], xi: &[f64]) -> Vec<f64> {
    let norm = xi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if norm == 0.0 {
        return vec![0.0; sys.grid().edge_count()];
    }
    let dir: Vec<f64> = xi.iter().map(|v| v / norm).collect();
    let min_rho = rho.iter().cloned().fold(f64::INFINITY, f64::min);
    let eps = (1e-4f64).min(0.4 * min_rho);

    let central = |e: f64| -> Vec<f64> {
        let plus: Vec<f64> = rho.iter().zip(&dir).map(|(r, d)| r + e * d).collect();
        let minus: Vec<f64> = rho.iter().zip(&dir).map(|(r, d)| r - e * d).collect();
        let lp = sys.edge_conductivity(&plus).unwrap();
        let lm = sys.edge_conductivity(&minus).unwrap();
        lp.iter().zip(&lm).map(|(p, m)| (p - m) / (2.0 * e)).collect()
    };
    let coarse = central(eps);
    let fine = central(0.5 * eps);
    fine.iter()
        .zip(&coarse)
        .map(|(f, c)| (4.0 * f - c) / 3.0 * norm)
        .collect()
}

/// Dense edge-space matrix −DL(ρ)[GᵀGρ] + GGᵀL + LGGᵀ for the linear path.
pub fn dense_heat_tilde_m(sys: &FlowSystem, rho: &[f64]) -> DMatrix<f64> {
    let g = sys.gradient().dense();
    let gt = g.transpose();
    let l = diag(&sys.edge_conductivity(rho).unwrap());
    let rho_v = nalgebra::DVector::from_column_slice(rho);
    let xi = -(&gt * (&g * rho_v)); // Qρ = −GᵀGρ
    let dl = diag(&dl_fd(sys, rho, xi.as_slice()));
    let ggt = &g * &gt;
    dl + &ggt * &l + &l * &ggt
}

/// Dense edge-space matrix
/// DL(ρ)[Qφ(ρ)] + diag(κ)G diag(w⁻¹)Φ'GᵀL + LGΦ'diag(w⁻¹)Gᵀdiag(κ)
/// for the drift-diffusion path.
pub fn dense_fp_tilde_m(sys: &FlowSystem, rho: &[f64]) -> DMatrix<f64> {
    let g = sys.gradient().dense();
    let gt = g.transpose();
    let l = diag(&sys.edge_conductivity(rho).unwrap());
    let kap = diag(sys.weights().kappa());
    let winv: Vec<f64> = sys.weights().w().iter().map(|w| 1.0 / w).collect();
    let winv = diag(&winv);
    let phi = sys.phi();
    let dphi: Vec<f64> = rho.iter().map(|&r| phi.d1(r)).collect();
    let dphi = diag(&dphi);

    let xi = sys.rhs(rho).unwrap();
    let dl = diag(&dl_fd(sys, rho, &xi));

    let a = &kap * &g * &winv * &dphi * &gt * &l;
    let b = &l * &g * &dphi * &winv * &gt * &kap;
    dl + a + b
}

/// Node-space matrix M(ρ) = ½(DK(ρ)[Qφ(ρ)] − QΦ'(ρ)K(ρ) − K(ρ)Φ'(ρ)Qᵀ),
/// with DK by finite differences of the dense Onsager matrix.
pub fn dense_m(sys: &FlowSystem, rho: &[f64]) -> DMatrix<f64> {
    let q = sys.rate_matrix().dense();
    let k = sys.onsager(rho).unwrap().dense();
    let phi = sys.phi();
    let dphi: Vec<f64> = rho.iter().map(|&r| phi.d1(r)).collect();
    let dphi = diag(&dphi);

    let xi = sys.rhs(rho).unwrap();
    let norm = xi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dk = if norm == 0.0 {
        DMatrix::zeros(k.nrows(), k.ncols())
    } else {
        let dir: Vec<f64> = xi.iter().map(|v| v / norm).collect();
        let min_rho = rho.iter().cloned().fold(f64::INFINITY, f64::min);
        let eps = (1e-5f64).min(0.4 * min_rho);
        let plus: Vec<f64> = rho.iter().zip(&dir).map(|(r, d)| r + eps * d).collect();
        let minus: Vec<f64> = rho.iter().zip(&dir).map(|(r, d)| r - eps * d).collect();
        let kp = sys.onsager(&plus).unwrap().dense();
        let km = sys.onsager(&minus).unwrap().dense();
        (kp - km) * (norm / (2.0 * eps))
    };

    let qk = &q * &dphi * &k;
    let kq = &k * &dphi * q.transpose();
    (dk - qk - kq) * 0.5
}

/// Adaptive Simpson quadrature.
pub fn integrate_adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, 40)
}
