//! Sturm-sequence bisection for symmetric tridiagonal matrices, plus the
//! inverse iteration used to extract a witness eigenvector.

/// Number of eigenvalues strictly less than `x`, via the LDLᵀ pivot count.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let n = diag.len();
    if n == 0 {
        return 0;
    }
    let scale = diag
        .iter()
        .chain(off.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let guard = f64::MIN_POSITIVE.max(1e-300 * scale);

    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let safe = if q.abs() < guard {
            if q >= 0.0 {
                guard
            } else {
                -guard
            }
        } else {
            q
        };
        q = (diag[i] - x) - off[i - 1] * off[i - 1] / safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin bounds [lo, hi] containing the whole spectrum.
fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i < n - 1 { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// Smallest eigenvalue by bisection on the Sturm count.
pub fn smallest_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    assert!(n > 0, "empty matrix");
    if n == 1 {
        return diag[0];
    }
    let (mut a, mut b) = gershgorin(diag, off);
    let scale = a.abs().max(b.abs()).max(1.0);
    a -= 1e-12 * scale;
    b += 1e-12 * scale;
    for _ in 0..200 {
        if (b - a).abs() <= 2.0 * f64::EPSILON * b.abs().max(a.abs()).max(1e-300) {
            break;
        }
        let mid = 0.5 * (a + b);
        if sturm_count(diag, off, mid) >= 1 {
            b = mid;
        } else {
            a = mid;
        }
    }
    0.5 * (a + b)
}

/// Solve (T − shift·I) x = b with the Thomas algorithm and partial pivoting.
fn solve_shifted(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    // rows: sub[i] x_{i-1} + d[i] x_i + sup[i] x_{i+1} = rhs[i]
    let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
    let mut sup: Vec<f64> = (0..n.saturating_sub(1)).map(|i| off[i]).collect();
    let mut sub: Vec<f64> = sup.clone();
    let mut rhs = b.to_vec();
    // extra superdiagonal fill-in created by row swaps
    let mut sup2 = vec![0.0; n];

    for i in 0..n - 1 {
        if sub[i].abs() > d[i].abs() {
            // swap rows i and i+1
            let (a1, b1, c1) = (d[i], sup[i], sup2[i]);
            let (a2, b2, c2) = (sub[i], d[i + 1], if i + 1 < n - 1 { sup[i + 1] } else { 0.0 });
            d[i] = a2;
            sup[i] = b2;
            sup2[i] = c2;
            sub[i] = a1;
            d[i + 1] = b1;
            if i + 1 < n - 1 {
                sup[i + 1] = c1;
            }
            rhs.swap(i, i + 1);
        }
        let piv = if d[i].abs() < 1e-300 { 1e-300_f64.copysign(d[i]) } else { d[i] };
        let m = sub[i] / piv;
        d[i + 1] -= m * sup[i];
        if i + 1 < n - 1 {
            sup[i + 1] -= m * sup2[i];
        }
        rhs[i + 1] -= m * rhs[i];
        sub[i] = 0.0;
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        if i + 1 < n {
            acc -= sup[i] * x[i + 1];
        }
        if i + 2 < n {
            acc -= sup2[i] * x[i + 2];
        }
        let piv = if d[i].abs() < 1e-300 { 1e-300_f64.copysign(d[i]) } else { d[i] };
        x[i] = acc / piv;
    }
    x
}

/// Unit eigenvector for the eigenvalue nearest `lambda`, by inverse
/// iteration with a slightly detuned shift.
pub fn eigenvector_near(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    let scale = diag
        .iter()
        .chain(off.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let shift = lambda - 1e-10 * scale.max(1.0);
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.3 * ((i * 2654435761) % 97) as f64 / 97.0)
        .collect();
    for _ in 0..4 {
        let w = solve_shifted(diag, off, shift, &v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            break;
        }
        v = w.iter().map(|x| x / norm).collect();
    }
    v
}

/// ⟨T v, v⟩ for the symmetric tridiagonal T.
pub fn quad_form(diag: &[f64], off: &[f64], v: &[f64]) -> f64 {
    let n = diag.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += diag[i] * v[i] * v[i];
        if i + 1 < n {
            acc += 2.0 * off[i] * v[i] * v[i + 1];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn smallest_eigenvalue_of_second_difference() {
        // free Laplacian tridiag(-1, 2, -1) of size n has eigenvalues
        // 2 − 2cos(kπ/(n+1))
        let n = 12;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let expected = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert_relative_eq!(
            smallest_eigenvalue(&diag, &off),
            expected,
            max_relative = 1e-12
        );
    }

    #[test]
    fn sturm_counts_whole_spectrum() {
        let n = 8;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        assert_eq!(sturm_count(&diag, &off, -0.1), 0);
        assert_eq!(sturm_count(&diag, &off, 4.1), n);
    }

    #[test]
    fn inverse_iteration_finds_ground_state() {
        let n = 10;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        let lam = smallest_eigenvalue(&diag, &off);
        let v = eigenvector_near(&diag, &off, lam);
        let r = quad_form(&diag, &off, &v);
        assert_relative_eq!(r, lam, max_relative = 1e-8);
    }
}
