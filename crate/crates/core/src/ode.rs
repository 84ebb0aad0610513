//! Explicit Runge–Kutta steppers used by the flow and geodesic solvers.
//!
//! The adaptive stepper is the Dormand–Prince 5(4) embedded pair with a
//! standard PI-free controller and a state guard: a trial step whose result
//! the guard rejects (e.g. loss of positivity) is retried at half the step,
//! which keeps the conservation structure of the right-hand side intact
//! instead of projecting.

#[derive(Debug)]
pub(crate) enum OdeError {
    /// Step size underflow; carries the last accepted time and state.
    StepUnderflow { t: f64, state: Vec<f64> },
    /// The guard rejected a state during fixed-step integration.
    StateRejected { t: f64 },
}

pub(crate) struct AdaptiveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            rtol: 1e-9,
            atol: 1e-9,
            max_steps: 50_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
// 5th-order weights (same as the last A row) and the embedded 4th-order ones.
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates y' = rhs(t, y) from t0 to t1, calling `on_step(t, y)` after
/// every accepted step (and once for the initial state). `guard` must return
/// true for admissible states.
pub(crate) fn dopri5<F, G, S>(
    mut rhs: F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    opts: &AdaptiveOptions,
    mut guard: G,
    mut on_step: S,
) -> Result<Vec<f64>, OdeError>
where
    F: FnMut(f64, &[f64]) -> Vec<f64>,
    G: FnMut(&[f64]) -> bool,
    S: FnMut(f64, &[f64]),
{
    let dim = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    on_step(t, &y);

    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    k.push(rhs(t, &y));

    // initial step from the right-hand side scale
    let ynorm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let fnorm = k[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut dt = if fnorm > 0.0 {
        (0.01 * (opts.atol + opts.rtol * ynorm) / fnorm).min(0.1 * (t1 - t0))
    } else {
        0.1 * (t1 - t0)
    }
    .max(1e-12 * (t1 - t0));

    let dt_min = (t1 - t0) * 1e-14;
    let mut steps = 0usize;

    while t < t1 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(OdeError::StepUnderflow { t, state: y });
        }
        if dt < dt_min {
            return Err(OdeError::StepUnderflow { t, state: y });
        }
        let last = t + dt >= t1;
        let h = if last { t1 - t } else { dt };

        k.truncate(1);
        for stage in 0..6 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[stage][j];
                if a != 0.0 {
                    for i in 0..dim {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k.push(rhs(t + C[stage] * h, &ys));
        }

        let mut y5 = y.clone();
        let mut err = 0.0f64;
        for i in 0..dim {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for (j, kj) in k.iter().enumerate() {
                d5 += B5[j] * kj[i];
                d4 += B4[j] * kj[i];
            }
            y5[i] += h * d5;
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            let e = h * (d5 - d4) / sc;
            err += e * e;
        }
        let err = (err / dim as f64).sqrt();

        if err <= 1.0 && guard(&y5) {
            t += h;
            y = y5;
            on_step(t, &y);
            if t >= t1 {
                break;
            }
            k[0] = rhs(t, &y);
            k.truncate(1);
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            dt = h * factor;
        } else if err <= 1.0 {
            // accuracy fine but the guard rejected the state
            dt = 0.5 * h;
            k.truncate(1);
        } else {
            // non-finite error estimates (rhs signalled an inadmissible
            // stage state) shrink hard
            let factor = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 1.0)
            } else {
                0.1
            };
            dt = h * factor;
            k.truncate(1);
        }
    }
    Ok(y)
}

/// Classical fixed-step RK4; `on_step` fires for every step including the
/// initial state. Errors out if the guard rejects an intermediate state.
pub(crate) fn rk4_fixed<F, G, S>(
    mut rhs: F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    nsteps: usize,
    mut guard: G,
    mut on_step: S,
) -> Result<Vec<f64>, OdeError>
where
    F: FnMut(f64, &[f64]) -> Vec<f64>,
    G: FnMut(&[f64]) -> bool,
    S: FnMut(usize, f64, &[f64]),
{
    let dim = y0.len();
    let h = (t1 - t0) / nsteps as f64;
    let mut y = y0.to_vec();
    let mut t = t0;
    on_step(0, t, &y);
    for step in 0..nsteps {
        let k1 = rhs(t, &y);
        let mut y2 = y.clone();
        for i in 0..dim {
            y2[i] += 0.5 * h * k1[i];
        }
        let k2 = rhs(t + 0.5 * h, &y2);
        let mut y3 = y.clone();
        for i in 0..dim {
            y3[i] += 0.5 * h * k2[i];
        }
        let k3 = rhs(t + 0.5 * h, &y3);
        let mut y4 = y.clone();
        for i in 0..dim {
            y4[i] += h * k3[i];
        }
        let k4 = rhs(t + h, &y4);
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t = t0 + (step + 1) as f64 * h;
        if !guard(&y) {
            return Err(OdeError::StateRejected { t });
        }
        on_step(step + 1, t, &y);
    }
    Ok(y)
}
