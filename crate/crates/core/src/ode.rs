//! Dormand–Prince 5(4) for small complex linear systems.
//!
//! The state is rescaled by powers of two whenever it grows past `RESCALE_HI`
//! (or shrinks below `RESCALE_LO`); the accumulated binary exponent is returned
//! alongside the final state so callers can carry it as a log-scale.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const RESCALE_HI: f64 = 1e250;
const RESCALE_LO: f64 = 1e-250;

/// Step-control settings.
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OdeSolution<const N: usize> {
    /// Final state; the true state is `y · 2^exp2`.
    pub y: [Complex64; N],
    pub exp2: i64,
    pub steps: usize,
    pub rejected: usize,
}

fn axpy<const N: usize>(y: &[Complex64; N], h: f64, terms: &[(f64, &[Complex64; N])]) -> [Complex64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

fn max_abs<const N: usize>(y: &[Complex64; N]) -> f64 {
    y.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction).
///
/// `f` must be linear in `y` for the rescaling to be valid. `e` is only used
/// to label errors.
pub fn integrate<F, const N: usize>(
    f: F,
    x0: f64,
    y0: [Complex64; N],
    x1: f64,
    opts: &OdeOptions,
    e: Complex64,
) -> Result<OdeSolution<N>>
where
    F: Fn(f64, &[Complex64; N]) -> [Complex64; N],
{
    let mut sol = OdeSolution {
        y: y0,
        exp2: 0,
        steps: 0,
        rejected: 0,
    };
    if x0 == x1 {
        return Ok(sol);
    }
    let dir = (x1 - x0).signum();
    let span = (x1 - x0).abs();
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);

    // Initial step from the usual two-norm heuristic.
    let sc0 = opts.atol + opts.rtol * max_abs(&y);
    let d0 = max_abs(&y) / sc0;
    let d1 = max_abs(&k1) / sc0;
    let mut h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h = h.min(span);

    while (x1 - x) * dir > 0.0 {
        if sol.steps + sol.rejected >= opts.max_steps {
            return Err(Error::NoConvergence {
                stage: "ode",
                e,
                iters: opts.max_steps,
            });
        }
        let remaining = (x1 - x).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h < 1e-14 * x.abs().max(1.0) && !last {
            return Err(Error::StepUnderflow { x, e });
        }
        let hs = h * dir;
        let k2 = f(x + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = f(x + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            x + C4 * hs,
            &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            x + C5 * hs,
            &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            x + hs,
            &axpy(
                &y,
                hs,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let ynew = axpy(
            &y,
            hs,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let xnew = if last { x1 } else { x + hs };
        let k7 = f(xnew, &ynew);

        let mut err = 0.0f64;
        for i in 0..N {
            let est = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
            let sc = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
            err = err.max(est.norm() / sc);
        }
        if !err.is_finite() {
            sol.rejected += 1;
            h *= 0.2;
            continue;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        if err <= 1.0 {
            x = xnew;
            y = ynew;
            k1 = k7;
            sol.steps += 1;
            let m = max_abs(&y);
            if m > RESCALE_HI || (m < RESCALE_LO && m > 0.0) {
                let shift = m.log2().round() as i32;
                let s = 2f64.powi(-shift);
                for i in 0..N {
                    y[i] *= s;
                    k1[i] *= s;
                }
                sol.exp2 += shift as i64;
            }
            h *= factor;
        } else {
            sol.rejected += 1;
            h *= factor.min(1.0);
        }
    }
    sol.y = y;
    Ok(sol)
}

/// Right-hand side of `ψ'' = (V − E)ψ` together with its E-derivative system.
pub fn schrodinger_rhs(q: Complex64, y: &[Complex64; 4]) -> [Complex64; 4] {
    [y[1], q * y[0], y[3], q * y[2] - y[0]]
}
