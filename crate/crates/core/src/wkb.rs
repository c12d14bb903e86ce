//! Three-term asymptotic slope `A = S₀ + S₁ + S₂` of the decaying solution and
//! its energy derivative, used beyond the tail mesh.
//!
//! With `Q = V − E` and `k = √Q`:
//! `S₀ = −k`, `S₁ = −V'/(4Q)`, `S₂ = (S₁' + S₁²)/(2k)`.

use num_complex::Complex64;

use crate::potentials::PotentialSpec;

/// Above this the potential is treated as infinite and the tail contributes nothing.
/// Kept well below `1e154` so that complex division by `Q` cannot overflow.
const V_CEILING: f64 = 1e120;

/// Local data with `r = V'/Q` and `t = V''/Q`.
struct Local {
    r: Complex64,
    t: Complex64,
    q: Complex64,
    k: Complex64,
}

fn local(p: &PotentialSpec, e: Complex64, x: f64) -> Option<Local> {
    let v = p.v(x);
    if !v.is_finite() || v > V_CEILING {
        return None;
    }
    let q = Complex64::new(v - e.re, -e.im);
    Some(Local {
        r: p.dv(x) / q,
        t: p.d2v(x) / q,
        q,
        k: q.sqrt(),
    })
}

fn s1_terms(l: &Local) -> (Complex64, Complex64) {
    let s1 = -l.r / 4.0;
    let ds1 = (l.r * l.r - l.t) / 4.0;
    (s1, ds1)
}

/// `A_E(x)`.
pub fn slope(p: &PotentialSpec, e: Complex64, x: f64) -> Complex64 {
    let Some(l) = local(p, e, x) else {
        return Complex64::new(0.0, 0.0);
    };
    let (s1, ds1) = s1_terms(&l);
    -l.k + s1 + (ds1 + s1 * s1) / (2.0 * l.k)
}

/// `∂A_E/∂E (x)`.
pub fn slope_energy_derivative(p: &PotentialSpec, e: Complex64, x: f64) -> Complex64 {
    let Some(l) = local(p, e, x) else {
        return Complex64::new(0.0, 0.0);
    };
    let (s1, ds1) = s1_terms(&l);
    let e_s1 = -l.r / (4.0 * l.q);
    let e_ds1 = (2.0 * l.r * l.r - l.t) / (4.0 * l.q);
    1.0 / (2.0 * l.k) + e_s1 + (e_ds1 + 2.0 * s1 * e_s1) / (2.0 * l.k) + (ds1 + s1 * s1) / (4.0 * l.k * l.q)
}

/// `A_{E_ref}(x) − A_E(x)`, arranged to avoid cancellation when `V ≫ |E|`.
pub fn slope_difference(p: &PotentialSpec, e_ref: Complex64, e: Complex64, x: f64) -> Complex64 {
    let (Some(lr), Some(le)) = (local(p, e_ref, x), local(p, e, x)) else {
        return Complex64::new(0.0, 0.0);
    };
    let de = e_ref - e;
    let d0 = de / (lr.k + le.k);
    let d1 = -lr.r / 4.0 * (de / le.q);
    let (s1r, ds1r) = s1_terms(&lr);
    let (s1e, ds1e) = s1_terms(&le);
    let d2 = (ds1r + s1r * s1r) / (2.0 * lr.k) - (ds1e + s1e * s1e) / (2.0 * le.k);
    d0 + d1 + d2
}
