use super::{Domain, PotentialSpec};
use crate::error::{Error, Result};

const TOL: f64 = 1e-10;

/// Length of the sublevel set `{x : V(x) ≤ v}` of a single-well potential.
pub fn width(p: &PotentialSpec, v: f64) -> Result<f64> {
    let (xm, vm) = p.minimum()?;
    if !(v > vm) {
        return Err(Error::ZeroWidth { v, min: vm });
    }
    let right = crossing(p, xm, v, 1.0, None)?;
    let left = match p.domain() {
        Domain::HalfLineHardWall(a) => crossing(p, xm, v, -1.0, Some(a))?,
        Domain::WholeLine => crossing(p, xm, v, -1.0, None)?,
    };
    Ok(right - left)
}

/// Right turning point: where `V` first rises to `v` to the right of the minimum.
pub fn right_turning_point(p: &PotentialSpec, v: f64) -> Result<f64> {
    let (xm, vm) = p.minimum()?;
    if !(v > vm) {
        return Err(Error::ZeroWidth { v, min: vm });
    }
    crossing(p, xm, v, 1.0, None)
}

/// Walks from the minimizer in direction `s` until V exceeds `v`, checking
/// monotonicity on the way, then bisects the crossing.
fn crossing(p: &PotentialSpec, xm: f64, v: f64, s: f64, wall: Option<f64>) -> Result<f64> {
    let mut step = 1.0 / 64.0;
    let mut inner = xm;
    let mut prev = p.v(xm);
    loop {
        let mut outer = inner + s * step;
        if let Some(a) = wall {
            if outer <= a {
                outer = a;
            }
        }
        let vo = p.v(outer);
        if vo.is_nan() {
            return Err(Error::NonFinite { x: outer });
        }
        if vo < prev - 1e-12 * prev.abs().max(1.0) {
            return Err(Error::Unsupported(format!(
                "width needs a single-well potential; V decreases away from the minimum near x = {outer}"
            )));
        }
        if vo > v {
            let (mut a, mut b) = (inner, outer);
            while (b - a).abs() > TOL {
                let m = 0.5 * (a + b);
                if p.v(m) > v {
                    b = m;
                } else {
                    a = m;
                }
            }
            return Ok(0.5 * (a + b));
        }
        if wall == Some(outer) {
            return Ok(outer);
        }
        if (outer - xm).abs() > 1e6 {
            return Err(Error::Unsupported(format!(
                "level {v} not reached within 1e6 of the minimum"
            )));
        }
        inner = outer;
        prev = vo;
        step = (step * 1.5).min(1.0);
    }
}
