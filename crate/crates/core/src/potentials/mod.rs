//! Confining potentials on a half-line with a hard wall or on the whole line.

mod builtin;
mod sturm_liouville;
mod tabulated;
mod tail;
mod width;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

pub use builtin::{make_builtin, Builtin};
pub use sturm_liouville::{sl_to_schrodinger, SlCoefficient, SlDomain};
pub use tabulated::{load_csv, tabulated};
pub use tail::{find_tail_setup, lattice_origin, TailConfig, TailSetup, LATTICE_STEP};
pub use width::{right_turning_point, width};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    /// Dirichlet wall at `a`, potential confining as x → +∞.
    HalfLineHardWall(f64),
    /// Confining in both directions.
    WholeLine,
}

/// Closed-form characteristic function known for a builtin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleTag {
    BesselWall,
    SymmetricBessel,
    Cosh,
    WhittakerMorse(f64),
    Tzitzeica,
}

#[derive(Clone)]
pub struct PotentialSpec {
    label: String,
    domain: Domain,
    v: RealFn,
    dv: RealFn,
    d2v: Option<RealFn>,
    oracle: Option<OracleTag>,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("oracle", &self.oracle)
            .field("breakpoints", &self.breakpoints)
            .finish_non_exhaustive()
    }
}

impl PotentialSpec {
    pub fn new<F, G>(label: impl Into<String>, domain: Domain, v: F, dv: G) -> PotentialSpec
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        PotentialSpec {
            label: label.into(),
            domain,
            v: Arc::new(v),
            dv: Arc::new(dv),
            d2v: None,
            oracle: None,
            breakpoints: Vec::new(),
        }
    }

    pub fn with_second_derivative<F>(mut self, d2v: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.d2v = Some(Arc::new(d2v));
        self
    }

    pub fn with_oracle(mut self, tag: OracleTag) -> Self {
        self.oracle = Some(tag);
        self
    }

    /// Points where `dV` may jump; the propagator never steps across them.
    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        self.breakpoints = points;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn oracle_tag(&self) -> Option<OracleTag> {
        self.oracle
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn v(&self, x: f64) -> f64 {
        (self.v)(x)
    }

    pub fn dv(&self, x: f64) -> f64 {
        (self.dv)(x)
    }

    /// Second derivative: exact when supplied, otherwise a central difference of `dV`.
    pub fn d2v(&self, x: f64) -> f64 {
        match &self.d2v {
            Some(f) => f(x),
            None => {
                let h = 1e-4 * x.abs().max(1.0);
                (self.dv(x + h) - self.dv(x - h)) / (2.0 * h)
            }
        }
    }

    pub fn has_exact_second_derivative(&self) -> bool {
        self.d2v.is_some()
    }

    /// `V(x) − E` as a complex number.
    pub fn q(&self, x: f64, e: Complex64) -> Complex64 {
        Complex64::new(self.v(x) - e.re, -e.im)
    }

    /// Mirror image `x ↦ −x`, used for the left tail of a whole-line problem.
    pub fn reflected(&self) -> PotentialSpec {
        let v = self.v.clone();
        let dv = self.dv.clone();
        PotentialSpec {
            label: format!("{}(-x)", self.label),
            domain: self.domain,
            v: Arc::new(move |x| v(-x)),
            dv: Arc::new(move |x| -dv(-x)),
            d2v: self.d2v.clone().map(|f| Arc::new(move |x: f64| f(-x)) as RealFn),
            oracle: None,
            breakpoints: self.breakpoints.iter().rev().map(|b| -b).collect(),
        }
    }

    /// `V + γ`; eigenvalues shift by exactly γ.
    pub fn shifted(&self, gamma: f64) -> PotentialSpec {
        let v = self.v.clone();
        PotentialSpec {
            label: format!("{}{:+}", self.label, gamma),
            v: Arc::new(move |x| v(x) + gamma),
            oracle: None,
            ..self.clone()
        }
    }

    /// Left end of the domain, if any.
    pub fn wall(&self) -> Option<f64> {
        match self.domain {
            Domain::HalfLineHardWall(a) => Some(a),
            Domain::WholeLine => None,
        }
    }

    /// Location and value of the global minimum of V on the domain.
    ///
    /// Found by a grid scan over an expanding window, refined by golden section.
    pub fn minimum(&self) -> Result<(f64, f64)> {
        let step = 1.0 / 64.0;
        let (mut lo, mut hi) = match self.domain {
            Domain::HalfLineHardWall(a) => (a, a + 8.0),
            Domain::WholeLine => (-4.0, 4.0),
        };
        for _ in 0..8 {
            let n = ((hi - lo) / step).round() as usize;
            let mut best = (lo, f64::INFINITY);
            for i in 0..=n {
                let x = lo + i as f64 * step;
                let v = self.v(x);
                if v.is_nan() {
                    return Err(Error::NonFinite { x });
                }
                if v < best.1 {
                    best = (x, v);
                }
            }
            let at_left = best.0 - lo < 2.0 * step && self.wall().is_none();
            let at_right = hi - best.0 < 2.0 * step;
            if !at_left && !at_right {
                let l = match self.domain {
                    Domain::HalfLineHardWall(a) => (best.0 - step).max(a),
                    Domain::WholeLine => best.0 - step,
                };
                let x = golden_min(|x| self.v(x), l, best.0 + step);
                let x = if self.v(x) <= best.1 { x } else { best.0 };
                return Ok((x, self.v(x)));
            }
            if at_left {
                lo -= hi - lo;
            }
            if at_right {
                hi += hi - lo;
            }
        }
        Err(Error::InvalidPotential {
            label: self.label.clone(),
            reason: "no minimum found; V does not grow in the scanned window".into(),
        })
    }

    /// Checks the sampled invariants: `dV` consistent with `V`, growth at the
    /// confining ends, and convergence of ∫ V^(−1/2) over the tails.
    pub fn validate(&self) -> Result<()> {
        let (xm, vm) = self.minimum()?;
        let invalid = |reason: String| Error::InvalidPotential {
            label: self.label.clone(),
            reason,
        };
        let mut sides = vec![1.0];
        if self.domain == Domain::WholeLine {
            sides.push(-1.0);
        }
        for &s in &sides {
            let integrals: Vec<f64> = (0..10)
                .map(|n| {
                    let a = xm + s * 2f64.powi(n);
                    let b = xm + s * 2f64.powi(n + 1);
                    inverse_sqrt_integral(self, a.min(b), a.max(b))
                })
                .collect();
            for w in integrals[6..].windows(2) {
                if w[1].is_nan() || w[1] > 0.9 * w[0] {
                    return Err(invalid(format!(
                        "∫V^(-1/2) does not decay geometrically on doubling intervals (side {s:+})"
                    )));
                }
            }
        }

        // Working range: up to where V first exceeds 1e8 on each confining side.
        let reach = |s: f64| {
            let mut d = 1.0 / 16.0;
            while d < 512.0 && self.v(xm + s * d) < 1e8 {
                d *= 1.25;
            }
            xm + s * d
        };
        let right = reach(1.0);
        let left = match self.domain {
            Domain::HalfLineHardWall(a) => a,
            Domain::WholeLine => reach(-1.0),
        };
        for i in 0..100 {
            let x = left + (right - left) * (i as f64 + 0.5) / 100.0;
            let h = 1e-3 * x.abs().max(1.0);
            if self
                .breakpoints
                .iter()
                .any(|b| (x - b).abs() < 3.0 * h)
            {
                continue;
            }
            let d1 = (self.v(x + h) - self.v(x - h)) / (2.0 * h);
            let d2 = (self.v(x + 2.0 * h) - self.v(x - 2.0 * h)) / (4.0 * h);
            let fd = (4.0 * d1 - d2) / 3.0;
            let dv = self.dv(x);
            let scale = dv.abs().max(1e-3 * (self.v(x) - vm).abs()).max(1.0);
            if !fd.is_finite() || (fd - dv).abs() > 1e-6 * scale {
                return Err(invalid(format!(
                    "dV inconsistent with V at x = {x}: {dv} vs finite difference {fd}"
                )));
            }
        }
        Ok(())
    }
}

fn inverse_sqrt_integral(p: &PotentialSpec, a: f64, b: f64) -> f64 {
    let (gx, gw) = gauss_legendre(16);
    let pieces = 8;
    let h = (b - a) / pieces as f64;
    let mut s = 0.0;
    for j in 0..pieces {
        let lo = a + j as f64 * h;
        for (x, w) in gx.iter().zip(&gw) {
            let v = p.v(lo + 0.5 * h * (x + 1.0));
            if v <= 0.0 || v.is_nan() {
                return f64::NAN;
            }
            s += 0.5 * h * w / v.sqrt();
        }
    }
    s
}

pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_tail_fails_inverse_sqrt_check() {
        let p = PotentialSpec::new(
            "glued",
            Domain::HalfLineHardWall(0.0),
            |x: f64| if x < 5.0 { 100.0 + (5.0 - x).powi(3) } else { 100.0 },
            |x: f64| if x < 5.0 { -3.0 * (5.0 - x).powi(2) } else { 0.0 },
        );
        let err = p.validate().unwrap_err();
        assert!(matches!(err, Error::InvalidPotential { .. }), "{err}");
    }

    #[test]
    fn quartic_passes_and_reflection_mirrors() {
        let p = PotentialSpec::new("quartic", Domain::WholeLine, |x: f64| x.powi(4) + x, |x: f64| {
            4.0 * x.powi(3) + 1.0
        });
        p.validate().unwrap();
        let r = p.reflected();
        assert_eq!(r.v(0.3), p.v(-0.3));
        assert_eq!(r.dv(0.3), -p.dv(-0.3));
        let (xm, _) = p.minimum().unwrap();
        assert!((4.0 * xm.powi(3) + 1.0).abs() < 1e-6);
    }

    #[test]
    fn inconsistent_derivative_is_caught() {
        let p = PotentialSpec::new("bad", Domain::WholeLine, |x: f64| x.powi(4), |x: f64| {
            4.0 * x.powi(3) * 1.001
        });
        assert!(p.validate().is_err());
    }
}
