//! Liouville transformation of `w⁻¹(−(p y')' + q y)` to Schrödinger form.
//!
//! With `x = ∫ √(w/p) dz`, `Q = ln(p w)` and `ψ = e^{Q/4} y` the operator becomes
//! `−ψ_xx + V ψ` with `V = q/w + Q_xx/4 + Q_x²/16`, derivatives taken in `x`.

use std::sync::Arc;

use super::{Domain, PotentialSpec};
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

type F = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A positive coefficient with its first two derivatives in `z`.
#[derive(Clone)]
pub struct SlCoefficient {
    pub f: F,
    pub df: F,
    pub d2f: F,
}

impl SlCoefficient {
    pub fn new<A, B, C>(f: A, df: B, d2f: C) -> SlCoefficient
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64) -> f64 + Send + Sync + 'static,
        C: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        SlCoefficient {
            f: Arc::new(f),
            df: Arc::new(df),
            d2f: Arc::new(d2f),
        }
    }

    pub fn constant(c: f64) -> SlCoefficient {
        SlCoefficient::new(move |_| c, |_| 0.0, |_| 0.0)
    }
}

/// Where the SL problem lives and which `z` maps to `x = 0`.
#[derive(Clone, Copy, Debug)]
pub enum SlDomain {
    /// Dirichlet wall at `z = wall`; the image has its wall at `x = 0`.
    HalfLine { wall: f64, z_max: f64 },
    /// Whole line with `x(0) = 0`; `[z_min, z_max]` is tabulated up front.
    WholeLine { z_min: f64, z_max: f64 },
}

struct Transform {
    q: F,
    p: SlCoefficient,
    w: SlCoefficient,
    zs: Vec<f64>,
    xs: Vec<f64>,
    gx: Vec<f64>,
    gw: Vec<f64>,
}

const DZ: f64 = 1.0 / 64.0;
/// Tails are tabulated up to this potential height.
const TABLE_TOP: f64 = 1e120;
const MAX_EXTENSION: usize = 1 << 20;

impl Transform {
    /// `r = dz/dx = √(p/w)`.
    fn r(&self, z: f64) -> f64 {
        ((self.p.f)(z) / (self.w.f)(z)).sqrt()
    }

    fn dx(&self, z0: f64, z1: f64) -> f64 {
        let h = 0.5 * (z1 - z0);
        self.gx
            .iter()
            .zip(&self.gw)
            .map(|(t, w)| h * w / self.r(z0 + h * (t + 1.0)))
            .sum()
    }

    /// Table entries beyond `(z, x)` in direction `dir`, up to `V ≥ TABLE_TOP`.
    /// Steps grow geometrically while `r` stays within a factor `e^0.1`.
    fn extend(&self, mut z: f64, mut x: f64, dir: f64) -> (Vec<f64>, Vec<f64>) {
        let (mut zs, mut xs) = (Vec::new(), Vec::new());
        let mut h = DZ;
        while zs.len() < MAX_EXTENSION && self.v_of_z(z) < TABLE_TOP {
            h = (2.0 * h).min(0.05 * z.abs().max(1.0)).max(DZ);
            let lr = self.r(z).ln();
            while h > DZ && (self.r(z + dir * h).ln() - lr).abs() > 0.1 {
                h = (0.5 * h).max(DZ);
            }
            let zn = z + dir * h;
            let xn = x + self.dx(z, zn);
            if !(zn.is_finite() && xn.is_finite()) {
                break;
            }
            (z, x) = (zn, xn);
            zs.push(z);
            xs.push(x);
        }
        (zs, xs)
    }

    fn v_of_z(&self, z: f64) -> f64 {
        let (p, dp, d2p) = ((self.p.f)(z), (self.p.df)(z), (self.p.d2f)(z));
        let (w, dw, d2w) = ((self.w.f)(z), (self.w.df)(z), (self.w.d2f)(z));
        let (lp, lw) = (dp / p, dw / w);
        let qz = lp + lw;
        let qzz = d2p / p - lp * lp + d2w / w - lw * lw;
        let r = (p / w).sqrt();
        let rz = 0.5 * r * (lp - lw);
        let qx = qz * r;
        let qxx = r * (qzz * r + qz * rz);
        (self.q)(z) / w + 0.25 * qxx + qx * qx / 16.0
    }

    /// Newton inversion of `x(z) = x0 + ∫_{z0}^{z} dz/r` inside `[z0, z1]`.
    fn solve_in(&self, z0: f64, x0: f64, z1: f64, x1: f64, x: f64) -> f64 {
        let (lo, hi) = (z0.min(z1), z0.max(z1));
        let mut z = z0 + (z1 - z0) * (x - x0) / (x1 - x0);
        for _ in 0..50 {
            let f = x0 + self.dx(z0, z) - x;
            let step = f * self.r(z);
            let next = (z - step).clamp(lo, hi);
            if (next - z).abs() <= 1e-15 * z.abs().max(1.0) {
                return next;
            }
            z = next;
        }
        z
    }

    fn z_of_x(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x >= self.xs[0] && x <= self.xs[n - 1] {
            let i = self.xs.partition_point(|&xi| xi <= x).clamp(1, n - 1) - 1;
            return self.solve_in(self.zs[i], self.xs[i], self.zs[i + 1], self.xs[i + 1], x);
        }
        let (mut z, mut xc, dir) = if x > self.xs[n - 1] {
            (self.zs[n - 1], self.xs[n - 1], 1.0)
        } else {
            (self.zs[0], self.xs[0], -1.0)
        };
        for _ in 0..1_000_000 {
            let zn = z + dir * DZ;
            let xn = xc + self.dx(z, zn);
            if (xn - x) * dir >= 0.0 {
                return self.solve_in(z, xc, zn, xn, x);
            }
            z = zn;
            xc = xn;
        }
        z
    }

    fn v(&self, x: f64) -> f64 {
        self.v_of_z(self.z_of_x(x))
    }

    /// `dV/dx = r · dV/dz`, with the z-derivative from a 4th-order central difference.
    fn dv(&self, x: f64) -> f64 {
        let z = self.z_of_x(x);
        let h = 1e-3 * z.abs().max(1.0);
        let d = (-self.v_of_z(z + 2.0 * h) + 8.0 * self.v_of_z(z + h) - 8.0 * self.v_of_z(z - h)
            + self.v_of_z(z - 2.0 * h))
            / (12.0 * h);
        d * self.r(z)
    }
}

/// Schrödinger potential equivalent to the SL operator `w⁻¹(−(p y')' + q y)`.
///
/// `p` and `w` must be positive on the sampled range.
pub fn sl_to_schrodinger<G>(
    label: impl Into<String>,
    q: G,
    p: SlCoefficient,
    w: SlCoefficient,
    domain: SlDomain,
) -> Result<PotentialSpec>
where
    G: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let label = label.into();
    let (z_lo, z_hi, anchor, dom) = match domain {
        SlDomain::HalfLine { wall, z_max } => (wall, z_max, wall, Domain::HalfLineHardWall(0.0)),
        SlDomain::WholeLine { z_min, z_max } => (z_min, z_max, 0.0, Domain::WholeLine),
    };
    if !(z_lo < z_hi) || !(z_lo <= anchor && anchor <= z_hi) {
        return Err(Error::Config(format!(
            "SL range [{z_lo}, {z_hi}] must be nonempty and contain the anchor {anchor}"
        )));
    }
    let n = ((z_hi - z_lo) / DZ).ceil() as usize;
    let zs: Vec<f64> = (0..=n).map(|i| z_lo + (z_hi - z_lo) * i as f64 / n as f64).collect();
    for &z in &zs {
        let (pz, wz) = ((p.f)(z), (w.f)(z));
        if !(pz > 0.0 && wz > 0.0) {
            return Err(Error::InvalidPotential {
                label,
                reason: format!("p and w must be positive; p({z}) = {pz}, w({z}) = {wz}"),
            });
        }
    }
    let (gx, gw) = gauss_legendre(8);
    let mut t = Transform {
        q: Arc::new(q),
        p,
        w,
        zs,
        xs: Vec::new(),
        gx,
        gw,
    };
    let mut xs = vec![0.0; t.zs.len()];
    for i in 1..t.zs.len() {
        xs[i] = xs[i - 1] + t.dx(t.zs[i - 1], t.zs[i]);
    }
    let x_anchor = t.dx(t.zs[0], anchor) + xs[0];
    for x in &mut xs {
        *x -= x_anchor;
    }
    assert!(xs.windows(2).all(|w| w[0] < w[1]), "x(z) must be increasing");
    // Tabulate out into the confining tails so that lookups there are a
    // binary search rather than a walk from the end of the range.
    let right = t.extend(z_hi, xs[xs.len() - 1], 1.0);
    let left = if dom == Domain::WholeLine {
        t.extend(z_lo, xs[0], -1.0)
    } else {
        (Vec::new(), Vec::new())
    };
    let zs: Vec<f64> = left.0.iter().rev().chain(&t.zs).chain(&right.0).copied().collect();
    let xs: Vec<f64> = left.1.iter().rev().chain(&xs).chain(&right.1).copied().collect();
    t.zs = zs;
    t.xs = xs;
    let t = Arc::new(t);
    let t2 = t.clone();
    Ok(PotentialSpec::new(label, dom, move |x| t.v(x), move |x| t2.dv(x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_coefficients_are_the_identity() {
        let p = sl_to_schrodinger(
            "id",
            |z: f64| z * z + 3.0,
            SlCoefficient::constant(1.0),
            SlCoefficient::constant(1.0),
            SlDomain::WholeLine {
                z_min: -4.0,
                z_max: 4.0,
            },
        )
        .unwrap();
        for x in [-3.0, -0.4, 0.0, 1.7, 6.0] {
            assert!((p.v(x) - (x * x + 3.0)).abs() < 1e-10, "{x}");
        }
    }

    #[test]
    fn equal_exponential_coefficients_give_constant_one() {
        let e2 = || SlCoefficient::new(|z: f64| (2.0 * z).exp(), |z: f64| 2.0 * (2.0 * z).exp(), |z: f64| 4.0 * (2.0 * z).exp());
        let p = sl_to_schrodinger("c", |_| 0.0, e2(), e2(), SlDomain::WholeLine { z_min: -2.0, z_max: 2.0 }).unwrap();
        for x in [-1.0, 0.0, 1.5] {
            assert!((p.v(x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bessel_type_weight() {
        // p = 1, w = e^{2z}: x = e^z − 1 and V = −1/(4 (x + 1)²).
        let w = SlCoefficient::new(|z: f64| (2.0 * z).exp(), |z: f64| 2.0 * (2.0 * z).exp(), |z: f64| 4.0 * (2.0 * z).exp());
        let p = sl_to_schrodinger("b", |_| 0.0, SlCoefficient::constant(1.0), w, SlDomain::WholeLine { z_min: -2.0, z_max: 2.0 }).unwrap();
        for x in [-0.5, 0.0, 2.0, 5.0, 9.0] {
            let exact = -0.25 / ((x + 1.0) * (x + 1.0));
            assert!((p.v(x) - exact).abs() < 1e-8, "{x}: {} vs {exact}", p.v(x));
            let dexact = 0.5 / (x + 1.0f64).powi(3);
            assert!((p.dv(x) - dexact).abs() < 1e-6 * dexact.abs().max(1e-3), "{x}");
        }
    }
}
