//! Exact decaying slope `S = ψ'/ψ` on the tail, as the fixed point of the map
//!
//! `C[S](x) = S(x) + ∫_x^∞ exp(−2∫_x^y k) (S' + S² − k²)(y) dy`,  `k = √(V − E)`,
//!
//! iterated from `S = −k`, together with its energy derivative `σ = ∂S/∂E`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{DampedKernel, Mesh};
use crate::potentials::{PotentialSpec, TailSetup};

/// `√(V − E)` on the branch with positive real part, after checking the cone
/// condition `V − Re E > √2·|Im E|`.
pub fn wavenumber(p: &PotentialSpec, e: Complex64, x: f64) -> Result<Complex64> {
    wavenumber_of(p.v(x), e, x)
}

pub(crate) fn wavenumber_of(v: f64, e: Complex64, x: f64) -> Result<Complex64> {
    if !v.is_finite() {
        return Err(Error::NonFinite { x });
    }
    if v - e.re <= std::f64::consts::SQRT_2 * e.im.abs() {
        return Err(Error::BranchAmbiguity { x, e });
    }
    Ok(Complex64::new(v - e.re, -e.im).sqrt())
}

/// A complex field sampled on a mesh together with its derivative.
#[derive(Clone, Debug)]
pub struct Field {
    pub values: Vec<Complex64>,
    pub derivative: Vec<Complex64>,
}

impl Field {
    /// Field whose derivative is obtained by differentiating on the mesh.
    pub fn differentiated(mesh: &Mesh, values: Vec<Complex64>) -> Result<Field> {
        let derivative = mesh.differentiate(&values)?;
        Ok(Field { values, derivative })
    }

    pub fn minus(&self, other: &Field) -> Field {
        Field {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            derivative: self
                .derivative
                .iter()
                .zip(&other.derivative)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// `max(sup |f|/|k|, sup |f'|/|k|²)`.
pub fn weighted_norm(f: &Field, k: &[Complex64]) -> Result<f64> {
    if f.values.len() != k.len() || f.derivative.len() != k.len() {
        return Err(Error::MeshMismatch(f.values.len(), k.len()));
    }
    let mut a = 0.0f64;
    let mut b = 0.0f64;
    for ((v, d), k) in f.values.iter().zip(&f.derivative).zip(k) {
        let nk = k.norm();
        a = a.max(v.norm() / nk);
        b = b.max(d.norm() / (nk * nk));
    }
    Ok(a.max(b))
}

/// Contraction constants for given `c` and `ε`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ContractionConstants {
    /// Bound on `‖C[−k] + k‖`.
    pub sigma0: f64,
    /// Lipschitz constant of `C` on the ball.
    pub alpha: f64,
    /// Bound on `|σ|·|k|`.
    pub sigma_k: f64,
}

impl ContractionConstants {
    pub fn new(c: f64, eps: f64) -> ContractionConstants {
        let q = (2.0 - 0.5 * c) / (1.0 - 0.5 * c);
        ContractionConstants {
            sigma0: c * q,
            alpha: 2.0 * eps * q,
            sigma_k: (1.0 - eps) / (2.0 - 6.0 * eps + eps * eps),
        }
    }
}

/// Precomputed data for applying `C` repeatedly on one tail.
pub struct ContractionMap<'a> {
    setup: &'a TailSetup,
    kernel: DampedKernel,
    k2: Vec<Complex64>,
}

impl<'a> ContractionMap<'a> {
    pub fn new(setup: &'a TailSetup) -> Result<ContractionMap<'a>> {
        let kernel = DampedKernel::new(&setup.mesh, &setup.k)?;
        let k2 = setup.k.iter().map(|k| k * k).collect();
        Ok(ContractionMap { setup, kernel, k2 })
    }

    /// Initial guess `−k` with derivative `−k' = −V'/(2k)`.
    pub fn initial(&self) -> Field {
        let s = &self.setup;
        Field {
            values: s.k.iter().map(|k| -k).collect(),
            derivative: s.k.iter().zip(&s.dv).map(|(k, dv)| -*dv / (2.0 * k)).collect(),
        }
    }

    /// One application of `C`; the derivative of the result uses
    /// `C[S]' = k² − S² + 2k(C[S] − S)`.
    ///
    /// The tail beyond `X_max` is closed with zero; the size of the dropped
    /// piece at `X_max` is returned alongside.
    pub fn step(&self, s: &Field) -> Result<(Field, f64)> {
        let n = s.values.len();
        if n != self.k2.len() {
            return Err(Error::MeshMismatch(n, self.k2.len()));
        }
        let r: Vec<Complex64> = (0..n)
            .map(|i| s.derivative[i] + s.values[i] * s.values[i] - self.k2[i])
            .collect();
        let integral = self.kernel.apply(&self.setup.mesh, &r, Complex64::new(0.0, 0.0))?;
        let mut values = Vec::with_capacity(n);
        let mut derivative = Vec::with_capacity(n);
        for i in 0..n {
            values.push(s.values[i] + integral[i]);
            derivative.push(self.k2[i] - s.values[i] * s.values[i] + 2.0 * self.setup.k[i] * integral[i]);
        }
        let last = n - 1;
        let kr = self.setup.k[last].re;
        let closure = r[last].norm() / (2.0 * self.setup.beta * kr * (1.0 - 0.5 * self.setup.c));
        Ok((Field { values, derivative }, closure))
    }
}

/// Convenience wrapper for a single application of the map.
pub fn contraction_step(s: &Field, setup: &TailSetup) -> Result<Field> {
    Ok(ContractionMap::new(setup)?.step(s)?.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlopeConfig {
    /// Target fixed-point distance in the weighted norm.
    pub tol: f64,
    pub max_iters: usize,
    /// Riccati residual bound, relative to `|k|²`.
    pub res_tol: f64,
}

impl Default for SlopeConfig {
    fn default() -> Self {
        SlopeConfig {
            tol: 1e-12,
            max_iters: 200,
            res_tol: 1e-8,
        }
    }
}

impl SlopeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.res_tol > 0.0 && self.max_iters > 0) {
            return Err(Error::Config(
                "slope tol, res_tol and max_iters must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Converged slope on one tail.
#[derive(Clone, Debug)]
pub struct SlopeField {
    pub setup: TailSetup,
    pub s: Field,
    pub sigma: Vec<Complex64>,
    /// `‖S + k‖`.
    pub norm_dist: f64,
    /// `‖C[−k] + k‖`.
    pub first_step: f64,
    /// `‖S_{n+1} − S_n‖` for every iteration.
    pub increments: Vec<f64>,
    pub iters: usize,
    /// Largest Riccati residual over interior nodes up to `x_cut`, relative to `|k|²`.
    pub residual: f64,
    /// Size of the zero closure at `X_max` for `C` and for `σ`, damped back
    /// to `x_cut`.
    pub closure: f64,
    pub sigma_closure: f64,
}

impl SlopeField {
    pub fn e(&self) -> Complex64 {
        self.setup.e
    }

    pub fn mesh(&self) -> &Mesh {
        &self.setup.mesh
    }

    pub fn k(&self) -> &[Complex64] {
        &self.setup.k
    }

    /// Contraction ratios `inc_{n+1}/inc_n` for consecutive increments.
    pub fn ratios(&self) -> Vec<f64> {
        self.increments.windows(2).map(|w| w[1] / w[0]).collect()
    }

    pub fn slope_at(&self, x: f64) -> Result<Complex64> {
        self.setup.mesh.interpolate(&self.s.values, x)
    }

    pub fn sigma_at(&self, x: f64) -> Result<Complex64> {
        self.setup.mesh.interpolate(&self.sigma, x)
    }

    /// Nodes strictly inside `(x_E, x_cut)`.
    fn interior(&self) -> std::ops::Range<usize> {
        1..self.setup.cut_index()
    }

    /// Max over interior nodes up to `x_cut` of `|S' − (V − E − S²)| / |k|²`,
    /// with `S'` from mesh differentiation.
    pub fn riccati_residual(&self) -> Result<f64> {
        let ds = self.setup.mesh.differentiate(&self.s.values)?;
        let mut worst = 0.0f64;
        for i in self.interior() {
            let k2 = self.setup.k[i] * self.setup.k[i];
            let r = ds[i] - (k2 - self.s.values[i] * self.s.values[i]);
            worst = worst.max(r.norm() / k2.norm());
        }
        Ok(worst)
    }

    /// Max over interior nodes up to `x_cut` of `|σ' + 1 + 2Sσ| / (1 + |2Sσ|)`.
    pub fn sigma_residual(&self) -> Result<f64> {
        let d = self.setup.mesh.differentiate(&self.sigma)?;
        let mut worst = 0.0f64;
        for i in self.interior() {
            let t = 2.0 * self.s.values[i] * self.sigma[i];
            worst = worst.max((d[i] + 1.0 + t).norm() / (1.0 + t.norm()));
        }
        Ok(worst)
    }
}

/// Iterates the contraction map from `−k` to its fixed point, then computes
/// `σ` and checks the tail invariants.
pub fn solve_slope(setup: TailSetup, cfg: &SlopeConfig) -> Result<SlopeField> {
    cfg.validate()?;
    let e = setup.e;
    let consts = ContractionConstants::new(setup.c, setup.eps);
    let (s, first_step, increments, closure) = {
        let map = ContractionMap::new(&setup)?;
        let s0 = map.initial();
        let mut s = s0.clone();
        let mut increments = Vec::new();
        let mut first_step = 0.0;
        let mut closure = 0.0;
        let stop = cfg.tol * (1.0 - consts.alpha).max(1e-3);
        loop {
            if increments.len() >= cfg.max_iters {
                return Err(Error::NoConvergence {
                    stage: "slope",
                    e,
                    iters: cfg.max_iters,
                });
            }
            let (next, cl) = map.step(&s)?;
            let inc = weighted_norm(&next.minus(&s), &setup.k)?;
            let dist = weighted_norm(&next.minus(&s0), &setup.k)?;
            if increments.is_empty() {
                // The dropped tail is sized with the initial field; at the
                // fixed point the residual at X_max vanishes by construction.
                first_step = dist;
                closure = cl;
            }
            if !inc.is_finite() || dist > setup.eps {
                return Err(Error::BallExit {
                    e,
                    dist,
                    eps: setup.eps,
                });
            }
            increments.push(inc);
            s = next;
            if inc < stop {
                break;
            }
        }
        (s, first_step, increments, closure)
    };

    let minus_s: Vec<Complex64> = s.values.iter().map(|v| -v).collect();
    let ones = vec![Complex64::new(1.0, 0.0); minus_s.len()];
    let sigma = DampedKernel::new(&setup.mesh, &minus_s)?.apply(&setup.mesh, &ones, Complex64::new(0.0, 0.0))?;
    let last = setup.k.len() - 1;
    // Both closures act on [x_E, x_cut] only through the damping from X_max.
    let kr: Vec<Complex64> = setup.k.iter().map(|k| Complex64::new(k.re, 0.0)).collect();
    let damping = (-2.0 * setup.mesh.integral_from_right(&kr)?[setup.cut_index()].re).exp();
    let closure = closure * damping;
    let sigma_closure = consts.sigma_k / setup.k[last].norm() * damping;

    let norm_dist = weighted_norm(
        &Field {
            values: s.values.iter().zip(&setup.k).map(|(s, k)| s + k).collect(),
            derivative: s
                .derivative
                .iter()
                .zip(setup.k.iter().zip(&setup.dv))
                .map(|(d, (k, dv))| d + *dv / (2.0 * k))
                .collect(),
        },
        &setup.k,
    )?;
    let iters = increments.len();
    let mut field = SlopeField {
        setup,
        s,
        sigma,
        norm_dist,
        first_step,
        increments,
        iters,
        residual: 0.0,
        closure,
        sigma_closure,
    };
    field.residual = field.riccati_residual()?;
    check_invariants(&field, cfg, &consts)?;
    Ok(field)
}

fn check_invariants(f: &SlopeField, cfg: &SlopeConfig, consts: &ContractionConstants) -> Result<()> {
    let e = f.e();
    let fail = |detail: String| {
        Err(Error::Certificate {
            stage: "slope",
            e,
            detail,
        })
    };
    if f.norm_dist > f.setup.eps {
        return Err(Error::BallExit {
            e,
            dist: f.norm_dist,
            eps: f.setup.eps,
        });
    }
    let beta = f.setup.beta;
    for (i, &x) in f.setup.mesh.nodes().iter().enumerate() {
        let k = f.setup.k[i];
        if !(k.re > 0.0 && k.im.abs() < k.re) {
            return fail(format!("wavenumber {k} leaves the sector at x = {x}"));
        }
        if f.s.values[i].re > -beta * k.re {
            return fail(format!("Re S = {} > −β k_r = {} at x = {x}", f.s.values[i].re, -beta * k.re));
        }
        if f.sigma[i].norm() * k.norm() > consts.sigma_k * (1.0 + 1e-12) {
            return fail(format!("|σ||k| = {} exceeds {} at x = {x}", f.sigma[i].norm() * k.norm(), consts.sigma_k));
        }
    }
    if f.residual > cfg.res_tol {
        return fail(format!("Riccati residual {:.3e} exceeds {:.1e}", f.residual, cfg.res_tol));
    }
    let sr = f.sigma_residual()?;
    if sr > cfg.res_tol {
        return fail(format!("σ residual {sr:.3e} exceeds {:.1e}", cfg.res_tol));
    }
    Ok(())
}

/// `σ = ∂S/∂E` on the converged field.
pub fn slope_energy_derivative(s: &SlopeField) -> &[Complex64] {
    &s.sigma
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct L2Bound {
    /// `1/((2β − c)·k_r(x_E))`.
    pub bound: f64,
    /// `∫_{x_E}^{X_max} |ψ/ψ(x_E)|²` by quadrature.
    pub value: f64,
}

/// Bound on the tail L² norm of the normalized decaying solution, checked
/// against the quadrature value.
pub fn decay_l2_bound(s: &SlopeField) -> Result<L2Bound> {
    let mesh = &s.setup.mesh;
    let re: Vec<Complex64> = s.s.values.iter().map(|v| Complex64::new(v.re, 0.0)).collect();
    let from_right = mesh.integral_from_right(&re)?;
    let total = from_right[0];
    let dens: Vec<Complex64> = from_right.iter().map(|f| (2.0 * (total - f)).exp()).collect();
    let value = mesh.integral(&dens)?.re;
    let bound = 1.0 / ((2.0 * s.setup.beta - s.setup.c) * s.setup.k[0].re);
    if value > bound {
        return Err(Error::Certificate {
            stage: "l2",
            e: s.e(),
            detail: format!("tail L² integral {value} exceeds bound {bound}"),
        });
    }
    Ok(L2Bound { bound, value })
}
