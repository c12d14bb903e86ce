use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Domain, PotentialSpec};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::quad::gauss_legendre;

/// Spacing of the lattice on which tail starts are searched.
pub const LATTICE_STEP: f64 = 1.0 / 16.0;

/// Parameters of the tail search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TailConfig {
    /// Derivative-condition constant: `|V'| ≤ 2c·k_r³`.
    pub c: f64,
    /// Contraction-ball radius.
    pub eps: f64,
    /// Cone slope: `V − Re E > cone·|Im E|`.
    pub cone: f64,
    /// Required bound on `exp(−2∫ k_r)` over the truncated tail.
    pub tail_tol: f64,
    /// Largest cell length.
    pub h_max: f64,
    /// How far past the lattice origin the search may go.
    pub horizon: f64,
    /// Extra length past `x_max` on which the conditions are also checked.
    pub margin: f64,
    /// Wavenumber at which the mesh remainder hands over to the asymptotic
    /// approximant. `None` keeps the whole tail on the mesh: zeros of `P` are
    /// unaffected, but the normalization then integrates the slope up to the
    /// closure at `X_max` and is only good to the reported `closure`.
    pub k_tail: Option<f64>,
    /// Lattice origin override (default: the wall, or the lattice floor of the minimizer).
    pub floor: Option<f64>,
    /// Additional length appended to the truncation point.
    pub extend: f64,
}

impl Default for TailConfig {
    fn default() -> Self {
        TailConfig {
            c: 1.0 / 40.0,
            eps: 1.0 / 8.0,
            cone: std::f64::consts::SQRT_2,
            tail_tol: 1e-14,
            h_max: LATTICE_STEP,
            horizon: 64.0,
            margin: 1.0,
            k_tail: Some(500.0),
            floor: None,
            extend: 0.0,
        }
    }
}

impl TailConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.c > 0.0 && self.c < 2.0) {
            return bad(format!("c must lie in (0, 2), got {}", self.c));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return bad(format!("eps must lie in (0, 1/2), got {}", self.eps));
        }
        if !(self.cone >= 1.0 && self.cone.is_finite()) {
            return bad(format!("cone slope must be ≥ 1, got {}", self.cone));
        }
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return bad(format!("tail_tol must lie in (0, 1), got {}", self.tail_tol));
        }
        if !(self.h_max > 0.0 && self.h_max <= LATTICE_STEP) {
            return bad(format!("h_max must lie in (0, {LATTICE_STEP}], got {}", self.h_max));
        }
        if !(self.horizon > 0.0 && self.margin >= 0.0 && self.extend >= 0.0) {
            return bad("horizon must be positive, margin and extend nonnegative".into());
        }
        if let Some(k) = self.k_tail {
            if !(k > 0.0 && k.is_finite()) {
                return bad(format!("k_tail must be positive, got {k}"));
            }
        }
        Ok(())
    }

    pub fn beta(&self) -> f64 {
        1.0 - 2.0 * self.eps
    }
}

/// Tail data for one energy: where the contraction argument applies and the
/// mesh it is solved on.
#[derive(Clone, Debug)]
pub struct TailSetup {
    pub e: Complex64,
    pub x_e: f64,
    pub c: f64,
    pub eps: f64,
    pub beta: f64,
    /// Mesh point beyond which the slope is replaced by its asymptotic expansion.
    pub x_cut: f64,
    pub x_max: f64,
    pub mesh: Mesh,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub k: Vec<Complex64>,
    /// `exp(−2∫_{x_E}^{X_max} k_r)`.
    pub truncation: f64,
}

struct Probe {
    c: f64,
    cone: f64,
    e: Complex64,
}

impl Probe {
    /// `Ok(Some(k_r))` when both conditions hold at `x`.
    fn check(&self, p: &PotentialSpec, x: f64) -> Result<Option<f64>> {
        let v = p.v(x);
        let dv = p.dv(x);
        if v.is_nan() || dv.is_nan() || v == f64::NEG_INFINITY {
            return Err(Error::NonFinite { x });
        }
        if !v.is_finite() || !dv.is_finite() {
            return Err(Error::NonFinite { x });
        }
        if v - self.e.re <= self.cone * self.e.im.abs() {
            return Ok(None);
        }
        let kr = Complex64::new(v - self.e.re, -self.e.im).sqrt().re;
        if dv.abs() > 2.0 * self.c * kr.powi(3) {
            return Ok(None);
        }
        Ok(Some(kr))
    }
}

/// Lattice origin used by [`find_tail_setup`] when the config has no floor.
pub fn lattice_origin(p: &PotentialSpec, cfg: &TailConfig) -> Result<f64> {
    if let Some(f) = cfg.floor {
        return Ok(f);
    }
    match p.domain() {
        Domain::HalfLineHardWall(a) => Ok(a),
        Domain::WholeLine => {
            let (xm, _) = p.minimum()?;
            Ok((xm / LATTICE_STEP).floor() * LATTICE_STEP)
        }
    }
}

/// Finds the tail start `x_E`, the truncation point and the tail mesh for energy `e`.
pub fn find_tail_setup(p: &PotentialSpec, e: Complex64, cfg: &TailConfig) -> Result<TailSetup> {
    cfg.validate()?;
    let origin = lattice_origin(p, cfg)?;
    let probe = Probe {
        c: cfg.c,
        cone: cfg.cone,
        e,
    };
    let lat = |j: usize| origin + j as f64 * LATTICE_STEP;
    let log_tol = -cfg.tail_tol.ln();
    let (gx, gw) = gauss_legendre(8);
    let horizon_err = || Error::TailConditions {
        e,
        horizon: cfg.horizon,
    };

    // Checks lattice interval m; returns (∫ k_r, max k_r) or None on failure.
    let interval = |m: usize| -> Result<Option<(f64, f64)>> {
        let (a, b) = (lat(m), lat(m + 1));
        let mut kmax = 0.0f64;
        for x in [a, b] {
            match probe.check(p, x)? {
                Some(kr) => kmax = kmax.max(kr),
                None => return Ok(None),
            }
        }
        let mut integral = 0.0;
        for (t, w) in gx.iter().zip(&gw) {
            let x = a + 0.5 * (b - a) * (t + 1.0);
            match probe.check(p, x)? {
                Some(kr) => {
                    kmax = kmax.max(kr);
                    integral += 0.5 * (b - a) * w * kr;
                }
                None => return Ok(None),
            }
        }
        Ok(Some((integral, kmax)))
    };

    let mut j0 = 0usize;
    'search: loop {
        if lat(j0) - origin > cfg.horizon {
            return Err(horizon_err());
        }
        let mut kmax = Vec::new();
        let mut int_all = 0.0;
        let mut int_cut = 0.0;
        let mut cut: Option<usize> = None;
        let mut m = j0;
        loop {
            if lat(m) - origin > cfg.horizon + cfg.margin + 8.0 {
                return Err(horizon_err());
            }
            if cut.is_none() {
                let reached = match cfg.k_tail {
                    Some(kt) => {
                        let v = p.v(lat(m));
                        v >= kt * kt && v - e.norm() >= 0.25 * kt * kt
                    }
                    None => false,
                };
                if reached {
                    cut = Some(m);
                }
            }
            let Some((i, km)) = interval(m)? else {
                j0 = m + 1;
                continue 'search;
            };
            kmax.push(km);
            int_all += i;
            if cut.is_some() {
                int_cut += i;
            }
            m += 1;
            let enough = 2.0 * int_all >= log_tol
                && match cfg.k_tail {
                    Some(_) => cut.is_some() && 2.0 * int_cut >= log_tol,
                    None => true,
                };
            if enough {
                break;
            }
        }
        let extra = (cfg.extend / LATTICE_STEP).ceil() as usize;
        for _ in 0..extra {
            let Some((_, km)) = interval(m)? else {
                j0 = m + 1;
                continue 'search;
            };
            kmax.push(km);
            m += 1;
        }
        let m_max = m;
        let margin = (cfg.margin / LATTICE_STEP).ceil() as usize;
        for mm in m_max..m_max + margin {
            if interval(mm)?.is_none() {
                j0 = mm + 1;
                continue 'search;
            }
        }

        let mut edges = vec![lat(j0)];
        let mut owner = Vec::new();
        for (i, &km) in kmax.iter().enumerate() {
            let (a, b) = (lat(j0 + i), lat(j0 + i + 1));
            let h = cfg.h_max.min(1.0 / (4.0 * km));
            let n = ((b - a) / h).ceil().max(1.0) as usize;
            for s in 1..n {
                edges.push(a + (b - a) * s as f64 / n as f64);
                owner.push(j0 + i);
            }
            edges.push(b);
            owner.push(j0 + i);
        }
        let mesh = Mesh::from_edges(edges);
        let nodes = mesh.nodes();
        let mut v = Vec::with_capacity(nodes.len());
        let mut dv = Vec::with_capacity(nodes.len());
        let mut k = Vec::with_capacity(nodes.len());
        for (idx, &x) in nodes.iter().enumerate() {
            if probe.check(p, x)?.is_none() {
                let cell = (idx.saturating_sub(1)) / crate::mesh::CELL_DEGREE;
                j0 = owner[cell.min(owner.len() - 1)] + 1;
                continue 'search;
            }
            let vx = p.v(x);
            v.push(vx);
            dv.push(p.dv(x));
            k.push(Complex64::new(vx - e.re, -e.im).sqrt());
        }
        let kr: Vec<Complex64> = k.iter().map(|z| Complex64::new(z.re, 0.0)).collect();
        let total = mesh.integral(&kr)?.re;
        let x_max = lat(m_max);
        let x_cut = match cut {
            Some(c) if cfg.k_tail.is_some() => lat(c),
            _ => x_max,
        };
        return Ok(TailSetup {
            e,
            x_e: lat(j0),
            c: cfg.c,
            eps: cfg.eps,
            beta: cfg.beta(),
            x_cut,
            x_max,
            mesh,
            v,
            dv,
            k,
            truncation: (-2.0 * total).exp(),
        });
    }
}

impl TailSetup {
    /// Index of the mesh node at `x_cut`.
    pub fn cut_index(&self) -> usize {
        self.mesh
            .edge_node(self.x_cut)
            .expect("x_cut is a lattice point and hence a mesh edge")
    }

    /// Re-checks the cone, derivative, ball and truncation invariants on the
    /// given mesh (typically `self.mesh.refined()`).
    pub fn verify_on(&self, p: &PotentialSpec, mesh: &Mesh, cone: f64, tail_tol: f64) -> Result<()> {
        let probe = Probe {
            c: self.c,
            cone,
            e: self.e,
        };
        let mut kr = Vec::with_capacity(mesh.len());
        for &x in mesh.nodes() {
            match probe.check(p, x)? {
                Some(k) => kr.push(Complex64::new(k, 0.0)),
                None => {
                    return Err(Error::Certificate {
                        stage: "tail",
                        e: self.e,
                        detail: format!("tail condition fails at x = {x}"),
                    })
                }
            }
        }
        if self.beta <= 0.0 {
            return Err(Error::Certificate {
                stage: "tail",
                e: self.e,
                detail: format!("beta = {} is not positive", self.beta),
            });
        }
        let t = (-2.0 * mesh.integral(&kr)?.re).exp();
        if t >= tail_tol {
            return Err(Error::Certificate {
                stage: "tail",
                e: self.e,
                detail: format!("truncation factor {t:.3e} ≥ {tail_tol:.1e}"),
            });
        }
        Ok(())
    }
}
