//! The characteristic function `P(E)`: the decaying solution, normalized to be
//! asymptotic to a fixed reference solution, evaluated at the wall (or the
//! Wronskian of the two decaying solutions at a matching point).

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate, schrodinger_rhs, OdeOptions, OdeSolution};
use crate::potentials::{find_tail_setup, lattice_origin, Domain, PotentialSpec, TailConfig};
use crate::quad::{exp_sinh, tanh_sinh};
use crate::riccati::{solve_slope, SlopeConfig, SlopeField};
use crate::scaled::ScaledComplex;
use crate::wkb;

/// Everything the pipeline needs besides the potential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub tail: TailConfig,
    pub slope: SlopeConfig,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    /// Reference energy of the normalization; default `min(0, min V − 1)`.
    pub e_ref: Option<f64>,
    /// Point where the reference solution is set to 1; default its tail start.
    pub gauge_point: Option<f64>,
    /// Matching point for whole-line problems.
    pub matching_point: f64,
    /// Relative tolerance of the asymptotic-tail quadratures.
    pub quad_tol: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tail: TailConfig::default(),
            slope: SlopeConfig::default(),
            ode_rtol: 1e-10,
            ode_atol: 1e-12,
            e_ref: None,
            gauge_point: None,
            matching_point: 0.0,
            quad_tol: 1e-14,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.tail.validate()?;
        self.slope.validate()?;
        if !(self.ode_rtol > 0.0 && self.ode_atol > 0.0 && self.quad_tol > 0.0) {
            return Err(Error::Config("ODE and quadrature tolerances must be positive".into()));
        }
        if !self.matching_point.is_finite() {
            return Err(Error::Config("matching point must be finite".into()));
        }
        Ok(())
    }

    fn ode(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.ode_rtol,
            atol: self.ode_atol,
            ..OdeOptions::default()
        }
    }
}

/// `log ψ_E(x0)`, `S_E(x0)` and `∂_E log ψ_E(x0)` in the reference gauge.
#[derive(Clone, Copy, Debug)]
pub struct Normalization {
    pub log_psi: Complex64,
    pub slope: Complex64,
    pub dlog_psi: Complex64,
    pub sigma: Complex64,
    /// Sum of the quadrature error estimates.
    pub quad_error: f64,
}

/// `∫_x^{x_cut} f` for a nodal field `f` on the slope mesh.
fn remainder_at(field: &SlopeField, f: &[Complex64], x: f64) -> Result<Complex64> {
    let mesh = field.mesh();
    let tail = mesh.integral_from_right(f)?;
    let cut = tail[field.setup.cut_index()];
    Ok(mesh.interpolate(&tail, x)? - cut)
}

fn slope_remainder(p: &PotentialSpec, field: &SlopeField) -> Vec<Complex64> {
    let e = field.e();
    field
        .mesh()
        .nodes()
        .iter()
        .zip(&field.s.values)
        .map(|(&x, s)| s - wkb::slope(p, e, x))
        .collect()
}

fn sigma_remainder(p: &PotentialSpec, field: &SlopeField) -> Vec<Complex64> {
    let e = field.e();
    field
        .mesh()
        .nodes()
        .iter()
        .zip(&field.sigma)
        .map(|(&x, s)| s - wkb::slope_energy_derivative(p, e, x))
        .collect()
}

fn check_inside(field: &SlopeField, x: f64, what: &str) -> Result<()> {
    let s = &field.setup;
    if x < s.x_e - 1e-12 || x > s.x_cut + 1e-12 {
        return Err(Error::Config(format!(
            "{what} {x} outside [x_E, x_cut] = [{}, {}] for E = {}",
            s.x_e,
            s.x_cut,
            field.e()
        )));
    }
    Ok(())
}

/// Normalizes the decaying solution at energy `E` against the reference
/// solution, which is set to 1 at `x_g`.
///
/// Up to `x_cut` the slopes are integrated on their meshes; beyond it the
/// three-term asymptotic slope is integrated analytically.
pub fn normalize_at(
    p: &PotentialSpec,
    s_e: &SlopeField,
    s_ref: &SlopeField,
    x_g: f64,
    x0: f64,
    quad_tol: f64,
) -> Result<Normalization> {
    check_inside(s_e, x0, "normalization point")?;
    check_inside(s_ref, x_g, "gauge point")?;
    let r_ref = remainder_at(s_ref, &slope_remainder(p, s_ref), x_g)?;
    normalize_with(p, s_e, s_ref.e(), r_ref, x_g, x0, quad_tol)
}

fn normalize_with(
    p: &PotentialSpec,
    s_e: &SlopeField,
    e_ref: Complex64,
    r_ref: Complex64,
    x_g: f64,
    x0: f64,
    quad_tol: f64,
) -> Result<Normalization> {
    let e = s_e.e();
    let r_e = remainder_at(s_e, &slope_remainder(p, s_e), x0)?;
    let r_sigma = remainder_at(s_e, &sigma_remainder(p, s_e), x0)?;
    let xm = x_g.max(x0);
    let abs_tol = 1e-300;
    let i1 = tanh_sinh(|x| wkb::slope(p, e_ref, x), x_g, xm, quad_tol, abs_tol);
    let i2 = tanh_sinh(|x| wkb::slope(p, e, x), x0, xm, quad_tol, abs_tol);
    let i3 = exp_sinh(|x| wkb::slope_difference(p, e_ref, e, x), xm, 1.0, quad_tol, abs_tol);
    let j = exp_sinh(|x| wkb::slope_energy_derivative(p, e, x), x0, 1.0, quad_tol, abs_tol);
    let log_psi = r_ref - r_e + i1.value - i2.value + i3.value;
    Ok(Normalization {
        log_psi,
        slope: s_e.slope_at(x0)?,
        dlog_psi: -(r_sigma + j.value),
        sigma: s_e.sigma_at(x0)?,
        quad_error: i1.error + i2.error + i3.error + j.error,
    })
}

/// Integrates `ψ'' = (V − E)ψ` with its E-derivative system from `x0` down to
/// `a`, stopping at every breakpoint of the potential on the way.
///
/// The state is `[ψ, ψ', ∂ψ/∂E, ∂ψ'/∂E]`.
pub fn propagate_left(
    p: &PotentialSpec,
    e: Complex64,
    x0: f64,
    y0: [Complex64; 4],
    a: f64,
    opts: &OdeOptions,
) -> Result<OdeSolution<4>> {
    if a > x0 {
        return Err(Error::Config(format!("propagation target {a} lies right of start {x0}")));
    }
    let mut stops: Vec<f64> = p
        .breakpoints()
        .iter()
        .copied()
        .filter(|&b| b > a && b < x0)
        .collect();
    stops.sort_by(|u, v| v.partial_cmp(u).unwrap());
    stops.push(a);
    let mut sol = OdeSolution {
        y: y0,
        exp2: 0,
        steps: 0,
        rejected: 0,
    };
    let mut x = x0;
    for stop in stops {
        let part = integrate(
            |x, y: &[Complex64; 4]| schrodinger_rhs(p.q(x, e), y),
            x,
            sol.y,
            stop,
            opts,
            e,
        )?;
        sol.y = part.y;
        sol.exp2 += part.exp2;
        sol.steps += part.steps;
        sol.rejected += part.rejected;
        x = stop;
    }
    Ok(sol)
}

/// Per-side diagnostics of one evaluation.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SideDiagnostics {
    pub x_e: f64,
    pub x_cut: f64,
    pub x_max: f64,
    /// Where the tail solution is handed to the ODE.
    pub x_handoff: f64,
    pub iters: usize,
    pub first_step: f64,
    pub norm_dist: f64,
    pub residual: f64,
    pub truncation: f64,
    pub closure: f64,
    pub quad_error: f64,
    pub ode_steps: usize,
    /// Estimate of `|∂_E log ψ|` lost by stopping the mesh at `x_cut`.
    pub tail_gap: f64,
}

/// One evaluation of `P` and `dP/dE`; the true values are `p·2^log_scale`
/// and `dp·2^log_scale`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CharacteristicSample {
    pub e: Complex64,
    pub p: Complex64,
    pub dp: Complex64,
    pub log_scale: i64,
    /// Normalization point (right side).
    pub x0: f64,
    pub sides: Vec<SideDiagnostics>,
}

impl CharacteristicSample {
    fn from_scaled(e: Complex64, p: ScaledComplex, dp: ScaledComplex, sides: Vec<SideDiagnostics>) -> Self {
        CharacteristicSample {
            e,
            p: p.mantissa,
            dp: dp.mantissa_at(p.exp2),
            log_scale: p.exp2,
            x0: sides[0].x_handoff,
            sides,
        }
    }

    pub fn p_scaled(&self) -> ScaledComplex {
        ScaledComplex::new(self.p, self.log_scale)
    }

    pub fn dp_scaled(&self) -> ScaledComplex {
        ScaledComplex::new(self.dp, self.log_scale)
    }

    /// `P'/P`.
    pub fn log_derivative(&self) -> Complex64 {
        self.dp / self.p
    }

    /// `ln |P|`.
    pub fn ln_abs(&self) -> f64 {
        self.p_scaled().ln_abs()
    }

    pub fn iters(&self) -> usize {
        self.sides.iter().map(|s| s.iters).max().unwrap_or(0)
    }

    /// `P(self) / P(other)`.
    pub fn ratio(&self, other: &CharacteristicSample) -> Complex64 {
        self.p_scaled().ratio(&other.p_scaled())
    }
}

struct Side {
    p: PotentialSpec,
    end: f64,
    tail: TailConfig,
    x_g: f64,
    r_ref: Complex64,
    reference: SlopeField,
}

struct SideState {
    factor: ScaledComplex,
    y: [Complex64; 4],
    diag: SideDiagnostics,
}

/// Evaluates `P` for one potential; holds the reference solution(s).
pub struct Evaluator {
    p: PotentialSpec,
    cfg: PipelineConfig,
    e_ref: f64,
    sides: Vec<Side>,
}

impl Evaluator {
    pub fn new(p: &PotentialSpec, cfg: &PipelineConfig) -> Result<Evaluator> {
        cfg.validate()?;
        let e_ref = match cfg.e_ref {
            Some(e) => e,
            None => {
                let (_, vmin) = p.minimum()?;
                (vmin - 1.0).min(0.0)
            }
        };
        let mut sides = Vec::new();
        match p.domain() {
            Domain::HalfLineHardWall(a) => sides.push(Self::side(p.clone(), a, cfg, e_ref)?),
            Domain::WholeLine => {
                let a = cfg.matching_point;
                sides.push(Self::side(p.clone(), a, cfg, e_ref)?);
                sides.push(Self::side(p.reflected(), -a, cfg, e_ref)?);
            }
        }
        Ok(Evaluator {
            p: p.clone(),
            cfg: cfg.clone(),
            e_ref,
            sides,
        })
    }

    fn side(p: PotentialSpec, end: f64, cfg: &PipelineConfig, e_ref: f64) -> Result<Side> {
        let mut tail = cfg.tail.clone();
        // Pin the lattice so every energy shares the reference's grid.
        tail.floor = Some(lattice_origin(&p, &tail)?);
        let er = Complex64::new(e_ref, 0.0);
        let setup = find_tail_setup(&p, er, &tail).map_err(|e| e.at("reference tail"))?;
        let reference = solve_slope(setup, &cfg.slope).map_err(|e| e.at("reference slope"))?;
        let x_g = cfg.gauge_point.unwrap_or(reference.setup.x_e);
        check_inside(&reference, x_g, "gauge point")?;
        let r_ref = remainder_at(&reference, &slope_remainder(&p, &reference), x_g)?;
        Ok(Side {
            p,
            end,
            tail,
            x_g,
            r_ref,
            reference,
        })
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.p
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn e_ref(&self) -> f64 {
        self.e_ref
    }

    /// Reference slope field of the right (or only) side.
    pub fn reference(&self) -> &SlopeField {
        &self.sides[0].reference
    }

    /// Converged slope field for `E` on the right (or only) side.
    pub fn slope_field(&self, e: Complex64) -> Result<SlopeField> {
        let side = &self.sides[0];
        let setup = find_tail_setup(&side.p, e, &side.tail).map_err(|er| er.at("tail"))?;
        solve_slope(setup, &self.cfg.slope).map_err(|er| er.at("slope"))
    }

    fn side_state(&self, side: &Side, e: Complex64) -> Result<SideState> {
        let setup = find_tail_setup(&side.p, e, &side.tail).map_err(|er| er.at("tail"))?;
        let field = solve_slope(setup, &self.cfg.slope).map_err(|er| er.at("slope"))?;
        let x_h = side.end.max(field.setup.x_e);
        let n = normalize_with(
            &side.p,
            &field,
            Complex64::new(self.e_ref, 0.0),
            side.r_ref,
            side.x_g,
            x_h,
            self.cfg.quad_tol,
        )
        .map_err(|er| er.at("normalize"))?;
        let d = n.dlog_psi;
        let y0 = [
            Complex64::new(1.0, 0.0),
            n.slope,
            d,
            n.sigma + n.slope * d,
        ];
        let (y, exp2, steps) = if x_h > side.end {
            let sol = propagate_left(&side.p, e, x_h, y0, side.end, &self.cfg.ode()).map_err(|er| er.at("propagate"))?;
            (sol.y, sol.exp2, sol.steps)
        } else {
            (y0, 0, 0)
        };
        let cut = field.setup.cut_index();
        let k_cut = field.setup.k[cut].norm();
        let diag = SideDiagnostics {
            x_e: field.setup.x_e,
            x_cut: field.setup.x_cut,
            x_max: field.setup.x_max,
            x_handoff: x_h,
            iters: field.iters,
            first_step: field.first_step,
            norm_dist: field.norm_dist,
            residual: field.residual,
            truncation: field.setup.truncation,
            closure: field.closure,
            quad_error: n.quad_error,
            ode_steps: steps,
            tail_gap: 1.0 / (16.0 * k_cut.powi(4)),
        };
        let factor = ScaledComplex::from_ln(n.log_psi) * ScaledComplex::new(Complex64::new(1.0, 0.0), exp2);
        Ok(SideState { factor, y, diag })
    }

    /// `P(E)` and `dP/dE`.
    pub fn evaluate(&self, e: Complex64) -> Result<CharacteristicSample> {
        if !(e.re.is_finite() && e.im.is_finite()) {
            return Err(Error::Config(format!("energy {e} is not finite")));
        }
        match self.sides.as_slice() {
            [only] => {
                let s = self.side_state(only, e)?;
                let p = s.factor.scale(s.y[0]);
                let dp = s.factor.scale(s.y[2]);
                Ok(CharacteristicSample::from_scaled(e, p, dp, vec![s.diag]))
            }
            [right, left] => {
                let r = self.side_state(right, e)?;
                let l = self.side_state(left, e)?;
                let f = r.factor * l.factor;
                let (u, v) = (r.y, l.y);
                // ψ⁻(a) = φ(−a), ψ⁻'(a) = −φ'(−a) for the reflected solution φ.
                let w = u[1] * v[0] + v[1] * u[0];
                let dw = u[3] * v[0] + u[1] * v[2] + v[3] * u[0] + v[1] * u[2];
                Ok(CharacteristicSample::from_scaled(e, f.scale(w), f.scale(dw), vec![r.diag, l.diag]))
            }
            _ => unreachable!("an evaluator has one or two sides"),
        }
    }

    /// Evaluates a batch in parallel; results keep the input order.
    pub fn evaluate_batch(&self, es: &[Complex64]) -> Vec<Result<CharacteristicSample>> {
        es.par_iter().map(|&e| self.evaluate(e)).collect()
    }
}

/// `P(E)` for a half-line problem with default settings.
pub fn characteristic_value(p: &PotentialSpec, e: Complex64) -> Result<CharacteristicSample> {
    if !matches!(p.domain(), Domain::HalfLineHardWall(_)) {
        return Err(Error::Config("characteristic_value needs a half-line potential".into()));
    }
    Evaluator::new(p, &PipelineConfig::default())?.evaluate(e)
}

/// Wronskian form of `P(E)` for a whole-line problem, matched at `a`.
pub fn characteristic_two_sided(p: &PotentialSpec, e: Complex64, a: f64) -> Result<CharacteristicSample> {
    if p.domain() != Domain::WholeLine {
        return Err(Error::Config("characteristic_two_sided needs a whole-line potential".into()));
    }
    let cfg = PipelineConfig {
        matching_point: a,
        ..PipelineConfig::default()
    };
    Evaluator::new(p, &cfg)?.evaluate(e)
}

pub const SAMPLE_CSV_HEADER: [&str; 9] = [
    "Re_E", "Im_E", "Re_P", "Im_P", "Re_dP", "Im_dP", "log_scale", "x0", "iters",
];

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Writes samples as CSV with shortest round-trip float formatting.
pub fn write_samples_csv<W: Write>(out: W, samples: &[CharacteristicSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SAMPLE_CSV_HEADER)?;
    for s in samples {
        w.write_record([
            fmt_f64(s.e.re),
            fmt_f64(s.e.im),
            fmt_f64(s.p.re),
            fmt_f64(s.p.im),
            fmt_f64(s.dp.re),
            fmt_f64(s.dp.im),
            s.log_scale.to_string(),
            fmt_f64(s.x0),
            s.iters().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{make_builtin, Builtin};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn reference_energy_is_normalized_to_one() {
        let p = make_builtin(Builtin::ExpWall, None).unwrap();
        let ev = Evaluator::new(&p, &PipelineConfig::default()).unwrap();
        let r = ev.reference();
        let n = normalize_at(&p, r, r, r.setup.x_e, r.setup.x_e, 1e-14).unwrap();
        assert!(n.log_psi.norm() < 1e-15, "{:?}", n);
        assert_eq!(n.slope, r.s.values[0]);
    }

    #[test]
    fn free_propagation_matches_closed_form() {
        let p = PotentialSpec::new("zero", Domain::HalfLineHardWall(0.0), |_| 0.0, |_| 0.0);
        let (p0, d0) = (c(0.4), c(-0.9));
        let sol = propagate_left(&p, c(-1.0), 2.0, [p0, d0, c(0.0), c(0.0)], 0.0, &OdeOptions::default()).unwrap();
        let exact = p0 * 2f64.cosh() - d0 * 2f64.sinh();
        assert!((sol.y[0] - exact).norm() < 1e-9 * exact.norm());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let p = make_builtin(Builtin::ExpWall, None).unwrap();
        let ev = Evaluator::new(&p, &PipelineConfig::default()).unwrap();
        let s = ev.evaluate(c(-4.0)).unwrap();
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &[s]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("Re_E,Im_E,Re_P,Im_P,Re_dP,Im_dP,log_scale,x0,iters\n-4.0,0.0,"));
        assert_eq!(text.lines().count(), 2);
    }
}
