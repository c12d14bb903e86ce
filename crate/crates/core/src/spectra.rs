//! Eigenvalues as zeros of `P`: real-axis bracketing, Newton refinement and
//! argument-principle counts on rectangles.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::characteristic::{fmt_f64, CharacteristicSample, Evaluator};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectraConfig {
    /// Relative tolerance on the imaginary part of gauge-fixed real-axis samples.
    pub real_axis_tol: f64,
    /// Required `|P| / (|P'| max(1, |E|))` at an accepted eigenvalue.
    pub res_tol: f64,
    pub newton_max: usize,
    /// Argument-principle totals must be this close to an integer.
    pub residue_tol: f64,
    /// Initial boundary samples per unit length (at least 8 per side).
    pub contour_density: f64,
    pub contour_max_points: usize,
    /// Largest accepted phase change between neighbouring boundary samples.
    pub max_phase_step: f64,
    pub seed: u64,
}

impl Default for SpectraConfig {
    fn default() -> Self {
        SpectraConfig {
            real_axis_tol: 1e-6,
            res_tol: 1e-8,
            newton_max: 50,
            residue_tol: 0.05,
            contour_density: 0.5,
            contour_max_points: 20_000,
            max_phase_step: 0.5,
            seed: 0x5eed,
        }
    }
}

impl SpectraConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.real_axis_tol,
            self.res_tol,
            self.residue_tol,
            self.contour_density,
            self.max_phase_step,
        ];
        if positive.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Config("spectral tolerances must be positive".into()));
        }
        if self.residue_tol >= 0.5 || self.max_phase_step >= PI {
            return Err(Error::Config("residue_tol must be < 1/2 and max_phase_step < π".into()));
        }
        if self.newton_max == 0 {
            return Err(Error::Config("newton_max must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RealScan {
    pub energies: Vec<f64>,
    /// Gauge-fixed real parts, scaled by `2^-log_scale` of each sample.
    pub signs: Vec<f64>,
    /// Global phase making `P(E_min)` real and positive.
    pub phase: Complex64,
    pub brackets: Vec<(f64, f64)>,
    /// Largest imaginary part relative to the local modulus.
    pub max_imag: f64,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn real(e: f64) -> Complex64 {
    Complex64::new(e, 0.0)
}

/// Samples `P` at `n` equispaced real energies and returns the sign-change
/// brackets of the gauge-fixed (real) values.
pub fn scan_real_axis(ev: &Evaluator, e_min: f64, e_max: f64, n: usize, cfg: &SpectraConfig) -> Result<RealScan> {
    if !(e_min < e_max) || !e_min.is_finite() || !e_max.is_finite() || n < 2 {
        return Err(Error::Config(format!(
            "real scan needs finite e_min < e_max and n ≥ 2, got [{e_min}, {e_max}], n = {n}"
        )));
    }
    let energies = linspace(e_min, e_max, n);
    let es: Vec<Complex64> = energies.iter().map(|&e| real(e)).collect();
    let samples = ev.evaluate_batch(&es).into_iter().collect::<Result<Vec<_>>>()?;
    let first = samples[0].p;
    let phase = if first.norm() > 0.0 { first.conj() / first.norm() } else { real(1.0) };
    let rotated: Vec<Complex64> = samples.iter().map(|s| s.p * phase).collect();
    let ln_abs: Vec<f64> = samples.iter().map(|s| s.ln_abs()).collect();
    let mut max_imag: f64 = 0.0;
    for i in 0..n {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(n - 1);
        let local = ln_abs[lo..=hi].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let scale = samples[i].log_scale as f64 * std::f64::consts::LN_2;
        let imag = (rotated[i].im.abs().ln() + scale - local).exp();
        max_imag = max_imag.max(imag);
        if imag > cfg.real_axis_tol {
            return Err(Error::Certificate {
                stage: "real scan",
                e: es[i],
                detail: format!("P is not real in the fixed gauge (relative imaginary part {imag:.3e})"),
            });
        }
    }
    let signs: Vec<f64> = rotated.iter().map(|z| z.re).collect();
    let brackets = crate::roots::sign_change_brackets(&energies, &signs);
    Ok(RealScan {
        energies,
        signs,
        phase,
        brackets,
        max_imag,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Seed {
    Bracket(f64, f64),
    Point(Complex64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenvalueRecord {
    pub e: Complex64,
    pub multiplicity: u32,
    /// `|P| / (|P'| max(1, |E|))` at the returned point.
    pub residual: f64,
    pub bracket: Option<(f64, f64)>,
    pub newton_steps: usize,
}

fn newton_residual(s: &CharacteristicSample) -> f64 {
    (s.p / s.dp).norm() / s.e.norm().max(1.0)
}

/// Newton's method on `P`, with bisection inside a real bracket whenever the
/// step would leave it.
pub fn refine_eigenvalue(ev: &Evaluator, seed: Seed, cfg: &SpectraConfig) -> Result<EigenvalueRecord> {
    let (mut e, mut bracket) = match seed {
        Seed::Bracket(a, b) => {
            if !(a < b) {
                return Err(Error::Config(format!("empty bracket [{a}, {b}]")));
            }
            (real(0.5 * (a + b)), Some((a, b, ev.evaluate(real(a))?.p)))
        }
        Seed::Point(z) => (z, None),
    };
    let mut steps = 0;
    let mut last = ev.evaluate(e)?;
    let mut previous_step = f64::INFINITY;
    while steps < cfg.newton_max {
        let s = &last;
        let step = s.p / s.dp;
        let scale = e.norm().max(1.0);
        if !step.re.is_finite() || !step.im.is_finite() {
            return Err(Error::Multiplicity { e, dp: s.dp.norm() });
        }
        let mut next = e - step;
        if let Some((a, b, _)) = bracket {
            next = real(next.re);
            if !(next.re > a && next.re < b) {
                next = real(0.5 * (a + b));
            }
        }
        steps += 1;
        let done = step.norm() <= 1e-14 * scale || (step.norm() >= previous_step && newton_residual(s) <= cfg.res_tol);
        if done {
            break;
        }
        previous_step = step.norm();
        e = next;
        last = ev.evaluate(e)?;
        if let Some((a, b, pa)) = bracket.as_mut() {
            let same_side = (last.p.re * pa.re + last.p.im * pa.im) > 0.0;
            if same_side {
                *a = e.re;
                *pa = last.p;
            } else {
                *b = e.re;
            }
        }
    }
    let residual = newton_residual(&last);
    if residual > cfg.res_tol {
        return Err(Error::NoConvergence {
            stage: "newton",
            e,
            iters: steps,
        });
    }
    check_simple(ev, &last)?;
    Ok(EigenvalueRecord {
        e: last.e,
        multiplicity: 1,
        residual,
        bracket: match seed {
            Seed::Bracket(a, b) => Some((a, b)),
            Seed::Point(_) => None,
        },
        newton_steps: steps,
    })
}

/// A double zero would show `|P(E + δ)| ≫ |P'(E)| δ`.
fn check_simple(ev: &Evaluator, s: &CharacteristicSample) -> Result<()> {
    let delta = 1e-4 * s.e.norm().max(1.0);
    let near = ev.evaluate(s.e + delta)?;
    let predicted = s.dp_scaled().scale(Complex64::new(delta, 0.0));
    let ratio = near.p_scaled().ratio(&predicted).norm();
    if !(ratio > 0.5 && ratio < 2.0) {
        return Err(Error::Multiplicity {
            e: s.e,
            dp: s.dp.norm(),
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Rectangle> {
        let r = Rectangle {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        let finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !finite || re_min >= re_max || im_min >= im_max {
            return Err(Error::Config(format!("degenerate rectangle {r:?}")));
        }
        Ok(r)
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn shifted(&self, d: Complex64) -> Rectangle {
        Rectangle {
            re_min: self.re_min + d.re,
            re_max: self.re_max + d.re,
            im_min: self.im_min + d.im,
            im_max: self.im_max + d.im,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.re_min && z.re < self.re_max && z.im > self.im_min && z.im < self.im_max
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContourCount {
    pub count: i64,
    /// Total phase change over `2π` before rounding.
    pub raw: f64,
    pub points: usize,
    /// Rectangle actually used (after any perturbation off a zero).
    pub rect: Rectangle,
    pub perturbed: bool,
}

struct BoundaryPoint {
    /// Position along the boundary, `0..4` with one unit per side.
    t: f64,
    sample: CharacteristicSample,
}

fn boundary_point(rect: &Rectangle, t: f64) -> Complex64 {
    let c = rect.corners();
    let side = (t.floor() as usize).min(3);
    let u = t - side as f64;
    c[side] + (c[(side + 1) % 4] - c[side]) * u
}

/// Counts zeros of `P` inside `rect` by the argument principle.
///
/// The boundary is refined until every phase step between neighbours is small
/// and agrees with the step predicted by `P'/P`.
pub fn count_zeros_rectangle(ev: &Evaluator, rect: &Rectangle, cfg: &SpectraConfig) -> Result<ContourCount> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = *rect;
    for attempt in 0..4 {
        match contour_phase(ev, &current, cfg)? {
            Some((raw, points)) => {
                let count = raw.round();
                if (raw - count).abs() > cfg.residue_tol {
                    return Err(Error::Certificate {
                        stage: "contour count",
                        e: Complex64::new(current.re_min, current.im_min),
                        detail: format!("winding number {raw:.4} is not within {} of an integer", cfg.residue_tol),
                    });
                }
                return Ok(ContourCount {
                    count: count as i64,
                    raw,
                    points,
                    rect: current,
                    perturbed: attempt > 0,
                });
            }
            None => {
                let d = Complex64::new(rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3));
                current = rect.shifted(d);
            }
        }
    }
    Err(Error::Certificate {
        stage: "contour count",
        e: Complex64::new(rect.re_min, rect.im_min),
        detail: "boundary passes through zeros after repeated perturbation".into(),
    })
}

/// `None` when a boundary sample sits on a zero.
fn contour_phase(ev: &Evaluator, rect: &Rectangle, cfg: &SpectraConfig) -> Result<Option<(f64, usize)>> {
    let lengths = [
        rect.re_max - rect.re_min,
        rect.im_max - rect.im_min,
        rect.re_max - rect.re_min,
        rect.im_max - rect.im_min,
    ];
    let mut ts = Vec::new();
    for (side, len) in lengths.iter().enumerate() {
        let n = ((len * cfg.contour_density).ceil() as usize).max(8);
        ts.extend((0..n).map(|i| side as f64 + i as f64 / n as f64));
    }
    let mut points = evaluate_boundary(ev, rect, &ts)?;
    loop {
        if points.len() > cfg.contour_max_points {
            return Err(Error::Certificate {
                stage: "contour count",
                e: Complex64::new(rect.re_min, rect.im_min),
                detail: format!("contour refinement exceeded {} points", cfg.contour_max_points),
            });
        }
        let n = points.len();
        let mut total = 0.0;
        let mut refine = Vec::new();
        for i in 0..n {
            let (a, b) = (&points[i], &points[(i + 1) % n]);
            let t_b = if i + 1 == n { b.t + 4.0 } else { b.t };
            let (za, zb) = (a.sample.e, b.sample.e);
            let dz = zb - za;
            if a.sample.p.norm() == 0.0 {
                return Ok(None);
            }
            let step = b.sample.ratio(&a.sample).arg();
            // Trapezoid of Im(P'/P dz) predicts the same step when resolved.
            let predicted = (0.5 * (a.sample.log_derivative() + b.sample.log_derivative()) * dz).im;
            let near_zero = newton_residual(&a.sample) * za.norm().max(1.0) < 1e-6 * dz.norm();
            if near_zero {
                return Ok(None);
            }
            if step.abs() > cfg.max_phase_step || (step - predicted).abs() > 0.1 {
                refine.push(0.5 * (a.t + t_b));
            }
            total += step;
        }
        if refine.is_empty() {
            return Ok(Some((total / (2.0 * PI), n)));
        }
        let refine: Vec<f64> = refine.into_iter().map(|t| t % 4.0).collect();
        let added = evaluate_boundary(ev, rect, &refine)?;
        points.extend(added);
        points.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
    }
}

fn evaluate_boundary(ev: &Evaluator, rect: &Rectangle, ts: &[f64]) -> Result<Vec<BoundaryPoint>> {
    let es: Vec<Complex64> = ts.iter().map(|&t| boundary_point(rect, t)).collect();
    ev.evaluate_batch(&es)
        .into_iter()
        .zip(ts)
        .map(|(s, &t)| s.map(|sample| BoundaryPoint { t, sample }))
        .collect()
}

/// Real eigenvalues in `[e_min, e_max]` with the contour certificate of the
/// surrounding rectangle `[e_min, e_max] × [−δ, δ]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub e_min: f64,
    pub e_max: f64,
    pub scan_points: usize,
    pub eigenvalues: Vec<EigenvalueRecord>,
    pub contour: Option<ContourCount>,
    pub complete: Option<bool>,
    pub max_imag: f64,
}

pub fn find_eigenvalues(
    ev: &Evaluator,
    e_min: f64,
    e_max: f64,
    n: usize,
    half_height: Option<f64>,
    cfg: &SpectraConfig,
) -> Result<SpectrumReport> {
    cfg.validate()?;
    let scan = scan_real_axis(ev, e_min, e_max, n, cfg)?;
    let eigenvalues = scan
        .brackets
        .iter()
        .map(|&(a, b)| refine_eigenvalue(ev, Seed::Bracket(a, b), cfg))
        .collect::<Result<Vec<_>>>()?;
    let contour = match half_height {
        Some(h) => Some(count_zeros_rectangle(ev, &Rectangle::new(e_min, e_max, -h, h)?, cfg)?),
        None => None,
    };
    let complete = contour.as_ref().map(|c| {
        let inside = eigenvalues.iter().filter(|r| c.rect.contains(r.e)).count() as i64;
        inside == c.count
    });
    Ok(SpectrumReport {
        e_min,
        e_max,
        scan_points: n,
        eigenvalues,
        contour,
        complete,
        max_imag: scan.max_imag,
    })
}

pub const EIGEN_CSV_HEADER: [&str; 5] = ["index", "Re_E", "Im_E", "residual", "newton_steps"];

pub fn write_eigenvalues_csv<W: Write>(out: W, records: &[EigenvalueRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EIGEN_CSV_HEADER)?;
    for (i, r) in records.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            fmt_f64(r.e.re),
            fmt_f64(r.e.im),
            fmt_f64(r.residual),
            r.newton_steps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthFit {
    pub exponent: f64,
    /// Half-width of an approximate 95% interval from the regression residuals.
    pub ci_half_width: f64,
    pub r: Vec<f64>,
    /// `ln |P(−r)|`.
    pub ln_abs_p: Vec<f64>,
}

/// Least-squares slope of `ln ln |P(−r)|` against `ln r`.
pub fn growth_order_estimate(ev: &Evaluator, r_list: &[f64]) -> Result<GrowthFit> {
    if r_list.len() < 4 || r_list.windows(2).any(|w| !(w[1] > w[0])) || r_list[0] <= 0.0 {
        return Err(Error::Config("growth fit needs ≥ 4 increasing positive radii".into()));
    }
    if r_list[r_list.len() - 1] / r_list[0] < 1e3 * (1.0 - 1e-12) {
        return Err(Error::Config("growth fit radii must span at least three decades".into()));
    }
    let es: Vec<Complex64> = r_list.iter().map(|&r| real(-r)).collect();
    let samples = ev.evaluate_batch(&es).into_iter().collect::<Result<Vec<_>>>()?;
    let ln_abs_p: Vec<f64> = samples.iter().map(|s| s.ln_abs()).collect();
    if let Some((i, _)) = ln_abs_p.iter().enumerate().find(|(_, l)| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::Certificate {
            stage: "growth fit",
            e: es[i],
            detail: format!("ln|P| = {} is not positive and finite", ln_abs_p[i]),
        });
    }
    let xs: Vec<f64> = r_list.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = ln_abs_p.iter().map(|l| l.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    Ok(GrowthFit {
        exponent: slope,
        ci_half_width: 2.0 * se,
        r: r_list.to_vec(),
        ln_abs_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristic::PipelineConfig;
    use crate::potentials::{make_builtin, Builtin};

    fn exp_wall() -> Evaluator {
        let p = make_builtin(Builtin::ExpWall, None).unwrap();
        Evaluator::new(&p, &PipelineConfig::default()).unwrap()
    }

    #[test]
    fn no_brackets_below_the_spectrum() {
        let scan = scan_real_axis(&exp_wall(), -30.0, 30.0, 20, &SpectraConfig::default()).unwrap();
        assert!(scan.brackets.is_empty());
        assert!(scan.signs.iter().all(|s| *s > 0.0));
    }

    #[test]
    fn newton_from_a_nearby_seed() {
        let ev = exp_wall();
        let e1 = 95.42886894447955;
        let r = refine_eigenvalue(&ev, Seed::Point(real(1.01 * e1)), &SpectraConfig::default()).unwrap();
        assert!(r.newton_steps <= 6, "{r:?}");
        assert!((r.e.re - e1).abs() < 1e-6 * e1);
        assert!(r.residual <= 1e-8);
    }

    #[test]
    fn empty_rectangle_counts_zero() {
        let rect = Rectangle::new(-20.0, 40.0, -3.0, 3.0).unwrap();
        let c = count_zeros_rectangle(&exp_wall(), &rect, &SpectraConfig::default()).unwrap();
        assert_eq!(c.count, 0);
        assert!(c.raw.abs() < 0.05);
    }

    #[test]
    fn rectangle_validation() {
        assert!(Rectangle::new(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(Rectangle::new(0.0, 1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let rec = EigenvalueRecord {
            e: real(2.5),
            multiplicity: 1,
            residual: 1e-12,
            bracket: None,
            newton_steps: 3,
        };
        let mut buf = Vec::new();
        write_eigenvalues_csv(&mut buf, &[rec]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "index,Re_E,Im_E,residual,newton_steps\n1,2.5,0.0,1e-12,3\n");
    }
}
