//! Naive finite-`b` shooting (`ψ(b) = 0`, `ψ'(b) = 1`) against the exact
//! decaying-subspace start.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characteristic::{propagate_left, Evaluator, PipelineConfig};
use crate::error::{Error, Result};
use crate::ode::OdeOptions;
use crate::potentials::{right_turning_point, Domain, PotentialSpec};
use crate::roots::{bracketed_root, sign_change_brackets};
use crate::spectra::{find_eigenvalues, refine_eigenvalue, Seed, SpectraConfig};

/// Errors below this fraction of `|E|` are treated as round-off.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    /// 1-based eigenvalue index.
    pub index: usize,
    /// Distance of `b` beyond the turning point.
    pub offset: f64,
    pub b: f64,
    pub e_naive: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenConvergence {
    pub index: usize,
    pub exact: f64,
    pub turning_point: f64,
    /// `|E − E'|` where `E'` comes from a run with the whole tail on the mesh
    /// and `X_max` pushed out by the extension.
    pub extension_shift: f64,
    /// Errors strictly decrease in `b` until they reach round-off.
    pub monotone: bool,
    /// Mean decrease of `log10(error)` per unit of `b` above round-off.
    pub decades_per_unit: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub eigenvalues: Vec<EigenConvergence>,
    pub extension: f64,
}

/// `ψ(a)` for the naive start at `b`, with its binary exponent folded in.
pub fn naive_boundary_value(p: &PotentialSpec, e: f64, b: f64, opts: &OdeOptions) -> Result<f64> {
    let Domain::HalfLineHardWall(a) = p.domain() else {
        return Err(Error::Config("naive shooting needs a half-line potential".into()));
    };
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let sol = propagate_left(p, Complex64::new(e, 0.0), b, [zero, one, zero, zero], a, opts)?;
    Ok(sol.y[0].re * 2f64.powi(sol.exp2.clamp(-1000, 1000) as i32))
}

/// Naive eigenvalue nearest to `guess`, searched in `guess ± half_width`.
pub fn naive_eigenvalue(p: &PotentialSpec, guess: f64, half_width: f64, b: f64, opts: &OdeOptions) -> Result<f64> {
    let n = 41;
    let xs: Vec<f64> = (0..n)
        .map(|i| guess - half_width + 2.0 * half_width * i as f64 / (n - 1) as f64)
        .collect();
    let vals = xs
        .iter()
        .map(|&e| naive_boundary_value(p, e, b, opts))
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = sign_change_brackets(&xs, &vals)
        .into_iter()
        .min_by(|u, v| {
            let du = (0.5 * (u.0 + u.1) - guess).abs();
            let dv = (0.5 * (v.0 + v.1) - guess).abs();
            du.partial_cmp(&dv).unwrap()
        })
        .ok_or(Error::NoConvergence {
            stage: "naive shooting",
            e: Complex64::new(guess, 0.0),
            iters: n,
        })?;
    bracketed_root(
        |e| naive_boundary_value(p, e, b, opts).unwrap_or(f64::NAN),
        lo,
        hi,
        1e-15 * guess.abs().max(1.0),
        300,
    )
    .ok_or(Error::NoConvergence {
        stage: "naive shooting",
        e: Complex64::new(guess, 0.0),
        iters: 300,
    })
}

/// Tabulates naive-shooting errors for the eigenvalues with the given 1-based
/// `indices` (found by scanning `[e_min, e_max]` with `n` points), at
/// `b = x_turn + offset`, and the exact method's shift when the truncation
/// point is pushed out by `extension`.
pub fn convergence_report(
    ev: &Evaluator,
    indices: &[usize],
    offsets: &[f64],
    search: (f64, f64, usize),
    extension: f64,
    spectra: &SpectraConfig,
) -> Result<ConvergenceReport> {
    if indices.is_empty() || indices.contains(&0) {
        return Err(Error::Config("eigenvalue indices are 1-based and nonempty".into()));
    }
    if offsets.is_empty() || offsets.iter().any(|o| !(*o > 0.0)) {
        return Err(Error::Config("naive cutoffs must lie beyond the turning point".into()));
    }
    if !(extension > 0.0) {
        return Err(Error::Config("X_max extension must be positive".into()));
    }
    let p = ev.potential();
    let spectrum = find_eigenvalues(ev, search.0, search.1, search.2, None, spectra)?;
    // The extended run keeps the whole tail on the mesh, so that moving X_max
    // really moves the truncation point.
    let mut extended_cfg: PipelineConfig = ev.config().clone();
    extended_cfg.tail.k_tail = None;
    extended_cfg.tail.extend += extension;
    let extended = Evaluator::new(p, &extended_cfg)?;
    let opts = OdeOptions {
        rtol: 1e-12,
        atol: 1e-14,
        ..OdeOptions::default()
    };
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &index in indices {
        let record = spectrum.eigenvalues.get(index - 1).ok_or_else(|| {
            Error::Config(format!(
                "only {} eigenvalues in [{}, {}], index {index} requested",
                spectrum.eigenvalues.len(),
                search.0,
                search.1
            ))
        })?;
        let exact = record.e.re;
        let (a, b) = record.bracket.unwrap_or((exact - 1.0, exact + 1.0));
        let shifted = refine_eigenvalue(&extended, Seed::Bracket(a, b), spectra)?;
        let turning = right_turning_point(p, exact)?;
        let gap = neighbour_gap(&spectrum.eigenvalues.iter().map(|r| r.e.re).collect::<Vec<_>>(), index - 1);
        let mut errors = Vec::new();
        for &offset in offsets {
            let b = turning + offset;
            let e_naive = naive_eigenvalue(p, exact, 0.45 * gap, b, &opts)?;
            let error = (e_naive - exact).abs();
            errors.push((b, error));
            rows.push(ConvergenceRow {
                index,
                offset,
                b,
                e_naive,
                error,
            });
        }
        let floor = ROUNDOFF_FLOOR * exact.abs().max(1.0);
        let resolved: Vec<(f64, f64)> = errors.iter().copied().filter(|(_, e)| *e > floor).collect();
        let monotone = resolved.windows(2).all(|w| w[1].1 < w[0].1);
        let decades_per_unit = match (resolved.first(), resolved.last()) {
            (Some(f), Some(l)) if l.0 > f.0 => (f.1.log10() - l.1.log10()) / (l.0 - f.0),
            _ => f64::NAN,
        };
        summaries.push(EigenConvergence {
            index,
            exact,
            turning_point: turning,
            extension_shift: (shifted.e.re - exact).abs(),
            monotone,
            decades_per_unit,
        });
    }
    Ok(ConvergenceReport {
        rows,
        eigenvalues: summaries,
        extension,
    })
}

fn neighbour_gap(es: &[f64], i: usize) -> f64 {
    let left = if i > 0 { es[i] - es[i - 1] } else { f64::INFINITY };
    let right = if i + 1 < es.len() { es[i + 1] - es[i] } else { f64::INFINITY };
    let g = left.min(right);
    if g.is_finite() {
        g
    } else {
        0.5 * es[i].abs().max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::{make_builtin, Builtin};

    #[test]
    fn rejects_cutoffs_inside_the_well() {
        let p = make_builtin(Builtin::ExpWall, None).unwrap();
        let ev = Evaluator::new(&p, &PipelineConfig::default()).unwrap();
        let r = convergence_report(&ev, &[1], &[-0.1], (0.0, 120.0, 60), 2.0, &SpectraConfig::default());
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn naive_value_is_linear_in_free_space() {
        let p = PotentialSpec::new("zero", Domain::HalfLineHardWall(0.0), |_| 0.0, |_| 0.0);
        let v = naive_boundary_value(&p, 0.0, 1.5, &OdeOptions::default()).unwrap();
        assert!((v + 1.5).abs() < 1e-10);
    }
}
