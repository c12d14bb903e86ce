//! Naive shooting from a finite cutoff b with ψ(b) = 0 against the exact
//! decaying start. The naive error falls quickly past the turning point and
//! then stalls at round-off.

use spectral_shoot::characteristic::{Evaluator, PipelineConfig};
use spectral_shoot::convergence::convergence_report;
use spectral_shoot::potentials::{make_builtin, Builtin};
use spectral_shoot::spectra::SpectraConfig;

fn main() -> spectral_shoot::Result<()> {
    let p = make_builtin(Builtin::ExpWall, None)?;
    let ev = Evaluator::new(&p, &PipelineConfig::default())?;
    let offsets: Vec<f64> = (1..=8).map(|i| 0.15 * i as f64).collect();
    let report = convergence_report(&ev, &[1, 2], &offsets, (0.0, 200.0, 100), 2.0, &SpectraConfig::default())?;
    for row in &report.rows {
        println!(
            "n = {}  b = {:.3}  naive {:.15}  error {:.2e}",
            row.index, row.b, row.e_naive, row.error
        );
    }
    for s in &report.eigenvalues {
        println!(
            "n = {}: exact {:.15}, turning point {:.4}, {:.1} decades per unit b, monotone {}, X_max shift {:.1e}",
            s.index, s.exact, s.turning_point, s.decades_per_unit, s.monotone, s.extension_shift
        );
    }
    Ok(())
}
