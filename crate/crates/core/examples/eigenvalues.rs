//! Eigenvalues of the exponential wall below 200: real-axis scan, Newton
//! refinement and an argument-principle count over the enclosing rectangle.

use spectral_shoot::characteristic::{Evaluator, PipelineConfig};
use spectral_shoot::oracles::oracle_real_zeros;
use spectral_shoot::potentials::{make_builtin, Builtin, OracleTag};
use spectral_shoot::spectra::{find_eigenvalues, write_eigenvalues_csv, SpectraConfig};

fn main() -> spectral_shoot::Result<()> {
    let p = make_builtin(Builtin::ExpWall, None)?;
    let ev = Evaluator::new(&p, &PipelineConfig::default())?;
    let report = find_eigenvalues(&ev, 0.0, 200.0, 200, Some(5.0), &SpectraConfig::default())?;
    write_eigenvalues_csv(std::io::stdout(), &report.eigenvalues)?;

    let zeros = oracle_real_zeros(OracleTag::BesselWall, 0.0, 200.0, 400)?;
    for (r, z) in report.eigenvalues.iter().zip(&zeros) {
        eprintln!("E = {:.12}  oracle {:.12}  diff {:.1e}", r.e.re, z, (r.e.re - z).abs());
    }
    if let Some(c) = &report.contour {
        eprintln!(
            "contour: {} zeros (winding {:.6}) from {} boundary samples; complete = {:?}",
            c.count, c.raw, c.points, report.complete
        );
    }
    Ok(())
}
