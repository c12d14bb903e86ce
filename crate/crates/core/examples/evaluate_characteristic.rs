//! P(E) and dP/dE for the exponential wall at a few real and complex
//! energies, written as CSV to stdout.

use num_complex::Complex64;
use spectral_shoot::characteristic::{write_samples_csv, Evaluator, PipelineConfig};
use spectral_shoot::potentials::{make_builtin, Builtin};

fn main() -> spectral_shoot::Result<()> {
    let p = make_builtin(Builtin::ExpWall, None)?;
    let ev = Evaluator::new(&p, &PipelineConfig::default())?;
    let energies = [
        Complex64::new(-50.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(40.0, 0.0),
        Complex64::new(95.0, 0.0),
        Complex64::new(100.0, 5.0),
        Complex64::new(-20.0, -30.0),
    ];
    let samples = ev.evaluate_batch(&energies).into_iter().collect::<spectral_shoot::Result<Vec<_>>>()?;
    write_samples_csv(std::io::stdout(), &samples)?;

    eprintln!("E_ref = {}", ev.e_ref());
    for s in &samples {
        let d = &s.sides[0];
        eprintln!(
            "E = {:>8}  ln|P| = {:>9.4}  iters = {}  x_E = {:.4}  x_cut = {:.4}  X_max = {:.4}",
            format!("{}", s.e),
            s.ln_abs(),
            d.iters,
            d.x_e,
            d.x_cut,
            d.x_max
        );
    }
    Ok(())
}
