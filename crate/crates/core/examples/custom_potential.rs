//! User-defined operators: a closure, a tabulated table and a Sturm–Liouville
//! problem brought to Liouville normal form. All three describe the quartic
//! oscillator −ψ'' + x⁴ψ, whose ground state is 1.0603620905.

use num_complex::Complex64;
use spectral_shoot::characteristic::{Evaluator, PipelineConfig};
use spectral_shoot::potentials::{sl_to_schrodinger, tabulated, Domain, PotentialSpec, SlCoefficient, SlDomain};
use spectral_shoot::spectra::{refine_eigenvalue, Seed, SpectraConfig};

fn ground_state(p: &PotentialSpec, bracket: (f64, f64)) -> spectral_shoot::Result<f64> {
    p.validate()?;
    let ev = Evaluator::new(p, &PipelineConfig::default())?;
    let r = refine_eigenvalue(&ev, Seed::Bracket(bracket.0, bracket.1), &SpectraConfig::default())?;
    let p0 = ev.evaluate(Complex64::new(bracket.0, 0.0))?;
    println!("  P'/P at {} = {:.8}", bracket.0, p0.log_derivative().re);
    Ok(r.e.re)
}

fn main() -> spectral_shoot::Result<()> {
    let quartic = PotentialSpec::new("quartic", Domain::WholeLine, |x: f64| x.powi(4), |x: f64| 4.0 * x.powi(3))
        .with_second_derivative(|x: f64| 12.0 * x * x);
    println!("closure");
    println!("  E0 = {:.10}", ground_state(&quartic, (0.5, 2.0))?);

    let xs: Vec<f64> = (0..=480).map(|i| -6.0 + 0.025 * i as f64).collect();
    let v = xs.iter().map(|x| x.powi(4)).collect();
    let dv = xs.iter().map(|x| 4.0 * x.powi(3)).collect();
    // Past the last row the table continues exponentially. That changes the
    // normalization of P but not its zeros.
    let table = tabulated("quartic table", Domain::WholeLine, xs, v, dv)?;
    println!("table");
    println!("  E0 = {:.10}", ground_state(&table, (0.5, 2.0))?);

    // −y'' + z⁴y = λy/4: x = z/2, V = 64x⁴ and λ = 4·E0.
    let sl = sl_to_schrodinger(
        "sturm-liouville",
        |z: f64| z.powi(4),
        SlCoefficient::constant(1.0),
        SlCoefficient::constant(0.25),
        SlDomain::WholeLine { z_min: -6.0, z_max: 6.0 },
    )?;
    println!("sturm-liouville");
    println!("  λ0/4 = {:.10}", 0.25 * ground_state(&sl, (2.0, 8.0))?);
    Ok(())
}
