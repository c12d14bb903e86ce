//! Whole-line operators through the Wronskian of the two decaying solutions.
//! The matching point is arbitrary, so moving it leaves P unchanged.

use num_complex::Complex64;
use spectral_shoot::characteristic::characteristic_two_sided;
use spectral_shoot::potentials::{make_builtin, Builtin};

fn main() -> spectral_shoot::Result<()> {
    let p = make_builtin(Builtin::SymmetricExp, None)?;
    let e_r = Complex64::new(-1.0, 0.0);
    let points = [-0.5, 0.0, 0.3, 0.7];
    for e in [-10.0, 25.0, 80.0] {
        let e = Complex64::new(e, 0.0);
        print!("E = {:>5}:", e.re);
        for a in points {
            let ratio = characteristic_two_sided(&p, e, a)?.ratio(&characteristic_two_sided(&p, e_r, a)?);
            print!("  a = {a:+.1} -> {:+.12e}", ratio.re);
        }
        println!();
    }

    // No closed form here, but the same machinery applies.
    let cosh = make_builtin(Builtin::CoshPot, None)?;
    let s = characteristic_two_sided(&cosh, Complex64::new(150.0, 0.0), 0.0)?;
    println!("cosh_pot: ln|P(150)| = {:.6}, P'/P = {:.6}", s.ln_abs(), s.log_derivative());
    Ok(())
}
