//! Normalized ratios P(E)/P(E_r) against the closed-form Bessel, Whittaker and
//! product-of-Bessel characteristic functions.

use num_complex::Complex64;
use spectral_shoot::characteristic::{Evaluator, PipelineConfig};
use spectral_shoot::oracles::oracle_characteristic;
use spectral_shoot::potentials::{make_builtin, Builtin};

fn main() -> spectral_shoot::Result<()> {
    let e_r = Complex64::new(-1.0, 0.0);
    let cases = [
        (Builtin::ExpWall, None, vec![-50.0, -10.0, 20.0, 95.4, 160.0, 200.0]),
        (Builtin::TruncatedMorse, Some(2.25), vec![-60.0, -30.0, -10.0, -4.0]),
        (Builtin::SymmetricExp, None, vec![-20.0, 10.0, 60.0, 120.0]),
    ];
    for (builtin, kappa, energies) in cases {
        let p = make_builtin(builtin, kappa)?;
        let tag = p.oracle_tag().expect("builtin with a closed form");
        let ev = Evaluator::new(&p, &PipelineConfig::default())?;
        let reference = ev.evaluate(e_r)?;
        let o_ref = oracle_characteristic(tag, e_r)?.value;
        println!("{}", p.label());
        for e in energies {
            let e = Complex64::new(e, 0.0);
            let ratio = ev.evaluate(e)?.ratio(&reference);
            let oracle = oracle_characteristic(tag, e)?;
            let expected = oracle.value / o_ref;
            println!(
                "  E = {:>6}  pipeline {:>+.10e}  oracle {:>+.10e}  rel {:.1e}  ({:?})",
                e.re,
                ratio.re,
                expected.re,
                (ratio - expected).norm() / expected.norm(),
                oracle.method
            );
        }
    }
    Ok(())
}
