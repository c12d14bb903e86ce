//! Order of growth of P along the negative real axis, fitted from
//! ln ln |P(−r)| against ln r.

use spectral_shoot::characteristic::{Evaluator, PipelineConfig};
use spectral_shoot::potentials::{make_builtin, Builtin};
use spectral_shoot::spectra::growth_order_estimate;

fn main() -> spectral_shoot::Result<()> {
    let p = make_builtin(Builtin::ExpWall, None)?;
    let ev = Evaluator::new(&p, &PipelineConfig::default())?;
    let r: Vec<f64> = (0..=16).map(|i| 10f64.powf(2.0 + 0.25 * i as f64)).collect();
    let fit = growth_order_estimate(&ev, &r)?;
    for (r, l) in fit.r.iter().zip(&fit.ln_abs_p) {
        println!("r = {r:>9.3e}  ln|P(-r)| = {l:.6}");
    }
    println!("order ≈ {:.3} ± {:.3}", fit.exponent, fit.ci_half_width);
    Ok(())
}
