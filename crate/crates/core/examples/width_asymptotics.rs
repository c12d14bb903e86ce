//! Width w(v) of the sublevel set {V ≤ v} against ln(√v / 2π).

use std::f64::consts::PI;

use spectral_shoot::potentials::{make_builtin, width, Builtin};

fn main() -> spectral_shoot::Result<()> {
    let levels: Vec<f64> = (0..=6).map(|i| 1e3 * 10f64.powi(i)).collect();
    for b in Builtin::ALL {
        let kappa = (b == Builtin::TruncatedMorse).then_some(2.25);
        let p = make_builtin(b, kappa)?;
        println!("{}", p.label());
        for &v in &levels {
            let w = width(&p, v)?;
            let asym = (v.sqrt() / (2.0 * PI)).ln();
            let scaled = (w - asym).abs() * v.sqrt() / v.ln();
            println!("  v = {v:>7.0e}  w = {w:.10}  w - asym = {:+.3e}  scaled {scaled:.4}", w - asym);
        }
    }
    Ok(())
}
