//! The Riccati tail solve at one energy: the a priori constants next to the
//! measured first-step size and contraction ratios.

use num_complex::Complex64;
use spectral_shoot::characteristic::{Evaluator, PipelineConfig};
use spectral_shoot::potentials::{make_builtin, Builtin};
use spectral_shoot::riccati::{decay_l2_bound, ContractionConstants};

fn main() -> spectral_shoot::Result<()> {
    let cfg = PipelineConfig::default();
    let bounds = ContractionConstants::new(cfg.tail.c, cfg.tail.eps);
    println!(
        "c = {}, eps = {}: sigma0 = {:.6}, alpha = {:.6}, |sigma k| <= {:.6}",
        cfg.tail.c, cfg.tail.eps, bounds.sigma0, bounds.alpha, bounds.sigma_k
    );

    let p = make_builtin(Builtin::ExpWall, None)?;
    let ev = Evaluator::new(&p, &cfg)?;
    for e in [Complex64::new(-4.0, 0.0), Complex64::new(150.0, 0.0), Complex64::new(30.0, 40.0)] {
        let t0 = std::time::Instant::now();
        let field = ev.slope_field(e)?;
        let elapsed = t0.elapsed();
        let ratios = field.ratios();
        let worst = ratios.iter().cloned().fold(0.0, f64::max);
        let l2 = decay_l2_bound(&field)?;
        println!("\nE = {e}");
        println!("  tail [{:.4}, {:.4}], {} cells", field.setup.x_e, field.setup.x_max, field.mesh().cells());
        println!("  first step {:.6} (bound {:.6})", field.first_step, bounds.sigma0);
        println!("  ratios {:?}", ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>());
        println!("  worst ratio {worst:.4} (bound {:.4}), iterations {}", bounds.alpha, field.iters);
        println!("  Riccati residual {:.2e}, closure {:.2e}", field.residual, field.closure);
        println!("  S(x_E) = {:.6}, sigma(x_E) = {:.3e}", field.s.values[0], field.sigma[0]);
        println!("  tail L2 {:.4e} <= {:.4e}", l2.value, l2.bound);
        println!("  {elapsed:.2?}");
    }
    Ok(())
}
