use num_complex::Complex64;
use spectral_shoot::characteristic::{Evaluator, PipelineConfig};
use spectral_shoot::oracles::oracle_real_zeros;
use spectral_shoot::potentials::{make_builtin, Builtin, OracleTag};
use spectral_shoot::spectra::{count_zeros_rectangle, find_eigenvalues, scan_real_axis, Rectangle, SpectraConfig};

fn evaluator(b: Builtin, kappa: Option<f64>) -> Evaluator {
    Evaluator::new(&make_builtin(b, kappa).unwrap(), &PipelineConfig::default()).unwrap()
}

#[test]
fn exp_wall_eigenvalues_match_bessel_zeros() {
    let ev = evaluator(Builtin::ExpWall, None);
    let report = find_eigenvalues(&ev, 0.0, 500.0, 300, None, &SpectraConfig::default()).unwrap();
    let zeros = oracle_real_zeros(OracleTag::BesselWall, 0.0, 500.0, 600).unwrap();
    assert!(zeros.len() >= 4);
    assert_eq!(report.eigenvalues.len(), zeros.len());
    for (r, z) in report.eigenvalues.iter().zip(&zeros) {
        assert!((r.e.re - z).abs() <= 1e-6 * z, "{} vs {z}", r.e.re);
        assert!(r.e.im.abs() <= 1e-9 * r.e.re.abs().max(1.0));
        assert_eq!(r.multiplicity, 1);
        assert!(r.residual <= 1e-8);
    }
    assert!(report.eigenvalues.windows(2).all(|w| w[0].e.re < w[1].e.re));
}

#[test]
fn morse_eigenvalues_match_whittaker_zeros() {
    let kappa = 2.25;
    let ev = evaluator(Builtin::TruncatedMorse, Some(kappa));
    let report = find_eigenvalues(&ev, 0.0, 250.0, 200, None, &SpectraConfig::default()).unwrap();
    let zeros = oracle_real_zeros(OracleTag::WhittakerMorse(kappa), 0.0, 250.0, 400).unwrap();
    assert_eq!(report.eigenvalues.len(), zeros.len());
    assert!(!zeros.is_empty());
    for (r, z) in report.eigenvalues.iter().zip(&zeros) {
        assert!((r.e.re - z).abs() <= 1e-6 * z.abs().max(1.0), "{} vs {z}", r.e.re);
    }
}

#[test]
fn shifting_the_potential_shifts_the_spectrum() {
    let p = make_builtin(Builtin::ExpWall, None).unwrap();
    let base = find_eigenvalues(&evaluator(Builtin::ExpWall, None), 0.0, 200.0, 150, None, &SpectraConfig::default()).unwrap();
    for gamma in [-30.0, 7.5] {
        let ev = Evaluator::new(&p.shifted(gamma), &PipelineConfig::default()).unwrap();
        let moved = find_eigenvalues(&ev, gamma, 200.0 + gamma, 150, None, &SpectraConfig::default()).unwrap();
        assert_eq!(moved.eigenvalues.len(), base.eigenvalues.len());
        for (m, b) in moved.eigenvalues.iter().zip(&base.eigenvalues) {
            assert!((m.e.re - (b.e.re + gamma)).abs() <= 1e-8, "γ = {gamma}: {} vs {}", m.e.re, b.e.re + gamma);
        }
    }
}

#[test]
fn contour_counts_add_over_adjacent_rectangles() {
    for b in [Builtin::ExpWall, Builtin::CoshPot] {
        let ev = evaluator(b, None);
        let cfg = SpectraConfig::default();
        let count = |lo: f64, hi: f64| count_zeros_rectangle(&ev, &Rectangle::new(lo, hi, -4.0, 4.0).unwrap(), &cfg).unwrap();
        let whole = count(0.0, 240.0);
        let (left, right) = (count(0.0, 121.0), count(121.0, 240.0));
        assert!(!whole.perturbed && !left.perturbed && !right.perturbed);
        assert_eq!(whole.count, left.count + right.count, "{b:?}");
        assert!(whole.count >= 2, "{b:?}");
    }
}

#[test]
fn brackets_are_stable_under_denser_scans() {
    let ev = evaluator(Builtin::SymmetricExp, None);
    let cfg = SpectraConfig::default();
    let coarse = scan_real_axis(&ev, -10.0, 300.0, 120, &cfg).unwrap();
    let fine = scan_real_axis(&ev, -10.0, 300.0, 240, &cfg).unwrap();
    assert_eq!(coarse.brackets.len(), fine.brackets.len());
    assert!(coarse.max_imag <= cfg.real_axis_tol);
}

#[test]
fn complex_rectangles_away_from_the_axis_are_empty() {
    let ev = evaluator(Builtin::ExpWall, None);
    let rect = Rectangle::new(50.0, 200.0, 3.0, 30.0).unwrap();
    let c = count_zeros_rectangle(&ev, &rect, &SpectraConfig::default()).unwrap();
    assert_eq!(c.count, 0);
    assert!(!rect.contains(Complex64::new(95.4, 0.0)));
}
