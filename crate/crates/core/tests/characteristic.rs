use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_shoot::characteristic::{characteristic_two_sided, characteristic_value, Evaluator, PipelineConfig};
use spectral_shoot::potentials::{make_builtin, Builtin, PotentialSpec, TailConfig};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ratios(ev: &Evaluator, es: &[Complex64], e_r: Complex64) -> Vec<Complex64> {
    let r = ev.evaluate(e_r).unwrap();
    es.iter().map(|&e| ev.evaluate(e).unwrap().ratio(&r)).collect()
}

fn assert_close(a: &[Complex64], b: &[Complex64], tol: f64) {
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).norm() <= tol * y.norm(), "{x} vs {y}");
    }
}

const ENERGIES: [Complex64; 5] = [
    Complex64::new(-30.0, 0.0),
    Complex64::new(12.0, 0.0),
    Complex64::new(80.0, 4.0),
    Complex64::new(140.0, 0.0),
    Complex64::new(-5.0, -9.0),
];

#[test]
fn ratios_do_not_depend_on_the_gauge_point() {
    for (b, kappa) in [(Builtin::ExpWall, None), (Builtin::TruncatedMorse, Some(2.25))] {
        let p = make_builtin(b, kappa).unwrap();
        let base = ratios(&Evaluator::new(&p, &PipelineConfig::default()).unwrap(), &ENERGIES, c(-1.0, 0.0));
        for g in [2.5, 3.25] {
            let cfg = PipelineConfig {
                gauge_point: Some(g),
                ..PipelineConfig::default()
            };
            let moved = ratios(&Evaluator::new(&p, &cfg).unwrap(), &ENERGIES, c(-1.0, 0.0));
            assert_close(&moved, &base, 1e-8);
        }
    }
}

#[test]
fn ratios_do_not_depend_on_the_truncation_point() {
    let p = make_builtin(Builtin::ExpWall, None).unwrap();
    let base = ratios(&Evaluator::new(&p, &PipelineConfig::default()).unwrap(), &ENERGIES, c(-1.0, 0.0));
    for tail in [
        TailConfig {
            extend: 1.0,
            ..TailConfig::default()
        },
        TailConfig {
            k_tail: Some(2000.0),
            ..TailConfig::default()
        },
        TailConfig {
            tail_tol: 1e-16,
            ..TailConfig::default()
        },
    ] {
        let cfg = PipelineConfig {
            tail,
            ..PipelineConfig::default()
        };
        let moved = ratios(&Evaluator::new(&p, &cfg).unwrap(), &ENERGIES, c(-1.0, 0.0));
        assert_close(&moved, &base, 1e-8);
    }
}

#[test]
fn whole_tail_on_the_mesh_keeps_zeros_and_reports_its_closure() {
    let p = make_builtin(Builtin::ExpWall, None).unwrap();
    let cfg = PipelineConfig {
        tail: TailConfig {
            k_tail: None,
            ..TailConfig::default()
        },
        ..PipelineConfig::default()
    };
    let full = Evaluator::new(&p, &cfg).unwrap();
    let split = Evaluator::new(&p, &PipelineConfig::default()).unwrap();
    let e = c(95.42886894446062, 0.0);
    let (a, b) = (full.evaluate(e).unwrap(), split.evaluate(e).unwrap());
    // Newton steps from the same point agree: the normalizations differ by a
    // nonvanishing factor only.
    let (step_a, step_b) = ((a.p / a.dp).norm(), (b.p / b.dp).norm());
    assert!(step_a < 1e-10 && step_b < 1e-10, "{step_a:e} {step_b:e}");
    assert!(a.sides[0].closure > 1e-3, "closure {}", a.sides[0].closure);
    assert!(b.sides[0].closure < 1e-12, "closure {}", b.sides[0].closure);
}

#[test]
fn wronskian_is_independent_of_the_matching_point() {
    for b in [Builtin::SymmetricExp, Builtin::CoshPot, Builtin::Tzitzeica] {
        let p = make_builtin(b, None).unwrap();
        for e in [c(-20.0, 0.0), c(60.0, 3.0), c(150.0, 0.0)] {
            let base = characteristic_two_sided(&p, e, 0.0).unwrap();
            for a in [-0.6, -0.2, 0.1, 0.35, 0.7] {
                let s = characteristic_two_sided(&p, e, a).unwrap();
                assert!((s.ratio(&base) - 1.0).norm() <= 1e-8, "{b:?} E = {e}, a = {a}");
            }
        }
    }
}

fn check_derivatives(p: &PotentialSpec, seed: u64) {
    let ev = Evaluator::new(p, &PipelineConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..20 {
        let e = c(rng.gen_range(-50.0..50.0), rng.gen_range(-10.0..10.0));
        let h = 1e-4 * e.norm().max(1.0);
        let s = ev.evaluate(e).unwrap();
        let base = s.p_scaled();
        let fd = (ev.evaluate(e + h).unwrap().p_scaled().ratio(&base) - ev.evaluate(e - h).unwrap().p_scaled().ratio(&base)) / (2.0 * h);
        let d = s.log_derivative();
        assert!((d - fd).norm() <= 1e-5 * fd.norm(), "{}: E = {e}: {d} vs {fd}", p.label());
    }
}

#[test]
fn derivative_matches_central_differences() {
    check_derivatives(&make_builtin(Builtin::ExpWall, None).unwrap(), 1);
    check_derivatives(&make_builtin(Builtin::TruncatedMorse, Some(2.25)).unwrap(), 2);
    check_derivatives(&make_builtin(Builtin::SymmetricExp, None).unwrap(), 3);
}

#[test]
fn mean_over_a_small_circle_is_the_centre_value() {
    for (b, kappa) in [(Builtin::ExpWall, None), (Builtin::CoshPot, None), (Builtin::TruncatedMorse, Some(2.25))] {
        let p = make_builtin(b, kappa).unwrap();
        let ev = Evaluator::new(&p, &PipelineConfig::default()).unwrap();
        for e in [c(-25.0, 0.0), c(33.0, 6.0), c(170.0, -2.0)] {
            let centre = ev.evaluate(e).unwrap();
            let r = 1e-3 * e.norm().max(1.0);
            let mean: Complex64 = (0..4)
                .map(|k| ev.evaluate(e + r * Complex64::from_polar(1.0, 0.5 * PI * k as f64)).unwrap().ratio(&centre))
                .sum::<Complex64>()
                * 0.25;
            assert!((mean - 1.0).norm() <= 1e-6, "{b:?} E = {e}: {mean}");
        }
    }
}

#[test]
fn real_axis_values_are_real() {
    let p = make_builtin(Builtin::ExpWall, None).unwrap();
    for e in [-40.0, 0.0, 95.0, 300.0] {
        let s = characteristic_value(&p, c(e, 0.0)).unwrap();
        assert!(s.p.im.abs() <= 1e-12 * s.p.norm() && s.dp.im.abs() <= 1e-12 * s.dp.norm(), "{e}");
    }
}

#[test]
fn batches_match_sequential_evaluation() {
    let p = make_builtin(Builtin::ExpWall, None).unwrap();
    let ev = Evaluator::new(&p, &PipelineConfig::default()).unwrap();
    let es: Vec<Complex64> = (0..24).map(|i| c(-40.0 + 10.0 * i as f64, (i % 3) as f64)).collect();
    let batch = ev.evaluate_batch(&es);
    for (e, b) in es.iter().zip(batch) {
        let b = b.unwrap();
        let s = ev.evaluate(*e).unwrap();
        assert_eq!(b.e, *e);
        assert_eq!((b.p, b.dp, b.log_scale), (s.p, s.dp, s.log_scale));
    }
}

#[test]
fn entry_points_check_the_domain() {
    let half = make_builtin(Builtin::ExpWall, None).unwrap();
    let whole = make_builtin(Builtin::CoshPot, None).unwrap();
    assert!(characteristic_two_sided(&half, c(1.0, 0.0), 0.0).is_err());
    assert!(characteristic_value(&whole, c(1.0, 0.0)).is_err());
}
