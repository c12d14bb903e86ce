use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_shoot::oracles::{bessel_k, oracle_real_zeros, whittaker_w, whittaker_w_continued, OracleMethod};
use spectral_shoot::potentials::OracleTag;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn bessel_is_even_on_random_parameters() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let nu = c(rng.gen_range(-6.0..6.0), rng.gen_range(-15.0..15.0));
        let z = rng.gen_range(0.5..8.0);
        let a = bessel_k(nu, z).unwrap().value;
        let b = bessel_k(-nu, z).unwrap().value;
        assert!((a - b).norm() <= 1e-12 * a.norm(), "ν = {nu}, z = {z}: {a} vs {b}");
    }
}

#[test]
fn kappa_zero_whittaker_is_a_scaled_bessel() {
    // W_{0,μ}(2z) = √(2z/π) K_μ(z).
    for z in [1.0, 2.0 * PI] {
        for mu in [c(0.5, 0.0), c(1.0, 1.0), c(3.2, 0.0)] {
            let w = whittaker_w(0.0, mu, 2.0 * z).unwrap().value;
            let k = bessel_k(mu, z).unwrap().value * (2.0 * z / PI).sqrt();
            assert!((w - k).norm() <= 1e-9 * k.norm(), "μ = {mu}, z = {z}");
        }
    }
}

/// Independent high-precision values.
const REFERENCE: [(&str, f64, f64, f64, f64, f64); 4] = [
    ("K", 0.3, 2.0, 2.0 * PI, 0.000682108313978145034, 0.0000615800807356629359),
    ("K", 0.0, 14.0, 2.0 * PI, 1.68330860294958494e-10, 0.0),
    ("K", 1.0, 0.0, 2.0 * PI, 0.000986996057681045123, 0.0),
    ("W", 3.0, 0.0, 4.0 * PI, 0.929795678943582777, 0.0),
];

#[test]
fn error_estimates_cover_the_true_error() {
    for (kind, re, im, z, vr, vi) in REFERENCE {
        let o = match kind {
            "K" => bessel_k(c(re, im), z).unwrap(),
            _ => whittaker_w(2.25, c(re, im), z).unwrap(),
        };
        let exact = c(vr, vi);
        let err = (o.value - exact).norm();
        assert_eq!(o.method, OracleMethod::IntegralQuadrature);
        assert!(err <= o.abs_err_estimate + 4.0 * f64::EPSILON * exact.norm(), "{kind}({re}+{im}i): error {err:e}, estimate {:e}", o.abs_err_estimate);
        assert!(o.abs_err_estimate <= 1e-9 * o.value.norm().max(1.0));
    }
}

#[test]
fn recurrence_agrees_with_the_integral_where_both_apply() {
    let mu = c(2.5, 0.7);
    let direct = whittaker_w(2.25, mu, 4.0 * PI).unwrap().value;
    let cont = whittaker_w_continued(2.25, mu, 4.0 * PI).unwrap().value;
    assert!((direct - cont).norm() <= 1e-10 * direct.norm());
}

#[test]
fn oracle_zeros_do_not_depend_on_scan_density() {
    for tag in [OracleTag::BesselWall, OracleTag::SymmetricBessel, OracleTag::WhittakerMorse(2.25)] {
        let coarse = oracle_real_zeros(tag, -20.0, 300.0, 200).unwrap();
        let fine = oracle_real_zeros(tag, -20.0, 300.0, 401).unwrap();
        assert_eq!(coarse.len(), fine.len(), "{tag:?}");
        assert!(!coarse.is_empty());
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((a - b).abs() < 1e-9 * a.abs().max(1.0), "{tag:?}: {a} vs {b}");
        }
    }
}

#[test]
fn unsupported_regions_are_reported() {
    assert!(bessel_k(c(40.0, 0.0), 1.0).is_err());
    assert!(bessel_k(c(1.0, 0.0), -1.0).is_err());
    assert!(whittaker_w(2.25, c(0.5, 0.0), 4.0 * PI).is_err());
}
