use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;
use spectral_shoot::characteristic::{fmt_f64, PipelineConfig};
use spectral_shoot::potentials::{
    make_builtin, sl_to_schrodinger, width, Builtin, PotentialSpec, SlCoefficient, SlDomain,
};
use spectral_shoot::scaled::ScaledComplex;

fn builtin(b: Builtin) -> PotentialSpec {
    make_builtin(b, (b == Builtin::TruncatedMorse).then_some(2.25)).unwrap()
}

fn trivial_sl() -> &'static PotentialSpec {
    static P: OnceLock<PotentialSpec> = OnceLock::new();
    P.get_or_init(|| {
        sl_to_schrodinger(
            "trivial",
            |z: f64| (2.0 * z).exp(),
            SlCoefficient::constant(1.0),
            SlCoefficient::constant(1.0),
            SlDomain::HalfLine { wall: 0.0, z_max: 4.0 },
        )
        .unwrap()
    })
}

fn builtins() -> impl Strategy<Value = Builtin> {
    prop::sample::select(Builtin::ALL.to_vec())
}

proptest! {
    #[test]
    fn formatted_floats_parse_back(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn scaled_from_ln_keeps_modulus_and_phase(re in -2000.0..2000.0f64, im in -3.0..3.0f64) {
        let s = ScaledComplex::from_ln(Complex64::new(re, im));
        prop_assert!((s.ln_abs() - re).abs() <= 1e-12 * re.abs().max(1.0));
        let t = ScaledComplex::from_ln(Complex64::new(re + 1.0, im));
        let r = t.ratio(&s);
        // the gap of one is only resolved to the float spacing of `re`
        let tol = 8.0 * f64::EPSILON * (re.abs() + 1.0) * 1f64.exp();
        prop_assert!((r - Complex64::new(1f64.exp(), 0.0)).norm() <= tol);
    }

    #[test]
    fn ratios_are_reciprocal(a in -700.0..700.0f64, b in -700.0..700.0f64, pa in -3.0..3.0f64, pb in -3.0..3.0f64) {
        let x = ScaledComplex::from_ln(Complex64::new(a, pa));
        let y = ScaledComplex::from_ln(Complex64::new(b, pb));
        prop_assume!((a - b).abs() < 600.0);
        let prod = x.ratio(&y) * y.ratio(&x);
        prop_assert!((prod - 1.0).norm() <= 1e-12);
    }

    #[test]
    fn builtin_derivatives_match_differences(b in builtins(), x in 0.05..2.0f64) {
        let p = builtin(b);
        let h = 1e-6 * x.max(1.0);
        let fd = (p.v(x + h) - p.v(x - h)) / (2.0 * h);
        prop_assert!((fd - p.dv(x)).abs() <= 1e-6 * p.dv(x).abs().max(1.0));
    }

    #[test]
    fn width_grows_with_the_level(b in builtins(), lo in 1.0..4.0f64, step in 0.01..2.0f64) {
        let p = builtin(b);
        let min = p.minimum().unwrap().1;
        let v1 = min.max(0.0) + 10f64.powf(lo);
        let v2 = v1 * (1.0 + step);
        prop_assert!(width(&p, v1).unwrap() < width(&p, v2).unwrap());
    }

    #[test]
    fn unit_coefficients_reproduce_q(x in 0.0..3.5f64) {
        let v = trivial_sl().v(x);
        prop_assert!((v - (2.0 * x).exp()).abs() <= 1e-10 * v);
    }

    #[test]
    fn contraction_constants_are_bounded(eps in 0.0..2.0f64, c in 0.0..4.0f64) {
        let mut cfg = PipelineConfig::default();
        cfg.tail.eps = eps;
        cfg.tail.c = c;
        let ok = cfg.validate().is_ok();
        if eps >= 0.5 || c >= 2.0 || eps == 0.0 || c == 0.0 {
            prop_assert!(!ok, "eps = {eps}, c = {c}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn shifted_potentials_shift_values(gamma in -50.0..50.0f64, x in 0.0..2.0f64) {
        let p = builtin(Builtin::ExpWall);
        let s = p.shifted(gamma);
        prop_assert!((s.v(x) - (p.v(x) + gamma)).abs() <= 1e-12 * p.v(x).abs().max(1.0));
        prop_assert_eq!(s.dv(x), p.dv(x));
    }
}
