//! Independent closed-form characteristic functions: modified Bessel `K_ν`
//! of complex order and Whittaker `W_{κ,μ}`, both from integral
//! representations evaluated by trapezoidal sums of double-exponentially
//! decaying integrands.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::OracleTag;
use crate::roots::{bracketed_root, sign_change_brackets};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    IntegralQuadrature,
    /// Integral values at lower `κ` pushed up by the three-term recurrence.
    IntegralRecurrence,
    AsymptoticSeries,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: Complex64,
    pub abs_err_estimate: f64,
    pub method: OracleMethod,
    /// Set when an asymptotic formula is used outside its regime.
    pub warning: bool,
}

const MAX_RE_ORDER: f64 = 30.0;
const CUTOFF: f64 = 1e-18;
const MAX_HALVINGS: usize = 14;

/// Trapezoidal rule on the whole line for an integrand that decays at least
/// exponentially; the window is found by walking outward until the integrand
/// drops below `1e−18` of its running maximum.
///
/// Returns `(value, error estimate)`; the estimate is the last halving change.
fn line_trapezoid<F>(f: F) -> (Complex64, f64)
where
    F: Fn(f64) -> Complex64,
{
    let h0 = 0.125;
    let mut peak = f(0.0).norm();
    let mut bounds = [0i64; 2];
    for (dir, bound) in [(-1i64, 0usize), (1, 1)] {
        let mut quiet = 0;
        let mut j = 0i64;
        while quiet < 8 && j.abs() < 4000 {
            j += dir;
            let m = f(j as f64 * h0).norm();
            if m.is_finite() {
                peak = peak.max(m);
            }
            quiet = if m < CUTOFF * peak { quiet + 1 } else { 0 };
        }
        bounds[bound] = j;
    }
    let (lo, hi) = (bounds[0] as f64 * h0, bounds[1] as f64 * h0);
    let mut h = h0;
    let mut sum: Complex64 = (bounds[0]..=bounds[1]).map(|j| f(j as f64 * h0)).sum();
    let mut value = sum * h;
    let mut err = f64::INFINITY;
    for level in 0..MAX_HALVINGS {
        h *= 0.5;
        let n = ((hi - lo) / h).round() as i64;
        let mids: Complex64 = (0..n).step_by(2).map(|i| f(lo + (i + 1) as f64 * h)).sum();
        sum += mids;
        let next = sum * h;
        err = (next - value).norm();
        value = next;
        if level >= 1 && err <= 1e-15 * value.norm().max(1e-300) {
            break;
        }
        if level >= 2 && err <= 4.0 * f64::EPSILON * peak * (hi - lo) {
            break;
        }
    }
    (value, err)
}

/// `K_ν(z)` for complex order from `½∫ exp(−z cosh t + νt) dt` over the
/// real line, with the contour shifted to `t + iβ` to tame imaginary orders.
pub fn bessel_k(nu: Complex64, z: f64) -> Result<OracleValue> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Config(format!("bessel_k needs z > 0, got {z}")));
    }
    if nu.re.abs() > MAX_RE_ORDER || !nu.im.is_finite() {
        return Err(Error::Unsupported(format!("bessel_k order {nu} outside |Re ν| ≤ {MAX_RE_ORDER}")));
    }
    let b = nu.im.abs();
    let delta = (3.0 / b.max(1e-300)).clamp(0.05, 0.37);
    let beta = nu.im.signum() * (b / z).min(1.0).asin().min(FRAC_PI_2 - delta);
    let (value, err) = line_trapezoid(|t| {
        let w = Complex64::new(t, beta);
        0.5 * (-z * w.cosh() + nu * w).exp()
    });
    Ok(OracleValue {
        value,
        abs_err_estimate: err,
        method: OracleMethod::IntegralQuadrature,
        warning: false,
    })
}

/// `K'_ν(z) = −½(K_{ν−1}(z) + K_{ν+1}(z))`.
pub fn bessel_k_derivative(nu: Complex64, z: f64) -> Result<OracleValue> {
    let a = bessel_k(nu - 1.0, z)?;
    let b = bessel_k(nu + 1.0, z)?;
    Ok(OracleValue {
        value: -0.5 * (a.value + b.value),
        abs_err_estimate: 0.5 * (a.abs_err_estimate + b.abs_err_estimate),
        method: OracleMethod::IntegralQuadrature,
        warning: false,
    })
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(z)` (principal branch up to multiples of `2πi`), Lanczos with reflection.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1−z) = π / sin(πz)
        let s = (PI * z).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// `W_{κ,μ}(z)` from
/// `e^{−z/2} z^κ / Γ(μ−κ+½) ∫₀^∞ e^{−t} t^{μ−κ−½} (1+t/z)^{μ+κ−½} dt`,
/// valid for `Re(μ−κ+½) > 0`.
pub fn whittaker_w(kappa: f64, mu: Complex64, z: f64) -> Result<OracleValue> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Config(format!("whittaker_w needs z > 0, got {z}")));
    }
    let s = mu - kappa + 0.5;
    if s.re <= 0.0 {
        return Err(Error::Unsupported(format!(
            "integral representation of W_{{{kappa},{mu}}} needs Re(μ−κ+½) > 0"
        )));
    }
    let power = mu + kappa - 0.5;
    let (integral, err) = if mu.im.abs() <= 1.0 {
        laplace_ray(s, power, z)
    } else {
        laplace_deformed(s, power, z, mu.im)
    };
    let prefactor = (Complex64::new(-0.5 * z + kappa * z.ln(), 0.0) - ln_gamma(s)).exp();
    Ok(OracleValue {
        value: prefactor * integral,
        abs_err_estimate: prefactor.norm() * err,
        method: OracleMethod::IntegralQuadrature,
        warning: false,
    })
}

/// `∫₀^∞ e^{−t} t^{s−1} (1+t/z)^p dt` along the positive axis.
fn laplace_ray(s: Complex64, power: Complex64, z: f64) -> (Complex64, f64) {
    // t = exp(π/2 · sinh u) makes both ends decay double-exponentially.
    line_trapezoid(|u| {
        let ln_t = FRAC_PI_2 * u.sinh();
        let t = ln_t.exp();
        let log = -t + s * ln_t + power * (t / z).ln_1p() + (FRAC_PI_2 * u.cosh()).ln();
        log.exp()
    })
}

/// The same integral for strongly complex `μ`, where the straight ray loses
/// `~e^{π|Im μ|/2}` to cancellation. The contour runs from 0 to `−z/2` just
/// above (or below) the real axis, up the line `Re t = −z/2`, then off to
/// `+∞` horizontally. On `Re t = −z/2` the phases of `t` and `1 + t/z` add to
/// `π`, which is the true size of the result.
fn laplace_deformed(s: Complex64, power: Complex64, z: f64, im_mu: f64) -> (Complex64, f64) {
    let side = im_mu.signum();
    let half = 0.5 * z;
    let height = side * (2.0 * im_mu.abs() + z + 5.0);
    let log_integrand = |ln_t: Complex64, t: Complex64| -t + (s - 1.0) * ln_t + power * (t / z).ln_1p();
    let (rel, abs) = (1e-15, 1e-300);
    // t = r·e^{±iπ}
    let leg1 = crate::quad::tanh_sinh(
        |r| {
            let ln_t = Complex64::new(r.ln(), side * PI);
            -log_integrand(ln_t, Complex64::new(-r, 0.0)).exp()
        },
        0.0,
        half,
        rel,
        abs,
    );
    let leg2 = crate::quad::tanh_sinh(
        |y| {
            let t = Complex64::new(-half, side * y);
            Complex64::new(0.0, side) * log_integrand(arg_ln(t, side), t).exp()
        },
        0.0,
        height.abs(),
        rel,
        abs,
    );
    let leg3 = crate::quad::exp_sinh(
        |x| {
            let t = Complex64::new(x - half, height);
            log_integrand(arg_ln(t, side), t).exp()
        },
        0.0,
        half.max(1.0),
        rel,
        abs,
    );
    (leg1.value + leg2.value + leg3.value, leg1.error + leg2.error + leg3.error)
}

/// `ln t` continuous from the side `Im t · side > 0`.
fn arg_ln(t: Complex64, side: f64) -> Complex64 {
    let l = t.ln();
    if side < 0.0 && t.im == 0.0 && t.re < 0.0 {
        Complex64::new(l.re, -PI)
    } else {
        l
    }
}

trait Ln1p {
    fn ln_1p(self) -> Self;
}

impl Ln1p for Complex64 {
    fn ln_1p(self) -> Complex64 {
        (1.0 + self).ln()
    }
}

/// `W_{κ,μ}(z)` for any `μ`: when the integral is not valid (or nearly
/// singular) at `κ`, it is evaluated at `κ − n` and `κ − n − 1` and carried
/// up with `W_{k+1} = (z − 2k)W_k + (μ² − (k − ½)²)W_{k−1}`.
pub fn whittaker_w_continued(kappa: f64, mu: Complex64, z: f64) -> Result<OracleValue> {
    let mu = if mu.re < 0.0 { -mu } else { mu };
    let margin = 0.25;
    let s = mu.re - kappa + 0.5;
    if s >= margin {
        return whittaker_w(kappa, mu, z);
    }
    let n = (margin - s).ceil() as usize;
    let k0 = kappa - n as f64;
    let lower = whittaker_w(k0 - 1.0, mu, z)?;
    let upper = whittaker_w(k0, mu, z)?;
    let (mut wm, mut w) = (lower.value, upper.value);
    let mut err = lower.abs_err_estimate.max(upper.abs_err_estimate);
    let mu2 = mu * mu;
    for i in 0..n {
        let k = k0 + i as f64;
        let a = z - 2.0 * k;
        let b = mu2 - (k - 0.5) * (k - 0.5);
        let next = a * w + b * wm;
        err *= 1.0 + a.abs() + b.norm();
        wm = w;
        w = next;
    }
    Ok(OracleValue {
        value: w,
        abs_err_estimate: err,
        method: OracleMethod::IntegralRecurrence,
        warning: false,
    })
}

/// The two printed terms of `∂_E log W_{κ,√−E}(4π)` for large negative `E`:
/// `−ln(√−E/π)/(2√−E) + (κ − ½)/(2E)`.
pub fn whittaker_logderiv_asymptotic(kappa: f64, e: f64) -> OracleValue {
    let r = (-e).sqrt();
    let value = -(r / PI).ln() / (2.0 * r) + (kappa - 0.5) / (2.0 * e);
    OracleValue {
        value: Complex64::new(value, 0.0),
        abs_err_estimate: (-e).powf(-1.5),
        method: OracleMethod::AsymptoticSeries,
        warning: !(e <= -1e2),
    }
}

fn order(e: Complex64) -> Complex64 {
    (-e).sqrt()
}

/// Closed-form characteristic function, up to an E-independent constant.
pub fn oracle_characteristic(tag: OracleTag, e: Complex64) -> Result<OracleValue> {
    match tag {
        OracleTag::BesselWall => bessel_k(order(e), 2.0 * PI),
        OracleTag::WhittakerMorse(kappa) => whittaker_w_continued(kappa, order(e), 4.0 * PI),
        OracleTag::SymmetricBessel => {
            let nu = 0.5 * order(e);
            let k = bessel_k(nu, PI)?;
            let dk = bessel_k_derivative(nu, PI)?;
            Ok(OracleValue {
                value: k.value * dk.value,
                abs_err_estimate: k.abs_err_estimate * dk.value.norm() + dk.abs_err_estimate * k.value.norm(),
                method: OracleMethod::IntegralQuadrature,
                warning: false,
            })
        }
        OracleTag::Cosh | OracleTag::Tzitzeica => Err(Error::Unsupported(format!(
            "no closed-form characteristic function for {tag:?}"
        ))),
    }
}

/// Real zeros of the oracle in `[e_min, e_max]`, from `n` samples and
/// bracketed refinement. The oracle is real on the real axis up to a phase,
/// which is removed using the first sample.
pub fn oracle_real_zeros(tag: OracleTag, e_min: f64, e_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(e_min < e_max) || n < 2 {
        return Err(Error::Config("oracle scan needs e_min < e_max and n ≥ 2".into()));
    }
    let first = oracle_characteristic(tag, Complex64::new(e_min, 0.0))?.value;
    let phase = if first.norm() > 0.0 { first.conj() / first.norm() } else { Complex64::new(1.0, 0.0) };
    let real = |e: f64| -> Result<f64> { Ok((oracle_characteristic(tag, Complex64::new(e, 0.0))?.value * phase).re) };
    let xs: Vec<f64> = (0..n).map(|i| e_min + (e_max - e_min) * i as f64 / (n - 1) as f64).collect();
    let vals = xs.iter().map(|&e| real(e)).collect::<Result<Vec<_>>>()?;
    let mut zeros = Vec::new();
    for (a, b) in sign_change_brackets(&xs, &vals) {
        let root = bracketed_root(|e| real(e).unwrap_or(f64::NAN), a, b, 1e-13 * b.abs().max(1.0), 200)
            .ok_or_else(|| Error::NoConvergence {
                stage: "oracle root",
                e: Complex64::new(a, 0.0),
                iters: 200,
            })?;
        zeros.push(root);
    }
    Ok(zeros)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
        (a - b).norm() <= rel * b.norm()
    }

    #[test]
    fn half_integer_order_closed_form() {
        let k = bessel_k(c(0.5, 0.0), 1.0).unwrap();
        let exact = (FRAC_PI_2).sqrt() * (-1f64).exp();
        assert!((k.value.re - exact).abs() < 1e-14);
        assert!(k.value.im.abs() < 1e-16);
    }

    #[test]
    fn bessel_reference_values() {
        let z = 2.0 * PI;
        let k = bessel_k(c(0.3, 2.0), z).unwrap().value;
        assert!(close(k, c(0.000682108313978145034, 0.0000615800807356629359), 1e-12), "{k}");
        let k = bessel_k(c(0.0, 14.0), z).unwrap().value;
        assert!(close(k, c(1.68330860294958494e-10, 0.0), 1e-10), "{k}");
        let k = bessel_k(c(1.0, 0.0), z).unwrap().value;
        assert!(close(k, c(0.000986996057681045123, 0.0), 1e-13), "{k}");
    }

    #[test]
    fn bessel_is_even_in_order() {
        let nu = c(0.3, 2.0);
        let a = bessel_k(nu, 2.0 * PI).unwrap().value;
        let b = bessel_k(-nu, 2.0 * PI).unwrap().value;
        assert!(close(a, b, 1e-12));
    }

    #[test]
    fn bessel_matches_large_argument_asymptotics() {
        let z = 2.0 * PI;
        let k = bessel_k(c(0.0, 0.0), z).unwrap();
        let asym = (PI / (2.0 * z)).sqrt() * (-z).exp() * (1.0 - 1.0 / (8.0 * z));
        assert!((k.value.re - asym).abs() < 0.01 * asym);
        assert!(k.abs_err_estimate <= 1e-10);
    }

    #[test]
    fn bessel_rejects_large_real_order() {
        assert!(matches!(bessel_k(c(31.0, 0.0), 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn gamma_reference_values() {
        assert!(close(gamma(c(1.0, 1.0)), c(0.498015668118356043, -0.154949828301810685), 1e-13));
        assert!(close(gamma(c(0.3, -4.0)), c(0.00116464368481149056, -0.00335255988803520244), 1e-12));
        assert!((gamma(c(5.0, 0.0)).re - 24.0).abs() < 1e-12);
    }

    #[test]
    fn whittaker_reference_values() {
        let w = whittaker_w(2.25, c(3.0, 0.0), 4.0 * PI).unwrap().value;
        assert!(close(w, c(0.929795678943582777, 0.0), 1e-12), "{w}");
        let w = whittaker_w(0.0, c(1.0, 1.0), 2.0 * PI).unwrap().value;
        assert!(close(w, c(0.0402187532872142969, 0.0115429139104520018), 1e-12), "{w}");
    }

    #[test]
    fn whittaker_recurrence_continues_past_the_integral() {
        assert!(whittaker_w(2.25, c(0.0, 5.0), 4.0 * PI).is_err());
        let w = whittaker_w_continued(2.25, c(0.0, 5.0), 4.0 * PI).unwrap();
        assert_eq!(w.method, OracleMethod::IntegralRecurrence);
        assert!(close(w.value, c(0.0366582891798482206, 0.0), 1e-10), "{}", w.value);
    }

    #[test]
    fn whittaker_kappa_zero_is_bessel() {
        let z = PI;
        for mu in [c(0.5, 0.0), c(1.0, 1.0), c(3.2, 0.0), c(1.7, 0.0)] {
            let w = whittaker_w(0.0, mu, 2.0 * z).unwrap().value;
            let k = bessel_k(mu, z).unwrap().value * (2.0 * z / PI).sqrt();
            assert!(close(w, k, 1e-9), "{mu}: {w} {k}");
        }
    }

    #[test]
    fn whittaker_linear_integrand_closed_form() {
        // μ = κ + ½: ∫ e^{−t}(1 + t/z)^{2κ} dt with 2κ = 1 gives 1 + 1/z.
        let (kappa, z) = (0.5, 3.0);
        let w = whittaker_w(kappa, c(kappa + 0.5, 0.0), z).unwrap().value;
        let exact = (-z / 2.0).exp() * z.powf(kappa) * (1.0 + 1.0 / z);
        assert!((w.re - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn asymptotic_second_term_vanishes_at_half() {
        let a = whittaker_logderiv_asymptotic(0.5, -1e4).value.re;
        let r = 100f64;
        assert_eq!(a, -(r / PI).ln() / (2.0 * r));
        assert!(whittaker_logderiv_asymptotic(0.5, -10.0).warning);
    }

    #[test]
    fn exp_wall_oracle_zeros() {
        let zeros = oracle_real_zeros(OracleTag::BesselWall, 0.0, 200.0, 200).unwrap();
        assert_eq!(zeros.len(), 2);
        assert!((zeros[0] - 95.42886894447955).abs() < 1e-9);
        assert!((zeros[1] - 154.96485081658517).abs() < 1e-9);
    }
}
