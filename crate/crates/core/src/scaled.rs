use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex number stored as `mantissa · 2^exp2`.
///
/// The exponent is zero whenever the value fits comfortably in an `f64`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledComplex {
    pub mantissa: Complex64,
    pub exp2: i64,
}

const REPRESENTABLE: f64 = 1e280;

impl ScaledComplex {
    pub fn new(mantissa: Complex64, exp2: i64) -> ScaledComplex {
        ScaledComplex { mantissa, exp2 }.normalized()
    }

    pub fn from_complex(z: Complex64) -> ScaledComplex {
        ScaledComplex::new(z, 0)
    }

    /// `exp(l)` for a complex logarithm of arbitrary size.
    pub fn from_ln(l: Complex64) -> ScaledComplex {
        let n = (l.re / std::f64::consts::LN_2).floor();
        let rest = l.re - n * std::f64::consts::LN_2;
        ScaledComplex::new(Complex64::from_polar(rest.exp(), l.im), n as i64)
    }

    fn normalized(self) -> ScaledComplex {
        let m = self.mantissa.norm();
        if m == 0.0 || !m.is_finite() {
            return ScaledComplex {
                mantissa: self.mantissa,
                exp2: if m == 0.0 { 0 } else { self.exp2 },
            };
        }
        let total = m.log2() + self.exp2 as f64;
        if total.abs() < REPRESENTABLE.log2() {
            return ScaledComplex {
                mantissa: self.mantissa * 2f64.powi(self.exp2 as i32),
                exp2: 0,
            };
        }
        let shift = m.log2().floor() as i64;
        ScaledComplex {
            mantissa: scale_by_pow2(self.mantissa, -shift),
            exp2: self.exp2 + shift,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.norm() == 0.0
    }

    /// Natural logarithm of the modulus.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.exp2 as f64 * std::f64::consts::LN_2
    }

    /// Plain complex value; may overflow to infinity or underflow to zero.
    pub fn to_complex(&self) -> Complex64 {
        scale_by_pow2(self.mantissa, self.exp2)
    }

    /// `self / other` as a plain complex number.
    pub fn ratio(&self, other: &ScaledComplex) -> Complex64 {
        // Complex division squares the divisor's modulus, so both mantissas
        // are brought to unit size first.
        let (a, ea) = unit(self.mantissa);
        let (b, eb) = unit(other.mantissa);
        scale_by_pow2(a / b, self.exp2 - other.exp2 + ea - eb)
    }

    /// Mantissa re-expressed at binary exponent `exp2`.
    pub fn mantissa_at(&self, exp2: i64) -> Complex64 {
        scale_by_pow2(self.mantissa, self.exp2 - exp2)
    }

    pub fn scale(&self, z: Complex64) -> ScaledComplex {
        ScaledComplex::new(self.mantissa * z, self.exp2)
    }
}

impl Mul for ScaledComplex {
    type Output = ScaledComplex;

    fn mul(self, rhs: ScaledComplex) -> ScaledComplex {
        ScaledComplex::new(self.mantissa * rhs.mantissa, self.exp2 + rhs.exp2)
    }
}

impl fmt::Display for ScaledComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp2 == 0 {
            write!(f, "{}", self.mantissa)
        } else {
            write!(f, "({})·2^{}", self.mantissa, self.exp2)
        }
    }
}

/// Splits `z` into `u · 2^e` with `|u|` in `[1, 2)`.
fn unit(z: Complex64) -> (Complex64, i64) {
    let m = z.norm();
    if m == 0.0 || !m.is_finite() {
        return (z, 0);
    }
    let e = m.log2().floor() as i64;
    (scale_by_pow2(z, -e), e)
}

fn scale_by_pow2(z: Complex64, n: i64) -> Complex64 {
    // Split the power so intermediate factors never overflow on their own.
    let mut z = z;
    let mut n = n;
    while n != 0 {
        let step = n.clamp(-1000, 1000);
        z *= 2f64.powi(step as i32);
        n -= step;
        if z.norm() == 0.0 || !z.norm().is_finite() {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values_keep_zero_exponent() {
        let z = ScaledComplex::new(Complex64::new(3.0, -1.0), 4);
        assert_eq!(z.exp2, 0);
        assert_eq!(z.mantissa, Complex64::new(48.0, -16.0));
    }

    #[test]
    fn huge_logarithms_round_trip() {
        let l = Complex64::new(5000.0, 0.3);
        let z = ScaledComplex::from_ln(l);
        assert!(z.exp2 > 0);
        assert!((z.ln_abs() - 5000.0).abs() < 1e-10);
        assert!((z.mantissa.arg() - 0.3).abs() < 1e-12);
        let w = ScaledComplex::from_ln(Complex64::new(4990.0, 0.3));
        let r = z.ratio(&w);
        assert!((r.re - 10f64.exp()).abs() < 1e-8 * 10f64.exp());
    }

    #[test]
    fn ratio_of_large_plain_mantissas() {
        let big = ScaledComplex::from_complex(Complex64::new(1e200, 1e199));
        let one = ScaledComplex::from_complex(Complex64::new(1.0, 0.0));
        let r = one.ratio(&big) * big.ratio(&one);
        assert!((r - 1.0).norm() < 1e-14);
    }
}
