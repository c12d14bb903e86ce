//! Quadrature rules shared by the tail machinery and the oracles.

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on [-1, 1], nodes in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of an adaptive quadrature: value plus the last level-to-level change.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    pub levels: usize,
}

const MAX_LEVELS: usize = 12;

/// Generic level-halving driver for trapezoid sums in a transformed variable `u`.
///
/// `term(u)` returns the transformed integrand (already multiplied by the Jacobian).
fn halving_trapezoid<F>(term: F, u_lo: f64, u_hi: f64, rel_tol: f64, abs_tol: f64) -> Quadrature
where
    F: Fn(f64) -> Complex64,
{
    let mut h = 0.5;
    let n0 = ((u_hi - u_lo) / h).ceil() as usize;
    h = (u_hi - u_lo) / n0 as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for i in 0..=n0 {
        let f = term(u_lo + i as f64 * h);
        let w = if i == 0 || i == n0 { 0.5 } else { 1.0 };
        sum += f * w;
        abs_sum += f.norm() * w;
    }
    let mut value = sum * h;
    let mut n = n0;
    let mut error = f64::INFINITY;
    let mut levels = 0;
    for level in 1..=MAX_LEVELS {
        levels = level;
        h *= 0.5;
        let mut new = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let f = term(u_lo + (2 * i + 1) as f64 * h);
            new += f;
            abs_sum += f.norm();
        }
        n *= 2;
        sum += new;
        let next = sum * h;
        error = (next - value).norm();
        value = next;
        let floor = 8.0 * f64::EPSILON * abs_sum * h;
        if level >= 3 && (error <= rel_tol * value.norm() || error <= abs_tol || error <= floor) {
            error = error.max(floor);
            break;
        }
    }
    Quadrature {
        value,
        error,
        levels,
    }
}

/// Tanh–sinh quadrature of a smooth function on a finite interval.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Quadrature
where
    F: Fn(f64) -> Complex64,
{
    if a == b {
        return Quadrature {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            levels: 0,
        };
    }
    let half = 0.5 * (b - a);
    let hp = std::f64::consts::FRAC_PI_2;
    let term = |u: f64| {
        let s = hp * u.sinh();
        let ch = s.cosh();
        let w = half * hp * u.cosh() / (ch * ch);
        if w == 0.0 || !w.is_finite() {
            return Complex64::new(0.0, 0.0);
        }
        // Measure from the nearer endpoint so that x resolves endpoint singularities.
        let x = if s < 0.0 {
            a + half * 2.0 / (1.0 + (-2.0 * s).exp())
        } else {
            b - half * 2.0 / (1.0 + (2.0 * s).exp())
        };
        if x <= a || x >= b {
            return Complex64::new(0.0, 0.0);
        }
        f(x) * w
    };
    halving_trapezoid(term, -4.0, 4.0, rel_tol, abs_tol)
}

/// Exp–sinh quadrature on [a, ∞) for integrands decaying at infinity.
///
/// `scale` sets the length unit of the substitution x = a + scale·exp(π/2·sinh u).
pub fn exp_sinh<F>(f: F, a: f64, scale: f64, rel_tol: f64, abs_tol: f64) -> Quadrature
where
    F: Fn(f64) -> Complex64,
{
    let hp = std::f64::consts::FRAC_PI_2;
    let term = |u: f64| {
        let e = (hp * u.sinh()).exp();
        let dx = scale * e;
        if !dx.is_finite() || dx == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let v = f(a + dx);
        if v.re == 0.0 && v.im == 0.0 {
            return v;
        }
        v * (dx * hp * u.cosh())
    };
    halving_trapezoid(term, -4.5, 3.8, rel_tol, abs_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-14);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let q = tanh_sinh(|x| Complex64::new(1.0 / x.sqrt(), 0.0), 0.0, 1.0, 1e-12, 1e-15);
        assert!((q.value.re - 2.0).abs() < 1e-9, "{:?}", q);
    }

    #[test]
    fn exp_sinh_exponential_and_algebraic_tails() {
        let q = exp_sinh(|x| Complex64::new((-x).exp(), 0.0), 1.0, 1.0, 1e-13, 1e-16);
        assert!((q.value.re - (-1.0f64).exp()).abs() < 1e-13);
        let q = exp_sinh(|x| Complex64::new(1.0 / (x * x), 0.0), 2.0, 1.0, 1e-13, 1e-16);
        assert!((q.value.re - 0.5).abs() < 1e-11, "{:?}", q);
    }
}
