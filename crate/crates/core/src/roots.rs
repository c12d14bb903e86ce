//! Bracketed root finding for real functions of one real variable.

/// Illinois false position, bisecting whenever the secant step stalls.
///
/// Returns `None` when `f(a)` and `f(b)` have the same sign.
pub fn bracketed_root<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Option<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a.min(b), a.max(b));
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        let width = b - a;
        if width <= xtol {
            break;
        }
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !(x > a + 0.01 * width && x < b - 0.01 * width) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
    }
    Some(if fa.abs() < fb.abs() { a } else { b })
}

/// Sign-change brackets of `values` sampled at increasing `xs`.
pub fn sign_change_brackets(xs: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    xs.windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| v[0] != 0.0 && v[0].signum() != v[1].signum())
        .map(|(x, _)| (x[0], x[1]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cosine_root() {
        let r = bracketed_root(f64::cos, 1.0, 2.0, 1e-15, 200).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn rejects_unbracketed() {
        assert!(bracketed_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_none());
    }

    #[test]
    fn brackets_from_samples() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let v = [1.0, -1.0, -2.0, 0.5];
        assert_eq!(sign_change_brackets(&xs, &v), vec![(0.0, 1.0), (2.0, 3.0)]);
    }
}
