use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use super::{Domain, PotentialSpec};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
struct Row {
    x: f64,
    #[serde(rename = "V")]
    v: f64,
    #[serde(rename = "dV")]
    dv: f64,
}

struct Table {
    x: Vec<f64>,
    v: Vec<f64>,
    dv: Vec<f64>,
}

impl Table {
    /// Value and slope of the cubic Hermite interpolant; beyond the ends the
    /// potential continues as `V_end·exp(λ(x − x_end))` with `λ = dV_end/V_end`.
    fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.x.len();
        if x <= self.x[0] {
            return extrapolate(self.x[0], self.v[0], self.dv[0], x);
        }
        if x >= self.x[n - 1] {
            return extrapolate(self.x[n - 1], self.v[n - 1], self.dv[n - 1], x);
        }
        let i = self.x.partition_point(|&xi| xi <= x) - 1;
        let h = self.x[i + 1] - self.x[i];
        let t = (x - self.x[i]) / h;
        let (y0, y1) = (self.v[i], self.v[i + 1]);
        let (m0, m1) = (self.dv[i] * h, self.dv[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let d = (6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1;
        (v, d / h)
    }
}

fn extrapolate(x0: f64, v0: f64, d0: f64, x: f64) -> (f64, f64) {
    let lam = d0 / v0;
    let v = v0 * (lam * (x - x0)).exp();
    (v, lam * v)
}

/// Builds a potential from `(x, V, dV)` samples.
pub fn tabulated(label: impl Into<String>, domain: Domain, x: Vec<f64>, v: Vec<f64>, dv: Vec<f64>) -> Result<PotentialSpec> {
    let label = label.into();
    let invalid = |reason: String| Error::InvalidPotential {
        label: label.clone(),
        reason,
    };
    if x.len() < 4 || x.len() != v.len() || x.len() != dv.len() {
        return Err(invalid("need at least 4 rows with matching columns".into()));
    }
    if !x.windows(2).all(|w| w[0] < w[1]) {
        return Err(invalid("x must be strictly increasing".into()));
    }
    if x.iter().chain(&v).chain(&dv).any(|z| !z.is_finite()) {
        return Err(invalid("non-finite entry".into()));
    }
    let n = x.len();
    if !(v[n - 1] > 0.0 && dv[n - 1] > 0.0) {
        return Err(invalid("the last row must have V > 0 and dV > 0 to extend the right tail".into()));
    }
    match domain {
        Domain::WholeLine => {
            if !(v[0] > 0.0 && dv[0] < 0.0) {
                return Err(invalid("the first row must have V > 0 and dV < 0 to extend the left tail".into()));
            }
        }
        Domain::HalfLineHardWall(a) => {
            if a < x[0] {
                return Err(invalid(format!("wall {a} lies left of the table start {}", x[0])));
            }
        }
    }
    let table = Arc::new(Table { x, v, dv });
    let t2 = table.clone();
    Ok(PotentialSpec::new(label.clone(), domain, move |x| table.eval(x).0, move |x| t2.eval(x).1))
}

/// Reads a CSV file with header `x,V,dV`.
pub fn load_csv(path: impl AsRef<Path>, domain: Domain) -> Result<PotentialSpec> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path)?;
    let (mut x, mut v, mut dv) = (Vec::new(), Vec::new(), Vec::new());
    for row in rdr.deserialize() {
        let r: Row = row?;
        x.push(r.x);
        v.push(r.v);
        dv.push(r.dv);
    }
    tabulated(path.display().to_string(), domain, x, v, dv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_and_extends_exponentially() {
        let xs: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        let v: Vec<f64> = xs.iter().map(|x| 1.0 + x * x * x).collect();
        let dv: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        let p = tabulated("cubic", Domain::HalfLineHardWall(0.0), xs, v, dv).unwrap();
        for x in [0.1, 1.3, 4.9] {
            assert!((p.v(x) - (1.0 + x * x * x)).abs() < 1e-12);
            assert!((p.dv(x) - 3.0 * x * x).abs() < 1e-11);
        }
        let lam: f64 = 75.0 / 126.0;
        assert!((p.v(6.0) - 126.0 * lam.exp()).abs() < 1e-9);
    }

    #[test]
    fn rejects_unsorted_rows() {
        let r = tabulated(
            "bad",
            Domain::WholeLine,
            vec![0.0, 2.0, 1.0, 3.0],
            vec![1.0; 4],
            vec![-1.0, 0.0, 0.0, 1.0],
        );
        assert!(r.is_err());
    }

    #[test]
    fn reads_csv_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        let mut s = String::from("x,V,dV\n");
        for i in 0..=40 {
            let x = -2.0 + 0.1 * i as f64;
            s += &format!("{x},{},{}\n", x.powi(4) + 1.0, 4.0 * x.powi(3));
        }
        std::fs::write(&path, s).unwrap();
        let p = load_csv(&path, Domain::WholeLine).unwrap();
        assert!((p.v(0.55) - (0.55f64.powi(4) + 1.0)).abs() < 1e-4);
    }
}
