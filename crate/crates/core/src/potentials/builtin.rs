use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Domain, OracleTag, PotentialSpec};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    ExpWall,
    SymmetricExp,
    CoshPot,
    TruncatedMorse,
    Tzitzeica,
}

impl Builtin {
    pub const ALL: [Builtin; 5] = [
        Builtin::ExpWall,
        Builtin::SymmetricExp,
        Builtin::CoshPot,
        Builtin::TruncatedMorse,
        Builtin::Tzitzeica,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::ExpWall => "exp_wall",
            Builtin::SymmetricExp => "symmetric_exp",
            Builtin::CoshPot => "cosh_pot",
            Builtin::TruncatedMorse => "truncated_morse",
            Builtin::Tzitzeica => "tzitzeica",
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Builtin> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownPotential(s.to_string()))
    }
}

/// Builds one of the named example potentials. `kappa` is required for
/// `truncated_morse` and rejected for every other name.
pub fn make_builtin(name: Builtin, kappa: Option<f64>) -> Result<PotentialSpec> {
    let four_pi2 = 4.0 * PI * PI;
    if name != Builtin::TruncatedMorse && kappa.is_some() {
        return Err(Error::Config(format!(
            "kappa is only meaningful for truncated_morse, not {}",
            name.name()
        )));
    }
    let p = match name {
        Builtin::ExpWall => PotentialSpec::new(
            "exp_wall",
            Domain::HalfLineHardWall(0.0),
            move |x: f64| four_pi2 * (2.0 * x).exp(),
            move |x: f64| 2.0 * four_pi2 * (2.0 * x).exp(),
        )
        .with_second_derivative(move |x: f64| 4.0 * four_pi2 * (2.0 * x).exp())
        .with_oracle(OracleTag::BesselWall),
        Builtin::SymmetricExp => PotentialSpec::new(
            "symmetric_exp",
            Domain::WholeLine,
            move |x: f64| four_pi2 * (4.0 * x.abs()).exp(),
            move |x: f64| {
                if x == 0.0 {
                    0.0
                } else {
                    4.0 * x.signum() * four_pi2 * (4.0 * x.abs()).exp()
                }
            },
        )
        .with_second_derivative(move |x: f64| 16.0 * four_pi2 * (4.0 * x.abs()).exp())
        .with_oracle(OracleTag::SymmetricBessel)
        .with_breakpoints(vec![0.0]),
        Builtin::CoshPot => PotentialSpec::new(
            "cosh_pot",
            Domain::WholeLine,
            move |x: f64| 2.0 * four_pi2 * (4.0 * x).cosh(),
            move |x: f64| 8.0 * four_pi2 * (4.0 * x).sinh(),
        )
        .with_second_derivative(move |x: f64| 32.0 * four_pi2 * (4.0 * x).cosh())
        .with_oracle(OracleTag::Cosh),
        Builtin::TruncatedMorse => {
            let kappa = kappa.ok_or_else(|| {
                Error::Config("truncated_morse requires kappa".to_string())
            })?;
            if !kappa.is_finite() {
                return Err(Error::Config(format!("kappa must be finite, got {kappa}")));
            }
            let b = 4.0 * PI * kappa;
            PotentialSpec::new(
                format!("truncated_morse(kappa={kappa})"),
                Domain::HalfLineHardWall(0.0),
                move |x: f64| four_pi2 * (2.0 * x).exp() - b * x.exp(),
                move |x: f64| 2.0 * four_pi2 * (2.0 * x).exp() - b * x.exp(),
            )
            .with_second_derivative(move |x: f64| 4.0 * four_pi2 * (2.0 * x).exp() - b * x.exp())
            .with_oracle(OracleTag::WhittakerMorse(kappa))
        }
        Builtin::Tzitzeica => {
            let a = four_pi2 * 2f64.powf(-2.0 / 3.0);
            PotentialSpec::new(
                "tzitzeica",
                Domain::WholeLine,
                move |x: f64| a * (2.0 * (3.0 * x).exp() + (-6.0 * x).exp()),
                move |x: f64| a * (6.0 * (3.0 * x).exp() - 6.0 * (-6.0 * x).exp()),
            )
            .with_second_derivative(move |x: f64| a * (18.0 * (3.0 * x).exp() + 36.0 * (-6.0 * x).exp()))
            .with_oracle(OracleTag::Tzitzeica)
        }
    };
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for b in Builtin::ALL {
            assert_eq!(b.name().parse::<Builtin>().unwrap(), b);
        }
        assert!(matches!(
            "harmonic".parse::<Builtin>(),
            Err(Error::UnknownPotential(_))
        ));
    }

    #[test]
    fn kappa_rules() {
        assert!(make_builtin(Builtin::ExpWall, Some(1.0)).is_err());
        assert!(make_builtin(Builtin::TruncatedMorse, None).is_err());
        let m = make_builtin(Builtin::TruncatedMorse, Some(0.0)).unwrap();
        let w = make_builtin(Builtin::ExpWall, None).unwrap();
        for x in [-1.0, 0.0, 0.5, 2.0] {
            assert_eq!(m.v(x), w.v(x));
        }
    }

    #[test]
    fn exp_wall_value_at_one() {
        let w = make_builtin(Builtin::ExpWall, None).unwrap();
        let expected = 4.0 * PI * PI * 1f64.exp().powi(2);
        assert!((w.v(1.0) - expected).abs() < 1e-12 * expected);
        assert!((w.v(1.0) - 291.68).abs() < 0.05);
    }

    #[test]
    fn second_derivatives_match_differences() {
        for b in Builtin::ALL {
            let p = make_builtin(b, (b == Builtin::TruncatedMorse).then_some(2.25)).unwrap();
            for x in [0.3, 0.9, 1.7] {
                let h = 1e-5;
                let fd = (p.dv(x + h) - p.dv(x - h)) / (2.0 * h);
                assert!((fd - p.d2v(x)).abs() < 1e-6 * p.d2v(x).abs().max(1.0), "{b:?} {x}");
            }
        }
    }
}
