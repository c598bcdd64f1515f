//! Built-in scattering functions for experiments and tests.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::circle::{CircleGrid, LaurentSeries, ScatteringFunction};
use crate::error::{Error, Result};
use crate::C64;

/// A reproducible scattering function.
///
/// Text form (used by `--family`):
/// `zero`, `monomial:RE,IM,K` for `γ t̄^K`, `blaschke:R,ARE,AIM` for
/// `R (t̄ - a)/(1 - ā t̄)`, `random:DEGREE,MARGIN,SEED`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    Zero,
    Monomial {
        gamma: C64,
        k: i64,
    },
    Blaschke {
        r: f64,
        a: C64,
    },
    RandomTrig {
        degree: usize,
        margin: f64,
        seed: u64,
    },
}

impl Family {
    pub fn build(&self, grid: CircleGrid) -> Result<ScatteringFunction> {
        let series = match *self {
            Family::Zero => LaurentSeries::new(0, vec![C64::new(0.0, 0.0)])?,
            Family::Monomial { gamma, k } => {
                if !(gamma.norm() < 1.0) {
                    return Err(Error::Domain(format!(
                        "|gamma| = {} is not below 1",
                        gamma.norm()
                    )));
                }
                LaurentSeries::new(-k, vec![gamma])?
            }
            Family::Blaschke { r, a } => blaschke_series(r, a, grid)?,
            Family::RandomTrig {
                degree,
                margin,
                seed,
            } => random_series(degree, margin, seed, grid)?,
        };
        ScatteringFunction::from_coeffs(grid, &series)
    }
}

/// `r(t̄ - a)/(1 - āt̄) = -ra + r(1-|a|²) Σ_{k≥1} ā^{k-1} t̄^k`, truncated where
/// the terms drop below rounding or at the edge of the grid window.
fn blaschke_series(r: f64, a: C64, grid: CircleGrid) -> Result<LaurentSeries> {
    if !(r > 0.0 && r < 1.0) || !(a.norm() < 1.0) {
        return Err(Error::Domain(format!(
            "Blaschke family needs 0 < r < 1 and |a| < 1 (got r = {r}, |a| = {})",
            a.norm()
        )));
    }
    let (wlo, _) = grid.window();
    let mut desc = vec![-a * r];
    let mut term = C64::new(r * (1.0 - a.norm_sqr()), 0.0);
    let mut k = 1;
    while term.norm() > 1e-20 && -k >= wlo {
        desc.push(term);
        term *= a.conj();
        k += 1;
    }
    let lo = -(desc.len() as i64 - 1);
    desc.reverse();
    LaurentSeries::new(lo, desc)
}

/// Complex Gaussian coefficients on `-d..=d` damped by `1/(1+j²)`, scaled so
/// that the grid supremum is `1 - margin`.
fn random_series(degree: usize, margin: f64, seed: u64, grid: CircleGrid) -> Result<LaurentSeries> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(Error::Domain(format!("margin {margin} outside (0, 1)")));
    }
    let d = degree as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<C64> = (-d..=d)
        .map(|j| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im) / (1.0 + (j * j) as f64)
        })
        .collect();
    let raw = LaurentSeries::new(-d, coeffs)?;
    let samples = crate::circle::synthesize(&raw, grid)?;
    let sup = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if sup == 0.0 {
        return Ok(raw);
    }
    let scale = (1.0 - margin) / sup;
    LaurentSeries::new(-d, raw.coeffs().iter().map(|c| c * scale).collect())
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Zero => write!(f, "zero"),
            Family::Monomial { gamma, k } => write!(f, "monomial:{},{},{}", gamma.re, gamma.im, k),
            Family::Blaschke { r, a } => write!(f, "blaschke:{},{},{}", r, a.re, a.im),
            Family::RandomTrig {
                degree,
                margin,
                seed,
            } => write!(f, "random:{degree},{margin},{seed}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let parts: Vec<&str> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',').map(str::trim).collect()
        };
        let bad = || Error::Input(format!("cannot parse family '{s}'"));
        let num =
            |i: usize| -> Result<f64> { parts.get(i).ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let int =
            |i: usize| -> Result<i64> { parts.get(i).ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let family = match (name, parts.len()) {
            ("zero", 0) => Family::Zero,
            ("monomial", 3) => Family::Monomial {
                gamma: C64::new(num(0)?, num(1)?),
                k: int(2)?,
            },
            ("blaschke", 3) => Family::Blaschke {
                r: num(0)?,
                a: C64::new(num(1)?, num(2)?),
            },
            ("random", 3) => Family::RandomTrig {
                degree: usize::try_from(int(0)?).map_err(|_| bad())?,
                margin: num(1)?,
                seed: u64::try_from(int(2)?).map_err(|_| bad())?,
            },
            _ => return Err(bad()),
        };
        Ok(family)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        for text in [
            "zero",
            "monomial:0.5,0,1",
            "blaschke:0.7,0.5,-0.1",
            "random:8,0.2,42",
        ] {
            let f: Family = text.parse().unwrap();
            assert_eq!(f.to_string(), text);
        }
        assert!("monomial:0.5".parse::<Family>().is_err());
        assert!("nope".parse::<Family>().is_err());
    }

    #[test]
    fn random_has_requested_margin() {
        let grid = CircleGrid::new(256).unwrap();
        let r = Family::RandomTrig {
            degree: 8,
            margin: 0.2,
            seed: 1,
        }
        .build(grid)
        .unwrap();
        assert!((r.margin() - 0.2).abs() < 1e-12);
        assert!(r.coefficient(9).unwrap().norm() < 1e-14);
        let again = Family::RandomTrig {
            degree: 8,
            margin: 0.2,
            seed: 1,
        }
        .build(grid)
        .unwrap();
        assert_eq!(r.samples(), again.samples());
    }

    #[test]
    fn blaschke_matches_closed_form() {
        let grid = CircleGrid::new(128).unwrap();
        let a = C64::new(0.5, 0.2);
        let r = Family::Blaschke { r: 0.7, a }.build(grid).unwrap();
        for (t, v) in grid.nodes().iter().zip(r.samples()) {
            let tb = t.conj();
            let exact = (tb - a) * 0.7 / (C64::new(1.0, 0.0) - a.conj() * tb);
            assert!((v - exact).norm() < 1e-13);
        }
        assert!((r.margin() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn monomial_is_single_coefficient() {
        let grid = CircleGrid::new(64).unwrap();
        let r = Family::Monomial {
            gamma: C64::new(0.0, 0.8),
            k: 1,
        }
        .build(grid)
        .unwrap();
        assert_eq!(r.coefficient(-1).unwrap(), C64::new(0.0, 0.8));
        assert_eq!(r.coefficient(0).unwrap(), C64::new(0.0, 0.0));
    }
}
