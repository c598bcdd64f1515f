//! Run configuration shared by the library drivers and the CLI.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cmv::Boundary;
use crate::error::{Error, Result};
use crate::lr::SectionParams;
use crate::scattering::{DirectParams, RoundtripParams};
use crate::verblunsky::InverseParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid_size: usize,
    /// Levels `-J..=J` for inverse scattering.
    pub levels: i64,
    pub section_start: usize,
    pub section_cap: usize,
    pub section_tol: f64,
    pub cond_cap: f64,
    pub window: usize,
    pub depth: usize,
    pub tol_alg: f64,
    pub tol_fun: f64,
    pub tol_roundtrip: f64,
    pub margin_min: f64,
    pub boundary: Boundary,
    /// Quadrature oversampling of the oracle.
    pub oversample: usize,
    /// Section size used by the oracle.
    pub oracle_section: usize,
    /// Parameter doublings in the roundtrip ladder.
    pub doublings: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid_size: 1024,
            levels: 16,
            section_start: 32,
            section_cap: 512,
            section_tol: 1e-9,
            cond_cap: 1e12,
            window: 128,
            depth: 32,
            tol_alg: 1e-8,
            tol_fun: 1e-6,
            tol_roundtrip: 1e-3,
            margin_min: 1e-3,
            boundary: Boundary::ZeroTail,
            oversample: 4,
            oracle_section: 48,
            doublings: 1,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: format!("line {}, column {}: {e}", e.line(), e.column()),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = [
            ("grid_size", self.grid_size),
            ("section_start", self.section_start),
            ("section_cap", self.section_cap),
            ("window", self.window),
            ("oversample", self.oversample),
            ("oracle_section", self.oracle_section),
        ];
        for (name, v) in sizes {
            if v == 0 {
                return Err(Error::Input(format!("{name} must be positive")));
            }
        }
        if self.levels < 0 {
            return Err(Error::Input("levels must be nonnegative".into()));
        }
        if self.section_start > self.section_cap {
            return Err(Error::Input("section_start exceeds section_cap".into()));
        }
        let tols = [
            ("section_tol", self.section_tol),
            ("cond_cap", self.cond_cap),
            ("tol_alg", self.tol_alg),
            ("tol_fun", self.tol_fun),
            ("tol_roundtrip", self.tol_roundtrip),
            ("margin_min", self.margin_min),
        ];
        for (name, v) in tols {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Input(format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }

    pub fn section(&self) -> SectionParams {
        SectionParams {
            start: self.section_start,
            cap: self.section_cap,
            tol: self.section_tol,
            cond_cap: self.cond_cap,
        }
    }

    pub fn inverse(&self) -> InverseParams {
        InverseParams {
            level_lo: -self.levels,
            level_hi: self.levels,
            section: self.section(),
            margin_min: self.margin_min,
            checks: true,
        }
    }

    pub fn direct(&self) -> DirectParams {
        DirectParams {
            window: self.window,
            depth: self.depth,
        }
    }

    pub fn roundtrip(&self) -> RoundtripParams {
        RoundtripParams {
            levels: self.levels,
            direct: self.direct(),
            section: self.section(),
            margin_min: self.margin_min,
            doublings: self.doublings,
            slack: 0.1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(
            (c.grid_size, c.levels, c.window, c.depth),
            (1024, 16, 128, 32)
        );
    }

    #[test]
    fn partial_json_keeps_defaults() {
        let c: RunConfig =
            serde_json::from_str(r#"{"grid_size": 256, "boundary": "decoupled"}"#).unwrap();
        assert_eq!(c.grid_size, 256);
        assert_eq!(c.boundary, Boundary::Decoupled);
        assert_eq!(c.levels, 16);
        assert!(serde_json::from_str::<RunConfig>(r#"{"grid": 1}"#).is_err());
    }

    #[test]
    fn rejects_nonpositive() {
        let c = RunConfig {
            tol_fun: 0.0,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
