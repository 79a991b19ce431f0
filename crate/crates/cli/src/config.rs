//! JSON run configuration.

use std::path::Path;

use magfloquet::hill::{TAU_D, WRONSKIAN_TOL};
use magfloquet::models::{FieldProfile, FieldSpec, PotentialSpec};
use magfloquet::quantum::GridSpec;
use serde::{Deserialize, Serialize};

use crate::output::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(rename = "tau_D", default = "default_tau_d")]
    pub tau_d: f64,
    #[serde(default = "default_gamma_min")]
    pub gamma_min: f64,
    #[serde(default = "default_wronskian_tol")]
    pub wronskian_tol: f64,
}

fn default_tau_d() -> f64 {
    TAU_D
}

fn default_gamma_min() -> f64 {
    1e-3
}

fn default_wronskian_tol() -> f64 {
    WRONSKIAN_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tau_d: TAU_D,
            gamma_min: default_gamma_min(),
            wronskian_tol: WRONSKIAN_TOL,
        }
    }
}

fn default_grid() -> GridSpec {
    GridSpec::new(512, 20.0).expect("default grid is valid")
}

/// On-disk layout: field keys at the top level, then optional sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub period: f64,
    pub mass: f64,
    pub charge: f64,
    pub profile: FieldProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default = "default_grid")]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.tau_D", t.tau_d),
            ("tolerances.gamma_min", t.gamma_min),
            ("tolerances.wronskian_tol", t.wronskian_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        self.field()?;
        Ok(())
    }

    pub fn field(&self) -> Result<FieldSpec, CliError> {
        Ok(FieldSpec::new(self.period, self.mass, self.charge, self.profile.clone())?)
    }

    pub fn potential(&self) -> Result<PotentialSpec, CliError> {
        self.potential
            .ok_or_else(|| CliError::Config("this command needs a `potential` section".into()))
    }

    /// Canonical serialisation used for hashing and the manifest.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PULSED: &str = r#"{
        "period": 5.497787143782138, "mass": 1, "charge": 1,
        "profile": {"kind": "pulsed", "b0": 2, "t0": 2.356194490192345},
        "potential": {"v0": 1, "rho": 2},
        "grid": {"n": 256, "L": 16}
    }"#;

    #[test]
    fn round_trip() {
        let cfg = RunConfig::parse(PULSED).unwrap();
        let again = RunConfig::parse(&cfg.canonical()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.tolerances, Tolerances::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let bad = PULSED.replace("\"mass\"", "\"masss\"");
        let err = RunConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("masss") && err.contains("line"), "{err}");
    }

    #[test]
    fn non_positive_tolerance_rejected() {
        let bad = PULSED.replace("\"grid\"", "\"tolerances\": {\"gamma_min\": 0}, \"grid\"");
        assert!(RunConfig::parse(&bad).is_err());
    }
}
