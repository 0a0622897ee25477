//! Problem configuration: one JSON document describing Ω, D, the exponent,
//! the boundary datum, the grid, the n-schedule and the tolerances.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datum::Datum;
use crate::error::{Error, Result};
use crate::exponent::{ExponentField, FinitePart};
use crate::geometry::{Domain, Geometry};
use crate::minimizer::{Preconditioner, SolveConfig};
use crate::sweep::{SweepTolerances, DEFAULT_SCHEDULE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub omega: Domain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Domain>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub gradient: f64,
    pub max_iterations: usize,
    pub armijo: f64,
    pub backtrack: f64,
    pub preconditioner: Preconditioner,
    pub sweep: f64,
    pub blowup_margin: f64,
    pub transmission_band: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let s = SolveConfig::default();
        let w = SweepTolerances::default();
        Tolerances {
            gradient: s.gradient_tolerance,
            max_iterations: s.max_iterations,
            armijo: s.armijo_constant,
            backtrack: s.backtrack_factor,
            preconditioner: s.preconditioner,
            sweep: w.convergence,
            blowup_margin: w.blowup_margin,
            transmission_band: crate::diagnostics::DEFAULT_BAND,
        }
    }
}

impl Tolerances {
    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            gradient_tolerance: self.gradient,
            max_iterations: self.max_iterations,
            armijo_constant: self.armijo,
            backtrack_factor: self.backtrack,
            preconditioner: self.preconditioner,
        }
    }

    pub fn sweep_tolerances(&self) -> SweepTolerances {
        SweepTolerances { convergence: self.sweep, blowup_margin: self.blowup_margin }
    }
}

fn default_schedule() -> Vec<f64> {
    DEFAULT_SCHEDULE.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub geometry: GeometryConfig,
    pub exponent: FinitePart,
    pub datum: Datum,
    pub nodes_per_side: usize,
    #[serde(default = "default_schedule")]
    pub schedule: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ProblemConfig {
    /// Every violated precondition, each prefixed with the path of the field.
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let geometry = match Geometry::new(self.geometry.omega, self.geometry.d) {
            Ok(g) => Some(g),
            Err(e) => {
                errs.push(format!("geometry: {e}"));
                None
            }
        };
        if let Some(geo) = &geometry {
            if let Err(e) = ExponentField::new(self.exponent.clone(), geo.clone()) {
                errs.push(format!("exponent: {e}"));
            }
            if let Err(e) = self.datum.validate(geo.omega()) {
                errs.push(format!("datum: {e}"));
            }
        }
        if self.nodes_per_side < 3 {
            errs.push(format!("nodes_per_side: {} must be at least 3", self.nodes_per_side));
        }
        let dim = self.geometry.omega.dim() as f64;
        if self.schedule.is_empty() {
            errs.push("schedule: must not be empty".into());
        }
        if self.schedule.iter().any(|n| !n.is_finite() || *n <= dim) {
            errs.push(format!("schedule: every entry must be finite and exceed N = {dim}"));
        }
        if self.schedule.windows(2).any(|w| w[1] <= w[0]) {
            errs.push("schedule: must be strictly increasing".into());
        }
        if let Err(e) = self.tolerances.solve_config().validate() {
            errs.extend(e.into_iter().map(|m| format!("tolerances: {m}")));
        }
        for (name, v) in [
            ("sweep", self.tolerances.sweep),
            ("blowup_margin", self.tolerances.blowup_margin),
            ("transmission_band", self.tolerances.transmission_band),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("tolerances.{name}: must be positive"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self.geometry.omega, self.geometry.d)
    }

    pub fn exponent_field(&self) -> Result<ExponentField> {
        ExponentField::new(self.exponent.clone(), self.geometry()?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ProblemConfig = serde_json::from_str(text).map_err(|e| Error::Config(vec![format!("parse: {e}")]))?;
        cfg.validate().map_err(Error::Config)?;
        Ok(cfg)
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ProblemConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?;
    ProblemConfig::from_json(&text)
}
