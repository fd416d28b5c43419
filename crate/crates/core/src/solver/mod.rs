//! The Fredholm equation `w = g + T(αw̄)` and the boundary value problems built on it.

mod dirichlet;
mod fredholm;
mod gradient;
mod neumann;

pub use dirichlet::{dirichlet_g, dirichlet_g_normalized, dirichlet_h, dirichlet_u, hilbert_nu, normalize_w};
pub use fredholm::{solve_fredholm, AlphaOperator};
pub use gradient::{boundary_derivative, gradient_field};
pub use neumann::{neumann, normal_derivative_stencil};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Exponent and iteration controls shared by every solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub p: f64,
    /// Relative residual of the inner Fredholm solve.
    pub inner_tol: f64,
    /// Relative residual of the outer boundary-condition solve.
    pub outer_tol: f64,
    pub max_iter: usize,
    /// Krylov restart length.
    pub restart: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            inner_tol: 1e-10,
            outer_tol: 1e-8,
            max_iter: 400,
            restart: 40,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidExponent(self.p));
        }
        if !(self.inner_tol > 0.0 && self.outer_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if self.outer_tol < 10.0 * self.inner_tol * (1.0 - 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "outer_tol ({:e}) must be at least 10x inner_tol ({:e})",
                self.outer_tol, self.inner_tol
            )));
        }
        if self.max_iter == 0 || self.restart == 0 {
            return Err(Error::InvalidConfig("max_iter and restart must be positive".into()));
        }
        Ok(())
    }
}

/// One iterative stage of a solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub name: String,
    pub method: String,
    pub iterations: usize,
    /// Recomputed relative residual after the stage finished.
    pub residual: f64,
    pub converged: bool,
}

/// A measured quantity against the bound it should satisfy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

impl Certificate {
    pub fn at_most(value: f64, bound: f64) -> Self {
        Self {
            value,
            bound,
            holds: value <= bound,
        }
    }
}

/// Residuals, norms and certificates attached to a solver output.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub stages: Vec<StageReport>,
    pub norms: BTreeMap<String, f64>,
    pub certificates: BTreeMap<String, Certificate>,
    pub warnings: Vec<String>,
}

impl SolveReport {
    pub fn stage(&mut self, name: &str, method: &str, iterations: usize, residual: f64, converged: bool) {
        self.stages.push(StageReport {
            name: name.to_string(),
            method: method.to_string(),
            iterations,
            residual,
            converged,
        });
    }

    pub fn norm(&mut self, name: &str, value: f64) {
        self.norms.insert(name.to_string(), value);
    }

    pub fn certify(&mut self, name: &str, cert: Certificate) {
        self.certificates.insert(name.to_string(), cert);
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    /// Appends another report's entries, prefixing their names.
    pub fn absorb(&mut self, prefix: &str, other: SolveReport) {
        for mut s in other.stages {
            s.name = format!("{prefix}{}", s.name);
            self.stages.push(s);
        }
        for (k, v) in other.norms {
            self.norms.insert(format!("{prefix}{k}"), v);
        }
        for (k, v) in other.certificates {
            self.certificates.insert(format!("{prefix}{k}"), v);
        }
        self.warnings.extend(other.warnings);
    }

    /// Total iteration count over all stages.
    pub fn iterations(&self) -> usize {
        self.stages.iter().map(|s| s.iterations).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SolveConfig::default().validate().is_ok());
        let bad = SolveConfig {
            outer_tol: 1e-10,
            ..SolveConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolveConfig {
            p: 1.0,
            ..SolveConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn config_round_trip() {
        let c = SolveConfig {
            p: 3.0,
            ..SolveConfig::default()
        };
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SolveConfig>(&s).unwrap(), c);
    }
}
