//! Run configuration (`config/v1`) and result report (`report/v1`) schemas.
//!
//! Configs come from a JSON file, command-line flags, or both (flags win).
//! Reports echo the config — including the verbatim tolerance values used —
//! so published numbers are self-describing, and serialize to byte-identical
//! JSON for the same config and tool version. Wall-clock timings are
//! excluded unless explicitly requested, precisely to keep that guarantee.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::tolerances::{CURVATURE_FLOW_TOL, EDGE_SCALE_TOL, MODEL_TOL};
use crate::{Error, Result};

pub const CONFIG_SCHEMA: &str = "config/v1";
pub const REPORT_SCHEMA: &str = "report/v1";

/// Which analyses a run performs.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisFlags {
    pub curvature: bool,
    pub convexity: bool,
    pub flow_invariance: bool,
    pub embeddedness: bool,
    pub beta_scan: bool,
    pub realizability: bool,
}

/// Output file destinations; anything left unset is simply not written.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub obj: Option<PathBuf>,
    pub sidecar: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// Tolerances a run applies (and a report republishes verbatim).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed deviation for curvature comparisons (finite differences vs
    /// closed forms).
    pub curvature: f64,
    /// Allowed residual for model invariants.
    pub invariant: f64,
    /// Allowed relative error of edge-length scaling under the flow.
    pub edge_scale: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            curvature: CURVATURE_FLOW_TOL,
            invariant: MODEL_TOL,
            edge_scale: EDGE_SCALE_TOL,
        }
    }
}

/// One run's full configuration (`config/v1`).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    /// Catalog metric id (`constant:<c>`, `flat-punctured`, `cylindric`).
    pub metric: String,
    /// Sphere dimension n (hypersurfaces live in H^{n+1}).
    pub n: usize,
    /// Grid sites per axis; must have `n` entries once validated.
    pub resolution: Vec<usize>,
    /// Extra boundary margin on top of the domain's own.
    pub margin: f64,
    /// Flow time for single-time commands.
    pub t: Option<f64>,
    /// Ascending flow times for lattice commands.
    pub t_lattice: Option<Vec<f64>>,
    pub analyses: AnalysisFlags,
    pub output: OutputPaths,
    /// Worker thread cap; `None` defers to HOROCORR_THREADS or the default.
    pub threads: Option<usize>,
    pub tolerances: Tolerances,
    /// Eigenvalue bound the realizability analysis scans against;
    /// `None` means the immersion threshold 1/2.
    pub realizability_bound: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema: CONFIG_SCHEMA.to_string(),
            metric: "constant:0".to_string(),
            n: 2,
            resolution: vec![64, 64],
            margin: 0.0,
            t: None,
            t_lattice: None,
            analyses: AnalysisFlags::default(),
            output: OutputPaths::default(),
            threads: None,
            tolerances: Tolerances::default(),
            realizability_bound: None,
        }
    }
}

impl RunConfig {
    pub fn for_metric(id: &str) -> Self {
        RunConfig {
            metric: id.to_string(),
            ..RunConfig::default()
        }
    }

    /// Structural validation (schema tag, dimensions, ranges). Metric ids
    /// are resolved later through the catalog, which reports its own error.
    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(Error::InvalidInput(format!(
                "unsupported config schema '{}' (expected '{CONFIG_SCHEMA}')",
                self.schema
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidInput(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if self.resolution.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "resolution needs {} axes for n = {}, got {}",
                self.n,
                self.n,
                self.resolution.len()
            )));
        }
        if self.resolution.iter().any(|&r| r < 4) {
            return Err(Error::InvalidInput(
                "every resolution axis needs at least 4 sites".into(),
            ));
        }
        if !self.margin.is_finite() || self.margin < 0.0 {
            return Err(Error::InvalidInput(format!(
                "margin must be a finite non-negative real, got {}",
                self.margin
            )));
        }
        if let Some(t) = self.t {
            if !t.is_finite() {
                return Err(Error::InvalidInput("flow time t must be finite".into()));
            }
        }
        if let Some(lattice) = &self.t_lattice {
            if lattice.is_empty() {
                return Err(Error::InvalidInput("t_lattice must be non-empty".into()));
            }
            if lattice.iter().any(|t| !t.is_finite()) {
                return Err(Error::InvalidInput("t_lattice values must be finite".into()));
            }
            if lattice.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidInput(
                    "t_lattice must be strictly ascending".into(),
                ));
            }
        }
        if let Some(threads) = self.threads {
            if threads == 0 {
                return Err(Error::InvalidInput("threads must be at least 1".into()));
            }
        }
        if let Some(bound) = self.realizability_bound {
            if !bound.is_finite() || bound <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "realizability_bound must be a positive real, got {bound}"
                )));
            }
        }
        let tol = &self.tolerances;
        for (name, v) in [
            ("curvature", tol.curvature),
            ("invariant", tol.invariant),
            ("edge_scale", tol.edge_scale),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "tolerance '{name}' must be a positive real, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Parse and validate a `config/v1` document.
pub fn parse_config(json: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(json)
        .map_err(|e| Error::InvalidInput(format!("config parse error: {e}")))?;
    config.validate()?;
    Ok(config)
}

/// One analysis outcome inside a report. `passed: None` marks a purely
/// informational section.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalysisResult {
    pub name: String,
    pub passed: Option<bool>,
    pub details: String,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

/// A run's results (`report/v1`).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub tool_version: String,
    pub config: RunConfig,
    pub analyses: Vec<AnalysisResult>,
    /// Wall-clock timings, present only when explicitly requested —
    /// otherwise reports are byte-identical across runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Report {
            schema: REPORT_SCHEMA.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            analyses: Vec::new(),
            timings_ms: None,
        }
    }

    pub fn push(&mut self, name: &str, passed: Option<bool>, details: String) {
        self.analyses.push(AnalysisResult {
            name: name.to_string(),
            passed,
            details,
            data: serde_json::Value::Null,
        });
    }

    pub fn push_with_data<T: Serialize>(
        &mut self,
        name: &str,
        passed: Option<bool>,
        details: String,
        data: &T,
    ) -> Result<()> {
        self.analyses.push(AnalysisResult {
            name: name.to_string(),
            passed,
            details,
            data: serde_json::to_value(data)?,
        });
        Ok(())
    }

    pub fn record_timing(&mut self, name: &str, millis: u64) {
        self.timings_ms
            .get_or_insert_with(BTreeMap::new)
            .insert(name.to_string(), millis);
    }

    /// `false` iff some analysis has `passed == Some(false)`.
    pub fn all_passed(&self) -> bool {
        self.analyses.iter().all(|a| a.passed != Some(false))
    }

    /// Pretty JSON with a trailing newline; deterministic for a given
    /// report value.
    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}
