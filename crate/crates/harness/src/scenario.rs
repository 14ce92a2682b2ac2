//! Scenario manifests: the JSON surface describing one analysis run.

use serde::{Deserialize, Serialize};

use chainlab_core::io::ChainSpec;
use chainlab_core::FlowVariant;

use crate::error::{HarnessError, Result};

/// Analyses a scenario may request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Ergodicity,
    ClassErgodicity,
    Certificates,
    Aif,
    Islands,
    Lyapunov,
    Simulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    T2,
    T3,
    T4,
}

/// Numeric knobs, all positive; defaults follow the library defaults.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Row-sum validation tolerance.
    pub tol_row: f64,
    /// Span threshold for the ergodicity probe.
    pub eps_span: f64,
    /// Row-proximity threshold for the class-ergodicity probe.
    pub eps_cluster: f64,
    /// State-proximity threshold for trajectory cluster detection.
    pub state_eps: f64,
    /// Detection window for trajectory clusters; 0 picks a tenth of the run
    /// (at least 10 steps).
    pub state_window: usize,
    /// Minimum final flow mass for a divergent-trend call.
    pub theta_flow: f64,
    /// Minimum tail slope for a divergent-trend call.
    pub sigma_flow: f64,
    /// Absolute-mass threshold of the unbounded-edge rule.
    pub tau_abs: f64,
    /// Tail-mass threshold of the unbounded-edge rule.
    pub tau_tail: f64,
    /// Floating-point slack for the series increment bounds.
    pub lyapunov_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_row: 1e-12,
            eps_span: 1e-8,
            eps_cluster: 1e-8,
            state_eps: 1e-6,
            state_window: 0,
            theta_flow: 1.0,
            sigma_flow: 1e-6,
            tau_abs: 1.0,
            tau_tail: 1.0,
            lyapunov_tol: 1e-10,
        }
    }
}

fn default_schema() -> u32 {
    1
}

fn default_flow_variant() -> FlowVariant {
    FlowVariant::Reduced
}

/// One scenario: a chain, the analyses to run on it, horizons, tolerances,
/// and the theorem cross-checks to evaluate afterwards.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub chain: ChainSpec,
    pub horizon: usize,
    /// Start index for probes and trajectories; defaults to the chain start.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    /// Initial state for simulate/lyapunov analyses; generators supply a
    /// default when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub cross_checks: Vec<Theorem>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_flow_variant")]
    pub flow_variant: FlowVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let manifest: Manifest =
            serde_json::from_str(text).map_err(|e| HarnessError::Manifest(e.to_string()))?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(HarnessError::Manifest(format!(
                "schema: expected 1, got {}",
                self.schema
            )));
        }
        if self.horizon == 0 {
            return Err(HarnessError::Manifest("horizon: must be positive".into()));
        }
        let t = &self.tolerances;
        for (name, value) in [
            ("tol_row", t.tol_row),
            ("eps_span", t.eps_span),
            ("eps_cluster", t.eps_cluster),
            ("state_eps", t.state_eps),
            ("theta_flow", t.theta_flow),
            ("sigma_flow", t.sigma_flow),
            ("tau_abs", t.tau_abs),
            ("tau_tail", t.tau_tail),
            ("lyapunov_tol", t.lyapunov_tol),
        ] {
            if !(value > 0.0) {
                return Err(HarnessError::Manifest(format!("{name}: must be positive")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_manifest_parses() {
        let m = Manifest::from_json(
            r#"{"schema":1,"chain":{"kind":"generator","name":"swap"},"horizon":100,
                "analyses":["ergodicity","aif"],"cross_checks":["T2"]}"#,
        )
        .unwrap();
        assert_eq!(m.horizon, 100);
        assert_eq!(m.analyses, vec![Analysis::Ergodicity, Analysis::Aif]);
        assert_eq!(m.cross_checks, vec![Theorem::T2]);
        assert_eq!(m.tolerances.eps_span, 1e-8);
    }

    #[test]
    fn bad_schema_and_horizon_are_named() {
        let err = Manifest::from_json(
            r#"{"schema":2,"chain":{"kind":"generator","name":"swap"},"horizon":10}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("schema"));
        let err = Manifest::from_json(
            r#"{"schema":1,"chain":{"kind":"generator","name":"swap"},"horizon":0}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("horizon"));
    }

    #[test]
    fn negative_tolerance_is_named() {
        let err = Manifest::from_json(
            r#"{"schema":1,"chain":{"kind":"generator","name":"swap"},"horizon":10,
                "tolerances":{"eps_span":-1.0}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("eps_span"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = Manifest::from_json(
            r#"{"schema":1,"chain":{"kind":"generator","name":"swap"},"horizon":10,"bogus":3}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }
}
