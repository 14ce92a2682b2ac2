//! Serializable summary data model. Field order is declaration order and all
//! collections are ordered, so serialized output is byte-stable across runs.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use chainlab_core::dynamics::ClusterVerdict;
use chainlab_core::flow::FlowVerdict;
use chainlab_core::graph::FlagSource;
use chainlab_core::probes::VerdictKind;
use chainlab_core::FlowVariant;

use crate::scenario::Tolerances;

/// Extended real: finite values serialize as numbers, infinities as the
/// string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtReal(pub f64);

impl From<f64> for ExtReal {
    fn from(v: f64) -> Self {
        Self(v)
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            serializer.serialize_str(if self.0 > 0.0 { "inf" } else { "-inf" })
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(v) => Ok(ExtReal(v)),
            Raw::Text(s) => match s.as_str() {
                "inf" => Ok(ExtReal(f64::INFINITY)),
                "-inf" => Ok(ExtReal(f64::NEG_INFINITY)),
                other => Err(D::Error::custom(format!("expected a number or \"inf\", got {other:?}"))),
            },
        }
    }
}

/// Agents rendered 1-based for external output.
pub fn agents_one_based(agents: &[usize]) -> Vec<usize> {
    agents.iter().map(|&a| a + 1).collect()
}

pub fn partition_one_based(partition: &[Vec<usize>]) -> Vec<Vec<usize>> {
    partition.iter().map(|c| agents_one_based(c)).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificatesSummary {
    pub chain_m: ExtReal,
    pub chain_k: ExtReal,
    pub delta: f64,
    pub all_doubly_stochastic: bool,
    pub steps_evaluated: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CardinalitySummary {
    pub c: usize,
    pub final_flow: f64,
    pub trivial: bool,
    /// Witness sequence, 1-based agent lists.
    pub witness: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AifSummary {
    pub variant: FlowVariant,
    pub verdict: FlowVerdict,
    pub final_min_flow: f64,
    pub per_cardinality: Vec<CardinalitySummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IslandFlowSummary {
    pub members: Vec<usize>,
    pub verdict: FlowVerdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IslandsSummary {
    pub islands: Vec<Vec<usize>>,
    pub weak_components: Vec<Vec<usize>>,
    /// Per weak component: is it strongly connected? Must be all-true for
    /// chains certified balanced asymmetric.
    pub prop2_audit: Vec<bool>,
    pub audit_passes: bool,
    pub flag_source: FlagSource,
    pub flagged_edges: usize,
    pub per_island_flow: Vec<IslandFlowSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub kind: VerdictKind,
    pub start: usize,
    pub final_span: f64,
    pub tolerance: f64,
    pub clusters: Vec<Vec<usize>>,
    pub span_curve: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub verdict: ClusterVerdict,
    pub partition: Vec<Vec<usize>>,
    pub accumulation_points: usize,
    pub z_estimates: Vec<f64>,
    pub window: usize,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovSummary {
    pub applicable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub m_const: ExtReal,
    pub k_const: ExtReal,
    pub rows: usize,
    pub checked_steps: usize,
    pub violations: usize,
    /// Largest shortfall of an increment against its bound, 0 when clean.
    pub max_violation_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlockingSummary {
    pub f_bound_ok: bool,
    pub initial_condition_ok: bool,
    pub m_x: f64,
    pub m_v: f64,
    pub integral_value: ExtReal,
    pub threshold: ExtReal,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AnalysesSummary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificates: Option<CertificatesSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aif: Option<AifSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub islands: Option<IslandsSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ergodicity: Option<ProbeSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_ergodicity: Option<ProbeSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flocking: Option<FlockingSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossCheckSummary {
    pub theorem: String,
    pub applicable: bool,
    pub prediction: String,
    pub observation: String,
    pub agreement: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub order: usize,
    pub start: usize,
    pub horizon: usize,
    pub seed: u64,
    pub flow_variant: FlowVariant,
    pub tolerances: Tolerances,
    pub analyses: AnalysesSummary,
    pub cross_checks: Vec<CrossCheckSummary>,
    pub all_agree: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ext_real_serializes_infinity_as_string() {
        assert_eq!(serde_json::to_string(&ExtReal(1.5)).unwrap(), "1.5");
        assert_eq!(serde_json::to_string(&ExtReal(f64::INFINITY)).unwrap(), "\"inf\"");
        let back: ExtReal = serde_json::from_str("\"inf\"").unwrap();
        assert!(back.0.is_infinite());
        let back: ExtReal = serde_json::from_str("2.25").unwrap();
        assert_eq!(back.0, 2.25);
    }
}
