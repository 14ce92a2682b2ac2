//! Theorem cross-checks: does the verdict observed by a probe agree with
//! what the certificates and flow analysis predict?
//!
//! Finite horizons make the comparison one-directional: a probe that has not
//! contracted yet never refutes a divergence-based prediction, so
//! disagreement is only declared on horizon-safe contradictions — a
//! bounded-flow witness paired with an observed contraction, or a settled
//! cluster structure that contradicts the island count.

use chainlab_core::flow::FlowVerdict;
use chainlab_core::probes::VerdictKind;

use crate::summary::{AnalysesSummary, CrossCheckSummary};

fn kind_name(kind: VerdictKind) -> &'static str {
    match kind {
        VerdictKind::Ergodic => "ergodic",
        VerdictKind::ClassErgodic => "class-ergodic",
        VerdictKind::UndecidedAtHorizon => "undecided-at-horizon",
    }
}

fn flow_diverges(verdict: &FlowVerdict) -> bool {
    matches!(verdict, FlowVerdict::DivergentTrend { .. } | FlowVerdict::TriviallySatisfied)
}

/// Ergodicity holds iff flow diverges, for chains certified balanced
/// asymmetric. Requires certificates, the flow profile, and the ergodicity
/// probe.
pub fn check_t2(analyses: &AnalysesSummary) -> Option<CrossCheckSummary> {
    let certificates = analyses.certificates.as_ref()?;
    let aif = analyses.aif.as_ref()?;
    let probe = analyses.ergodicity.as_ref()?;
    let observation = kind_name(probe.kind).to_string();
    let applicable = certificates.chain_m.0.is_finite();
    let (prediction, agreement, note) = if !applicable {
        (
            "not-applicable".to_string(),
            true,
            "chain not certified balanced asymmetric on this window; outside theorem scope"
                .to_string(),
        )
    } else if flow_diverges(&aif.verdict) {
        let note = if probe.kind == VerdictKind::Ergodic {
            String::new()
        } else {
            "span not yet contracted at this horizon; not a horizon-safe contradiction".to_string()
        };
        ("ergodic".to_string(), true, note)
    } else if matches!(aif.verdict, FlowVerdict::BoundedFlowWitness { .. }) {
        let agreement = probe.kind != VerdictKind::Ergodic;
        let note = if agreement {
            String::new()
        } else {
            "bounded-flow witness paired with a contracted span".to_string()
        };
        ("not-ergodic".to_string(), agreement, note)
    } else {
        (
            "indeterminate".to_string(),
            true,
            "flow trend inconclusive at this horizon".to_string(),
        )
    };
    Some(CrossCheckSummary {
        theorem: "T2".to_string(),
        applicable,
        prediction,
        observation,
        agreement,
        note,
    })
}

/// Class-ergodicity holds iff flow diverges on every island; the predicted
/// cluster count is the island count. Requires certificates, islands with
/// per-island flow, and the class probe.
pub fn check_t3(analyses: &AnalysesSummary) -> Option<CrossCheckSummary> {
    let certificates = analyses.certificates.as_ref()?;
    let islands = analyses.islands.as_ref()?;
    let probe = analyses.class_ergodicity.as_ref()?;
    let island_count = islands.islands.len();
    let cluster_count = probe.clusters.len();
    let observation = format!("{} with {} clusters", kind_name(probe.kind), cluster_count);
    let applicable = certificates.chain_m.0.is_finite();
    let all_divergent = islands.per_island_flow.iter().all(|f| flow_diverges(&f.verdict));
    let settled =
        matches!(probe.kind, VerdictKind::Ergodic | VerdictKind::ClassErgodic);
    let (prediction, agreement, note) = if !applicable {
        (
            "not-applicable".to_string(),
            true,
            "chain not certified balanced asymmetric on this window; outside theorem scope"
                .to_string(),
        )
    } else if all_divergent {
        let prediction = format!("class-ergodic with {island_count} clusters");
        if settled {
            let agreement = cluster_count == island_count;
            let note = if agreement {
                String::new()
            } else {
                "settled cluster count contradicts the island count".to_string()
            };
            (prediction, agreement, note)
        } else {
            (
                prediction,
                true,
                "probe not settled at this horizon; not a horizon-safe contradiction".to_string(),
            )
        }
    } else {
        // Some island has a bounded-flow witness: consensus on that island
        // must fail, so a settled verdict contradicts.
        let prediction = "not class-ergodic (bounded flow on some island)".to_string();
        let agreement = !settled;
        let note = if agreement {
            String::new()
        } else {
            "bounded island flow paired with a settled cluster structure".to_string()
        };
        (prediction, agreement, note)
    };
    Some(CrossCheckSummary {
        theorem: "T3".to_string(),
        applicable,
        prediction,
        observation,
        agreement,
        note,
    })
}

/// Self-confidence plus cut balance predict class-ergodicity. Requires
/// certificates and the class probe. A finite horizon can never refute the
/// prediction, so the check either agrees or is inapplicable; the
/// observation is still recorded.
pub fn check_t4(analyses: &AnalysesSummary) -> Option<CrossCheckSummary> {
    let certificates = analyses.certificates.as_ref()?;
    let probe = analyses.class_ergodicity.as_ref()?;
    let applicable = certificates.delta > 0.0 && certificates.chain_k.0.is_finite();
    let observation =
        format!("{} with {} clusters", kind_name(probe.kind), probe.clusters.len());
    let (prediction, note) = if !applicable {
        (
            "not-applicable".to_string(),
            "chain is not self-confident and cut-balanced on this window".to_string(),
        )
    } else if matches!(probe.kind, VerdictKind::Ergodic | VerdictKind::ClassErgodic) {
        ("class-ergodic".to_string(), String::new())
    } else {
        (
            "class-ergodic".to_string(),
            "probe not settled at this horizon; not a horizon-safe contradiction".to_string(),
        )
    };
    Some(CrossCheckSummary {
        theorem: "T4".to_string(),
        applicable,
        prediction,
        observation,
        agreement: true,
        note,
    })
}
