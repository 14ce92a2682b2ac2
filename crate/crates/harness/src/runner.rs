//! Scenario execution: chain realization, analyses in dependency order,
//! cross-checks, and bundle assembly.

use chainlab_core::certificates::{certify_chain, CertificateReport};
use chainlab_core::dynamics::{detect_clusters, trajectory, Trajectory};
use chainlab_core::flow::{aif_profile, FlowParams, FlowProfile};
use chainlab_core::graph::{islands, per_island_aif, unbounded_graph, DivergenceRule, InteractionGraph};
use chainlab_core::io::realize_chain;
use chainlab_core::lyapunov::{check_s_monotonic, lyapunov_series, LyapunovSeries, MonotonicityReport};
use chainlab_core::probes::{class_ergodicity_probe, ergodicity_probe};
use chainlab_core::Chain;

use crate::crosscheck::{check_t2, check_t3, check_t4};
use crate::error::{HarnessError, Result};
use crate::scenario::{Analysis, Manifest, Theorem};
use crate::summary::{
    agents_one_based, partition_one_based, AifSummary, AnalysesSummary, CardinalitySummary,
    CertificatesSummary, CrossCheckSummary, ExtReal, FlockingSummary, IslandFlowSummary,
    IslandsSummary, LyapunovSummary, ProbeSummary, SimulateSummary, Summary,
};

/// Everything a scenario produced: the summary plus the raw artifacts the
/// CSV reports are rendered from.
pub struct ReportBundle {
    pub summary: Summary,
    pub trajectory: Option<Trajectory>,
    pub lyapunov: Option<LyapunovArtifacts>,
    pub flow: Option<FlowProfile>,
    pub graph: Option<InteractionGraph>,
    pub certificates: Option<CertificateReport>,
}

pub struct LyapunovArtifacts {
    pub series: LyapunovSeries,
    /// One monotonicity report per series row `r = 1..=s`.
    pub reports: Vec<MonotonicityReport>,
}

impl ReportBundle {
    pub fn all_agree(&self) -> bool {
        self.summary.all_agree
    }
}

fn wants(manifest: &Manifest, analysis: Analysis) -> bool {
    manifest.analyses.contains(&analysis)
}

/// Runs one scenario end to end. Analyses execute in dependency order
/// (chain, certificates, flow and islands, probes, trajectory work) and the
/// requested cross-checks are evaluated on the collected artifacts.
pub fn run_scenario(manifest: &Manifest) -> Result<ReportBundle> {
    manifest.validate()?;
    let realized = realize_chain(&manifest.chain, manifest.horizon, manifest.seed)?;
    let chain = &realized.chain;
    let horizon = manifest.horizon;
    let start = manifest.start.unwrap_or_else(|| chain.start());
    if start < chain.start() || start >= horizon {
        return Err(HarnessError::Manifest(format!(
            "start: {start} is outside the usable window [{}, {horizon})",
            chain.start()
        )));
    }
    let tol = &manifest.tolerances;

    let mut analyses = AnalysesSummary::default();
    let mut bundle_traj = None;
    let mut bundle_lyapunov = None;
    let mut bundle_flow = None;
    let mut bundle_graph = None;
    let mut bundle_certificates = None;

    if let Some(flocking) = &realized.flocking {
        analyses.flocking = Some(FlockingSummary {
            f_bound_ok: flocking.f_bound_ok,
            initial_condition_ok: flocking.initial_condition_ok,
            m_x: flocking.m_x,
            m_v: flocking.m_v,
            integral_value: ExtReal(flocking.integral_value),
            threshold: ExtReal(flocking.threshold),
        });
    }

    // Certificates: requested explicitly, or needed by the lyapunov series
    // for its balanced-asymmetry constant.
    let needs_certificates = wants(manifest, Analysis::Certificates)
        || wants(manifest, Analysis::Lyapunov);
    let certificate_report = if needs_certificates {
        Some(certify_chain(chain, horizon)?)
    } else {
        None
    };
    if let Some(report) = &certificate_report {
        if wants(manifest, Analysis::Certificates) {
            analyses.certificates = Some(CertificatesSummary {
                chain_m: ExtReal(report.chain_m),
                chain_k: ExtReal(report.chain_k),
                delta: report.delta,
                all_doubly_stochastic: report.all_doubly_stochastic,
                steps_evaluated: report.steps.len(),
            });
        }
    }

    if wants(manifest, Analysis::Aif) {
        let params = FlowParams {
            theta_flow: tol.theta_flow,
            sigma_flow: tol.sigma_flow,
            ..FlowParams::default()
        };
        let profile = aif_profile(chain, horizon, manifest.flow_variant, &params)?;
        analyses.aif = Some(AifSummary {
            variant: profile.variant,
            verdict: profile.verdict.clone(),
            final_min_flow: *profile.min_over_c.last().expect("non-empty"),
            per_cardinality: profile
                .per_cardinality
                .iter()
                .map(|flow| CardinalitySummary {
                    c: flow.cardinality,
                    final_flow: flow.value,
                    trivial: flow.trivial,
                    witness: partition_one_based(&flow.witness.sets),
                })
                .collect(),
        });
        bundle_flow = Some(profile);
    }

    if wants(manifest, Analysis::Islands) {
        let rule = DivergenceRule { tau_abs: tol.tau_abs, tau_tail: tol.tau_tail };
        let graph = unbounded_graph(chain, horizon, rule)?;
        let partition = islands(&graph);
        let params = FlowParams {
            theta_flow: tol.theta_flow,
            sigma_flow: tol.sigma_flow,
            ..FlowParams::default()
        };
        let island_flows =
            per_island_aif(chain, &partition, horizon, manifest.flow_variant, &params)?;
        analyses.islands = Some(IslandsSummary {
            islands: partition_one_based(&partition.islands),
            weak_components: partition_one_based(&partition.weak_components),
            prop2_audit: partition.weak_strongly_connected.clone(),
            audit_passes: partition.audit_passes(),
            flag_source: graph.flag_source,
            flagged_edges: graph.flagged.iter().filter(|&&f| f).count(),
            per_island_flow: island_flows
                .iter()
                .map(|f| IslandFlowSummary {
                    members: agents_one_based(&f.members),
                    verdict: f.verdict.clone(),
                })
                .collect(),
        });
        bundle_graph = Some(graph);
    }

    if wants(manifest, Analysis::Ergodicity) {
        let verdict = ergodicity_probe(chain, start, horizon, tol.eps_span)?;
        analyses.ergodicity = Some(ProbeSummary {
            kind: verdict.kind,
            start: verdict.start,
            final_span: *verdict.span_curve.last().expect("non-empty"),
            tolerance: verdict.tolerance,
            clusters: partition_one_based(&verdict.clusters),
            span_curve: verdict.span_curve,
        });
    }

    if wants(manifest, Analysis::ClassErgodicity) {
        let verdict = class_ergodicity_probe(chain, start, horizon, tol.eps_cluster)?;
        analyses.class_ergodicity = Some(ProbeSummary {
            kind: verdict.kind,
            start: verdict.start,
            final_span: *verdict.span_curve.last().expect("non-empty"),
            tolerance: verdict.tolerance,
            clusters: partition_one_based(&verdict.clusters),
            span_curve: verdict.span_curve,
        });
    }

    let needs_trajectory = wants(manifest, Analysis::Simulate) || wants(manifest, Analysis::Lyapunov);
    if needs_trajectory {
        let x0 = manifest
            .x0
            .clone()
            .or_else(|| realized.default_x0.clone())
            .ok_or_else(|| {
                HarnessError::Manifest(
                    "x0: required for simulate/lyapunov analyses of an inline chain".into(),
                )
            })?;
        let traj = trajectory(chain, &x0, start, horizon)?;

        if wants(manifest, Analysis::Simulate) {
            let steps = traj.states.len();
            let window = if tol.state_window == 0 {
                (steps / 10).max(10).min(steps)
            } else {
                tol.state_window.min(steps)
            };
            let report = detect_clusters(&traj, tol.state_eps, window)?;
            analyses.simulate = Some(SimulateSummary {
                verdict: report.verdict,
                partition: partition_one_based(&report.partition),
                accumulation_points: report.accumulation_points,
                z_estimates: report.z_estimates,
                window: report.window,
                epsilon: report.epsilon,
            });
        }

        if wants(manifest, Analysis::Lyapunov) {
            let report = certificate_report.as_ref().expect("computed above");
            if report.chain_m.is_finite() {
                let s = chain.order();
                let series = lyapunov_series(&traj, s, report.chain_m.max(1.0), None)?;
                let mut reports = Vec::with_capacity(s);
                let mut violations = 0usize;
                let mut max_gap = 0.0_f64;
                for r in 1..=s {
                    let row_series = lyapunov_series(&traj, r, report.chain_m.max(1.0), None)?;
                    let check = check_s_monotonic(&row_series, &traj, chain, tol.lyapunov_tol)?;
                    violations += check.violations.len();
                    for v in &check.violations {
                        max_gap = max_gap.max((v.lower_bound - v.increment).max(-v.increment));
                    }
                    reports.push(check);
                }
                analyses.lyapunov = Some(LyapunovSummary {
                    applicable: true,
                    reason: None,
                    m_const: ExtReal(report.chain_m),
                    k_const: ExtReal(series.k_const),
                    rows: s,
                    checked_steps: traj.states.len() - 1,
                    violations,
                    max_violation_gap: max_gap,
                });
                bundle_lyapunov = Some(LyapunovArtifacts { series, reports });
            } else {
                analyses.lyapunov = Some(LyapunovSummary {
                    applicable: false,
                    reason: Some(
                        "chain is not balanced asymmetric on this window (M = inf); the series \
                         is undefined"
                            .into(),
                    ),
                    m_const: ExtReal(report.chain_m),
                    k_const: ExtReal(f64::INFINITY),
                    rows: 0,
                    checked_steps: 0,
                    violations: 0,
                    max_violation_gap: 0.0,
                });
            }
        }

        bundle_traj = Some(traj);
    }

    if wants(manifest, Analysis::Certificates) {
        bundle_certificates = certificate_report;
    }

    let mut cross_checks: Vec<CrossCheckSummary> = Vec::new();
    for theorem in &manifest.cross_checks {
        let check = match theorem {
            Theorem::T2 => check_t2(&analyses).ok_or_else(|| missing_artifact_t2(&analyses))?,
            Theorem::T3 => check_t3(&analyses).ok_or_else(|| missing_artifact_t3(&analyses))?,
            Theorem::T4 => check_t4(&analyses).ok_or_else(|| missing_artifact_t4(&analyses))?,
        };
        cross_checks.push(check);
    }
    let all_agree = cross_checks.iter().all(|c| c.agreement);

    let summary = Summary {
        schema: 1,
        label: manifest.label.clone().or_else(|| chain.label().map(String::from)),
        order: chain.order(),
        start,
        horizon,
        seed: manifest.seed,
        flow_variant: manifest.flow_variant,
        tolerances: manifest.tolerances,
        analyses,
        cross_checks,
        all_agree,
    };
    Ok(ReportBundle {
        summary,
        trajectory: bundle_traj,
        lyapunov: bundle_lyapunov,
        flow: bundle_flow,
        graph: bundle_graph,
        certificates: bundle_certificates,
    })
}

fn missing_artifact_t2(analyses: &AnalysesSummary) -> HarnessError {
    let artifact = if analyses.certificates.is_none() {
        "certificates"
    } else if analyses.aif.is_none() {
        "aif"
    } else {
        "ergodicity"
    };
    HarnessError::MissingArtifact { theorem: "T2", artifact }
}

fn missing_artifact_t3(analyses: &AnalysesSummary) -> HarnessError {
    let artifact = if analyses.certificates.is_none() {
        "certificates"
    } else if analyses.islands.is_none() {
        "islands"
    } else {
        "class-ergodicity"
    };
    HarnessError::MissingArtifact { theorem: "T3", artifact }
}

fn missing_artifact_t4(analyses: &AnalysesSummary) -> HarnessError {
    let artifact = if analyses.certificates.is_none() {
        "certificates"
    } else {
        "class-ergodicity"
    };
    HarnessError::MissingArtifact { theorem: "T4", artifact }
}

/// The chain a manifest describes, realized for external use (demo surfaces,
/// chain export).
pub fn realize_manifest_chain(manifest: &Manifest) -> Result<Chain> {
    Ok(realize_chain(&manifest.chain, manifest.horizon, manifest.seed)?.chain)
}
