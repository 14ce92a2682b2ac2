//! Deterministic report rendering: a fixed file set with stable key order,
//! `.` decimals, LF endings, and byte-identical output for identical inputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chainlab_core::certificates::CertificateReport;

use crate::error::Result;
use crate::runner::ReportBundle;
use crate::summary::agents_one_based;

pub const SUMMARY_FILE: &str = "summary.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SORTED_FILE: &str = "sorted.csv";
pub const LYAPUNOV_FILE: &str = "lyapunov.csv";
pub const FLOW_FILE: &str = "flow.csv";
pub const GRAPH_FILE: &str = "graph.csv";
pub const CERTIFICATES_FILE: &str = "certificates.json";

fn render_summary(bundle: &ReportBundle) -> String {
    let mut text =
        serde_json::to_string_pretty(&bundle.summary).expect("summary serialization is infallible");
    text.push('\n');
    text
}

fn render_trajectory(bundle: &ReportBundle) -> Option<String> {
    let traj = bundle.trajectory.as_ref()?;
    let s = traj.order();
    let mut out = String::from("n");
    for i in 1..=s {
        let _ = write!(out, ",X_{i}");
    }
    out.push('\n');
    for (t, state) in traj.states.iter().enumerate() {
        let _ = write!(out, "{}", traj.start + t);
        for v in state {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    Some(out)
}

fn render_sorted(bundle: &ReportBundle) -> Option<String> {
    let traj = bundle.trajectory.as_ref()?;
    let s = traj.order();
    let mut out = String::from("n");
    for i in 1..=s {
        let _ = write!(out, ",z_{i}");
    }
    out.push('\n');
    for (t, view) in traj.sorted.iter().enumerate() {
        let _ = write!(out, "{}", traj.start + t);
        for v in &view.z {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    Some(out)
}

fn render_lyapunov(bundle: &ReportBundle) -> Option<String> {
    let artifacts = bundle.lyapunov.as_ref()?;
    let series = &artifacts.series;
    let rows = series.r;
    let steps = series.values[0].len();
    let mut out = String::from("n");
    for r in 1..=rows {
        let _ = write!(out, ",S_{r}");
    }
    for r in 1..=rows {
        let _ = write!(out, ",lb_{r}");
    }
    out.push('\n');
    for t in 0..steps {
        let _ = write!(out, "{}", series.start + t);
        for r in 1..=rows {
            let _ = write!(out, ",{}", series.values[r - 1][t]);
        }
        for r in 1..=rows {
            // Increment bounds exist for every step but the last.
            if t + 1 < steps {
                let _ = write!(out, ",{}", artifacts.reports[r - 1].lower_bounds[t]);
            } else {
                out.push(',');
            }
        }
        out.push('\n');
    }
    Some(out)
}

fn render_flow(bundle: &ReportBundle) -> Option<String> {
    let profile = bundle.flow.as_ref()?;
    let mut out = String::from("n,c,F_c\n");
    for flow in &profile.per_cardinality {
        for (t, value) in flow.curve.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", profile.start + t, flow.cardinality, value);
        }
    }
    Some(out)
}

fn render_graph(bundle: &ReportBundle) -> Option<String> {
    let graph = bundle.graph.as_ref()?;
    let mut out = String::from("i,j,W_ij,flagged\n");
    for i in 0..graph.order {
        for j in 0..graph.order {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                i + 1,
                j + 1,
                graph.weight(i, j),
                graph.is_flagged(i, j)
            );
        }
    }
    Some(out)
}

fn render_certificates(report: &CertificateReport) -> String {
    // Hand-assembled so the per-step keys match the documented layout:
    // step, M, K, witnesses, delta_running; infinities as "inf".
    let ext = |v: f64| -> serde_json::Value {
        if v.is_infinite() {
            serde_json::Value::String("inf".into())
        } else {
            serde_json::json!(v)
        }
    };
    let mut delta_running = f64::INFINITY;
    let steps: Vec<serde_json::Value> = report
        .steps
        .iter()
        .map(|step| {
            delta_running = delta_running.min(step.min_diagonal);
            let (w1, w2) = match &step.m_witness {
                Some(w) => (
                    serde_json::json!(agents_one_based(&w.s1)),
                    serde_json::json!(agents_one_based(&w.s2)),
                ),
                None => (serde_json::Value::Null, serde_json::Value::Null),
            };
            let we = match &step.k_witness {
                Some(w) => serde_json::json!(agents_one_based(&w.cut)),
                None => serde_json::Value::Null,
            };
            serde_json::json!({
                "step": step.step,
                "M": ext(step.m),
                "K": ext(step.k),
                "witness_S1": w1,
                "witness_S2": w2,
                "witness_E": we,
                "delta_running": delta_running,
                "doubly_stochastic": step.doubly_stochastic,
            })
        })
        .collect();
    let doc = serde_json::json!({
        "start": report.start,
        "horizon": report.horizon,
        "chain_M": ext(report.chain_m),
        "chain_K": ext(report.chain_k),
        "delta": report.delta,
        "all_doubly_stochastic": report.all_doubly_stochastic,
        "steps": steps,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("infallible");
    text.push('\n');
    text
}

impl ReportBundle {
    /// Renders the bundle as `(file name, contents)` pairs; `summary.json`
    /// always comes first, the other files only when their analysis ran.
    pub fn render(&self) -> Vec<(String, String)> {
        let mut files = vec![(SUMMARY_FILE.to_string(), render_summary(self))];
        if let Some(text) = render_trajectory(self) {
            files.push((TRAJECTORY_FILE.to_string(), text));
        }
        if let Some(text) = render_sorted(self) {
            files.push((SORTED_FILE.to_string(), text));
        }
        if let Some(text) = render_lyapunov(self) {
            files.push((LYAPUNOV_FILE.to_string(), text));
        }
        if let Some(text) = render_flow(self) {
            files.push((FLOW_FILE.to_string(), text));
        }
        if let Some(text) = render_graph(self) {
            files.push((GRAPH_FILE.to_string(), text));
        }
        if let Some(report) = &self.certificates {
            files.push((CERTIFICATES_FILE.to_string(), render_certificates(report)));
        }
        files
    }

    /// Writes the rendered files into `dir`, creating it if needed, and
    /// returns the written paths in order.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (name, contents) in self.render() {
            let path = dir.join(name);
            fs::write(&path, contents)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

/// Output directory precedence: the `CHAINLAB_OUT_DIR` environment variable
/// overrides everything, then an explicit CLI flag, then the manifest.
pub fn resolve_out_dir(flag: Option<&str>, manifest_dir: Option<&str>) -> PathBuf {
    if let Ok(dir) = std::env::var("CHAINLAB_OUT_DIR") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    if let Some(dir) = flag {
        return PathBuf::from(dir);
    }
    if let Some(dir) = manifest_dir {
        return PathBuf::from(dir);
    }
    PathBuf::from("chainlab-out")
}
