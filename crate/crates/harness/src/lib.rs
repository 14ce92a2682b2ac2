//! Scenario harness binding the analysis library: JSON manifests in,
//! deterministic report bundles out, with theorem cross-checks evaluated on
//! the collected artifacts.

pub mod crosscheck;
pub mod error;
pub mod report;
pub mod runner;
pub mod scenario;
pub mod summary;

pub use error::{HarnessError, Result};
pub use report::resolve_out_dir;
pub use runner::{realize_manifest_chain, run_scenario, ReportBundle};
pub use scenario::{Analysis, Manifest, Theorem, Tolerances};
pub use summary::Summary;
