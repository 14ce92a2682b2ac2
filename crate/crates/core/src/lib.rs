//! Discrete-time linear consensus dynamics over chains of row-stochastic
//! matrices.
//!
//! The crate provides the primitives to simulate `X(n+1) = A_n X(n)` and to
//! certify, at finite horizon, the structural properties of the driving
//! chain that govern whether agents reach one consensus value or several:
//!
//! - [`matrix`], [`chain`]: validated stochastic matrices, chains as indexed
//!   producers, backward products and their span contraction.
//! - [`probes`]: finite-horizon ergodicity and class-ergodicity verdicts.
//! - [`certificates`]: balanced-asymmetry and cut-balance constants with
//!   witnesses, self-confidence, double stochasticity, l1 chain distance.
//! - [`flow`]: minimal cumulative cross-flow over subset sequences by
//!   dynamic programming, with a brute-force oracle and trend classifier.
//! - [`graph`]: unbounded interactions graph, islands, island-restricted
//!   chains and per-island flow verdicts.
//! - [`dynamics`], [`lyapunov`]: trajectories with sorted views, cluster
//!   detection, and the weighted sorted-state series with its per-step
//!   increment certificate.
//! - [`models`]: finite-range endogenous averaging, velocity-coupled
//!   flocking, neighbor averaging, reference chains, seeded doubly
//!   stochastic chains.
//! - [`io`]: CSV/JSON matrix formats and the JSON chain spec.

pub mod certificates;
pub mod chain;
pub mod dynamics;
pub mod error;
pub mod flow;
pub mod graph;
pub mod io;
pub mod lyapunov;
pub mod matrix;
pub mod models;
pub mod probes;

pub use certificates::{
    balanced_asymmetry_constant, certify_chain, cut_balance_constant, is_doubly_stochastic,
    l1_distance, self_confidence, CertificateReport, L1Distance,
};
pub use chain::{backward_product, BackwardProduct, Chain};
pub use dynamics::{detect_clusters, step, trajectory, ClusterReport, ClusterVerdict, Trajectory};
pub use error::{Error, Result};
pub use flow::{
    aif_profile, brute_force_min_flow, min_flow_dp, FlowParams, FlowProfile, FlowVariant,
    FlowVerdict, MinFlow, SubsetSequence,
};
pub use graph::{
    island_restricted_chain, islands, per_island_aif, unbounded_graph, DivergenceRule,
    InteractionGraph, IslandFlow, IslandPartition,
};
pub use lyapunov::{check_s_monotonic, lyapunov_series, LyapunovSeries, MonotonicityReport};
pub use matrix::{StochasticMatrix, DEFAULT_TOL_ROW};
pub use probes::{class_ergodicity_probe, ergodicity_probe, ErgodicityVerdict, VerdictKind};
