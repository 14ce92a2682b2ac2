//! Weighted sorted-state series and its monotonicity certificate.
//!
//! For a trajectory with sorted values `z_i(n)`, a nominal chain with
//! balanced-asymmetry constant `M`, and the cumulative perturbation sizes
//! `m'_n`, the series
//!
//! ```text
//! S_r(n) = sum_{i=1}^{r} K^{-i} (z_i(n) + s m'_n L),    K = 2M,
//! ```
//!
//! is bounded and non-decreasing, with per-step increments dominated by
//!
//! ```text
//! S_r(n+1) - S_r(n) >= K^{-s} sum_{k=1}^{r-1}
//!     ( sum_{i=k+1}^{s} sum_{j=1}^{k} b_{i_{n+1} j_n} ) (z_{k+1}(n) - z_k(n))
//! ```
//!
//! where `b_{i_{n+1} j_n}` is the nominal coefficient from the agent ranked
//! `j` at time `n` to the agent ranked `i` at time `n+1`. Convergence of the
//! series forces convergence of every `z_i`, so the limit set of states is
//! finite. The monotonicity check evaluates both bounds step by step; its
//! precondition is that the nominal chain really is balanced asymmetric with
//! the supplied `M`, and violations are returned as data, not errors.

use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// The series `S_1 ..= S_r` along a trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LyapunovSeries {
    /// Deepest index computed; rows `1..=r` are available.
    pub r: usize,
    /// `K = 2M`.
    pub k_const: f64,
    /// `m'_n` for each recorded step, starting at 0.
    pub mprime: Vec<f64>,
    /// `values[i-1][t]` is `S_i(start + t)`.
    pub values: Vec<Vec<f64>>,
    pub start: usize,
    /// Initial spread `L` inherited from the trajectory.
    pub spread: f64,
}

impl LyapunovSeries {
    /// `S_i` over the trajectory, `1 <= i <= r`.
    pub fn s_values(&self, i: usize) -> &[f64] {
        &self.values[i - 1]
    }

    /// Reconstructs `z_i(n) = K^i (S_i(n) - S_{i-1}(n)) - s m'_n L`, the
    /// round-trip identity behind the series.
    pub fn reconstruct_z(&self, i: usize, order: usize) -> Vec<f64> {
        let k = self.k_const;
        let steps = self.values[0].len();
        (0..steps)
            .map(|t| {
                let s_i = self.values[i - 1][t];
                let s_prev = if i == 1 { 0.0 } else { self.values[i - 2][t] };
                k.powi(i as i32) * (s_i - s_prev) - order as f64 * self.mprime[t] * self.spread
            })
            .collect()
    }
}

/// Builds `S_1 ..= S_r` for a trajectory. `m_const` is the balanced-asymmetry
/// constant of the nominal chain; `mprime` the cumulative max-norm
/// perturbation sizes, one entry per recorded state, `None` meaning the
/// chain is its own nominal decomposition (`m' = 0`).
pub fn lyapunov_series(
    traj: &Trajectory,
    r: usize,
    m_const: f64,
    mprime: Option<&[f64]>,
) -> Result<LyapunovSeries> {
    let s = traj.order();
    if r == 0 || r > s {
        return Err(Error::InvalidParams(format!("r must be in 1..={s}, got {r}")));
    }
    if m_const.is_infinite() {
        return Err(Error::InfiniteM);
    }
    if !(m_const >= 1.0) {
        return Err(Error::InvalidParams(format!(
            "balanced-asymmetry constant must be >= 1, got {m_const}"
        )));
    }
    let steps = traj.states.len();
    let mprime: Vec<f64> = match mprime {
        Some(seq) => {
            if seq.len() != steps {
                return Err(Error::InvalidParams(format!(
                    "mprime must have one entry per state ({steps}), got {}",
                    seq.len()
                )));
            }
            if seq[0] != 0.0 {
                return Err(Error::InvalidParams("mprime must start at 0".into()));
            }
            if seq.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidParams("mprime must be non-decreasing".into()));
            }
            seq.to_vec()
        }
        None => vec![0.0; steps],
    };
    let k = 2.0 * m_const;
    let spread = traj.spread;
    let mut values = vec![vec![0.0; steps]; r];
    for t in 0..steps {
        let z = &traj.sorted[t].z;
        let shift = s as f64 * mprime[t] * spread;
        let mut acc = 0.0;
        let mut k_pow = 1.0;
        for i in 1..=r {
            k_pow /= k;
            acc += k_pow * (z[i - 1] + shift);
            values[i - 1][t] = acc;
        }
    }
    Ok(LyapunovSeries { r, k_const: k, mprime, values, start: traj.start, spread })
}

/// One step at which an increment bound failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityViolation {
    pub n: usize,
    pub r: usize,
    pub increment: f64,
    pub lower_bound: f64,
}

/// Per-step increments of `S_r` against their certified lower bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub r: usize,
    /// `S_r(n+1) - S_r(n)` per step.
    pub increments: Vec<f64>,
    /// Right-hand side of the increment bound per step.
    pub lower_bounds: Vec<f64>,
    pub violations: Vec<MonotonicityViolation>,
}

impl MonotonicityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks, for the deepest series row `r`, that every increment dominates
/// both the computed right-hand side and zero, within `tol`. `nominal` is
/// the balanced chain whose coefficients enter the bound; when the trajectory
/// was driven by the chain itself, pass that chain.
pub fn check_s_monotonic(
    series: &LyapunovSeries,
    traj: &Trajectory,
    nominal: &Chain,
    tol: f64,
) -> Result<MonotonicityReport> {
    let s = traj.order();
    if nominal.order() != s {
        return Err(Error::OrderMismatch { left: nominal.order(), right: s });
    }
    let r = series.r;
    let steps = traj.states.len() - 1;
    nominal.check_range(traj.start, traj.start + steps)?;
    let k = series.k_const;
    let k_pow_s = k.powi(-(s as i32));
    let s_r = series.s_values(r);
    let mut increments = Vec::with_capacity(steps);
    let mut lower_bounds = Vec::with_capacity(steps);
    let mut violations = Vec::new();
    for t in 0..steps {
        let n = traj.start + t;
        let b = nominal.matrix_at(n)?;
        let perm_now = &traj.sorted[t].perm;
        let perm_next = &traj.sorted[t + 1].perm;
        let z = &traj.sorted[t].z;
        // Cross mass from the k smallest (at n) into the top slots (at n+1),
        // accumulated per threshold k.
        let mut rhs = 0.0;
        for threshold in 1..r {
            let mut cross = 0.0;
            for i in threshold..s {
                for j in 0..threshold {
                    cross += b.get(perm_next[i], perm_now[j]);
                }
            }
            rhs += cross * (z[threshold] - z[threshold - 1]);
        }
        let lower = k_pow_s * rhs;
        let inc = s_r[t + 1] - s_r[t];
        increments.push(inc);
        lower_bounds.push(lower);
        if inc < lower - tol || inc < -tol {
            violations.push(MonotonicityViolation { n, r, increment: inc, lower_bound: lower });
        }
    }
    Ok(MonotonicityReport { r, increments, lower_bounds, violations })
}
