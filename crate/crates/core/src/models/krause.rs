//! Finite-range endogenous averaging.
//!
//! Interaction weights renormalize a non-increasing kernel of the pairwise
//! distance,
//!
//! ```text
//! a_ij(n) = f(|X_i - X_j|) / sum_k f(|X_i - X_k|),
//! ```
//!
//! with the sum running over all agents including `i` itself, so the
//! denominator is at least `f(0) > 0` and the diagonal weight is at least
//! `1/s` for an indicator kernel. The kernel vanishes at the interaction
//! radius, so groups farther apart than the radius never couple.

use std::sync::Arc;

use crate::chain::Chain;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;

/// Non-increasing kernel on nonnegative reals, vanishing at its radius.
#[derive(Clone)]
pub enum KrauseKernel {
    /// `f(y) = 1` for `y < radius`, 0 beyond: the classic bounded-confidence
    /// weight.
    Indicator { radius: f64 },
    /// `f(y) = max(0, 1 - y/radius)`: linearly fading influence.
    Tent { radius: f64 },
    /// Arbitrary kernel; the caller guarantees it is non-increasing,
    /// nonnegative, positive at 0, and zero from `radius` on.
    Custom { radius: f64, f: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

impl std::fmt::Debug for KrauseKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Indicator { radius } => write!(f, "Indicator {{ radius: {radius} }}"),
            Self::Tent { radius } => write!(f, "Tent {{ radius: {radius} }}"),
            Self::Custom { radius, .. } => write!(f, "Custom {{ radius: {radius} }}"),
        }
    }
}

impl KrauseKernel {
    pub fn radius(&self) -> f64 {
        match self {
            Self::Indicator { radius } | Self::Tent { radius } | Self::Custom { radius, .. } => {
                *radius
            }
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Self::Indicator { radius } => {
                if y < *radius {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Tent { radius } => (1.0 - y / radius).max(0.0),
            Self::Custom { f, .. } => f(y),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KrauseParams {
    pub kernel: KrauseKernel,
    pub x0: Vec<f64>,
}

/// Runs the coupled system for `horizon` steps, recording both the realized
/// interaction matrices (replayable as a static chain) and the trajectory.
pub fn krause_chain(params: &KrauseParams, horizon: usize) -> Result<(Chain, Trajectory)> {
    if params.x0.is_empty() {
        return Err(Error::InvalidParams("at least one agent is required".into()));
    }
    if !(params.kernel.radius() > 0.0) {
        return Err(Error::InvalidParams("kernel radius must be positive".into()));
    }
    if !(params.kernel.eval(0.0) > 0.0) {
        return Err(Error::InvalidParams("kernel must be positive at 0".into()));
    }
    if horizon == 0 {
        return Err(Error::InvalidParams("horizon must be at least 1".into()));
    }
    let s = params.x0.len();
    let mut x = params.x0.clone();
    for (agent, &v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteState { agent, value: v });
        }
    }
    let mut matrices = Vec::with_capacity(horizon);
    let mut states = Vec::with_capacity(horizon + 1);
    states.push(x.clone());
    for _ in 0..horizon {
        let mut rows = Vec::with_capacity(s);
        for i in 0..s {
            let weights: Vec<f64> =
                (0..s).map(|k| params.kernel.eval((x[i] - x[k]).abs())).collect();
            let denom: f64 = weights.iter().sum();
            // The self term keeps the denominator positive; a vanishing sum
            // would mean f(0) = 0, rejected above.
            if !(denom > 0.0) {
                return Err(Error::ZeroDenominator { agent: i });
            }
            rows.push(weights.iter().map(|w| w / denom).collect());
        }
        let a = StochasticMatrix::validate(&rows, 1e-9)?;
        x = a.apply(&x)?;
        states.push(x.clone());
        matrices.push(a);
    }
    let chain = Chain::from_matrices(matrices)?.with_label("krause");
    let traj = Trajectory::from_states(0, states)?;
    Ok((chain, traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::{cut_balance_constant, self_confidence};
    use crate::graph::{islands, unbounded_graph, DivergenceRule};

    #[test]
    fn separated_groups_stay_block_diagonal() {
        let r = 1.0;
        let params = KrauseParams {
            kernel: KrauseKernel::Indicator { radius: r },
            x0: vec![0.0, 0.1, 3.0 * r, 3.0 * r + 0.1],
        };
        let (chain, traj) = krause_chain(&params, 50).unwrap();
        for n in 0..50 {
            let a = chain.matrix_at(n).unwrap();
            for i in 0..2 {
                for j in 2..4 {
                    assert_eq!(a.get(i, j), 0.0);
                    assert_eq!(a.get(j, i), 0.0);
                }
            }
        }
        let g = unbounded_graph(&chain, 50, DivergenceRule::default()).unwrap();
        assert_eq!(islands(&g).islands.len(), 2);
        // Within-group consensus.
        let last = traj.state_at(50);
        assert!((last[0] - last[1]).abs() < 1e-9);
        assert!((last[2] - last[3]).abs() < 1e-9);
        assert!(last[2] - last[0] > r);
    }

    #[test]
    fn indicator_kernel_within_radius_is_self_confident_and_cut_balanced() {
        let params = KrauseParams {
            kernel: KrauseKernel::Indicator { radius: 10.0 },
            x0: vec![0.0, 1.0, 2.0, 3.0],
        };
        let s = params.x0.len() as f64;
        let (chain, _) = krause_chain(&params, 20).unwrap();
        let delta = self_confidence(&chain, 20).unwrap();
        assert!(delta >= 1.0 / s - 1e-12);
        for n in 0..20 {
            let (k, _) = cut_balance_constant(&chain.matrix_at(n).unwrap()).unwrap();
            assert!(k <= s + 1e-9);
        }
    }

    #[test]
    fn single_agent_chain_is_identity() {
        let params =
            KrauseParams { kernel: KrauseKernel::Indicator { radius: 1.0 }, x0: vec![0.7] };
        let (chain, _) = krause_chain(&params, 5).unwrap();
        assert_eq!(chain.matrix_at(0).unwrap(), StochasticMatrix::identity(1));
    }
}
