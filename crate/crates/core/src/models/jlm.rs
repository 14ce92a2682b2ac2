//! Radius-graph neighbor averaging on the consensus state itself.
//!
//! Each agent averages uniformly over itself and the agents currently
//! within `radius`:
//!
//! ```text
//! a_ij(n) = 1 / (1 + |N_i(n)|)  for j in N_i(n) or j = i, else 0,
//! ```
//!
//! so the diagonal weight is at least `1/s`. With no neighbors in range the
//! update degenerates to the identity.

use crate::chain::Chain;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;

#[derive(Debug, Clone)]
pub struct JlmParams {
    pub radius: f64,
    pub x0: Vec<f64>,
}

/// Runs the coupled neighbor-averaging system for `horizon` steps, recording
/// the realized matrices and the trajectory.
pub fn jlm_chain(params: &JlmParams, horizon: usize) -> Result<(Chain, Trajectory)> {
    if params.x0.is_empty() {
        return Err(Error::InvalidParams("at least one agent is required".into()));
    }
    if !(params.radius > 0.0) {
        return Err(Error::InvalidParams("radius must be positive".into()));
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
            let neighbors: Vec<usize> = (0..s)
                .filter(|&j| j != i && (x[i] - x[j]).abs() < params.radius)
                .collect();
            let weight = 1.0 / (1.0 + neighbors.len() as f64);
            let mut row = vec![0.0; s];
            row[i] = weight;
            for j in neighbors {
                row[j] = weight;
            }
            rows.push(row);
        }
        let a = StochasticMatrix::validate(&rows, 1e-9)?;
        x = a.apply(&x)?;
        states.push(x.clone());
        matrices.push(a);
    }
    let chain = Chain::from_matrices(matrices)?.with_label("jlm");
    let traj = Trajectory::from_states(0, states)?;
    Ok((chain, traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{islands, unbounded_graph, DivergenceRule};
    use crate::probes::{ergodicity_probe, VerdictKind};

    #[test]
    fn mutual_neighbors_average_uniformly_and_reach_consensus() {
        let params = JlmParams { radius: 10.0, x0: vec![0.0, 1.0, 2.0] };
        let (chain, traj) = jlm_chain(&params, 40).unwrap();
        let a0 = chain.matrix_at(0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((a0.get(i, j) - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        let v = ergodicity_probe(&chain, 0, 40, 1e-9).unwrap();
        assert_eq!(v.kind, VerdictKind::Ergodic);
        let last = traj.state_at(40);
        assert!((last[0] - last[2]).abs() < 1e-12);
    }

    #[test]
    fn isolated_agents_produce_the_identity_chain() {
        let params = JlmParams { radius: 0.5, x0: vec![0.0, 10.0, 20.0] };
        let (chain, _) = jlm_chain(&params, 5).unwrap();
        for n in 0..5 {
            assert_eq!(chain.matrix_at(n).unwrap(), StochasticMatrix::identity(3));
        }
    }

    #[test]
    fn two_separated_cliques_form_two_islands_and_two_clusters() {
        let params = JlmParams { radius: 1.0, x0: vec![0.0, 0.5, 10.0, 10.5] };
        let (chain, traj) = jlm_chain(&params, 60).unwrap();
        let g = unbounded_graph(&chain, 60, DivergenceRule::default()).unwrap();
        let p = islands(&g);
        assert_eq!(p.islands, vec![vec![0, 1], vec![2, 3]]);
        let last = traj.state_at(60);
        assert!((last[0] - last[1]).abs() < 1e-12);
        assert!((last[2] - last[3]).abs() < 1e-12);
        assert!(last[2] - last[0] > 5.0);
    }
}
