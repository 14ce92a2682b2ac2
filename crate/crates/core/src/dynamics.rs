//! Trajectory simulation and state clustering.
//!
//! States evolve by `X(n+1) = A_n X(n)`; every update is a convex
//! combination, so the smallest state is non-decreasing and the largest is
//! non-increasing along any trajectory. Sorted views track `z_i(n)`, the
//! i-th smallest state value, together with the permutation realizing it
//! (ties broken by ascending agent index, so the permutation is
//! deterministic).

use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;

/// One update step `A x`.
pub fn step(matrix: &StochasticMatrix, x: &[f64]) -> Result<Vec<f64>> {
    matrix.apply(x)
}

/// Sorted state values and the permutation behind them: `z[i] = x[perm[i]]`
/// with `z` non-decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SortedStateView {
    pub z: Vec<f64>,
    pub perm: Vec<usize>,
}

impl SortedStateView {
    pub fn from_state(x: &[f64]) -> Self {
        let mut perm: Vec<usize> = (0..x.len()).collect();
        perm.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("finite states").then(a.cmp(&b)));
        let z = perm.iter().map(|&i| x[i]).collect();
        Self { z, perm }
    }
}

/// Recorded trajectory `X(start ..= horizon)` with per-step sorted views.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub start: usize,
    /// `states[t]` is `X(start + t)`.
    pub states: Vec<Vec<f64>>,
    pub sorted: Vec<SortedStateView>,
    /// Initial spread `z_s(start) - z_1(start)`.
    pub spread: f64,
}

impl Trajectory {
    /// Wraps precomputed states (e.g. from an endogenous model run).
    pub fn from_states(start: usize, states: Vec<Vec<f64>>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidParams("trajectory needs at least one state".into()));
        }
        for state in &states {
            for (agent, &v) in state.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteState { agent, value: v });
                }
            }
        }
        let sorted: Vec<SortedStateView> =
            states.iter().map(|x| SortedStateView::from_state(x)).collect();
        let first = &sorted[0].z;
        let spread = first[first.len() - 1] - first[0];
        Ok(Self { start, states, sorted, spread })
    }

    pub fn order(&self) -> usize {
        self.states[0].len()
    }

    /// Last recorded time index.
    pub fn horizon(&self) -> usize {
        self.start + self.states.len() - 1
    }

    /// State at absolute time `n`.
    pub fn state_at(&self, n: usize) -> &[f64] {
        &self.states[n - self.start]
    }

    pub fn sorted_at(&self, n: usize) -> &SortedStateView {
        &self.sorted[n - self.start]
    }
}

/// Iterates the dynamics from `x0` at time `k` through `n_end`, recording
/// every state and its sorted view.
pub fn trajectory(chain: &Chain, x0: &[f64], k: usize, n_end: usize) -> Result<Trajectory> {
    if x0.len() != chain.order() {
        return Err(Error::OrderMismatch { left: chain.order(), right: x0.len() });
    }
    for (agent, &v) in x0.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteState { agent, value: v });
        }
    }
    if k >= n_end {
        return Err(Error::InvalidParams(format!(
            "trajectory needs k < horizon, got k = {k}, horizon = {n_end}"
        )));
    }
    chain.check_range(k, n_end)?;
    let mut states = Vec::with_capacity(n_end - k + 1);
    states.push(x0.to_vec());
    let mut x = x0.to_vec();
    for n in k..n_end {
        x = chain.matrix_at(n)?.apply(&x)?;
        states.push(x.clone());
    }
    Trajectory::from_states(k, states)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterVerdict {
    Consensus,
    MultipleConsensus,
    Unsettled,
}

/// Clusters over the final window of a trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterReport {
    pub partition: Vec<Vec<usize>>,
    pub verdict: ClusterVerdict,
    /// Final sorted state values, the estimates of the limits.
    pub z_estimates: Vec<f64>,
    /// Number of distinct limit candidates observed (= cluster count).
    pub accumulation_points: usize,
    pub window: usize,
    pub epsilon: f64,
}

/// Groups agents whose states stay within `epsilon` of each other throughout
/// the final `window` steps. Verdict: consensus for a single cluster,
/// multiple-consensus when every agent's own oscillation over the window is
/// below `epsilon`, unsettled otherwise.
pub fn detect_clusters(traj: &Trajectory, epsilon: f64, window: usize) -> Result<ClusterReport> {
    let len = traj.states.len();
    let window = window.clamp(1, len);
    let s = traj.order();
    let tail = &traj.states[len - window..];

    let mut parent: Vec<usize> = (0..s).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..s {
        for j in i + 1..s {
            let gap = tail.iter().map(|x| (x[i] - x[j]).abs()).fold(0.0, f64::max);
            if gap < epsilon {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut partition: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; s];
    for i in 0..s {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(idx) => partition[idx].push(i),
            None => {
                root_of[r] = Some(partition.len());
                partition.push(vec![i]);
            }
        }
    }

    let all_settled = (0..s).all(|i| {
        let lo = tail.iter().map(|x| x[i]).fold(f64::INFINITY, f64::min);
        let hi = tail.iter().map(|x| x[i]).fold(f64::NEG_INFINITY, f64::max);
        hi - lo < epsilon
    });
    let verdict = if partition.len() == 1 {
        ClusterVerdict::Consensus
    } else if all_settled {
        ClusterVerdict::MultipleConsensus
    } else {
        ClusterVerdict::Unsettled
    };
    let z_estimates = traj.sorted.last().expect("non-empty").z.clone();
    Ok(ClusterReport {
        accumulation_points: partition.len(),
        partition,
        verdict,
        z_estimates,
        window,
        epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<f64>]) -> StochasticMatrix {
        StochasticMatrix::validate(rows, 1e-12).unwrap()
    }

    #[test]
    fn step_examples() {
        let x = vec![0.0, 1.0];
        assert_eq!(step(&StochasticMatrix::identity(2), &x).unwrap(), x);
        assert_eq!(step(&m(&[vec![0.5, 0.5], vec![0.5, 0.5]]), &x).unwrap(), vec![0.5, 0.5]);
        assert_eq!(step(&m(&[vec![0.0, 1.0], vec![1.0, 0.0]]), &x).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn identity_chain_keeps_states_constant() {
        let chain = Chain::constant(StochasticMatrix::identity(3));
        let traj = trajectory(&chain, &[1.0, -2.0, 0.5], 0, 10).unwrap();
        assert!(traj.states.iter().all(|x| x == &vec![1.0, -2.0, 0.5]));
        assert_eq!(traj.spread, 3.0);
    }

    #[test]
    fn swap_chain_oscillates_with_fixed_sorted_values() {
        let chain = Chain::constant(m(&[vec![0.0, 1.0], vec![1.0, 0.0]]));
        let traj = trajectory(&chain, &[0.0, 1.0], 0, 9).unwrap();
        assert_eq!(traj.state_at(1), &[1.0, 0.0]);
        assert_eq!(traj.state_at(2), &[0.0, 1.0]);
        for view in &traj.sorted {
            assert_eq!(view.z, vec![0.0, 1.0]);
        }
        let report = detect_clusters(&traj, 1e-6, 4).unwrap();
        assert_eq!(report.verdict, ClusterVerdict::Unsettled);
    }

    #[test]
    fn inv_n_chain_reaches_consensus() {
        let chain = Chain::from_fn(2, 1, None, |n| {
            let p = 1.0 / n as f64;
            StochasticMatrix::validate(&[vec![p, 1.0 - p], vec![1.0 - p, p]], 1e-12)
        });
        let traj = trajectory(&chain, &[0.0, 1.0], 1, 500).unwrap();
        let last = traj.state_at(500);
        assert!((last[0] - last[1]).abs() < 1e-6);
        let report = detect_clusters(&traj, 1e-6, 50).unwrap();
        assert_eq!(report.verdict, ClusterVerdict::Consensus);
        assert_eq!(report.partition, vec![vec![0, 1]]);
        assert!((report.z_estimates[0] - report.z_estimates[1]).abs() < 1e-6);
    }

    #[test]
    fn sorted_view_breaks_ties_by_agent_index() {
        let view = SortedStateView::from_state(&[2.0, 1.0, 1.0, 0.0]);
        assert_eq!(view.perm, vec![3, 1, 2, 0]);
        assert_eq!(view.z, vec![0.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn non_finite_states_are_rejected() {
        let chain = Chain::constant(StochasticMatrix::identity(2));
        let err = trajectory(&chain, &[0.0, f64::NAN], 0, 3).unwrap_err();
        assert!(matches!(err, Error::NonFiniteState { agent: 1, .. }));
    }

    #[test]
    fn two_separated_blocks_settle_into_two_clusters() {
        let chain = Chain::constant(m(&[
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.5],
            vec![0.0, 0.0, 0.5, 0.5],
        ]));
        let traj = trajectory(&chain, &[0.0, 1.0, 10.0, 12.0], 0, 80).unwrap();
        let report = detect_clusters(&traj, 1e-9, 10).unwrap();
        assert_eq!(report.verdict, ClusterVerdict::MultipleConsensus);
        assert_eq!(report.partition, vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(report.accumulation_points, 2);
    }
}
