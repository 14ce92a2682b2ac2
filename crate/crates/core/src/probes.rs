//! Finite-horizon ergodicity and class-ergodicity probes.
//!
//! A chain is ergodic when every backward product converges to a matrix with
//! identical rows, and class-ergodic when the limit can be relabeled into a
//! block-diagonal matrix with identical rows per block. Finite products can
//! witness contraction but can never refute convergence, so the probes only
//! ever report `Ergodic`, `ClassErgodic`, or `UndecidedAtHorizon`; refutation
//! is the business of flow analysis.

use serde::{Deserialize, Serialize};

use crate::chain::{product_scan, Chain};
use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;

/// Default span / row-proximity tolerance for the probes.
pub const DEFAULT_EPS_SPAN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictKind {
    Ergodic,
    ClassErgodic,
    UndecidedAtHorizon,
}

/// Outcome of a probe from one start index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErgodicityVerdict {
    pub kind: VerdictKind,
    /// Partition of the agents `0..s`. A single block for an ergodic verdict,
    /// row-proximity clusters for a class-ergodic one, singletons when
    /// undecided (no claim is made).
    pub clusters: Vec<Vec<usize>>,
    /// Row span of `A(n, k)` for `n = k+1 ..= horizon`; non-increasing.
    pub span_curve: Vec<f64>,
    pub start: usize,
    pub horizon: usize,
    pub tolerance: f64,
}

fn singletons(s: usize) -> Vec<Vec<usize>> {
    (0..s).map(|i| vec![i]).collect()
}

/// Tracks the row span of backward products from start index `k` up to
/// `horizon`. The verdict applies to this start index only; sweep `k` for
/// unconditional claims.
pub fn ergodicity_probe(
    chain: &Chain,
    k: usize,
    horizon: usize,
    eps_span: f64,
) -> Result<ErgodicityVerdict> {
    let mut span_curve = Vec::with_capacity(horizon.saturating_sub(k));
    product_scan(chain, k, horizon, |_, p| span_curve.push(p.row_span()))?;
    let final_span = *span_curve.last().expect("non-empty scan");
    let s = chain.order();
    let (kind, clusters) = if final_span <= eps_span {
        (VerdictKind::Ergodic, vec![(0..s).collect()])
    } else {
        (VerdictKind::UndecidedAtHorizon, singletons(s))
    };
    Ok(ErgodicityVerdict { kind, clusters, span_curve, start: k, horizon, tolerance: eps_span })
}

/// Groups the rows of `m` by single linkage on the max-norm row distance at
/// tolerance `eps`, then audits transitivity: every pair inside a cluster
/// must itself be within `eps`. Near-threshold rows can chain; instead of
/// guessing, an audit failure is an error.
pub(crate) fn cluster_rows(m: &StochasticMatrix, eps: f64) -> Result<Vec<Vec<usize>>> {
    let s = m.order();
    let dist = |i: usize, j: usize| -> f64 {
        m.row(i)
            .iter()
            .zip(m.row(j))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    // Single linkage via union-find.
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
            if dist(i, j) < eps {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; s];
    for i in 0..s {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(idx) => clusters[idx].push(i),
            None => {
                root_of[r] = Some(clusters.len());
                clusters.push(vec![i]);
            }
        }
    }
    // Transitivity audit.
    for cluster in &clusters {
        for (a, &i) in cluster.iter().enumerate() {
            for &j in &cluster[a + 1..] {
                let gap = dist(i, j);
                if gap >= eps {
                    return Err(Error::InconsistentClustering { i, j, gap, tol: eps });
                }
            }
        }
    }
    Ok(clusters)
}

/// Clusters agents by row proximity of `A(horizon, k)` and verifies that the
/// product is block-diagonal up to `eps_cluster` after relabeling: entries
/// linking distinct clusters must each stay below the tolerance, and the row
/// span within each cluster must too.
pub fn class_ergodicity_probe(
    chain: &Chain,
    k: usize,
    horizon: usize,
    eps_cluster: f64,
) -> Result<ErgodicityVerdict> {
    let mut span_curve = Vec::with_capacity(horizon.saturating_sub(k));
    let product = product_scan(chain, k, horizon, |_, p| span_curve.push(p.row_span()))?;
    let s = chain.order();
    let clusters = cluster_rows(&product, eps_cluster)?;

    let mut cluster_of = vec![0usize; s];
    for (idx, cluster) in clusters.iter().enumerate() {
        for &i in cluster {
            cluster_of[i] = idx;
        }
    }
    let block_diagonal = (0..s).all(|i| {
        (0..s).all(|j| cluster_of[i] == cluster_of[j] || product.get(i, j) < eps_cluster)
    });
    let spans_ok = clusters.iter().all(|cluster| {
        (0..s).all(|j| {
            let lo = cluster.iter().map(|&i| product.get(i, j)).fold(f64::INFINITY, f64::min);
            let hi = cluster.iter().map(|&i| product.get(i, j)).fold(f64::NEG_INFINITY, f64::max);
            hi - lo < eps_cluster
        })
    });

    let (kind, clusters) = if block_diagonal && spans_ok {
        if clusters.len() == 1 {
            (VerdictKind::Ergodic, clusters)
        } else {
            (VerdictKind::ClassErgodic, clusters)
        }
    } else {
        (VerdictKind::UndecidedAtHorizon, singletons(s))
    };
    Ok(ErgodicityVerdict {
        kind,
        clusters,
        span_curve,
        start: k,
        horizon,
        tolerance: eps_cluster,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(rows: &[Vec<f64>]) -> Chain {
        Chain::constant(StochasticMatrix::validate(rows, 1e-12).unwrap())
    }

    #[test]
    fn rank_one_matrix_is_ergodic_in_one_step() {
        let chain = constant(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let v = ergodicity_probe(&chain, 0, 3, 1e-9).unwrap();
        assert_eq!(v.kind, VerdictKind::Ergodic);
        assert!(v.span_curve.iter().all(|&s| s <= 1e-15));
        assert_eq!(v.clusters, vec![vec![0, 1]]);
    }

    #[test]
    fn swap_chain_never_contracts() {
        let chain = constant(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let v = ergodicity_probe(&chain, 0, 100, 1e-9).unwrap();
        assert_eq!(v.kind, VerdictKind::UndecidedAtHorizon);
        assert!(v.span_curve.iter().all(|&s| s == 1.0));
    }

    #[test]
    fn inv_n_fixture_is_ergodic_from_start_one() {
        let chain = Chain::from_fn(2, 1, None, |n| {
            let p = 1.0 / n as f64;
            StochasticMatrix::validate(&[vec![p, 1.0 - p], vec![1.0 - p, p]], 1e-12)
        });
        let v = ergodicity_probe(&chain, 1, 200, 1e-6).unwrap();
        assert_eq!(v.kind, VerdictKind::Ergodic);
    }

    #[test]
    fn block_diagonal_chain_has_two_clusters() {
        let chain = constant(&[
            vec![0.5, 0.5, 0.0],
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        let v = class_ergodicity_probe(&chain, 0, 50, 1e-8).unwrap();
        assert_eq!(v.kind, VerdictKind::ClassErgodic);
        assert_eq!(v.clusters, vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn identity_chain_has_singleton_clusters() {
        let chain = Chain::constant(StochasticMatrix::identity(3));
        let v = class_ergodicity_probe(&chain, 0, 10, 1e-8).unwrap();
        assert_eq!(v.kind, VerdictKind::ClassErgodic);
        assert_eq!(v.clusters.len(), 3);
    }

    #[test]
    fn near_threshold_chains_raise_inconsistent_clustering() {
        // Rows 0-1 and 1-2 are within the tolerance but 0-2 is not.
        let chain = constant(&[
            vec![0.50, 0.50, 0.0],
            vec![0.42, 0.58, 0.0],
            vec![0.34, 0.66, 0.0],
        ]);
        let err = class_ergodicity_probe(&chain, 0, 1, 0.1).unwrap_err();
        assert!(matches!(err, Error::InconsistentClustering { .. }));
    }
}
