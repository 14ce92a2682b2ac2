//! Per-step and chain-level certificate constants.
//!
//! For a stochastic matrix `A` and equal-cardinality agent subsets `S1`,
//! `S2`, balanced asymmetry bounds the cross-flow ratio
//!
//! ```text
//! sum_{i in S1, j not in S2} a_ij  <=  M * sum_{i not in S1, j in S2} a_ij
//! ```
//!
//! uniformly over all pairs; the minimal such `M >= 1` is computed by
//! exhaustive enumeration. Cut balance is the specialization `S1 = S2`, and
//! self-confidence is a uniform lower bound on the diagonal. The l1 distance
//! between two chains accumulates per-step max-norm differences; a finite
//! total means the chains share their class-ergodicity behaviour.
//!
//! Conventions for the ratio: a pair whose left side is exactly zero imposes
//! no constraint, and a pair with positive left side but zero right side
//! forces `M = +inf`. Enumeration runs over every cardinality `1..=s`; at
//! `c = s` both sides are empty sums and the pair is vacuous.

use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;

/// Orders above this need an explicit budget override; enumeration is
/// O(4^s) subset pairs per step.
pub const DEFAULT_ENUMERATION_BUDGET: usize = 12;

/// Subset pair attaining the worst cross-flow ratio, agents 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Cut attaining the worst two-sided cut ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutWitness {
    pub cut: Vec<usize>,
    pub outflow: f64,
    pub inflow: f64,
}

fn mask_to_agents(mask: u32) -> Vec<usize> {
    (0..32).filter(|&b| mask & (1 << b) != 0).collect()
}

/// All bitmasks over `s` elements with exactly `c` bits set, ascending.
pub(crate) fn subsets_of_size(s: usize, c: usize) -> Vec<u32> {
    debug_assert!(s <= 31);
    (0..(1u32 << s)).filter(|m| m.count_ones() as usize == c).collect()
}

/// Sum of `a_ij` over `i` in `rows`, `j` in `cols`, masks 0-based,
/// ascending iteration order.
fn cross_sum(m: &StochasticMatrix, rows: u32, cols: u32) -> f64 {
    let s = m.order();
    let mut total = 0.0;
    for i in 0..s {
        if rows & (1 << i) == 0 {
            continue;
        }
        for j in 0..s {
            if cols & (1 << j) != 0 {
                total += m.get(i, j);
            }
        }
    }
    total
}

/// Minimal balanced-asymmetry constant of one matrix, with the witness pair
/// attaining it. Returns `+inf` when some constrained pair has zero reverse
/// flow; the result is clamped below at 1, the definitional floor.
pub fn balanced_asymmetry_constant(m: &StochasticMatrix) -> Result<(f64, Option<PairWitness>)> {
    balanced_asymmetry_constant_with_budget(m, DEFAULT_ENUMERATION_BUDGET)
}

pub fn balanced_asymmetry_constant_with_budget(
    m: &StochasticMatrix,
    budget: usize,
) -> Result<(f64, Option<PairWitness>)> {
    let s = m.order();
    if s > budget || s > 31 {
        return Err(Error::OrderTooLarge { order: s, budget: budget.min(31) });
    }
    let full = (1u32 << s) - 1;
    let mut best = 1.0_f64;
    let mut witness = None;
    for c in 1..=s {
        let masks = subsets_of_size(s, c);
        for &s1 in &masks {
            for &s2 in &masks {
                let lhs = cross_sum(m, s1, !s2 & full);
                if lhs == 0.0 {
                    continue;
                }
                let rhs = cross_sum(m, !s1 & full, s2);
                let ratio = if rhs == 0.0 { f64::INFINITY } else { lhs / rhs };
                if ratio > best {
                    best = ratio;
                    witness = Some(PairWitness {
                        s1: mask_to_agents(s1),
                        s2: mask_to_agents(s2),
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    Ok((best, witness))
}

/// Minimal cut-balance constant: for every nonempty proper cut `E`, both
/// `outflow <= K * inflow` and `inflow <= K * outflow` must hold, where
/// outflow/inflow are the sums across the cut in each direction.
pub fn cut_balance_constant(m: &StochasticMatrix) -> Result<(f64, Option<CutWitness>)> {
    cut_balance_constant_with_budget(m, DEFAULT_ENUMERATION_BUDGET)
}

pub fn cut_balance_constant_with_budget(
    m: &StochasticMatrix,
    budget: usize,
) -> Result<(f64, Option<CutWitness>)> {
    let s = m.order();
    if s > budget || s > 31 {
        return Err(Error::OrderTooLarge { order: s, budget: budget.min(31) });
    }
    let full = (1u32 << s) - 1;
    let mut best = 1.0_f64;
    let mut witness = None;
    for cut in 1..full {
        let outflow = cross_sum(m, cut, !cut & full);
        let inflow = cross_sum(m, !cut & full, cut);
        let ratio = match (outflow == 0.0, inflow == 0.0) {
            (true, true) => continue,
            (false, true) | (true, false) => f64::INFINITY,
            (false, false) => (outflow / inflow).max(inflow / outflow),
        };
        if ratio > best {
            best = ratio;
            witness = Some(CutWitness { cut: mask_to_agents(cut), outflow, inflow });
        }
    }
    Ok((best, witness))
}

/// Infimum of the diagonal over the chain segment `[start, n_end)`.
pub fn self_confidence(chain: &Chain, n_end: usize) -> Result<f64> {
    chain.check_range(chain.start(), n_end)?;
    let mut delta = f64::INFINITY;
    for n in chain.start()..n_end {
        let m = chain.matrix_at(n)?;
        for i in 0..m.order() {
            delta = delta.min(m.get(i, i));
        }
    }
    Ok(delta)
}

/// True iff every column sums to 1 within `tol`.
pub fn is_doubly_stochastic(m: &StochasticMatrix, tol: f64) -> bool {
    m.column_sums().iter().all(|&c| (c - 1.0).abs() <= tol)
}

/// Certificate constants of one step of a chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepCertificate {
    pub step: usize,
    /// Minimal balanced-asymmetry constant at this step (`+inf` possible).
    pub m: f64,
    pub m_witness: Option<PairWitness>,
    /// Minimal cut-balance constant at this step (`+inf` possible).
    pub k: f64,
    pub k_witness: Option<CutWitness>,
    pub min_diagonal: f64,
    pub doubly_stochastic: bool,
}

/// Chain-level certificate report over a queried horizon. The chain-level
/// constants are suprema over that horizon only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateReport {
    pub start: usize,
    pub horizon: usize,
    pub steps: Vec<StepCertificate>,
    /// sup over steps of the per-step balanced-asymmetry constants.
    pub chain_m: f64,
    /// sup over steps of the per-step cut-balance constants.
    pub chain_k: f64,
    /// inf over steps and agents of the diagonal.
    pub delta: f64,
    pub all_doubly_stochastic: bool,
}

pub fn certify_chain(chain: &Chain, n_end: usize) -> Result<CertificateReport> {
    certify_chain_with_budget(chain, n_end, DEFAULT_ENUMERATION_BUDGET)
}

pub fn certify_chain_with_budget(
    chain: &Chain,
    n_end: usize,
    budget: usize,
) -> Result<CertificateReport> {
    let start = chain.start();
    chain.check_range(start, n_end)?;
    let mut steps = Vec::with_capacity(n_end - start);
    let mut chain_m = 1.0_f64;
    let mut chain_k = 1.0_f64;
    let mut delta = f64::INFINITY;
    let mut all_ds = true;
    for n in start..n_end {
        let a = chain.matrix_at(n)?;
        let (m, m_witness) = balanced_asymmetry_constant_with_budget(&a, budget)?;
        let (k, k_witness) = cut_balance_constant_with_budget(&a, budget)?;
        let min_diagonal = (0..a.order()).map(|i| a.get(i, i)).fold(f64::INFINITY, f64::min);
        let doubly_stochastic = is_doubly_stochastic(&a, 1e-9);
        chain_m = chain_m.max(m);
        chain_k = chain_k.max(k);
        delta = delta.min(min_diagonal);
        all_ds &= doubly_stochastic;
        steps.push(StepCertificate {
            step: n,
            m,
            m_witness,
            k,
            k_witness,
            min_diagonal,
            doubly_stochastic,
        });
    }
    Ok(CertificateReport {
        start,
        horizon: n_end,
        steps,
        chain_m,
        chain_k,
        delta,
        all_doubly_stochastic: all_ds,
    })
}

/// Per-step max-norm differences between two chains and their running sum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct L1Distance {
    pub start: usize,
    pub horizon: usize,
    /// `m_n` for `n` in `[start, horizon)`.
    pub per_step: Vec<f64>,
    /// `m'_n = sum_{k < n} m_k` for `n` in `[start, horizon]`; begins at 0,
    /// non-decreasing, one entry longer than `per_step`.
    pub cumulative: Vec<f64>,
}

impl L1Distance {
    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("cumulative is never empty")
    }
}

/// Accumulates `max-norm(A_n - B_n)` over `[start, n_end)`. Both chains must
/// share order and start index.
pub fn l1_distance(a: &Chain, b: &Chain, n_end: usize) -> Result<L1Distance> {
    if a.order() != b.order() {
        return Err(Error::OrderMismatch { left: a.order(), right: b.order() });
    }
    if a.start() != b.start() {
        return Err(Error::StartMismatch { left: a.start(), right: b.start() });
    }
    let start = a.start();
    a.check_range(start, n_end)?;
    b.check_range(start, n_end)?;
    let mut per_step = Vec::with_capacity(n_end - start);
    let mut cumulative = Vec::with_capacity(n_end - start + 1);
    cumulative.push(0.0);
    let mut running = 0.0;
    for n in start..n_end {
        let step = a.matrix_at(n)?.max_norm_diff(&b.matrix_at(n)?)?;
        per_step.push(step);
        running += step;
        cumulative.push(running);
    }
    Ok(L1Distance { start, horizon: n_end, per_step, cumulative })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<f64>]) -> StochasticMatrix {
        StochasticMatrix::validate(rows, 1e-12).unwrap()
    }

    #[test]
    fn swap_matrix_has_unit_constant() {
        let (ba, _) = balanced_asymmetry_constant(&m(&[vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap();
        assert_eq!(ba, 1.0);
    }

    #[test]
    fn non_balanced_fixture_is_infinite_with_witness() {
        let (ba, w) = balanced_asymmetry_constant(&m(&[vec![0.5, 0.5], vec![1.0, 0.0]])).unwrap();
        assert!(ba.is_infinite());
        let w = w.unwrap();
        assert_eq!(w.s1, vec![0]);
        assert_eq!(w.s2, vec![1]);
    }

    #[test]
    fn symmetric_matrix_is_cut_balanced_with_one() {
        let (k, _) = cut_balance_constant(&m(&[
            vec![0.8, 0.1, 0.1],
            vec![0.1, 0.8, 0.1],
            vec![0.1, 0.1, 0.8],
        ]))
        .unwrap();
        assert_eq!(k, 1.0);
    }

    #[test]
    fn non_balanced_fixture_cut_constant_is_two() {
        let (k, w) = cut_balance_constant(&m(&[vec![0.5, 0.5], vec![1.0, 0.0]])).unwrap();
        assert_eq!(k, 2.0);
        // The first cut attaining the max ratio is E = {agent 0}:
        // outflow 0.5 against inflow 1.0 gives max(0.5, 2.0) = 2.
        assert_eq!(w.unwrap().cut, vec![0]);
    }

    #[test]
    fn self_confidence_extremes() {
        let identity = Chain::constant(StochasticMatrix::identity(3));
        assert_eq!(self_confidence(&identity, 10).unwrap(), 1.0);
        let swap = Chain::constant(m(&[vec![0.0, 1.0], vec![1.0, 0.0]]));
        assert_eq!(self_confidence(&swap, 10).unwrap(), 0.0);
    }

    #[test]
    fn doubly_stochastic_checks() {
        assert!(is_doubly_stochastic(&m(&[vec![0.5, 0.5], vec![0.5, 0.5]]), 1e-12));
        assert!(!is_doubly_stochastic(&m(&[vec![0.5, 0.5], vec![1.0, 0.0]]), 1e-12));
        // Convex combination of permutation matrices.
        let p1 = StochasticMatrix::identity(3);
        let p2 = StochasticMatrix::permutation(&[1, 2, 0]).unwrap();
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| 0.3 * p1.get(i, j) + 0.7 * p2.get(i, j)).collect())
            .collect();
        assert!(is_doubly_stochastic(&m(&rows), 1e-12));
    }

    #[test]
    fn l1_distance_of_chain_with_itself_is_zero() {
        let chain = Chain::constant(m(&[vec![0.5, 0.5], vec![1.0, 0.0]]));
        let d = l1_distance(&chain, &chain, 20).unwrap();
        assert!(d.per_step.iter().all(|&x| x == 0.0));
        assert_eq!(d.total(), 0.0);
    }

    #[test]
    fn geometric_diagonal_shift_has_finite_total() {
        let base = m(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let b = Chain::constant(base);
        let a = Chain::from_fn(2, 0, None, |n| {
            let d = 0.25 * 0.5_f64.powi(n as i32);
            StochasticMatrix::validate(
                &[vec![0.5 + d, 0.5 - d], vec![0.5 - d, 0.5 + d]],
                1e-12,
            )
        });
        let n = 30;
        let dist = l1_distance(&a, &b, n).unwrap();
        // Geometric series oracle: sum of 0.25 * 2^-k.
        let expected: f64 = (0..n).map(|k| 0.25 * 0.5_f64.powi(k as i32)).sum();
        assert!((dist.total() - expected).abs() < 1e-12);
        assert!((dist.total() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn constant_gap_grows_linearly() {
        let a = Chain::constant(m(&[vec![0.6, 0.4], vec![0.4, 0.6]]));
        let b = Chain::constant(m(&[vec![0.5, 0.5], vec![0.5, 0.5]]));
        let d = l1_distance(&a, &b, 50).unwrap();
        assert!((d.total() - 0.1 * 50.0).abs() < 1e-12);
        // Non-decreasing cumulative with a strict trend.
        assert!(d.cumulative.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn order_budget_is_enforced() {
        let big = StochasticMatrix::identity(13);
        assert!(matches!(
            balanced_asymmetry_constant(&big),
            Err(Error::OrderTooLarge { order: 13, .. })
        ));
        assert!(balanced_asymmetry_constant_with_budget(&big, 13).is_ok());
    }

    #[test]
    fn subsets_enumeration_is_complete_and_sorted() {
        let subs = subsets_of_size(5, 2);
        assert_eq!(subs.len(), 10);
        assert!(subs.windows(2).all(|w| w[0] < w[1]));
        assert!(subs.iter().all(|m| m.count_ones() == 2));
        assert_eq!(subsets_of_size(4, 4), vec![0b1111]);
    }
}
