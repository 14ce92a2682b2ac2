//! Finite-horizon minimal-flow analysis over subset sequences.
//!
//! For a sequence of equal-cardinality agent subsets `T(start), ..., T(N)`
//! the cumulative flow sums, per step `n`, either both cross terms
//!
//! ```text
//! full:    sum_{i in T(n+1), j not in T(n)} a_ij(n)
//!        + sum_{i not in T(n+1), j in T(n)} a_ij(n)
//! ```
//!
//! or the single reduced term
//!
//! ```text
//! reduced: sum_{i not in T(n+1), j in T(n)} a_ij(n)
//! ```
//!
//! The absolute infinite flow property asks that this total diverge along
//! every subset sequence, so the object of interest is the minimum over all
//! sequences, computed exactly by dynamic programming over c-subsets per
//! time step. A divergent minimum at every cardinality is the finite-horizon
//! signature of the property; a stalling minimum yields a concrete witness
//! sequence that bounds the flow up to the horizon.
//!
//! The reduced form is the faithful one-term variant valid for chains close
//! to balanced asymmetric; per transition it never exceeds the full form.

use serde::{Deserialize, Serialize};

use crate::certificates::subsets_of_size;
use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;

/// Hard cap on the order for the subset DP; the state space is C(s, c).
pub const MAX_FLOW_ORDER: usize = 20;

/// Enumeration budget for the brute-force oracle, in subset sequences.
pub const BRUTE_FORCE_BUDGET: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowVariant {
    Full,
    Reduced,
}

/// Classifier thresholds for [`aif_profile`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FlowParams {
    /// Minimum final flow mass for a divergent-trend call.
    pub theta_flow: f64,
    /// Minimum tail slope (flow per step over the last quarter) for a
    /// divergent-trend call.
    pub sigma_flow: f64,
    /// Tail increase at or below this counts as stabilized.
    pub stabilization_tol: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self { theta_flow: 1.0, sigma_flow: 1e-6, stabilization_tol: 1e-12 }
    }
}

/// Equal-cardinality subset sequence, agents 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetSequence {
    pub cardinality: usize,
    /// One set per time index `start..=horizon`.
    pub sets: Vec<Vec<usize>>,
}

/// Minimal-flow result for one cardinality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinFlow {
    pub cardinality: usize,
    /// `F_c(n)` for `n = start..=horizon`; starts at 0, non-decreasing.
    pub curve: Vec<f64>,
    /// `F_c(horizon)`.
    pub value: f64,
    /// A minimizing sequence; ties broken toward the lexicographically
    /// smallest subset encoding.
    pub witness: SubsetSequence,
    /// Set when the property is vacuously satisfied (`s = 1` or `c = s`).
    pub trivial: bool,
}

/// Transition cost from `prev = T(n)` to `next = T(n+1)` under `a = A_n`.
/// Shared verbatim by the DP and the brute-force oracle so the two agree
/// exactly, not merely within rounding.
pub fn transition_cost(a: &StochasticMatrix, prev: u32, next: u32, variant: FlowVariant) -> f64 {
    let s = a.order();
    let mut cost = 0.0;
    if variant == FlowVariant::Full {
        // sum over i in next, j outside prev
        for i in 0..s {
            if next & (1 << i) == 0 {
                continue;
            }
            for j in 0..s {
                if prev & (1 << j) == 0 {
                    cost += a.get(i, j);
                }
            }
        }
    }
    // sum over i outside next, j in prev
    for i in 0..s {
        if next & (1 << i) != 0 {
            continue;
        }
        for j in 0..s {
            if prev & (1 << j) != 0 {
                cost += a.get(i, j);
            }
        }
    }
    cost
}

fn check_flow_order(s: usize) -> Result<()> {
    if s > MAX_FLOW_ORDER {
        return Err(Error::OrderTooLarge { order: s, budget: MAX_FLOW_ORDER });
    }
    Ok(())
}

fn trivial_flow(chain: &Chain, n_end: usize, c: usize) -> MinFlow {
    let steps = n_end - chain.start();
    let set: Vec<usize> = (0..chain.order()).take(c.max(1)).collect();
    MinFlow {
        cardinality: c,
        curve: vec![0.0; steps + 1],
        value: 0.0,
        witness: SubsetSequence { cardinality: c, sets: vec![set; steps + 1] },
        trivial: true,
    }
}

/// Minimal cumulative flow over all subset sequences of cardinality `c`,
/// with one witness sequence. For `s = 1` or `c = s` the property is
/// vacuous and a zero-cost trivial result is returned.
pub fn min_flow_dp(
    chain: &Chain,
    n_end: usize,
    c: usize,
    variant: FlowVariant,
) -> Result<MinFlow> {
    let s = chain.order();
    check_flow_order(s)?;
    if c == 0 || c > s {
        return Err(Error::InvalidParams(format!(
            "cardinality must be in 1..={s}, got {c}"
        )));
    }
    let start = chain.start();
    chain.check_range(start, n_end)?;
    if s == 1 || c == s {
        return Ok(trivial_flow(chain, n_end, c));
    }
    let states = subsets_of_size(s, c);
    let steps = n_end - start;

    // Forward sweep: cost[q] = minimal flow of a sequence ending in states[q]
    // at the current time. The per-path accumulation order matches the
    // brute-force oracle exactly.
    let mut cost = vec![0.0_f64; states.len()];
    let mut curve = Vec::with_capacity(steps + 1);
    curve.push(0.0);
    for n in start..n_end {
        let a = chain.matrix_at(n)?;
        let mut next_cost = vec![f64::INFINITY; states.len()];
        for (p, &prev_mask) in states.iter().enumerate() {
            let base = cost[p];
            for (q, &next_mask) in states.iter().enumerate() {
                let total = base + transition_cost(&a, prev_mask, next_mask, variant);
                if total < next_cost[q] {
                    next_cost[q] = total;
                }
            }
        }
        cost = next_cost;
        curve.push(cost.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let value = *curve.last().expect("curve is never empty");

    // Backward cost-to-go pass to extract the lexicographically smallest
    // minimizing sequence. Strictly-smaller updates and ascending state
    // order make the walk deterministic.
    let mut togo = vec![vec![0.0_f64; states.len()]; steps + 1];
    for t in (0..steps).rev() {
        let a = chain.matrix_at(start + t)?;
        for (p, &prev_mask) in states.iter().enumerate() {
            let mut best = f64::INFINITY;
            for (q, &next_mask) in states.iter().enumerate() {
                let total = transition_cost(&a, prev_mask, next_mask, variant) + togo[t + 1][q];
                if total < best {
                    best = total;
                }
            }
            togo[t][p] = best;
        }
    }
    let mut sets = Vec::with_capacity(steps + 1);
    let start_value = togo[0].iter().copied().fold(f64::INFINITY, f64::min);
    let mut current = togo[0].iter().position(|&v| v == start_value).expect("state exists");
    sets.push(mask_to_agents(states[current]));
    for t in 0..steps {
        let a = chain.matrix_at(start + t)?;
        let target = togo[t][current];
        let prev_mask = states[current];
        let next = states
            .iter()
            .enumerate()
            .position(|(q, &next_mask)| {
                transition_cost(&a, prev_mask, next_mask, variant) + togo[t + 1][q] == target
            })
            .expect("an optimal successor exists");
        current = next;
        sets.push(mask_to_agents(states[current]));
    }

    Ok(MinFlow {
        cardinality: c,
        curve,
        value,
        witness: SubsetSequence { cardinality: c, sets },
        trivial: false,
    })
}

fn mask_to_agents(mask: u32) -> Vec<usize> {
    (0..32).filter(|&b| mask & (1 << b) != 0).collect()
}

/// Exhaustive enumeration of all subset sequences; oracle for
/// [`min_flow_dp`]. Shares `transition_cost` and left-to-right accumulation
/// with the DP, so agreement is exact.
pub fn brute_force_min_flow(
    chain: &Chain,
    n_end: usize,
    c: usize,
    variant: FlowVariant,
) -> Result<f64> {
    let s = chain.order();
    check_flow_order(s)?;
    if c == 0 || c > s {
        return Err(Error::InvalidParams(format!(
            "cardinality must be in 1..={s}, got {c}"
        )));
    }
    let start = chain.start();
    chain.check_range(start, n_end)?;
    if s == 1 || c == s {
        return Ok(0.0);
    }
    let states = subsets_of_size(s, c);
    let steps = n_end - start;
    let required = (states.len() as f64).powi(steps as i32 + 1);
    if required > BRUTE_FORCE_BUDGET {
        return Err(Error::BudgetExceeded { required, budget: BRUTE_FORCE_BUDGET });
    }
    let matrices: Vec<StochasticMatrix> =
        (start..n_end).map(|n| chain.matrix_at(n)).collect::<Result<_>>()?;

    // Odometer over state indices for T(start..=N), ascending lexicographic.
    let mut seq = vec![0usize; steps + 1];
    let mut best = f64::INFINITY;
    loop {
        let mut total = 0.0;
        for t in 0..steps {
            total +=
                transition_cost(&matrices[t], states[seq[t]], states[seq[t + 1]], variant);
        }
        if total < best {
            best = total;
        }
        // Advance odometer.
        let mut pos = steps + 1;
        for i in (0..steps + 1).rev() {
            if seq[i] + 1 < states.len() {
                seq[i] += 1;
                for x in seq[i + 1..].iter_mut() {
                    *x = 0;
                }
                pos = i;
                break;
            }
        }
        if pos == steps + 1 {
            break;
        }
    }
    Ok(best)
}

/// Verdict of the flow classifier at a finite horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FlowVerdict {
    /// Minimal flow keeps growing: the finite-horizon signature of absolute
    /// infinite flow.
    DivergentTrend { final_value: f64, tail_slope: f64 },
    /// Minimal flow stabilized; the witness cardinality's sequence certifies
    /// failure of the property up to the horizon.
    BoundedFlowWitness { final_value: f64, cardinality: usize },
    /// Neither stabilized nor above the divergence thresholds.
    Inconclusive { final_value: f64, tail_increase: f64 },
    /// Order 1: the property holds vacuously.
    TriviallySatisfied,
}

/// Flow curves for every cardinality plus the pointwise minimum and its
/// trend classification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowProfile {
    pub variant: FlowVariant,
    pub start: usize,
    pub horizon: usize,
    pub per_cardinality: Vec<MinFlow>,
    /// Pointwise minimum over cardinalities of `F_c(n)`, `n = start..=horizon`.
    pub min_over_c: Vec<f64>,
    pub verdict: FlowVerdict,
}

pub fn aif_profile(
    chain: &Chain,
    n_end: usize,
    variant: FlowVariant,
    params: &FlowParams,
) -> Result<FlowProfile> {
    let s = chain.order();
    check_flow_order(s)?;
    let start = chain.start();
    chain.check_range(start, n_end)?;
    let steps = n_end - start;
    if s == 1 {
        return Ok(FlowProfile {
            variant,
            start,
            horizon: n_end,
            per_cardinality: Vec::new(),
            min_over_c: vec![0.0; steps + 1],
            verdict: FlowVerdict::TriviallySatisfied,
        });
    }
    let per_cardinality: Vec<MinFlow> =
        (1..s).map(|c| min_flow_dp(chain, n_end, c, variant)).collect::<Result<_>>()?;
    let mut min_over_c = vec![f64::INFINITY; steps + 1];
    for flow in &per_cardinality {
        for (m, &v) in min_over_c.iter_mut().zip(&flow.curve) {
            *m = m.min(v);
        }
    }
    let final_value = *min_over_c.last().expect("non-empty");
    let tail = (steps / 4).max(1).min(steps);
    let tail_increase = final_value - min_over_c[steps - tail];
    let tail_slope = tail_increase / tail as f64;
    let verdict = if tail_increase <= params.stabilization_tol {
        let cardinality = per_cardinality
            .iter()
            .min_by(|a, b| a.value.partial_cmp(&b.value).expect("finite"))
            .expect("non-empty")
            .cardinality;
        FlowVerdict::BoundedFlowWitness { final_value, cardinality }
    } else if final_value >= params.theta_flow && tail_slope > params.sigma_flow {
        FlowVerdict::DivergentTrend { final_value, tail_slope }
    } else {
        FlowVerdict::Inconclusive { final_value, tail_increase }
    };
    Ok(FlowProfile { variant, start, horizon: n_end, per_cardinality, min_over_c, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(rows: &[Vec<f64>]) -> Chain {
        Chain::constant(StochasticMatrix::validate(rows, 1e-12).unwrap())
    }

    fn swap_chain() -> Chain {
        constant(&[vec![0.0, 1.0], vec![1.0, 0.0]])
    }

    #[test]
    fn identity_chain_has_zero_flow_with_constant_witness() {
        let chain = Chain::constant(StochasticMatrix::identity(3));
        for c in 1..=2 {
            let flow = min_flow_dp(&chain, 6, c, FlowVariant::Reduced).unwrap();
            assert_eq!(flow.value, 0.0);
            let first = &flow.witness.sets[0];
            assert!(flow.witness.sets.iter().all(|s| s == first));
        }
    }

    #[test]
    fn swap_chain_alternating_witness_costs_nothing() {
        let flow = min_flow_dp(&swap_chain(), 5, 1, FlowVariant::Full).unwrap();
        assert_eq!(flow.value, 0.0);
        let expected: Vec<Vec<usize>> =
            (0..=5).map(|t| if t % 2 == 0 { vec![0] } else { vec![1] }).collect();
        assert_eq!(flow.witness.sets, expected);
        let brute = brute_force_min_flow(&swap_chain(), 5, 1, FlowVariant::Full).unwrap();
        assert_eq!(flow.value, brute);
    }

    #[test]
    fn uniform_averaging_chain_pays_one_per_step() {
        let chain = constant(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let n = 6;
        let flow = min_flow_dp(&chain, n, 1, FlowVariant::Full).unwrap();
        assert!((flow.value - n as f64).abs() < 1e-12);
        let brute = brute_force_min_flow(&chain, n, 1, FlowVariant::Full).unwrap();
        assert_eq!(flow.value, brute);
    }

    #[test]
    fn trivial_cases_return_zero_cost() {
        let chain = Chain::constant(StochasticMatrix::identity(1));
        let flow = min_flow_dp(&chain, 4, 1, FlowVariant::Full).unwrap();
        assert!(flow.trivial);
        assert_eq!(flow.value, 0.0);
        let two = constant(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(min_flow_dp(&two, 4, 2, FlowVariant::Full).unwrap().trivial);
    }

    #[test]
    fn reduced_never_exceeds_full_per_transition() {
        let m = StochasticMatrix::validate(&[vec![0.2, 0.8], vec![0.7, 0.3]], 1e-12).unwrap();
        for prev in 1..3u32 {
            for next in 1..3u32 {
                let full = transition_cost(&m, prev, next, FlowVariant::Full);
                let reduced = transition_cost(&m, prev, next, FlowVariant::Reduced);
                assert!(reduced <= full + 1e-15);
            }
        }
    }

    #[test]
    fn inv_n_reduced_flow_matches_harmonic_oracle() {
        // Optimal policy from start 1: stay through the identity step, then
        // alternate, paying 1/n per step.
        let chain = Chain::from_fn(2, 1, None, |n| {
            let p = 1.0 / n as f64;
            StochasticMatrix::validate(&[vec![p, 1.0 - p], vec![1.0 - p, p]], 1e-12)
        });
        let n_end = 40;
        let flow = min_flow_dp(&chain, n_end, 1, FlowVariant::Reduced).unwrap();
        let harmonic: f64 = (2..n_end).map(|n| 1.0 / n as f64).sum();
        assert!((flow.value - harmonic).abs() < 1e-12);
        let brute = brute_force_min_flow(&chain, 7, 1, FlowVariant::Reduced).unwrap();
        let dp_small = min_flow_dp(&chain, 7, 1, FlowVariant::Reduced).unwrap();
        assert_eq!(dp_small.value, brute);
    }

    #[test]
    fn swap_profile_is_bounded_with_zero_flow() {
        let profile =
            aif_profile(&swap_chain(), 50, FlowVariant::Full, &FlowParams::default()).unwrap();
        assert!(profile.min_over_c.iter().all(|&v| v == 0.0));
        assert!(matches!(profile.verdict, FlowVerdict::BoundedFlowWitness { .. }));
    }

    #[test]
    fn uniform_chain_profile_diverges_with_unit_slope() {
        let chain = constant(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let profile =
            aif_profile(&chain, 40, FlowVariant::Full, &FlowParams::default()).unwrap();
        match profile.verdict {
            FlowVerdict::DivergentTrend { tail_slope, .. } => {
                assert!((tail_slope - 1.0).abs() < 1e-12)
            }
            other => panic!("expected divergent trend, got {other:?}"),
        }
    }

    #[test]
    fn monotone_curves_and_budget() {
        let chain = constant(&[vec![0.9, 0.1], vec![0.2, 0.8]]);
        let flow = min_flow_dp(&chain, 30, 1, FlowVariant::Full).unwrap();
        assert!(flow.curve.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        let err = brute_force_min_flow(&chain, 200, 1, FlowVariant::Full).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }
}
