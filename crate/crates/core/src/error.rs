//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by chain construction, analysis, and model generators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, but row {row} has {cols} entries")]
    NotSquare { rows: usize, row: usize, cols: usize },

    #[error("negative entry {value} at ({i}, {j})")]
    NegativeEntry { i: usize, j: usize, value: f64 },

    #[error("row {row} sums to {sum}, outside tolerance {tol} of 1")]
    RowSumViolation { row: usize, sum: f64, tol: f64 },

    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("chains start at different indices: {left} vs {right}")]
    StartMismatch { left: usize, right: usize },

    #[error("index {index} outside chain domain [{start}, {end})")]
    HorizonExceeded {
        index: usize,
        start: usize,
        /// Exclusive end of the valid index range, `usize::MAX` when unbounded.
        end: usize,
    },

    #[error(
        "row-proximity relation is not transitive at tolerance {tol}: \
         rows {i} and {j} are linked through a chain but differ by {gap}"
    )]
    InconsistentClustering { i: usize, j: usize, gap: f64, tol: f64 },

    #[error("order {order} exceeds enumeration budget {budget}")]
    OrderTooLarge { order: usize, budget: usize },

    #[error("enumeration requires about {required:.3e} sequences, budget is {budget:.3e}")]
    BudgetExceeded { required: f64, budget: f64 },

    #[error("balanced-asymmetry constant is infinite; series is undefined")]
    InfiniteM,

    #[error("kernel supremum {sup_f} is not below the stochasticity bound {bound}")]
    KernelBoundViolated { sup_f: f64, bound: f64 },

    #[error("interaction weight denominator vanished for agent {agent}")]
    ZeroDenominator { agent: usize },

    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("state entry {value} for agent {agent} is not finite")]
    NonFiniteState { agent: usize, value: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
