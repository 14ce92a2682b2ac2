//! Chains of stochastic matrices and their backward products.
//!
//! A chain is an indexed family `A_n` of stochastic matrices of one order,
//! defined on `[start, end)` where `end` may be unbounded. The backward
//! product
//!
//! ```text
//! A(n, k) = A_{n-1} A_{n-2} ... A_k
//! ```
//!
//! propagates states initialized at time `k` to time `n`: column `i` of
//! `A(n, k)` is the trajectory value at `n` of the system started from the
//! `i`-th basis vector at `k`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::{StochasticMatrix, DEFAULT_TOL_ROW};

type Generator = dyn Fn(usize) -> Result<StochasticMatrix> + Send + Sync;

#[derive(Clone)]
enum Producer {
    Inline(Arc<Vec<StochasticMatrix>>),
    Generator(Arc<Generator>),
}

/// Indexed producer of stochastic matrices, either a recorded list or a
/// deterministic generator. Values are immutable and cheap to clone; repeated
/// queries at the same index return identical matrices.
#[derive(Clone)]
pub struct Chain {
    order: usize,
    start: usize,
    /// Exclusive end of the valid index range; `None` means unbounded.
    end: Option<usize>,
    producer: Producer,
    declared_unbounded: Option<Arc<Vec<(usize, usize)>>>,
    label: Option<Arc<str>>,
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chain")
            .field("order", &self.order)
            .field("start", &self.start)
            .field("end", &self.end)
            .field("label", &self.label)
            .finish()
    }
}

impl Chain {
    /// Chain recorded as an inline list, indexed from 0.
    pub fn from_matrices(matrices: Vec<StochasticMatrix>) -> Result<Self> {
        Self::from_matrices_at(0, matrices)
    }

    /// Chain recorded as an inline list, indexed from `start`.
    pub fn from_matrices_at(start: usize, matrices: Vec<StochasticMatrix>) -> Result<Self> {
        let order = match matrices.first() {
            Some(m) => m.order(),
            None => return Err(Error::InvalidParams("chain needs at least one matrix".into())),
        };
        if let Some(bad) = matrices.iter().find(|m| m.order() != order) {
            return Err(Error::OrderMismatch { left: order, right: bad.order() });
        }
        Ok(Self {
            order,
            start,
            end: Some(start + matrices.len()),
            producer: Producer::Inline(Arc::new(matrices)),
            declared_unbounded: None,
            label: None,
        })
    }

    /// Chain defined by a pure producer function of the time index. The
    /// producer must be deterministic; its output is validated on every
    /// query.
    pub fn from_fn<F>(order: usize, start: usize, end: Option<usize>, producer: F) -> Self
    where
        F: Fn(usize) -> Result<StochasticMatrix> + Send + Sync + 'static,
    {
        Self {
            order,
            start,
            end,
            producer: Producer::Generator(Arc::new(producer)),
            declared_unbounded: None,
            label: None,
        }
    }

    /// Unbounded constant chain `A_n = m` for all `n >= 0`.
    pub fn constant(m: StochasticMatrix) -> Self {
        let order = m.order();
        Self::from_fn(order, 0, None, move |_| Ok(m.clone()))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(Arc::from(label.into().as_str()));
        self
    }

    /// Attaches analytically-known unbounded interaction edges `(i, j)`,
    /// 0-based. When present these override the numeric divergence rule in
    /// graph construction.
    pub fn with_declared_unbounded(mut self, edges: Vec<(usize, usize)>) -> Self {
        self.declared_unbounded = Some(Arc::new(edges));
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// First valid index.
    pub fn start(&self) -> usize {
        self.start
    }

    /// Exclusive end of the valid index range, `None` when unbounded.
    pub fn end(&self) -> Option<usize> {
        self.end
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn declared_unbounded(&self) -> Option<&[(usize, usize)]> {
        self.declared_unbounded.as_deref().map(|v| v.as_slice())
    }

    fn check_index(&self, n: usize) -> Result<()> {
        let end = self.end.unwrap_or(usize::MAX);
        if n < self.start || n >= end {
            return Err(Error::HorizonExceeded { index: n, start: self.start, end });
        }
        Ok(())
    }

    /// Ensures every index in `[k, n_end)` is inside the chain domain.
    pub fn check_range(&self, k: usize, n_end: usize) -> Result<()> {
        if k < n_end {
            self.check_index(k)?;
            self.check_index(n_end - 1)?;
        }
        Ok(())
    }

    /// The matrix `A_n`.
    pub fn matrix_at(&self, n: usize) -> Result<StochasticMatrix> {
        self.check_index(n)?;
        match &self.producer {
            Producer::Inline(list) => Ok(list[n - self.start].clone()),
            Producer::Generator(f) => {
                let m = f(n)?;
                if m.order() != self.order {
                    return Err(Error::OrderMismatch { left: self.order, right: m.order() });
                }
                Ok(m)
            }
        }
    }

    /// Records `A_n` for `n` in `[start, n_end)` as an inline list.
    pub fn realize(&self, n_end: usize) -> Result<Vec<StochasticMatrix>> {
        self.check_range(self.start, n_end)?;
        (self.start..n_end).map(|n| self.matrix_at(n)).collect()
    }
}

/// Backward product `A(n, k) = A_{n-1} ... A_k` together with its index range.
#[derive(Debug, Clone)]
pub struct BackwardProduct {
    pub k: usize,
    pub n: usize,
    pub value: StochasticMatrix,
}

/// Accumulates the backward product left-to-right: each new step multiplies
/// on the left. Rows of the result stay stochastic up to a drift budget of
/// roughly `order * tol_row` per accumulated step.
pub fn backward_product(chain: &Chain, k: usize, n: usize) -> Result<BackwardProduct> {
    if k >= n {
        return Err(Error::InvalidParams(format!(
            "backward product needs k < n, got k = {k}, n = {n}"
        )));
    }
    chain.check_range(k, n)?;
    let mut value = chain.matrix_at(k)?;
    for m in k + 1..n {
        value = chain.matrix_at(m)?.multiply(&value)?;
    }
    debug_assert!(
        value.rows().all(|row| {
            let s: f64 = row.iter().sum();
            (s - 1.0).abs() <= (n - k) as f64 * chain.order() as f64 * DEFAULT_TOL_ROW.max(1e-15)
        }),
        "backward product drifted beyond the row-sum budget"
    );
    Ok(BackwardProduct { k, n, value })
}

/// Walks the backward products `A(m, k)` for `m = k+1 ..= n_end`, invoking
/// `visit(m, A(m, k))` at each step, and returns the final product.
pub(crate) fn product_scan<F>(
    chain: &Chain,
    k: usize,
    n_end: usize,
    mut visit: F,
) -> Result<StochasticMatrix>
where
    F: FnMut(usize, &StochasticMatrix),
{
    if k >= n_end {
        return Err(Error::InvalidParams(format!(
            "product scan needs k < horizon, got k = {k}, horizon = {n_end}"
        )));
    }
    chain.check_range(k, n_end)?;
    let mut product = chain.matrix_at(k)?;
    visit(k + 1, &product);
    for m in k + 1..n_end {
        product = chain.matrix_at(m)?.multiply(&product)?;
        visit(m + 1, &product);
    }
    Ok(product)
}
