//! Row-stochastic matrices and the row-span contraction measure.
//!
//! A stochastic matrix is one interaction step of the averaging dynamics:
//! every entry is a nonnegative weight and every row sums to 1. The row
//! span of a matrix,
//!
//! ```text
//! span(A) = max_j (max_i a_ij - min_i a_ij)
//! ```
//!
//! is zero exactly when all rows are identical, and never increases under
//! left multiplication by another stochastic matrix. It is the contraction
//! quantity that the ergodicity probes track along backward products.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default tolerance on `|row sum - 1|` accepted by [`StochasticMatrix::validate`].
pub const DEFAULT_TOL_ROW: f64 = 1e-12;

/// Square nonnegative matrix with unit row sums, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl StochasticMatrix {
    /// Validates a raw square matrix: entries must be nonnegative and every
    /// row sum must lie within `tol_row` of 1. Accepted rows are renormalized
    /// by their exact sum so the stored matrix is stochastic to working
    /// precision.
    pub fn validate(rows: &[Vec<f64>], tol_row: f64) -> Result<Self> {
        let order = rows.len();
        if order == 0 {
            return Err(Error::InvalidParams("matrix order must be at least 1".into()));
        }
        let mut entries = Vec::with_capacity(order * order);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != order {
                return Err(Error::NotSquare { rows: order, row: i, cols: row.len() });
            }
            let mut sum = 0.0;
            for (j, &value) in row.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(Error::NegativeEntry { i, j, value });
                }
                sum += value;
            }
            if (sum - 1.0).abs() > tol_row {
                return Err(Error::RowSumViolation { row: i, sum, tol: tol_row });
            }
            entries.extend(row.iter().map(|v| v / sum));
        }
        Ok(Self { order, entries })
    }

    /// Validates a flat row-major buffer of length `order * order`.
    pub fn from_flat(order: usize, flat: &[f64], tol_row: f64) -> Result<Self> {
        if order == 0 || flat.len() != order * order {
            return Err(Error::InvalidParams(format!(
                "expected {order}x{order} entries, got {}",
                flat.len()
            )));
        }
        let rows: Vec<Vec<f64>> = flat.chunks(order).map(|c| c.to_vec()).collect();
        Self::validate(&rows, tol_row)
    }

    /// Internal constructor for matrices that are stochastic by construction
    /// (products, compensated restrictions). Row sums are only debug-checked,
    /// against a drift budget scaled by the matrix order.
    pub(crate) fn trusted(order: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), order * order);
        debug_assert!(
            entries.chunks(order).all(|row| {
                let s: f64 = row.iter().sum();
                (s - 1.0).abs() <= 1e-6
            }),
            "trusted matrix drifted away from stochasticity"
        );
        Self { order, entries }
    }

    pub fn identity(order: usize) -> Self {
        let mut entries = vec![0.0; order * order];
        for i in 0..order {
            entries[i * order + i] = 1.0;
        }
        Self { order, entries }
    }

    /// Permutation matrix sending the value of agent `perm[i]` to agent `i`,
    /// i.e. row `i` has a single 1 in column `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let order = perm.len();
        let mut seen = vec![false; order];
        let mut entries = vec![0.0; order * order];
        for (i, &j) in perm.iter().enumerate() {
            if j >= order || seen[j] {
                return Err(Error::InvalidParams(format!("not a permutation: {perm:?}")));
            }
            seen[j] = true;
            entries[i * order + j] = 1.0;
        }
        Ok(Self { order, entries })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.order)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.to_vec()).collect()
    }

    /// Max over columns of (max - min) of the column entries; zero iff all
    /// rows are identical.
    pub fn row_span(&self) -> f64 {
        let mut span = 0.0_f64;
        for j in 0..self.order {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..self.order {
                let v = self.get(i, j);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            span = span.max(hi - lo);
        }
        span
    }

    /// Column sums; all equal to 1 for a doubly stochastic matrix.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.order];
        for row in self.rows() {
            for (j, &v) in row.iter().enumerate() {
                sums[j] += v;
            }
        }
        sums
    }

    /// Matrix-vector product `self * x`; each output entry is a convex
    /// combination of the inputs.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.order {
            return Err(Error::OrderMismatch { left: self.order, right: x.len() });
        }
        Ok(self
            .rows()
            .map(|row| row.iter().zip(x).map(|(a, v)| a * v).sum())
            .collect())
    }

    /// Matrix product `self * rhs`.
    pub fn multiply(&self, rhs: &Self) -> Result<Self> {
        if self.order != rhs.order {
            return Err(Error::OrderMismatch { left: self.order, right: rhs.order });
        }
        let s = self.order;
        let mut entries = vec![0.0; s * s];
        for i in 0..s {
            for k in 0..s {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let rhs_row = rhs.row(k);
                let out = &mut entries[i * s..(i + 1) * s];
                for (o, &b) in out.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self::trusted(s, entries))
    }

    /// Max norm (largest absolute entry) of `self - other`.
    pub fn max_norm_diff(&self, other: &Self) -> Result<f64> {
        if self.order != other.order {
            return Err(Error::OrderMismatch { left: self.order, right: other.order });
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

impl Serialize for StochasticMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.rows())
    }
}

impl<'de> Deserialize<'de> for StochasticMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        StochasticMatrix::validate(&rows, DEFAULT_TOL_ROW).map_err(D::Error::custom)
    }
}
