//! Stochastic orders on the simplex: MLR dominance, first-order stochastic
//! dominance, and total positivity of order 2.

use serde::Serialize;
use thiserror::Error;

use crate::matrix::Matrix;
use crate::scalar::Scalar;

pub const DEFAULT_ORDER_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
#[error("dimension mismatch: {left} vs {right}")]
pub struct DimensionMismatch {
    pub left: usize,
    pub right: usize,
}

/// Outcome of an order predicate.
///
/// `margin` is the smallest slack over every inequality tested (nonnegative
/// slack means satisfied); `witness` names the first violated inequality,
/// as 0-based indices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderCheckResult<T> {
    pub holds: bool,
    pub witness: Option<Vec<usize>>,
    pub margin: T,
}

impl<T: Scalar> OrderCheckResult<T> {
    fn vacuous() -> Self {
        OrderCheckResult { holds: true, witness: None, margin: T::zero() }
    }
}

/// Accumulates the minimum slack and the first violation in scan order.
pub(crate) struct SlackScan<T> {
    tol: T,
    margin: Option<T>,
    witness: Option<Vec<usize>>,
}

impl<T: Scalar> SlackScan<T> {
    pub(crate) fn new(tol: T) -> Self {
        SlackScan { tol, margin: None, witness: None }
    }

    pub(crate) fn push(&mut self, slack: T, at: impl FnOnce() -> Vec<usize>) {
        if self.witness.is_none() && slack < -self.tol.clone() {
            self.witness = Some(at());
        }
        self.margin = Some(match self.margin.take() {
            Some(m) => T::min_of(m, slack),
            None => slack,
        });
    }

    pub(crate) fn finish(self) -> OrderCheckResult<T> {
        match self.margin {
            None => OrderCheckResult::vacuous(),
            Some(margin) => OrderCheckResult { holds: self.witness.is_none(), witness: self.witness, margin },
        }
    }
}

/// `p1 ≥_r p2`: `p1(i) p2(j) ≤ p1(j) p2(i)` for all `i < j`.
///
/// The product form is used so zero entries need no special casing.
pub fn mlr_ge<T: Scalar>(p1: &[T], p2: &[T], tol: T) -> Result<OrderCheckResult<T>, DimensionMismatch> {
    if p1.len() != p2.len() {
        return Err(DimensionMismatch { left: p1.len(), right: p2.len() });
    }
    let mut scan = SlackScan::new(tol);
    for i in 0..p1.len() {
        for j in i + 1..p1.len() {
            let slack = p1[j].clone() * p2[i].clone() - p1[i].clone() * p2[j].clone();
            scan.push(slack, || vec![i, j]);
        }
    }
    Ok(scan.finish())
}

/// `p1 ≥_s p2`: every upper tail sum of `p1` dominates that of `p2`.
pub fn fosd_ge<T: Scalar>(p1: &[T], p2: &[T], tol: T) -> Result<OrderCheckResult<T>, DimensionMismatch> {
    if p1.len() != p2.len() {
        return Err(DimensionMismatch { left: p1.len(), right: p2.len() });
    }
    let mut scan = SlackScan::new(tol);
    let (mut t1, mut t2) = (T::zero(), T::zero());
    let mut slacks = Vec::with_capacity(p1.len());
    for q in (0..p1.len()).rev() {
        t1 = t1 + p1[q].clone();
        t2 = t2 + p2[q].clone();
        slacks.push((q, t1.clone() - t2.clone()));
    }
    for (q, slack) in slacks.into_iter().rev() {
        scan.push(slack, || vec![q]);
    }
    Ok(scan.finish())
}

/// Every 2×2 minor `m[i,j] m[k,l] − m[i,l] m[k,j]` (`i < k`, `j < l`) is ≥ −tol.
/// Witness is `[i, k, j, l]`.
pub fn is_tp2<T: Scalar>(m: &Matrix<T>, tol: T) -> OrderCheckResult<T> {
    let mut scan = SlackScan::new(tol);
    for i in 0..m.rows() {
        for k in i + 1..m.rows() {
            for j in 0..m.cols() {
                for l in j + 1..m.cols() {
                    let minor = m[(i, j)].clone() * m[(k, l)].clone() - m[(i, l)].clone() * m[(k, j)].clone();
                    scan.push(minor, || vec![i, k, j, l]);
                }
            }
        }
    }
    scan.finish()
}
