//! Exact integer powers of `W - s I` at a single element, and the depth up to
//! which those powers coincide with the powers of a truncation.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{InfiniteMatrixSpec, Window};

/// Default cap on the number of live nodes during path expansion.
pub const DEFAULT_NODE_BUDGET: usize = 1 << 20;

/// Number of leading terms `j < j_pq` for which
/// `((W - wI)^j)[m][n] == ((W_PQ - w I_PQ)^j)[m][n]` is guaranteed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationDepth {
    pub j_pq: u64,
    pub window: Window,
    pub m: i64,
    pub n: i64,
}

impl TruncationDepth {
    /// Every power agrees: the support reachable from `m` and `n` closes up
    /// strictly inside the window.
    pub const UNBOUNDED: u64 = u64::MAX;

    pub fn is_unbounded(&self) -> bool {
        self.j_pq == Self::UNBOUNDED
    }
}

/// `((W - shift I)^j)[m][n]`, summed over all index paths `m -> ... -> n`.
pub fn integer_power_element(
    spec: &InfiniteMatrixSpec,
    shift: f64,
    j: u64,
    m: i64,
    n: i64,
) -> Result<Complex64> {
    integer_power_element_with_budget(spec, shift, j, m, n, DEFAULT_NODE_BUDGET)
}

pub fn integer_power_element_with_budget(
    spec: &InfiniteMatrixSpec,
    shift: f64,
    j: u64,
    m: i64,
    n: i64,
    budget: usize,
) -> Result<Complex64> {
    // Row vector e_m^T A^t, one step at a time: u_{t+1}[i] = sum_k u_t[k] A[k][i].
    let mut frontier: BTreeMap<i64, Complex64> = BTreeMap::new();
    frontier.insert(m, Complex64::new(1.0, 0.0));
    for depth in 0..j {
        let mut next: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (&k, &weight) in &frontier {
            let mut diagonal_seen = false;
            for (i, a) in spec.row(k)? {
                let a = if i == k {
                    diagonal_seen = true;
                    a - shift
                } else {
                    a
                };
                *next.entry(i).or_default() += weight * a;
            }
            if !diagonal_seen && shift != 0.0 {
                *next.entry(k).or_default() += weight * (-shift);
            }
        }
        if next.len() > budget {
            return Err(Error::BudgetExceeded {
                frontier: next.len(),
                depth: depth + 1,
                budget,
            });
        }
        frontier = next;
    }
    Ok(frontier.get(&n).copied().unwrap_or_default())
}

/// Exactness depth of element `(m, n)` under truncation to `window`.
///
/// The support set reachable from `{m, n}` is grown one step at a time; the
/// depth is the first step at which it leaves the interior `[-P+1, Q-1]`.
/// Elements outside the window get 0, elements on its edge get 1. If the
/// reachable set stops growing while still interior, every power is exact
/// and the depth is [`TruncationDepth::UNBOUNDED`].
pub fn truncation_depth(
    spec: &InfiniteMatrixSpec,
    window: Window,
    m: i64,
    n: i64,
) -> Result<TruncationDepth> {
    let depth = |j_pq| TruncationDepth { j_pq, window, m, n };
    if !(window.contains(m) && window.contains(n)) {
        return Ok(depth(0));
    }
    if !(window.is_interior(m) && window.is_interior(n)) {
        return Ok(depth(1));
    }
    let mut reached: BTreeSet<i64> = BTreeSet::from([m, n]);
    let mut frontier: Vec<i64> = reached.iter().copied().collect();
    let mut step: u64 = 0;
    loop {
        step += 1;
        let mut fresh = Vec::new();
        for &k in &frontier {
            for (i, _) in spec.row(k)? {
                if reached.insert(i) {
                    if !window.is_interior(i) {
                        return Ok(depth(step));
                    }
                    fresh.push(i);
                }
            }
        }
        if fresh.is_empty() {
            return Ok(depth(TruncationDepth::UNBOUNDED));
        }
        frontier = fresh;
    }
}

/// Exactness depth for a `(2l+1)`-diagonal matrix with a full band:
/// `1 + floor(min(min(m,n) + P - 1, Q - max(m,n) - 1) / l)`.
pub fn banded_depth_closed_form(l: u64, window: Window, m: i64, n: i64) -> Result<u64> {
    if l == 0 {
        return Err(Error::Domain("half-bandwidth must be positive".into()));
    }
    let (lo, hi) = (m.min(n), m.max(n));
    if window.lo() > lo - 1 || window.hi() < hi + 1 {
        return Err(Error::Domain(format!(
            "element ({m}, {n}) is not interior to the window [{}, {}]",
            window.lo(),
            window.hi()
        )));
    }
    let left = lo + window.p() - 1;
    let right = window.q() - hi - 1;
    Ok(1 + left.min(right) as u64 / l)
}
