//! A-priori error bounds for truncated matrix powers.
//!
//! With `x = (w - c) / w`, the error of `(W_PQ^alpha)[m][n]` is bounded by
//! `2 w^alpha * sum_{j >= j_pq} |binom(alpha, j)| x^j`. The full series has a
//! closed form for every admissible `alpha`; the tail is the full sum minus a
//! partial sum, with direct summation when the subtraction cancels.
//!
//! Bounds are evaluated in round-to-nearest arithmetic. They are not
//! outward-rounded.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{SpectralEnvelope, Window};
use crate::series::TruncationDepth;

/// Relative size below which `full - partial` is considered cancelled.
const CANCELLATION_THRESHOLD: f64 = 1e-6;
/// Direct summation stops once a term drops below this fraction of the total.
const TERM_CUTOFF: f64 = 1e-18;
const MAX_DIRECT_TERMS: u64 = 1 << 31;

fn check_args(alpha: f64, c: f64, w: f64) -> Result<()> {
    if !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha = {alpha} is not finite")));
    }
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::Domain(format!("w = {w} must be positive and finite")));
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::Domain(format!("c = {c} must be nonnegative")));
    }
    if c > w {
        return Err(Error::Domain(format!("c = {c} exceeds w = {w}")));
    }
    if c == 0.0 && alpha < 0.0 {
        return Err(Error::DivergentSeries { alpha });
    }
    Ok(())
}

fn nonnegative_integer(alpha: f64) -> Option<u64> {
    (alpha >= 0.0 && alpha.fract() == 0.0 && alpha < u64::MAX as f64).then_some(alpha as u64)
}

/// Iterator over `|binom(alpha, j)| x^j` for `j = 0, 1, ...`.
struct AbsTerms {
    alpha: f64,
    x: f64,
    j: u64,
    term: f64,
}

impl AbsTerms {
    fn new(alpha: f64, x: f64) -> Self {
        AbsTerms { alpha, x, j: 0, term: 1.0 }
    }
}

impl Iterator for AbsTerms {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.term;
        let j = self.j as f64;
        self.term *= ((self.alpha - j) / (j + 1.0)).abs() * self.x;
        self.j += 1;
        Some(out)
    }
}

/// `sum_{j >= 0} |binom(alpha, j)| ((w - c) / w)^j` in closed form.
pub fn full_series_sum(alpha: f64, c: f64, w: f64) -> Result<f64> {
    check_args(alpha, c, w)?;
    let x = (w - c) / w;
    if let Some(k) = nonnegative_integer(alpha) {
        return Ok(AbsTerms::new(alpha, x).take(k as usize + 1).sum());
    }
    let ratio = c / w;
    if alpha < 0.0 {
        return Ok(ratio.powf(alpha));
    }
    // alpha > 0, not an integer; binom(alpha, j) > 0 for j <= [alpha] + 1
    let floor = alpha.floor();
    let parity = if (floor as u64).is_multiple_of(2) { 1.0 } else { -1.0 };
    let neg_x = (c - w) / w;
    let mut sum = 0.0;
    let mut coeff = 1.0;
    let (mut pos_pow, mut neg_pow) = (1.0, 1.0);
    for j in 0..=(floor as u64 + 1) {
        if j > 0 {
            coeff *= (alpha - (j - 1) as f64) / j as f64;
            pos_pow *= x;
            neg_pow *= neg_x;
        }
        sum += coeff * (pos_pow + parity * neg_pow);
    }
    Ok(sum - parity * ratio.powf(alpha))
}

/// `2 w^alpha sum_{j >= j_start} |binom(alpha, j)| ((w - c) / w)^j`.
pub fn tail_bound(alpha: f64, c: f64, w: f64, j_start: u64) -> Result<f64> {
    check_args(alpha, c, w)?;
    if j_start == TruncationDepth::UNBOUNDED {
        return Ok(0.0);
    }
    let prefactor = 2.0 * w.powf(alpha);
    Ok(prefactor * series_tail(alpha, c, w, j_start)?)
}

fn series_tail(alpha: f64, c: f64, w: f64, j_start: u64) -> Result<f64> {
    let x = (w - c) / w;
    if let Some(k) = nonnegative_integer(alpha) {
        if j_start > k {
            return Ok(0.0);
        }
        return Ok(AbsTerms::new(alpha, x)
            .skip(j_start as usize)
            .take((k - j_start) as usize + 1)
            .sum());
    }
    if x == 0.0 {
        return Ok(if j_start == 0 { 1.0 } else { 0.0 });
    }
    let full = full_series_sum(alpha, c, w)?;
    let mut terms = AbsTerms::new(alpha, x);
    let partial: f64 = terms.by_ref().take(j_start as usize).sum();
    let tail = full - partial;
    if tail >= CANCELLATION_THRESHOLD * full {
        return Ok(tail);
    }
    if x == 1.0 && j_start as f64 > alpha {
        return Ok(unit_ratio_tail(alpha, j_start));
    }
    Ok(direct_tail(alpha, x, j_start, terms))
}

/// Sums the tail term by term and adds a geometric bound on what is left.
fn direct_tail(alpha: f64, x: f64, j_start: u64, mut terms: AbsTerms) -> f64 {
    let mut total = 0.0;
    let mut j = j_start;
    loop {
        let t = terms.next().unwrap_or(0.0);
        total += t;
        j += 1;
        // for i >= j > alpha the term ratio is at most x * max(1, (j - alpha) / (j + 1))
        let rho = x * ((j as f64 - alpha) / (j as f64 + 1.0)).max(1.0);
        let settled = j as f64 > alpha && rho < 1.0;
        if settled && t <= TERM_CUTOFF * total {
            return total + terms.term / (1.0 - rho);
        }
        if j - j_start >= MAX_DIRECT_TERMS {
            return total;
        }
    }
}

/// Tail at `c = 0` for positive non-integer `alpha`:
/// `sum_{j >= J} |binom(alpha, j)| = |binom(alpha - 1, J - 1)|` once the
/// signs have settled (`J > [alpha]`).
fn unit_ratio_tail(alpha: f64, j_start: u64) -> f64 {
    debug_assert!(alpha > 0.0 && j_start as f64 > alpha);
    let mut coeff = 1.0f64;
    for i in 1..j_start {
        coeff *= ((alpha - 1.0 - (i - 1) as f64) / i as f64).abs();
        if coeff == 0.0 {
            break;
        }
    }
    coeff
}

/// An approximate matrix element together with its error bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub value: Complex64,
    pub window: Window,
    pub depth: TruncationDepth,
    pub bound: f64,
    pub envelope_used: SpectralEnvelope,
    pub alpha: f64,
}

/// Flat serialized form of a [`Certificate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub value: [f64; 2],
    pub bound: f64,
    /// `None` when every power agrees with the truncation.
    pub j_pq: Option<u64>,
    #[serde(rename = "P")]
    pub p: i64,
    #[serde(rename = "Q")]
    pub q: i64,
    pub alpha: f64,
    pub c: f64,
    pub w: f64,
}

impl Certificate {
    pub fn record(&self) -> CertificateRecord {
        CertificateRecord {
            value: [self.value.re, self.value.im],
            bound: self.bound,
            j_pq: (!self.depth.is_unbounded()).then_some(self.depth.j_pq),
            p: self.window.p(),
            q: self.window.q(),
            alpha: self.alpha,
            c: self.envelope_used.c(),
            w: self.envelope_used.w(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.record()).expect("certificate record serializes")
    }
}

pub fn certify(
    value: Complex64,
    alpha: f64,
    envelope: SpectralEnvelope,
    depth: TruncationDepth,
) -> Result<Certificate> {
    let bound = tail_bound(alpha, envelope.c(), envelope.w(), depth.j_pq)?;
    Ok(Certificate {
        value,
        window: depth.window,
        depth,
        bound,
        envelope_used: envelope,
        alpha,
    })
}
