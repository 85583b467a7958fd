//! Tolerance-driven evaluation: grow the window until the certificate meets a
//! target, tabulate convergence, and solve `W x = f` locally.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certificate::{certify, tail_bound, Certificate};
use crate::error::{Error, Result};
use crate::matrix::{truncate, validate_truncation, BoundarySpec, InfiniteMatrixSpec, Window};
use crate::series::truncation_depth;
use crate::spectral::{finite_power_element, PowerOptions};

/// Supplies the corner correction for each window.
pub trait BoundaryPolicy: Send + Sync {
    fn boundary(&self, window: Window) -> Result<BoundarySpec>;
}

impl<F> BoundaryPolicy for F
where
    F: Fn(Window) -> Result<BoundarySpec> + Send + Sync,
{
    fn boundary(&self, window: Window) -> Result<BoundarySpec> {
        self(window)
    }
}

/// `D = 0` on every window.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroBoundary;

impl BoundaryPolicy for ZeroBoundary {
    fn boundary(&self, _window: Window) -> Result<BoundarySpec> {
        Ok(BoundarySpec::zero())
    }
}

/// Fixed corner values placed at `-P` ("low") and `Q` ("high") of each window.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CornerBoundary {
    pub low_low: f64,
    pub low_high: Complex64,
    pub high_high: f64,
}

impl BoundaryPolicy for CornerBoundary {
    fn boundary(&self, window: Window) -> Result<BoundarySpec> {
        if window.dim() < 2 {
            return Err(Error::DegenerateWindow { dim: window.dim() });
        }
        let (lo, hi) = (window.lo(), window.hi());
        BoundarySpec::new([
            ((lo, lo), Complex64::new(self.low_low, 0.0)),
            ((lo, hi), self.low_high),
            ((hi, lo), self.low_high.conj()),
            ((hi, hi), Complex64::new(self.high_high, 0.0)),
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverLimits {
    /// Largest admissible `P + Q + 1`.
    pub max_dim: usize,
    /// Spectral-condition tolerance, relative to `w`.
    pub validation_tol: f64,
    pub power: PowerOptions,
}

impl Default for DriverLimits {
    fn default() -> Self {
        DriverLimits {
            max_dim: 2049,
            validation_tol: 1e-10,
            power: PowerOptions::default(),
        }
    }
}

/// The premise of the tail bound on `alpha`, checked before any matrix work.
fn check_premises(spec: &InfiniteMatrixSpec, alpha: f64) -> Result<()> {
    let env = spec.envelope();
    tail_bound(alpha, env.c(), env.w(), 0).map(|_| ())
}

/// Full pipeline at a single window: truncate, validate, power, certify.
pub fn evaluate_window(
    spec: &InfiniteMatrixSpec,
    policy: &dyn BoundaryPolicy,
    alpha: f64,
    m: i64,
    n: i64,
    window: Window,
    limits: &DriverLimits,
) -> Result<Certificate> {
    check_premises(spec, alpha)?;
    let env = spec.envelope();
    let boundary = policy.boundary(window)?;
    let matrix = truncate(spec, window, &boundary)?;
    let report = validate_truncation(&matrix, &env, limits.validation_tol * env.w())?;
    if !report.passed {
        return Err(Error::InvalidBoundary(format!(
            "truncation spectrum [{:e}, {:e}] leaves [{:e}, {:e}] at P = {}, Q = {}",
            report.min_eigenvalue,
            report.max_eigenvalue,
            report.lower_limit,
            report.upper_limit,
            window.p(),
            window.q()
        )));
    }
    let value = finite_power_element(&matrix, alpha, m, n, limits.power)?;
    let depth = truncation_depth(spec, window, m, n)?;
    certify(value, alpha, env, depth)
}

/// Windows `P = Q = max(|m|, |n|) + g` for `g = 2, 4, 8, ...` up to the
/// dimension limit.
pub fn growth_schedule(m: i64, n: i64, max_dim: usize) -> Vec<Window> {
    let base = m.unsigned_abs().max(n.unsigned_abs()) as i64;
    let mut out = Vec::new();
    let mut g: i64 = 2;
    while let Ok(w) = Window::symmetric(base.saturating_add(g)) {
        if w.dim() > max_dim {
            break;
        }
        out.push(w);
        g = match g.checked_mul(2) {
            Some(next) => next,
            None => break,
        };
    }
    out
}

/// Returns the certificate of the first window in the growth schedule whose
/// bound is at most `tol`.
pub fn approximate_element(
    spec: &InfiniteMatrixSpec,
    policy: &dyn BoundaryPolicy,
    alpha: f64,
    m: i64,
    n: i64,
    tol: f64,
    limits: &DriverLimits,
) -> Result<Certificate> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    check_premises(spec, alpha)?;
    let schedule = growth_schedule(m, n, limits.max_dim);
    if schedule.is_empty() {
        return Err(Error::Range(format!(
            "dimension limit {} is below the first window for element ({m}, {n})",
            limits.max_dim
        )));
    }
    let mut best: Option<Certificate> = None;
    for window in schedule {
        let cert = evaluate_window(spec, policy, alpha, m, n, window, limits)?;
        if cert.bound <= tol {
            return Ok(cert);
        }
        if best.as_ref().is_none_or(|b| cert.bound < b.bound) {
            best = Some(cert);
        }
    }
    Err(Error::NotConverged {
        best: Box::new(best.expect("schedule is non-empty")),
    })
}

/// One row of a convergence table.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub window: Window,
    pub outcome: Result<Certificate>,
}

/// Evaluates every requested window independently; rows keep the input order.
pub fn convergence_table(
    spec: &InfiniteMatrixSpec,
    policy: &dyn BoundaryPolicy,
    alpha: f64,
    m: i64,
    n: i64,
    windows: &[Window],
    limits: &DriverLimits,
) -> Vec<TableRow> {
    windows
        .par_iter()
        .map(|&window| TableRow {
            window,
            outcome: evaluate_window(spec, policy, alpha, m, n, window, limits),
        })
        .collect()
}

/// Approximate solution component with its certified bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveEntry {
    pub value: Complex64,
    pub bound: f64,
}

/// `x_m = sum_n (W^{-1})[m][n] f_n` for each requested `m`, each inverse
/// element certified to `tol / sum |f_n|`.
pub fn local_solve(
    spec: &InfiniteMatrixSpec,
    policy: &dyn BoundaryPolicy,
    rhs: &BTreeMap<i64, Complex64>,
    out_indices: &[i64],
    tol: f64,
    limits: &DriverLimits,
) -> Result<BTreeMap<i64, SolveEntry>> {
    if spec.envelope().c() <= 0.0 {
        return Err(Error::Singular(
            "W has no positive lower spectral bound (c = 0), so W x = f is not locally solvable".into(),
        ));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let weight: f64 = rhs.values().map(|f| f.norm()).sum();
    if !weight.is_finite() {
        return Err(Error::Domain("right-hand side is not finite".into()));
    }
    let support: Vec<(i64, Complex64)> = rhs
        .iter()
        .filter(|(_, f)| f.norm() > 0.0)
        .map(|(&n, &f)| (n, f))
        .collect();
    let element_tol = if weight > 0.0 { tol / weight } else { tol };

    let pairs: Vec<(i64, i64, Complex64)> = out_indices
        .iter()
        .flat_map(|&m| support.iter().map(move |&(n, f)| (m, n, f)))
        .collect();
    let certified: Vec<Result<(i64, Complex64, f64)>> = pairs
        .par_iter()
        .map(|&(m, n, f)| {
            let cert = approximate_element(spec, policy, -1.0, m, n, element_tol, limits)?;
            Ok((m, cert.value * f, cert.bound * f.norm()))
        })
        .collect();

    let mut out: BTreeMap<i64, SolveEntry> = out_indices
        .iter()
        .map(|&m| (m, SolveEntry { value: Complex64::default(), bound: 0.0 }))
        .collect();
    for item in certified {
        let (m, contribution, bound) = item?;
        let entry = out.get_mut(&m).expect("output index registered");
        entry.value += contribution;
        entry.bound += bound;
    }
    Ok(out)
}
