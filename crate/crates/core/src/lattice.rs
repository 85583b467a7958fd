//! One-dimensional lattice scalar-field model.
//!
//! The infinite matrix `M` generates the quadratic form
//! `a sum |x_n|^2 + b sum |x_n - x_{n-1}|^2`, i.e. the stencil
//! `(-b, a + 2b, -b)`. Its periodic truncations are circulant, so their
//! powers have a closed form through the discrete Fourier transform, and the
//! infinite-matrix powers are integrals over the Fourier symbol
//! `lambda(k) = a + 2b - 2b cos(2 pi k)`.
//!
//! Eigenvalues are always obtained by transforming the assembled matrix row,
//! never from a hand-written formula.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::driver::BoundaryPolicy;
use crate::error::{Error, Result};
use crate::matrix::{assemble_row, BoundarySpec, InfiniteMatrixSpec, SpectralEnvelope, Window};

/// Convergence tolerance of the dispersion-integral quadrature.
pub const QUADRATURE_TOL: f64 = 1e-12;
/// Largest point count tried by the quadrature unless the caller says otherwise.
pub const DEFAULT_QUADRATURE_POINTS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeModelParams {
    a: f64,
    b: f64,
}

impl LatticeModelParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Domain(format!("lattice mass term a = {a} must be positive")));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::Domain(format!("lattice coupling b = {b} must be positive")));
        }
        Ok(LatticeModelParams { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Band matrix `(-b, a + 2b, -b)` with spectrum `[a, a + 4b]`.
pub fn lattice_spec(params: LatticeModelParams) -> InfiniteMatrixSpec {
    let (a, b) = (params.a, params.b);
    let envelope = SpectralEnvelope::new(a, a + 4.0 * b, 0.0)
        .expect("a > 0 and b > 0 give a valid envelope");
    let stencil = [Complex64::new(-b, 0.0), Complex64::new(a + 2.0 * b, 0.0), Complex64::new(-b, 0.0)];
    InfiniteMatrixSpec::banded(&[-1, 0, 1], &stencil, envelope)
        .expect("lattice stencil is Hermitian")
}

/// Wrap-around bond `b |x_Q - x_{-P}|^2` as a corner correction.
pub fn periodic_boundary(window: Window, params: LatticeModelParams) -> Result<BoundarySpec> {
    if window.dim() < 2 {
        return Err(Error::DegenerateWindow { dim: window.dim() });
    }
    let bond = Complex64::new(-params.b, 0.0);
    BoundarySpec::new([((window.lo(), window.hi()), bond), ((window.hi(), window.lo()), bond)])
}

/// [`periodic_boundary`] as a driver policy.
#[derive(Debug, Clone, Copy)]
pub struct PeriodicBoundary(pub LatticeModelParams);

impl BoundaryPolicy for PeriodicBoundary {
    fn boundary(&self, window: Window) -> Result<BoundarySpec> {
        periodic_boundary(window, self.0)
    }
}

/// `cos(2 pi k d / n)` with the phase reduced exactly.
fn cos_phase(k: i64, d: i64, n: i64) -> f64 {
    let r = (k as i128 * d as i128).rem_euclid(n as i128) as f64;
    (2.0 * PI * r / n as f64).cos()
}

fn power_of(lambda: f64, alpha: f64) -> Result<f64> {
    if alpha < 0.0 && lambda <= 0.0 {
        return Err(Error::Singular(format!(
            "eigenvalue {lambda:e} is not positive and alpha = {alpha} < 0"
        )));
    }
    if alpha.fract() == 0.0 && alpha.abs() <= i32::MAX as f64 {
        return Ok(lambda.powi(alpha as i32));
    }
    if lambda < 0.0 {
        return Err(Error::Domain(format!(
            "negative eigenvalue {lambda:e} with non-integer alpha = {alpha}"
        )));
    }
    Ok(lambda.powf(alpha))
}

/// Eigenvalues of the periodic truncation, indexed by Fourier mode `k`.
pub fn circulant_eigenvalues(window: Window, params: LatticeModelParams) -> Result<Vec<f64>> {
    let spec = lattice_spec(params);
    let boundary = periodic_boundary(window, params)?;
    let row = assemble_row(&spec, &window, &boundary, window.lo())?;
    // M[i][j] = row[(j - i) mod N], so lambda_k = sum_d row[d] exp(+2 pi i d k / N)
    let mut buf = row;
    FftPlanner::<f64>::new().plan_fft_inverse(buf.len()).process(&mut buf);
    let scale = buf.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if let Some(z) = buf.iter().find(|z| z.im.abs() > 1e-10 * scale.max(1.0)) {
        return Err(Error::NumericalFailure(format!(
            "circulant eigenvalue {z} is not real"
        )));
    }
    Ok(buf.into_iter().map(|z| z.re).collect())
}

/// `(M_PQ^alpha)[m][n]` for the periodic truncation, by Fourier diagonalization.
pub fn circulant_power_element(
    window: Window,
    params: LatticeModelParams,
    alpha: f64,
    m: i64,
    n: i64,
) -> Result<f64> {
    if !(window.contains(m) && window.contains(n)) {
        return Err(Error::Range(format!(
            "element ({m}, {n}) outside window [{}, {}]",
            window.lo(),
            window.hi()
        )));
    }
    let lambdas = circulant_eigenvalues(window, params)?;
    let dim = lambdas.len() as i64;
    let mut acc = 0.0;
    for (k, &lambda) in lambdas.iter().enumerate() {
        acc += power_of(lambda, alpha)? * cos_phase(k as i64, m - n, dim);
    }
    Ok(acc / dim as f64)
}

/// Fourier symbol of the infinite stencil at `k in [0, 1)`, given as a phase
/// fraction `r / n`.
fn symbol(stencil: &[(i64, Complex64)], r: i64, n: i64) -> f64 {
    stencil
        .iter()
        .map(|&(o, v)| {
            let phase = 2.0 * PI * ((o as i128 * r as i128).rem_euclid(n as i128) as f64) / n as f64;
            (v * Complex64::new(phase.cos(), phase.sin())).re
        })
        .sum()
}

/// `(M^alpha)[m][n] = int_0^1 lambda(k)^alpha cos(2 pi k (m - n)) dk`, by the
/// periodic trapezoid rule with Richardson extrapolation, doubling the point
/// count up to `max_points`.
pub fn dispersion_integral_element(
    params: LatticeModelParams,
    alpha: f64,
    m: i64,
    n: i64,
    max_points: usize,
) -> Result<f64> {
    let stencil = lattice_spec(params).row(0)?;
    let d = m - n;
    let trapezoid = |points: i64| -> Result<f64> {
        let mut acc = 0.0;
        for r in 0..points {
            acc += power_of(symbol(&stencil, r, points), alpha)? * cos_phase(r, d, points);
        }
        Ok(acc / points as f64)
    };
    // the integrand has frequency |d| + 1 at least, so start above it
    let mut points: i64 = 16;
    while points <= 4 * (d.unsigned_abs() as i64 + 1) {
        points *= 2;
    }
    let mut coarse = trapezoid(points)?;
    let mut previous: Option<f64> = None;
    while (2 * points) as usize <= max_points {
        points *= 2;
        let fine = trapezoid(points)?;
        let extrapolated = fine + (fine - coarse) / 3.0;
        if let Some(prev) = previous {
            if (extrapolated - prev).abs() <= QUADRATURE_TOL * extrapolated.abs().max(1.0) {
                return Ok(extrapolated);
            }
        }
        previous = Some(extrapolated);
        coarse = fine;
    }
    Err(Error::NumericalFailure(format!(
        "dispersion integral did not reach {QUADRATURE_TOL:e} within {max_points} points"
    )))
}
