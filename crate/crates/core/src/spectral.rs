//! Real powers of finite Hermitian matrices.
//!
//! The production path diagonalizes `M = U diag(lambda) U^H` and returns
//! `U diag(lambda^alpha) U^H`. [`finite_power_series`] sums the binomial
//! expansion around `w I` instead and is kept as an independent check.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{symmetrize, FiniteHermitian};

/// Relative eigenvalue tolerance used when the caller passes none.
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-10;

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: DMatrix<Complex64>,
}

fn max_iterations(dim: usize) -> usize {
    100 * dim + 1000
}

pub fn eigen(matrix: &FiniteHermitian) -> Result<HermitianEigen> {
    let dim = matrix.dim();
    let fail = || Error::NumericalFailure(format!("eigendecomposition of a {dim}x{dim} matrix did not converge"));
    let (values, vectors) = if matrix.is_real() {
        let real = matrix.as_matrix().map(|z| z.re);
        let eig = SymmetricEigen::try_new(real, f64::EPSILON, max_iterations(dim)).ok_or_else(fail)?;
        (eig.eigenvalues, eig.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let eig = SymmetricEigen::try_new(matrix.as_matrix().clone(), f64::EPSILON, max_iterations(dim))
            .ok_or_else(fail)?;
        (eig.eigenvalues, eig.eigenvectors)
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let sorted_values = order.iter().map(|&k| values[k]).collect();
    let sorted_vectors = DMatrix::from_fn(dim, dim, |i, j| vectors[(i, order[j])]);
    Ok(HermitianEigen {
        values: sorted_values,
        vectors: sorted_vectors,
    })
}

pub fn eigenvalues(matrix: &FiniteHermitian) -> Result<Vec<f64>> {
    Ok(eigen(matrix)?.values)
}

/// Options for the spectral power.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PowerOptions {
    /// Absolute eigenvalue tolerance; `None` means `1e-10 * max |lambda|`.
    pub tol: Option<f64>,
}

fn is_integer(alpha: f64) -> bool {
    alpha.fract() == 0.0
}

/// Maps each eigenvalue to `lambda^alpha`, enforcing the domain rules.
fn powered_eigenvalues(values: &[f64], alpha: f64, opts: PowerOptions) -> Result<Vec<f64>> {
    if !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha = {alpha} is not finite")));
    }
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = opts.tol.unwrap_or(DEFAULT_RELATIVE_TOL * scale);
    values
        .iter()
        .map(|&lambda| {
            if alpha < 0.0 && lambda.abs() <= tol {
                return Err(Error::Singular(format!(
                    "eigenvalue {lambda:e} is within {tol:e} of zero and alpha = {alpha} < 0"
                )));
            }
            if is_integer(alpha) && alpha.abs() <= i32::MAX as f64 {
                return Ok(lambda.powi(alpha as i32));
            }
            if lambda < -tol {
                return Err(Error::Domain(format!(
                    "negative eigenvalue {lambda:e} with non-integer alpha = {alpha}"
                )));
            }
            Ok(lambda.max(0.0).powf(alpha))
        })
        .collect()
}

/// `M^alpha` via eigendecomposition.
pub fn finite_power(matrix: &FiniteHermitian, alpha: f64) -> Result<FiniteHermitian> {
    finite_power_with(matrix, alpha, PowerOptions::default())
}

pub fn finite_power_with(
    matrix: &FiniteHermitian,
    alpha: f64,
    opts: PowerOptions,
) -> Result<FiniteHermitian> {
    if alpha == 0.0 {
        return Ok(FiniteHermitian::identity(matrix.window()));
    }
    if alpha == 1.0 {
        return Ok(matrix.clone());
    }
    let eig = eigen(matrix)?;
    let powered = powered_eigenvalues(&eig.values, alpha, opts)?;
    let u = &eig.vectors;
    let mut scaled = u.clone();
    for (k, p) in powered.iter().enumerate() {
        scaled.column_mut(k).scale_mut(*p);
    }
    let out = scaled * u.adjoint();
    FiniteHermitian::from_dense(matrix.window(), out)
}

/// Single element `(M^alpha)[m][n]` without forming the full power.
pub fn finite_power_element(
    matrix: &FiniteHermitian,
    alpha: f64,
    m: i64,
    n: i64,
    opts: PowerOptions,
) -> Result<Complex64> {
    let window = matrix.window();
    let (i, j) = match (window.position(m), window.position(n)) {
        (Some(i), Some(j)) => (i, j),
        _ => {
            return Err(Error::Range(format!(
                "element ({m}, {n}) outside window [{}, {}]",
                window.lo(),
                window.hi()
            )))
        }
    };
    if alpha == 0.0 {
        return Ok(if i == j { Complex64::new(1.0, 0.0) } else { Complex64::default() });
    }
    if alpha == 1.0 {
        return Ok(matrix.as_matrix()[(i, j)]);
    }
    let eig = eigen(matrix)?;
    let powered = powered_eigenvalues(&eig.values, alpha, opts)?;
    let u = &eig.vectors;
    let mut acc = Complex64::default();
    for (k, p) in powered.iter().enumerate() {
        acc += u[(i, k)] * u[(j, k)].conj() * *p;
    }
    if i == j {
        acc.im = 0.0;
    }
    Ok(acc)
}

/// `binom(alpha, j)` by the multiplicative recurrence.
pub fn binomial_coefficient(alpha: f64, j: u64) -> f64 {
    let mut c = 1.0;
    for i in 1..=j {
        c *= (alpha - (i - 1) as f64) / i as f64;
        if c == 0.0 {
            break;
        }
    }
    c
}

/// Partial sum `w^alpha * sum_{j < terms} binom(alpha, j) ((M - w I) / w)^j`.
pub fn finite_power_series(
    matrix: &FiniteHermitian,
    alpha: f64,
    w: f64,
    terms: usize,
) -> Result<FiniteHermitian> {
    if terms == 0 {
        return Err(Error::Domain("series needs at least one term".into()));
    }
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::Domain(format!("expansion point w = {w} must be positive")));
    }
    let values = eigenvalues(matrix)?;
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = DEFAULT_RELATIVE_TOL * scale.max(w);
    let min = values.first().copied().unwrap_or(0.0);
    let max = values.last().copied().unwrap_or(0.0);
    if max > w + tol {
        return Err(Error::Domain(format!(
            "largest eigenvalue {max:e} exceeds the expansion point w = {w}"
        )));
    }
    if min < -tol && !is_integer(alpha) {
        return Err(Error::Domain(format!(
            "negative eigenvalue {min:e} with non-integer alpha = {alpha}"
        )));
    }
    if alpha < 0.0 && min <= tol {
        return Err(Error::Singular(format!(
            "eigenvalue {min:e} is within {tol:e} of zero and alpha = {alpha} < 0"
        )));
    }

    let dim = matrix.dim();
    let shift = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(w, 0.0);
    let step = (matrix.as_matrix() - shift).map(|z| z / w);
    let mut power = DMatrix::<Complex64>::identity(dim, dim);
    let mut sum = DMatrix::<Complex64>::identity(dim, dim);
    let mut coeff = 1.0;
    for j in 1..terms {
        coeff *= (alpha - (j - 1) as f64) / j as f64;
        power = &power * &step;
        sum += power.map(|z| z * coeff);
    }
    let out = sum.map(|z| z * w.powf(alpha));
    FiniteHermitian::from_dense(matrix.window(), symmetrize(out))
}
