//! Infinite sparse Hermitian matrices and their finite sections.
//!
//! An infinite matrix is presented lazily by a row generator: given a row
//! index it returns the nonzero entries of that row. A [`Window`] `[-P, Q]`
//! selects a finite section, and a [`BoundarySpec`] adds a Hermitian
//! correction at the four corner positions `{-P, Q} x {-P, Q}`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral;

/// Largest admissible `P` or `Q`. Indices up to this size are exact in `f64`.
pub const MAX_WINDOW_EXTENT: i64 = 1 << 53;

/// Relative tolerance of the Hermitian spot-check on generated rows.
const HERMITIAN_TOL: f64 = 1e-12;

/// Truncation window `[-P, Q]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    p: i64,
    q: i64,
}

impl Window {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if p < 0 || q < 0 {
            return Err(Error::Range(format!(
                "window extents must be nonnegative, got P = {p}, Q = {q}"
            )));
        }
        if p > MAX_WINDOW_EXTENT || q > MAX_WINDOW_EXTENT {
            return Err(Error::Range(format!(
                "window extents P = {p}, Q = {q} exceed {MAX_WINDOW_EXTENT}"
            )));
        }
        Ok(Window { p, q })
    }

    /// Symmetric window `[-r, r]`.
    pub fn symmetric(r: i64) -> Result<Self> {
        Window::new(r, r)
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// Lowest index, `-P`.
    pub fn lo(&self) -> i64 {
        -self.p
    }

    /// Highest index, `Q`.
    pub fn hi(&self) -> i64 {
        self.q
    }

    /// `P + Q + 1`.
    pub fn dim(&self) -> usize {
        (self.p + self.q + 1) as usize
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo() <= i && i <= self.hi()
    }

    /// Strictly between `-P` and `Q`.
    pub fn is_interior(&self, i: i64) -> bool {
        self.lo() < i && i < self.hi()
    }

    pub fn is_corner(&self, i: i64) -> bool {
        i == self.lo() || i == self.hi()
    }

    /// Zero-based storage position of a logical index.
    pub fn position(&self, i: i64) -> Option<usize> {
        self.contains(i).then(|| (i - self.lo()) as usize)
    }

    pub fn index_at(&self, pos: usize) -> i64 {
        self.lo() + pos as i64
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.lo()..=self.hi()
    }
}

/// Spectral bounds `c <= inf sigma(W)`, `norm_bound >= ||W||` and the boundary
/// inflation `d`. The derived `w = norm_bound + d` bounds every truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEnvelope {
    c: f64,
    norm_bound: f64,
    d: f64,
}

impl SpectralEnvelope {
    pub fn new(c: f64, norm_bound: f64, d: f64) -> Result<Self> {
        if !(c.is_finite() && norm_bound.is_finite() && d.is_finite()) {
            return Err(Error::InvalidEnvelope(
                "c, norm_bound and d must be finite".into(),
            ));
        }
        if c < 0.0 {
            return Err(Error::InvalidEnvelope(format!("c = {c} is negative")));
        }
        if norm_bound <= 0.0 {
            return Err(Error::InvalidEnvelope(format!(
                "norm_bound = {norm_bound} must be positive"
            )));
        }
        if c > norm_bound {
            return Err(Error::InvalidEnvelope(format!(
                "c = {c} exceeds norm_bound = {norm_bound}"
            )));
        }
        if d < 0.0 {
            return Err(Error::InvalidEnvelope(format!("d = {d} is negative")));
        }
        Ok(SpectralEnvelope { c, norm_bound, d })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Upper spectral bound shared by `W` and all of its truncations.
    pub fn w(&self) -> f64 {
        self.norm_bound + self.d
    }
}

/// Source of matrix rows. Implementations must be pure: the same index
/// always yields the same entries.
pub trait RowSource: Send + Sync {
    /// Nonzero entries `(column, value)` of row `m`, in any order.
    fn row(&self, m: i64) -> Vec<(i64, Complex64)>;
}

impl<F> RowSource for F
where
    F: Fn(i64) -> Vec<(i64, Complex64)> + Send + Sync,
{
    fn row(&self, m: i64) -> Vec<(i64, Complex64)> {
        self(m)
    }
}

/// An infinite sparse Hermitian matrix given by a row generator.
#[derive(Clone)]
pub struct InfiniteMatrixSpec {
    rows: Arc<dyn RowSource>,
    sparsity_bound: usize,
    envelope: SpectralEnvelope,
}

impl fmt::Debug for InfiniteMatrixSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InfiniteMatrixSpec")
            .field("sparsity_bound", &self.sparsity_bound)
            .field("envelope", &self.envelope)
            .finish_non_exhaustive()
    }
}

impl InfiniteMatrixSpec {
    pub fn new<R>(rows: R, sparsity_bound: usize, envelope: SpectralEnvelope) -> Result<Self>
    where
        R: RowSource + 'static,
    {
        if sparsity_bound == 0 {
            return Err(Error::MalformedSpec("sparsity bound must be positive".into()));
        }
        Ok(InfiniteMatrixSpec {
            rows: Arc::new(rows),
            sparsity_bound,
            envelope,
        })
    }

    /// Translation-invariant band matrix with `W[m][m + offsets[i]] = stencil[i]`.
    ///
    /// Every stored stencil entry counts as structurally nonzero, including
    /// explicit zeros.
    pub fn banded(
        offsets: &[i64],
        stencil: &[Complex64],
        envelope: SpectralEnvelope,
    ) -> Result<Self> {
        if offsets.len() != stencil.len() {
            return Err(Error::MalformedSpec(format!(
                "{} offsets but {} stencil values",
                offsets.len(),
                stencil.len()
            )));
        }
        if offsets.is_empty() {
            return Err(Error::MalformedSpec("empty stencil".into()));
        }
        let band: BTreeMap<i64, Complex64> = offsets.iter().copied().zip(stencil.iter().copied()).collect();
        if band.len() != offsets.len() {
            return Err(Error::MalformedSpec("duplicate stencil offsets".into()));
        }
        for (&o, &v) in &band {
            if o.unsigned_abs() > MAX_WINDOW_EXTENT as u64 {
                return Err(Error::Range(format!("stencil offset {o} out of range")));
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::MalformedSpec(format!("non-finite stencil value at offset {o}")));
            }
            match band.get(&-o) {
                Some(&u) if hermitian_pair(v, u) => {}
                _ => {
                    return Err(Error::MalformedSpec(format!(
                        "stencil is not Hermitian at offset {o}"
                    )))
                }
            }
        }
        let entries: Vec<(i64, Complex64)> = band.into_iter().collect();
        let k = entries.len();
        let rows = move |m: i64| entries.iter().map(|&(o, v)| (m + o, v)).collect();
        InfiniteMatrixSpec::new(rows, k, envelope)
    }

    pub fn sparsity_bound(&self) -> usize {
        self.sparsity_bound
    }

    pub fn envelope(&self) -> SpectralEnvelope {
        self.envelope
    }

    /// Same generator with a different envelope.
    pub fn with_envelope(&self, envelope: SpectralEnvelope) -> Self {
        InfiniteMatrixSpec {
            envelope,
            ..self.clone()
        }
    }

    /// Validated row `m`, sorted by column.
    pub fn row(&self, m: i64) -> Result<Vec<(i64, Complex64)>> {
        if m.unsigned_abs() > 2 * MAX_WINDOW_EXTENT as u64 {
            return Err(Error::Range(format!("row index {m} out of range")));
        }
        let mut row = self.rows.row(m);
        if row.len() > self.sparsity_bound {
            return Err(Error::MalformedSpec(format!(
                "row {m} has {} entries, sparsity bound is {}",
                row.len(),
                self.sparsity_bound
            )));
        }
        row.sort_by_key(|&(n, _)| n);
        for pair in row.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::MalformedSpec(format!(
                    "row {m} repeats column {}",
                    pair[0].0
                )));
            }
        }
        if let Some(&(n, _)) = row.iter().find(|(_, v)| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::MalformedSpec(format!("non-finite entry at ({m}, {n})")));
        }
        Ok(row)
    }

    /// `W[m][n]`, zero off the row support.
    pub fn entry(&self, m: i64, n: i64) -> Result<Complex64> {
        let row = self.row(m)?;
        Ok(row
            .binary_search_by_key(&n, |&(col, _)| col)
            .map(|i| row[i].1)
            .unwrap_or_default())
    }
}

/// Free-function form of [`InfiniteMatrixSpec::entry`].
pub fn entry(spec: &InfiniteMatrixSpec, m: i64, n: i64) -> Result<Complex64> {
    spec.entry(m, n)
}

fn hermitian_pair(a: Complex64, b: Complex64) -> bool {
    let scale = a.norm().max(b.norm()).max(1.0);
    (a - b.conj()).norm() <= HERMITIAN_TOL * scale
}

/// Corner correction `D`, supported on `{-P, Q} x {-P, Q}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundarySpec {
    entries: BTreeMap<(i64, i64), Complex64>,
}

impl BoundarySpec {
    pub fn zero() -> Self {
        BoundarySpec::default()
    }

    /// Entries are keyed by logical `(row, col)`; both orientations of an
    /// off-diagonal pair must be present and conjugate.
    pub fn new<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((i64, i64), Complex64)>,
    {
        let mut map = BTreeMap::new();
        for (key, v) in entries {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidBoundary(format!("non-finite entry at {key:?}")));
            }
            if map.insert(key, v).is_some() {
                return Err(Error::InvalidBoundary(format!("duplicate entry at {key:?}")));
            }
        }
        for (&(i, j), &v) in &map {
            let mirror = map.get(&(j, i)).copied().unwrap_or_default();
            if !hermitian_pair(v, mirror) {
                return Err(Error::InvalidBoundary(format!(
                    "entries at ({i}, {j}) and ({j}, {i}) are not conjugate"
                )));
            }
        }
        Ok(BoundarySpec { entries: map })
    }

    pub fn entries(&self) -> impl Iterator<Item = ((i64, i64), Complex64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn get(&self, i: i64, j: i64) -> Complex64 {
        self.entries.get(&(i, j)).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|v| *v == Complex64::default())
    }

    fn check_support(&self, window: &Window) -> Result<()> {
        for &(i, j) in self.entries.keys() {
            if !(window.is_corner(i) && window.is_corner(j)) {
                return Err(Error::InvalidBoundary(format!(
                    "entry ({i}, {j}) is not a corner of the window [{}, {}]",
                    window.lo(),
                    window.hi()
                )));
            }
        }
        Ok(())
    }
}

/// Dense Hermitian matrix indexed by a window.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteHermitian {
    window: Window,
    data: DMatrix<Complex64>,
}

impl FiniteHermitian {
    /// Wraps a dense matrix, symmetrizing it to `(A + A^H) / 2`.
    pub fn from_dense(window: Window, data: DMatrix<Complex64>) -> Result<Self> {
        let dim = window.dim();
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::Range(format!(
                "{}x{} matrix does not fit window of dimension {dim}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(FiniteHermitian {
            window,
            data: symmetrize(data),
        })
    }

    pub fn identity(window: Window) -> Self {
        let dim = window.dim();
        FiniteHermitian {
            window,
            data: DMatrix::identity(dim, dim),
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// Element at logical indices; zero outside the window.
    pub fn get(&self, m: i64, n: i64) -> Complex64 {
        match (self.window.position(m), self.window.position(n)) {
            (Some(i), Some(j)) => self.data[(i, j)],
            _ => Complex64::default(),
        }
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    /// `max |A[m][n] - conj(A[n][m])|`.
    pub fn hermitian_defect(&self) -> f64 {
        let dim = self.dim();
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

pub(crate) fn symmetrize(data: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let adjoint = data.adjoint();
    (data + adjoint).map(|z| z * 0.5)
}

/// Entries of row `m` of the truncation `W_PQ`, dense over the window.
pub(crate) fn assemble_row(
    spec: &InfiniteMatrixSpec,
    window: &Window,
    boundary: &BoundarySpec,
    m: i64,
) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::default(); window.dim()];
    for (n, v) in spec.row(m)? {
        if let Some(j) = window.position(n) {
            out[j] = v;
        }
    }
    if window.is_corner(m) {
        for corner in [window.lo(), window.hi()] {
            let d = boundary.get(m, corner);
            if let Some(j) = window.position(corner) {
                out[j] += d;
            }
            // P = Q = 0 collapses both corners onto one index
            if window.lo() == window.hi() {
                break;
            }
        }
    }
    Ok(out)
}

/// Builds the finite section `W_PQ` with corner correction `D`.
pub fn truncate(
    spec: &InfiniteMatrixSpec,
    window: Window,
    boundary: &BoundarySpec,
) -> Result<FiniteHermitian> {
    boundary.check_support(&window)?;
    let dim = window.dim();
    let mut data = DMatrix::<Complex64>::zeros(dim, dim);
    for (i, m) in window.indices().enumerate() {
        for (n, v) in spec.row(m)? {
            if let Some(j) = window.position(n) {
                data[(i, j)] = v;
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            if !hermitian_pair(data[(i, j)], data[(j, i)]) {
                return Err(Error::MalformedSpec(format!(
                    "generator is not Hermitian at ({}, {})",
                    window.index_at(i),
                    window.index_at(j)
                )));
            }
        }
    }
    for ((r, s), d) in boundary.entries() {
        let (i, j) = (window.position(r).unwrap(), window.position(s).unwrap());
        data[(i, j)] += d;
    }
    FiniteHermitian::from_dense(window, data)
}

/// Outcome of checking `sigma(W_PQ) ⊂ [c, norm_bound + d]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub lower_limit: f64,
    pub upper_limit: f64,
    pub tol: f64,
    pub passed: bool,
}

pub fn validate_truncation(
    matrix: &FiniteHermitian,
    envelope: &SpectralEnvelope,
    tol: f64,
) -> Result<ValidationReport> {
    let values = spectral::eigenvalues(matrix)?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lower = envelope.c();
    let upper = envelope.w();
    Ok(ValidationReport {
        min_eigenvalue: min,
        max_eigenvalue: max,
        lower_limit: lower,
        upper_limit: upper,
        tol,
        passed: min >= lower - tol && max <= upper + tol,
    })
}
