//! Dense complex linear algebra for small Hermitian matrices.
//!
//! A projector `M` on `C^d` is expanded on the matrix units `E_pq = |p><q|`,
//! so its expansion coefficients are just its entries. Flattening those
//! entries in row-major ("dictionary") order gives a vector in `C^{d^2}`
//! whose ordinary inner product equals the Hilbert-Schmidt product
//! `Tr(M1 M2)` of the matrices.

use crate::error::{MubError, Result};
use num_complex::Complex64;

pub type C64 = Complex64;

/// Tolerance for exact algebraic identities (roundoff only).
pub const ALGEBRA_TOL: f64 = 1e-12;
/// Tolerance on the norm of state vectors handed to [`projector_from_state`].
pub const NORM_TOL: f64 = 1e-10;

pub(crate) fn check_finite(values: &[C64]) -> Result<()> {
    match values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        Some(i) => Err(MubError::NonFinite(i)),
        None => Ok(()),
    }
}

fn exact_sqrt(n: usize) -> Option<usize> {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    (r * r == n).then_some(r)
}

/// A dense `d x d` complex matrix, row-major. Used for projectors `M_{a alpha}`
/// and, more loosely, for any small Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl ProjectorMatrix {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(MubError::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if entries.len() != dim * dim {
            return Err(MubError::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        check_finite(&entries)?;
        Ok(Self { dim, entries })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for p in 0..dim {
            for q in 0..dim {
                entries.push(f(p, q));
            }
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| C64::new(0.0, 0.0))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |p, q| C64::new(if p == q { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |p, q| {
            C64::new(if p == q { values[p] } else { 0.0 }, 0.0)
        })
    }

    /// Builds a matrix from rows, e.g. `[[1, 0], [0, 0]]`.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let entries: Vec<C64> = rows.iter().flatten().copied().collect();
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, p: usize, q: usize) -> C64 {
        self.entries[p * self.dim + q]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|p| self.entry(p, p)).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |p, q| self.entry(q, p).conj())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        same_dim(self.dim, other.dim)?;
        let d = self.dim;
        Ok(Self::from_fn(d, |p, q| {
            (0..d).map(|k| self.entry(p, k) * other.entry(k, q)).sum()
        }))
    }

    /// Largest `|M_pq - conj(M_qp)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for p in 0..d {
            for q in p..d {
                worst = worst.max((self.entry(p, q) - self.entry(q, p).conj()).norm());
            }
        }
        worst
    }

    /// Fails on the first pair `(p, q)` violating Hermiticity beyond `tol`.
    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let d = self.dim;
        for p in 0..d {
            for q in p..d {
                let residual = (self.entry(p, q) - self.entry(q, p).conj()).norm();
                if residual > tol {
                    return Err(MubError::NotHermitian {
                        what: "matrix",
                        p,
                        q,
                        residual,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(MubError::DimensionMismatch { expected, found })
    }
}

/// The matrix unit `E_pq = |p><q|`.
pub fn matrix_unit(dim: usize, p: usize, q: usize) -> ProjectorMatrix {
    ProjectorMatrix::from_fn(dim, |r, s| {
        C64::new(if r == p && s == q { 1.0 } else { 0.0 }, 0.0)
    })
}

/// A projector flattened to `C^{d^2}` in dictionary order
/// `(w_00, w_01, ..., w_{d-1,d-1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct WVector {
    dim: usize,
    components: Vec<C64>,
}

impl WVector {
    /// Rejects lengths that are not a nonzero perfect square.
    pub fn new(components: Vec<C64>) -> Result<Self> {
        let dim = exact_sqrt(components.len())
            .filter(|&d| d > 0)
            .ok_or(MubError::NotPerfectSquare(components.len()))?;
        check_finite(&components)?;
        Ok(Self { dim, components })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[C64] {
        &self.components
    }

    pub fn component(&self, p: usize, q: usize) -> C64 {
        self.components[p * self.dim + q]
    }

    pub fn norm(&self) -> f64 {
        self.components
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

pub fn flatten(m: &ProjectorMatrix) -> WVector {
    WVector {
        dim: m.dim,
        components: m.entries.clone(),
    }
}

pub fn unflatten(w: &WVector) -> Result<ProjectorMatrix> {
    unflatten_with_tol(w, ALGEBRA_TOL)
}

pub fn unflatten_with_tol(w: &WVector, tol: f64) -> Result<ProjectorMatrix> {
    let d = w.dim;
    for p in 0..d {
        for q in p..d {
            let residual = (w.component(p, q) - w.component(q, p).conj()).norm();
            if residual > tol {
                return Err(MubError::NotHermitian {
                    what: "w-vector",
                    p,
                    q,
                    residual,
                });
            }
        }
    }
    Ok(ProjectorMatrix {
        dim: d,
        entries: w.components.clone(),
    })
}

/// `sum_{p,q} conj(x_pq) y_pq`.
pub fn w_inner(x: &WVector, y: &WVector) -> Result<C64> {
    same_dim(x.dim, y.dim)?;
    Ok(inner(&x.components, &y.components))
}

pub(crate) fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// `Tr(m1 m2)`. Returns the real part; the imaginary part vanishes for
/// Hermitian arguments and is reported by [`trace_product_complex`].
pub fn trace_product(m1: &ProjectorMatrix, m2: &ProjectorMatrix) -> Result<f64> {
    trace_product_complex(m1, m2).map(|z| z.re)
}

pub fn trace_product_complex(m1: &ProjectorMatrix, m2: &ProjectorMatrix) -> Result<C64> {
    same_dim(m1.dim, m2.dim)?;
    let d = m1.dim;
    let mut acc = C64::new(0.0, 0.0);
    for p in 0..d {
        for q in 0..d {
            acc += m1.entry(p, q) * m2.entry(q, p);
        }
    }
    Ok(acc)
}

/// A vector of `C^d`. Normalization is checked where it matters, not on
/// construction, so intermediate results can be held in this type.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(MubError::ZeroNorm);
        }
        check_finite(&amplitudes)?;
        Ok(Self { amplitudes })
    }

    /// Scales to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let s = Self::new(amplitudes)?;
        let norm = s.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(MubError::ZeroNorm);
        }
        Ok(Self {
            amplitudes: s.amplitudes.into_iter().map(|z| z / norm).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        same_dim(self.dim(), other.dim())?;
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// Multiplies by the unit phase that makes the largest-modulus component
    /// real and non-negative. Moduli within a relative `1e-9` of the maximum
    /// count as tied; the lowest such index wins.
    pub fn canonical_phase(&self) -> Self {
        let max = self
            .amplitudes
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if max == 0.0 {
            return self.clone();
        }
        let pivot = self
            .amplitudes
            .iter()
            .position(|z| z.norm() >= max * (1.0 - 1e-9))
            .unwrap_or(0);
        let z = self.amplitudes[pivot];
        let phase = z.conj() / z.norm();
        let mut amplitudes: Vec<C64> = self.amplitudes.iter().map(|a| a * phase).collect();
        amplitudes[pivot] = C64::new(amplitudes[pivot].norm(), 0.0);
        Self { amplitudes }
    }

    /// Largest `|self_k - other_k|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

/// `|s><s|`, the rank-1 projector onto a unit vector.
pub fn projector_from_state(s: &StateVector) -> Result<ProjectorMatrix> {
    let defect = (s.norm_sqr() - 1.0).abs();
    if defect > NORM_TOL {
        return Err(MubError::NotNormalized(defect));
    }
    let a = s.amplitudes();
    Ok(ProjectorMatrix::from_fn(a.len(), |p, q| a[p] * a[q].conj()))
}

/// A collection of bases, each holding `d` projectors. Basis `a` is the
/// `a`-th entry; vector `alpha` is the `alpha`-th projector within it.
#[derive(Clone, Debug, PartialEq)]
pub struct MubFamily {
    dim: usize,
    bases: Vec<Vec<ProjectorMatrix>>,
}

impl MubFamily {
    pub fn new(dim: usize, bases: Vec<Vec<ProjectorMatrix>>) -> Result<Self> {
        if bases.is_empty() || dim == 0 {
            return Err(MubError::EmptyFamily);
        }
        if bases.len() > dim + 1 {
            return Err(MubError::IndexOutOfRange {
                name: "num_bases",
                value: bases.len() as i64,
                bound: dim as i64 + 2,
            });
        }
        for basis in &bases {
            same_dim(dim, basis.len())?;
            for m in basis {
                same_dim(dim, m.dim())?;
            }
        }
        Ok(Self { dim, bases })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_bases(&self) -> usize {
        self.bases.len()
    }

    pub fn bases(&self) -> &[Vec<ProjectorMatrix>] {
        &self.bases
    }

    pub fn projector(&self, a: usize, alpha: usize) -> &ProjectorMatrix {
        &self.bases[a][alpha]
    }

    /// Projectors with their `(a, alpha)` labels, basis-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &ProjectorMatrix)> {
        self.bases
            .iter()
            .enumerate()
            .flat_map(|(a, basis)| basis.iter().enumerate().map(move |(al, m)| (a, al, m)))
    }

    pub fn replace(&mut self, a: usize, alpha: usize, m: ProjectorMatrix) -> Result<()> {
        same_dim(self.dim, m.dim())?;
        self.bases[a][alpha] = m;
        Ok(())
    }
}
