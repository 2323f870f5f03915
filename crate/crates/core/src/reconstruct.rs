//! Hermitian eigendecomposition by cyclic complex Jacobi rotations, and
//! recovery of `|a alpha>` as the eigenvalue-1 eigenvector of its projector.

use crate::algebra::{MubFamily, ProjectorMatrix, StateVector, C64};
use crate::error::{MubError, Result};

pub const MAX_SWEEPS: usize = 30;
/// Converged once off-diagonal Frobenius mass < this times `||M||_F`.
pub const CONVERGENCE_FACTOR: f64 = 1e-13;
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub dim: usize,
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` pairs with `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<C64>>,
    /// Off-diagonal Frobenius mass before the first sweep and after each sweep.
    pub off_diagonal_history: Vec<f64>,
}

impl EigenDecomposition {
    /// `sum_k lambda_k v_k v_k^dag`.
    pub fn recompose(&self) -> ProjectorMatrix {
        ProjectorMatrix::from_fn(self.dim, |p, q| {
            self.eigenvalues
                .iter()
                .zip(&self.eigenvectors)
                .map(|(&l, v)| v[p] * v[q].conj() * l)
                .sum()
        })
    }

    /// Largest `|<v_j|v_k> - delta_jk|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (j, vj) in self.eigenvectors.iter().enumerate() {
            for (k, vk) in self.eigenvectors.iter().enumerate() {
                let dot: C64 = vj.iter().zip(vk).map(|(x, y)| x.conj() * y).sum();
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

fn off_diagonal_mass(a: &[C64], d: usize) -> f64 {
    let mut sum = 0.0;
    for p in 0..d {
        for q in 0..d {
            if p != q {
                sum += a[p * d + q].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Full spectral decomposition of a Hermitian matrix.
pub fn eigen_hermitian(m: &ProjectorMatrix) -> Result<EigenDecomposition> {
    m.check_hermitian(HERMITIAN_TOL)?;
    let d = m.dim();
    // Symmetrize so rounding in the input cannot leave a non-Hermitian residue.
    let mut a: Vec<C64> = (0..d * d)
        .map(|i| {
            let (p, q) = (i / d, i % d);
            (m.entry(p, q) + m.entry(q, p).conj()) * 0.5
        })
        .collect();
    // Eigenvectors as columns of v, row-major.
    let mut v: Vec<C64> = ProjectorMatrix::identity(d).entries().to_vec();

    let threshold = CONVERGENCE_FACTOR * m.frobenius_norm();
    let mut history = vec![off_diagonal_mass(&a, d)];
    let mut sweeps = 0;
    while *history.last().unwrap() >= threshold && threshold > 0.0 {
        if sweeps == MAX_SWEEPS {
            return Err(MubError::NoConvergence {
                sweeps,
                off_diagonal: *history.last().unwrap(),
            });
        }
        for p in 0..d {
            for q in p + 1..d {
                rotate(&mut a, &mut v, d, p, q);
            }
        }
        sweeps += 1;
        history.push(off_diagonal_mass(&a, d));
    }

    let mut order: Vec<usize> = (0..d).collect();
    // Stable: equal eigenvalues keep column order.
    order.sort_by(|&i, &j| a[j * d + j].re.total_cmp(&a[i * d + i].re));
    Ok(EigenDecomposition {
        dim: d,
        eigenvalues: order.iter().map(|&k| a[k * d + k].re).collect(),
        eigenvectors: order
            .iter()
            .map(|&k| (0..d).map(|r| v[r * d + k]).collect())
            .collect(),
        off_diagonal_history: history,
    })
}

/// Zeroes `a[p][q]` with the unitary `V` acting on coordinates `(p, q)`:
/// columns `(c, -s e^{-i phi})` and `(s e^{i phi}, c)`, where `e^{i phi}`
/// is the phase of the pivot. Updates `a <- V^dag a V` and `v <- v V`.
fn rotate(a: &mut [C64], v: &mut [C64], d: usize, p: usize, q: usize) {
    let g = a[p * d + q];
    let r = g.norm();
    if r == 0.0 {
        return;
    }
    let phase = g / r;
    let app = a[p * d + p].re;
    let aqq = a[q * d + q].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.is_finite() {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    } else {
        0.0
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let vpq = phase * s; // V[p][q]
    let vqp = -phase.conj() * s; // V[q][p]

    for k in 0..d {
        let (kp, kq) = (a[k * d + p], a[k * d + q]);
        a[k * d + p] = kp * c + kq * vqp;
        a[k * d + q] = kp * vpq + kq * c;
        let (kp, kq) = (v[k * d + p], v[k * d + q]);
        v[k * d + p] = kp * c + kq * vqp;
        v[k * d + q] = kp * vpq + kq * c;
    }
    for k in 0..d {
        let (pk, qk) = (a[p * d + k], a[q * d + k]);
        a[p * d + k] = pk * c + qk * vqp.conj();
        a[q * d + k] = pk * vpq.conj() + qk * c;
    }
    a[p * d + q] = C64::new(0.0, 0.0);
    a[q * d + p] = C64::new(0.0, 0.0);
    a[p * d + p].im = 0.0;
    a[q * d + q].im = 0.0;
}

/// The eigenvalue-1 eigenvector of a rank-1 projector, in canonical phase.
pub fn state_from_projector(m: &ProjectorMatrix, tol: f64) -> Result<StateVector> {
    let eig = eigen_hermitian(m)?;
    let top = eig.eigenvalues[0];
    if eig.dim > 1 {
        let gap = top - eig.eigenvalues[1];
        if gap < tol {
            return Err(MubError::DegenerateTop { gap, tol });
        }
    }
    if (top - 1.0).abs() > tol {
        return Err(MubError::NotRankOne(format!(
            "top eigenvalue {top} is not within {tol:e} of 1"
        )));
    }
    if let Some(&rest) = eig.eigenvalues[1..]
        .iter()
        .find(|l| l.abs() > tol)
    {
        return Err(MubError::NotRankOne(format!(
            "eigenvalue {rest} is not within {tol:e} of 0"
        )));
    }
    let state = StateVector::new(eig.eigenvectors[0].clone())?;
    Ok(state.canonical_phase())
}

/// One state per projector, grouped by basis.
pub fn reconstruct_all(f: &MubFamily, tol: f64) -> Result<Vec<Vec<StateVector>>> {
    f.bases()
        .iter()
        .enumerate()
        .map(|(a, basis)| {
            basis
                .iter()
                .enumerate()
                .map(|(alpha, m)| state_from_projector(m, tol).map_err(|e| e.at(a, alpha)))
                .collect()
        })
        .collect()
}
