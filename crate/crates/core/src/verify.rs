//! Certificates for candidate MUB families.
//!
//! [`verify_family`] works in `C^{d^2}`: with `w(a alpha)` the flattened
//! projectors it checks `w(a alpha).w(a beta) = delta` and
//! `w(a alpha).w(b beta) = 1/d` for `a != b`, plus unit trace, Hermiticity
//! and positive semidefiniteness. [`verify_states`] checks the original
//! criterion `|<a alpha|b beta>|^2` on state vectors and serves as an
//! independent route to the same verdict.

use crate::algebra::{inner, same_dim, w_inner, MubFamily, ProjectorMatrix, StateVector, WVector};
use crate::error::{MubError, Result};
use crate::reconstruct::eigen_hermitian;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub dim: usize,
    pub num_bases: usize,
    pub tolerance: f64,
    /// Worst `|w(a alpha).w(a beta) - delta_{alpha beta}|`.
    pub max_self_residual: f64,
    /// Worst `|w(a alpha).w(b beta) - 1/d|` over `a != b`.
    pub max_cross_residual: f64,
    /// Worst `|Tr M - 1|`.
    pub trace_residual: f64,
    /// Worst entrywise Hermiticity defect, or imaginary part of an inner product.
    pub hermiticity_residual: f64,
    pub psd_min_eigenvalue: f64,
    /// Worst deviation of a cross-basis angle from `acos(1/d)`, in radians.
    pub angle_check: f64,
    /// Number of individual checks exceeding the tolerance.
    pub violations: usize,
    pub passed: bool,
    /// Full Gram matrix of (real) inner products, basis-major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<f64>>>,
}

impl VerificationReport {
    pub fn summary(&self) -> String {
        format!(
            "d={} bases={} tol={:e}: self={:.3e} cross={:.3e} trace={:.3e} herm={:.3e} \
             min_eig={:.3e} angle={:.3e} violations={} -> {}",
            self.dim,
            self.num_bases,
            self.tolerance,
            self.max_self_residual,
            self.max_cross_residual,
            self.trace_residual,
            self.hermiticity_residual,
            self.psd_min_eigenvalue,
            self.angle_check,
            self.violations,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }

    fn finish(mut self) -> Self {
        let tol = self.tolerance;
        self.passed = self.violations == 0
            && [
                self.max_self_residual,
                self.max_cross_residual,
                self.trace_residual,
                self.hermiticity_residual,
                self.angle_check,
            ]
            .iter()
            .all(|&r| r <= tol)
            && self.psd_min_eigenvalue >= -tol;
        self
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub tol: f64,
    pub full_gram: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            full_gram: false,
        }
    }
}

/// `acos(Re(x.y) / (|x| |y|))` in radians.
pub fn pairwise_angle(x: &WVector, y: &WVector) -> Result<f64> {
    let (nx, ny) = (x.norm(), y.norm());
    if nx == 0.0 || ny == 0.0 {
        return Err(MubError::ZeroNorm);
    }
    let cos = w_inner(x, y)?.re / (nx * ny);
    Ok(cos.clamp(-1.0, 1.0).acos())
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(MubError::InvalidConfig(format!("tolerance must be positive, got {tol}")))
    }
}

pub fn verify_family(f: &MubFamily, tol: f64) -> Result<VerificationReport> {
    verify_family_with(
        f,
        &VerifyOptions {
            tol,
            full_gram: false,
        },
    )
}

/// Accumulated worst cases from a set of pair checks.
#[derive(Clone, Copy, Default)]
struct PairStats {
    self_res: f64,
    cross_res: f64,
    imag: f64,
    angle: f64,
    violations: usize,
}

impl PairStats {
    fn merge(self, o: Self) -> Self {
        Self {
            self_res: self.self_res.max(o.self_res),
            cross_res: self.cross_res.max(o.cross_res),
            imag: self.imag.max(o.imag),
            angle: self.angle.max(o.angle),
            violations: self.violations + o.violations,
        }
    }
}

pub fn verify_family_with(f: &MubFamily, opts: &VerifyOptions) -> Result<VerificationReport> {
    check_tol(opts.tol)?;
    let tol = opts.tol;
    let d = f.dim();
    let labelled: Vec<(usize, &ProjectorMatrix)> = f.iter().map(|(a, _, m)| (a, m)).collect();
    for (_, m) in &labelled {
        same_dim(d, m.dim())?;
    }
    let norms: Vec<f64> = labelled.iter().map(|(_, m)| m.frobenius_norm()).collect();
    let unbiased = 1.0 / d as f64;
    let ideal_angle = unbiased.acos();

    let rows: Vec<(PairStats, Vec<f64>)> = (0..labelled.len())
        .into_par_iter()
        .map(|i| {
            let (a, mi) = labelled[i];
            let alpha = i % d;
            let mut stats = PairStats::default();
            let mut gram_row = Vec::new();
            for (j, &(b, mj)) in labelled.iter().enumerate() {
                let z = inner(mi.entries(), mj.entries());
                if opts.full_gram {
                    gram_row.push(z.re);
                }
                if j < i {
                    continue;
                }
                stats.imag = stats.imag.max(z.im.abs());
                let residual;
                if a == b {
                    let target = if alpha == j % d { 1.0 } else { 0.0 };
                    residual = (z.re - target).abs();
                    stats.self_res = stats.self_res.max(residual);
                } else {
                    residual = (z.re - unbiased).abs();
                    stats.cross_res = stats.cross_res.max(residual);
                    let denom = norms[i] * norms[j];
                    let angle = if denom > 0.0 {
                        (z.re / denom).clamp(-1.0, 1.0).acos()
                    } else {
                        std::f64::consts::FRAC_PI_2
                    };
                    stats.angle = stats.angle.max((angle - ideal_angle).abs());
                }
                if residual > tol {
                    stats.violations += 1;
                }
            }
            (stats, gram_row)
        })
        .collect();

    let stats = rows
        .iter()
        .fold(PairStats::default(), |acc, (s, _)| acc.merge(*s));

    let mut trace_residual = 0.0f64;
    let mut hermiticity = stats.imag;
    let mut min_eig = f64::INFINITY;
    let mut violations = stats.violations;
    for (_, m) in &labelled {
        let tr = (m.trace() - 1.0).norm();
        let herm = m.hermiticity_residual();
        trace_residual = trace_residual.max(tr);
        hermiticity = hermiticity.max(herm);
        let hermitian_part = ProjectorMatrix::from_fn(d, |p, q| (m.entry(p, q) + m.entry(q, p).conj()) * 0.5);
        let lowest = eigen_hermitian(&hermitian_part)?.min_eigenvalue();
        min_eig = min_eig.min(lowest);
        violations += [tr > tol, herm > tol, lowest < -tol]
            .iter()
            .filter(|&&bad| bad)
            .count();
    }

    Ok(VerificationReport {
        dim: d,
        num_bases: f.num_bases(),
        tolerance: tol,
        max_self_residual: stats.self_res,
        max_cross_residual: stats.cross_res,
        trace_residual,
        hermiticity_residual: hermiticity,
        psd_min_eigenvalue: min_eig,
        angle_check: stats.angle,
        violations,
        passed: false,
        gram: opts
            .full_gram
            .then(|| rows.into_iter().map(|(_, row)| row).collect()),
    }
    .finish())
}

/// Checks `|<a alpha|b beta>|^2 = delta_ab delta_{alpha beta} + (1 - delta_ab)/d`
/// directly on state vectors.
pub fn verify_states(bases: &[Vec<StateVector>], tol: f64) -> Result<VerificationReport> {
    check_tol(tol)?;
    let labelled: Vec<(usize, usize, &StateVector)> = bases
        .iter()
        .enumerate()
        .flat_map(|(a, basis)| basis.iter().enumerate().map(move |(al, s)| (a, al, s)))
        .collect();
    let d = labelled.first().ok_or(MubError::EmptyFamily)?.2.dim();
    let norm_tol = tol.max(crate::algebra::NORM_TOL);
    let mut norm_residual = 0.0f64;
    for (_, _, s) in &labelled {
        same_dim(d, s.dim())?;
        let defect = (s.norm_sqr() - 1.0).abs();
        if defect > norm_tol {
            return Err(MubError::NotNormalized(defect));
        }
        norm_residual = norm_residual.max(defect);
    }

    let unbiased = 1.0 / d as f64;
    let ideal_angle = unbiased.acos();
    let mut stats = PairStats::default();
    for (i, &(a, alpha, x)) in labelled.iter().enumerate() {
        for &(b, beta, y) in &labelled[i..] {
            let overlap = x.inner(y)?.norm_sqr();
            let residual;
            if a == b {
                let target = if alpha == beta { 1.0 } else { 0.0 };
                residual = (overlap - target).abs();
                stats.self_res = stats.self_res.max(residual);
            } else {
                residual = (overlap - unbiased).abs();
                stats.cross_res = stats.cross_res.max(residual);
                let angle = overlap.clamp(-1.0, 1.0).acos();
                stats.angle = stats.angle.max((angle - ideal_angle).abs());
            }
            if residual > tol {
                stats.violations += 1;
            }
        }
    }

    Ok(VerificationReport {
        dim: d,
        num_bases: bases.len(),
        tolerance: tol,
        max_self_residual: stats.self_res,
        max_cross_residual: stats.cross_res,
        trace_residual: norm_residual,
        hermiticity_residual: 0.0,
        psd_min_eigenvalue: 0.0,
        angle_check: stats.angle,
        violations: stats.violations,
        passed: false,
        gram: None,
    }
    .finish())
}
