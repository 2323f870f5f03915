//! Closed-form complete families for prime `d`.
//!
//! For `a, alpha, p, q` in `Z/dZ` the coefficient
//! `w_pq(a alpha) = (1/d) exp(i pi (p - q)[(d - 2 - p - q) a - 2 alpha] / d)`
//! gives `d` mutually unbiased bases; the computational basis
//! `w_pq(d alpha) = delta_pq delta_p,alpha` completes the set.

use crate::algebra::{MubFamily, ProjectorMatrix, C64};
use crate::error::{MubError, Result};
use crate::gauss::rational_phase;
use crate::verify::verify_family;

/// Tolerance a freshly built family must verify at.
pub const CONSTRUCTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstructionRequest {
    pub d: usize,
    /// Append the computational basis as `a = d`.
    pub include_computational: bool,
}

impl ConstructionRequest {
    pub fn complete(d: usize) -> Self {
        Self {
            d,
            include_computational: true,
        }
    }
}

/// Trial division; exact for every `u64` (slow beyond ~`2^50`).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 || n % 3 == 0 {
        return false;
    }
    let mut k = 5u64;
    while k.saturating_mul(k) <= n {
        if n % k == 0 || n % (k + 2) == 0 {
            return false;
        }
        k += 6;
    }
    true
}

fn index_in_range(name: &'static str, value: usize, d: usize) -> Result<()> {
    if value < d {
        Ok(())
    } else {
        Err(MubError::IndexOutOfRange {
            name,
            value: value as i64,
            bound: d as i64,
        })
    }
}

fn require_prime(d: usize) -> Result<()> {
    if is_prime(d as u64) {
        Ok(())
    } else {
        Err(MubError::NotPrime(d as i64))
    }
}

/// The integer `(p - q)[(d - 2 - p - q) a - 2 alpha]`; the phase is `pi` times
/// this over `d`.
fn phase_numerator(d: i128, a: i128, alpha: i128, p: i128, q: i128) -> i128 {
    (p - q) * ((d - 2 - p - q) * a - 2 * alpha)
}

fn coefficient_unchecked(d: usize, a: usize, alpha: usize, p: usize, q: usize) -> C64 {
    let n = phase_numerator(d as i128, a as i128, alpha as i128, p as i128, q as i128);
    rational_phase(n, d as i128) / d as f64
}

pub fn w_coefficient(d: usize, a: usize, alpha: usize, p: usize, q: usize) -> Result<C64> {
    require_prime(d)?;
    index_in_range("a", a, d)?;
    index_in_range("alpha", alpha, d)?;
    index_in_range("p", p, d)?;
    index_in_range("q", q, d)?;
    Ok(coefficient_unchecked(d, a, alpha, p, q))
}

pub fn computational_coefficient(d: usize, alpha: usize, p: usize, q: usize) -> Result<C64> {
    index_in_range("alpha", alpha, d)?;
    index_in_range("p", p, d)?;
    index_in_range("q", q, d)?;
    let one = p == q && p == alpha;
    Ok(C64::new(if one { 1.0 } else { 0.0 }, 0.0))
}

/// Builds and verifies the family. Never returns a family that fails
/// verification at [`CONSTRUCTION_TOL`].
pub fn build_family(req: &ConstructionRequest) -> Result<MubFamily> {
    let d = req.d;
    require_prime(d)?;
    let mut bases: Vec<Vec<ProjectorMatrix>> = (0..d)
        .map(|a| {
            (0..d)
                .map(|alpha| {
                    ProjectorMatrix::from_fn(d, |p, q| coefficient_unchecked(d, a, alpha, p, q))
                })
                .collect()
        })
        .collect();
    if req.include_computational {
        bases.push(
            (0..d)
                .map(|alpha| {
                    ProjectorMatrix::from_fn(d, |p, q| {
                        C64::new(if p == q && p == alpha { 1.0 } else { 0.0 }, 0.0)
                    })
                })
                .collect(),
        );
    }
    let family = MubFamily::new(d, bases)?;
    let report = verify_family(&family, CONSTRUCTION_TOL)?;
    if !report.passed {
        return Err(MubError::UnverifiedConstruction(report.summary()));
    }
    Ok(family)
}
