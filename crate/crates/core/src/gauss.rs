//! Generalized quadratic Gauss sums
//! `S(u, v, w) = sum_{k=0}^{|w|-1} exp(i pi (u k^2 + v k) / w)`
//! and the numerical identities behind the prime-dimension construction.

use crate::algebra::C64;
use crate::construct::is_prime;
use crate::error::{MubError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Above this many terms the sum switches to compensated accumulation.
pub const COMPENSATED_THRESHOLD: u64 = 1000;

/// Parameters `(u, v, w)` with `gcd(u, w) = 1`, `u w != 0` and `u w + v` even.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussSumParams {
    u: i64,
    v: i64,
    w: i64,
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl GaussSumParams {
    /// Validates every condition and names each one that fails.
    pub fn new(u: i64, v: i64, w: i64) -> Result<Self> {
        let mut violations = Vec::new();
        let (u2, v2, w2) = (u as i128, v as i128, w as i128);
        if u2 * w2 == 0 {
            violations.push("u*w must be nonzero".to_string());
        }
        if gcd(u2, w2) != 1 {
            violations.push(format!("gcd(u, w) = {} != 1", gcd(u2, w2)));
        }
        if (u2 * w2 + v2) % 2 != 0 {
            violations.push("u*w + v must be even".to_string());
        }
        if violations.is_empty() {
            Ok(Self { u, v, w })
        } else {
            Err(MubError::InvalidGaussParams { u, v, w, violations })
        }
    }

    pub fn u(&self) -> i64 {
        self.u
    }

    pub fn v(&self) -> i64 {
        self.v
    }

    pub fn w(&self) -> i64 {
        self.w
    }
}

/// `exp(i pi n / m)` for `m > 0`, with `n` reduced mod `2m` first.
pub(crate) fn rational_phase(n: i128, m: i128) -> C64 {
    let r = n.rem_euclid(2 * m);
    C64::from_polar(1.0, PI * r as f64 / m as f64)
}

/// Neumaier-compensated complex sum.
#[derive(Default)]
struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let t = acc.0 + x;
    if acc.0.abs() >= x.abs() {
        acc.1 += (acc.0 - t) + x;
    } else {
        acc.1 += (x - t) + acc.0;
    }
    acc.0 = t;
}

impl CompensatedSum {
    fn add(&mut self, z: C64) {
        neumaier(&mut self.re, z.re);
        neumaier(&mut self.im, z.im);
    }

    fn value(&self) -> C64 {
        C64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

pub fn gauss_sum(params: &GaussSumParams) -> C64 {
    let (u, v, w) = (params.u as i128, params.v as i128, params.w as i128);
    let len = w.abs();
    // exp(i pi n / w) = exp(i pi (sign(w) n) / |w|)
    let term = |k: i128| rational_phase(w.signum() * (u * k * k + v * k), len);
    if (len as u64) > COMPENSATED_THRESHOLD {
        let mut acc = CompensatedSum::default();
        for k in 0..len {
            acc.add(term(k));
        }
        acc.value()
    } else {
        (0..len).map(term).sum()
    }
}

fn check_index(name: &'static str, value: i64, bound: i64) -> Result<()> {
    if (0..bound).contains(&value) {
        Ok(())
    } else {
        Err(MubError::IndexOutOfRange { name, value, bound })
    }
}

fn check_mub_indices(a: i64, b: i64, alpha: i64, beta: i64, d: i64) -> Result<()> {
    if d < 0 || !is_prime(d as u64) {
        return Err(MubError::NotPrime(d));
    }
    if a == b {
        return Err(MubError::SameBasis(a));
    }
    check_index("a", a, d)?;
    check_index("b", b, d)?;
    check_index("alpha", alpha, d)?;
    check_index("beta", beta, d)
}

/// The triple `u = a - b`, `v = -(a - b)(d - 2) + 2(alpha - beta)`, `w = d`
/// for two distinct non-computational bases. Validity is checked, not assumed.
pub fn mub_gauss_params(a: i64, b: i64, alpha: i64, beta: i64, d: i64) -> Result<GaussSumParams> {
    check_mub_indices(a, b, alpha, beta, d)?;
    let u = a - b;
    let v = -(a - b) * (d - 2) + 2 * (alpha - beta);
    GaussSumParams::new(u, v, d)
}

/// The three routes to `w(a alpha) . w(b beta)` for `a != b < d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FactoringCheck {
    /// `(1/d^2) sum_{p,q} exp(i pi (p-q)[(d-2-p-q)(b-a) + 2(alpha-beta)]/d)`.
    pub double_sum: C64,
    /// `(1/d^2) |sum_k exp(i pi {(a-b)k^2 + [(d-2)(b-a) + 2(alpha-beta)]k}/d)|^2`.
    pub single_sum_sq: f64,
    /// `|S(u, v, d)|^2 / d^2`.
    pub gauss_form: f64,
}

impl FactoringCheck {
    /// `|double_sum - single_sum_sq|`.
    pub fn difference(&self) -> f64 {
        (self.double_sum - C64::new(self.single_sum_sq, 0.0)).norm()
    }

    pub fn gauss_difference(&self) -> f64 {
        (self.single_sum_sq - self.gauss_form).abs()
    }
}

pub fn check_factoring(a: i64, b: i64, alpha: i64, beta: i64, d: i64) -> Result<FactoringCheck> {
    let params = mub_gauss_params(a, b, alpha, beta, d)?;
    let (a, b, alpha, beta, d) = (a as i128, b as i128, alpha as i128, beta as i128, d as i128);
    let d2 = (d * d) as f64;

    let mut double = C64::new(0.0, 0.0);
    for p in 0..d {
        for q in 0..d {
            let n = (p - q) * ((d - 2 - p - q) * (b - a) + 2 * (alpha - beta));
            double += rational_phase(n, d);
        }
    }

    let single: C64 = (0..d)
        .map(|k| rational_phase((a - b) * k * k + ((d - 2) * (b - a) + 2 * (alpha - beta)) * k, d))
        .sum();

    Ok(FactoringCheck {
        double_sum: double / d2,
        single_sum_sq: single.norm_sqr() / d2,
        gauss_form: gauss_sum(&params).norm_sqr() / d2,
    })
}
