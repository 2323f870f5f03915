//! Penalty-method search for MUB families in arbitrary dimension.
//!
//! Each projector is parameterized as `M = B^dag B / Tr(B^dag B)` with an
//! unconstrained complex factor `B` (`rank x d`), so every iterate is
//! Hermitian, PSD and unit-trace by construction. The objective is the sum
//! of squared residuals of the trace conditions
//! `Tr(M_{a alpha} M_{b beta}) = delta_{alpha beta}` (same basis) and
//! `= 1/d` (different bases), including the self-terms `Tr(M^2) = 1` that
//! force rank one at a zero of the objective.

use crate::algebra::{MubFamily, ProjectorMatrix, C64};
use crate::error::{MubError, Result};
use crate::reconstruct::eigen_hermitian;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A factor whose Frobenius norm squared falls below this is degenerate.
pub const DEGENERATE_TRACE: f64 = 1e-14;
/// Stationarity threshold on the gradient norm.
pub const GRADIENT_TOL: f64 = 1e-12;
/// Smallest eigenvalue tolerated when taking `M^{1/2}` in [`polish`].
pub const POLISH_NEGATIVE_TOL: f64 = 1e-8;
/// Backtracking gives up below this step.
const MIN_STEP: f64 = 1e-30;
const BB_MIN_STEP: f64 = 1e-8;
const BB_MAX_STEP: f64 = 1e8;

/// `(s.s, s.y)` for `s = x1 - x0`, `y = g1 - g0` over the real parameters.
fn curvature(x0: &SearchState, x1: &SearchState, g0: &[Vec<C64>], g1: &[Vec<C64>]) -> (f64, f64) {
    let mut ss = 0.0;
    let mut sy = 0.0;
    for (((b0, b1), h0), h1) in x0.factors.iter().zip(&x1.factors).zip(g0).zip(g1) {
        for (((p0, p1), q0), q1) in b0.iter().zip(b1).zip(h0).zip(h1) {
            let s = p1 - p0;
            let y = q1 - q0;
            ss += s.norm_sqr();
            sy += s.re * y.re + s.im * y.im;
        }
    }
    (ss, sy)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub initial_step: f64,
    pub shrink: f64,
    /// Armijo constant: accept `t` when `f(x - t g) <= f(x) - slope t |g|^2`.
    pub slope: f64,
    /// Start each line search from the Barzilai-Borwein step `s.s / s.y`
    /// instead of `initial_step` (which is then only used on the first
    /// iteration and when the curvature estimate is unusable).
    #[serde(default)]
    pub barzilai_borwein: bool,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            shrink: 0.5,
            slope: 1e-4,
            barzilai_borwein: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub d: usize,
    pub num_bases: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub target_residual: f64,
    pub step: StepControl,
    /// Rows of each factor `B`; `d` gives the full parameterization.
    pub factor_rank: usize,
    /// Keep every per-iteration objective in the restart records.
    #[serde(default)]
    pub record_trace: bool,
}

impl SearchConfig {
    pub fn new(d: usize, num_bases: usize) -> Self {
        Self {
            d,
            num_bases,
            restarts: 20,
            max_iterations: 100_000,
            seed: 0,
            target_residual: 1e-16,
            step: StepControl::default(),
            factor_rank: 1,
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(MubError::InvalidConfig(msg));
        if self.d < 2 {
            return bad(format!("d must be at least 2, got {}", self.d));
        }
        if self.num_bases < 2 || self.num_bases > self.d + 1 {
            return bad(format!(
                "num_bases must be in 2..={}, got {}",
                self.d + 1,
                self.num_bases
            ));
        }
        if self.restarts == 0 {
            return bad("restarts must be positive".into());
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        if !(self.target_residual > 0.0) {
            return bad(format!("target_residual must be positive, got {}", self.target_residual));
        }
        if self.factor_rank == 0 || self.factor_rank > self.d {
            return bad(format!("factor_rank must be in 1..={}", self.d));
        }
        let s = &self.step;
        if !(s.initial_step > 0.0) || !(s.shrink > 0.0 && s.shrink < 1.0) || !(s.slope > 0.0 && s.slope < 1.0) {
            return bad(format!("invalid step control {s:?}"));
        }
        Ok(())
    }
}

/// Factors `B_{a alpha}`, each `rank x d`, row-major, basis-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchState {
    d: usize,
    rank: usize,
    num_bases: usize,
    factors: Vec<Vec<C64>>,
}

/// Objective pieces shared by the value and the gradient.
struct Evaluation {
    projectors: Vec<Vec<C64>>,
    traces: Vec<f64>,
    /// Residuals `r_ij`, row-major over all projectors.
    residuals: Vec<f64>,
    objective: f64,
}

impl SearchState {
    pub fn from_factors(d: usize, num_bases: usize, factors: Vec<Vec<C64>>) -> Result<Self> {
        if factors.len() != d * num_bases || factors.is_empty() {
            return Err(MubError::DimensionMismatch {
                expected: d * num_bases,
                found: factors.len(),
            });
        }
        let len = factors[0].len();
        if len == 0 || len % d != 0 {
            return Err(MubError::DimensionMismatch { expected: d, found: len });
        }
        if let Some(f) = factors.iter().find(|f| f.len() != len) {
            return Err(MubError::DimensionMismatch { expected: len, found: f.len() });
        }
        for f in &factors {
            crate::algebra::check_finite(f)?;
        }
        Ok(Self {
            d,
            rank: len / d,
            num_bases,
            factors,
        })
    }

    /// Independent standard complex Gaussian entries.
    pub fn random(d: usize, num_bases: usize, rank: usize, rng: &mut ChaCha8Rng) -> Self {
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let factors = (0..d * num_bases)
            .map(|_| {
                (0..rank * d)
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(rng);
                        let im: f64 = StandardNormal.sample(rng);
                        C64::new(re * scale, im * scale)
                    })
                    .collect()
            })
            .collect();
        Self {
            d,
            rank,
            num_bases,
            factors,
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_bases(&self) -> usize {
        self.num_bases
    }

    pub fn factors(&self) -> &[Vec<C64>] {
        &self.factors
    }

    fn check_traces(&self) -> Result<Vec<f64>> {
        self.factors
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let trace: f64 = b.iter().map(|z| z.norm_sqr()).sum();
                if trace < DEGENERATE_TRACE || !trace.is_finite() {
                    Err(MubError::DegenerateFactor {
                        a: i / self.d,
                        alpha: i % self.d,
                        trace,
                    })
                } else {
                    Ok(trace)
                }
            })
            .collect()
    }

    /// `B^dag B / Tr(B^dag B)`.
    fn projector_entries(&self, b: &[C64], trace: f64) -> Vec<C64> {
        let (d, r) = (self.d, self.rank);
        let mut m = vec![C64::new(0.0, 0.0); d * d];
        for p in 0..d {
            for q in p..d {
                let z: C64 = (0..r).map(|k| b[k * d + p].conj() * b[k * d + q]).sum::<C64>() / trace;
                m[p * d + q] = z;
                m[q * d + p] = z.conj();
            }
            m[p * d + p].im = 0.0;
        }
        m
    }

    fn evaluate(&self) -> Result<Evaluation> {
        let traces = self.check_traces()?;
        let projectors: Vec<Vec<C64>> = self
            .factors
            .iter()
            .zip(&traces)
            .map(|(b, &t)| self.projector_entries(b, t))
            .collect();
        let n = projectors.len();
        let d = self.d;
        let unbiased = 1.0 / d as f64;
        let mut residuals = vec![0.0; n * n];
        let mut objective = 0.0;
        for i in 0..n {
            for j in i..n {
                // Tr(M_i M_j) = Re sum conj(M_i) M_j for Hermitian M.
                let t: f64 = projectors[i]
                    .iter()
                    .zip(&projectors[j])
                    .map(|(x, y)| x.re * y.re + x.im * y.im)
                    .sum();
                let target = if i / d != j / d {
                    unbiased
                } else if i == j {
                    1.0
                } else {
                    0.0
                };
                let r = t - target;
                residuals[i * n + j] = r;
                residuals[j * n + i] = r;
                objective += r * r;
            }
        }
        Ok(Evaluation {
            projectors,
            traces,
            residuals,
            objective,
        })
    }

    pub fn objective(&self) -> Result<f64> {
        self.evaluate().map(|e| e.objective)
    }

    pub fn projectors(&self) -> Result<Vec<ProjectorMatrix>> {
        let e = self.evaluate()?;
        e.projectors
            .into_iter()
            .map(|m| ProjectorMatrix::new(self.d, m))
            .collect()
    }

    pub fn to_family(&self) -> Result<MubFamily> {
        let mut it = self.projectors()?.into_iter();
        let bases = (0..self.num_bases)
            .map(|_| it.by_ref().take(self.d).collect())
            .collect();
        MubFamily::new(self.d, bases)
    }

    /// Gradient with respect to the real and imaginary parts of each factor
    /// entry, packed as complex numbers (`re` = d/dRe, `im` = d/dIm) in the
    /// same layout as the factors.
    pub fn gradient(&self) -> Result<Vec<Vec<C64>>> {
        let e = self.evaluate()?;
        Ok(self.gradient_from(&e))
    }

    fn gradient_from(&self, e: &Evaluation) -> Vec<Vec<C64>> {
        let (d, r) = (self.d, self.rank);
        let n = e.projectors.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                // G_i = 4 r_ii M_i + sum_{j != i} 2 r_ij M_j
                let mut g = vec![C64::new(0.0, 0.0); d * d];
                for j in 0..n {
                    let w = if i == j { 4.0 } else { 2.0 } * e.residuals[i * n + j];
                    if w == 0.0 {
                        continue;
                    }
                    for (gk, mk) in g.iter_mut().zip(&e.projectors[j]) {
                        *gk += mk * w;
                    }
                }
                // grad = (2 / tau) B (G - Tr(G M) I)
                let gm: f64 = g
                    .iter()
                    .zip(&e.projectors[i])
                    .map(|(x, y)| x.re * y.re + x.im * y.im)
                    .sum();
                for p in 0..d {
                    g[p * d + p] -= gm;
                }
                let b = &self.factors[i];
                let scale = 2.0 / e.traces[i];
                let mut out = vec![C64::new(0.0, 0.0); r * d];
                for k in 0..r {
                    for q in 0..d {
                        let z: C64 = (0..d).map(|p| b[k * d + p] * g[p * d + q]).sum();
                        out[k * d + q] = z * scale;
                    }
                }
                out
            })
            .collect()
    }

    /// Real-parameter Euclidean norm of a gradient.
    pub fn gradient_norm(grad: &[Vec<C64>]) -> f64 {
        grad.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn stepped(&self, grad: &[Vec<C64>], t: f64) -> Self {
        let factors = self
            .factors
            .iter()
            .zip(grad)
            .map(|(b, g)| b.iter().zip(g).map(|(x, y)| x - y * t).collect())
            .collect();
        Self {
            factors,
            ..self.clone()
        }
    }

    /// Rescales every factor to unit Frobenius norm; projectors are unchanged.
    fn normalize(&mut self) {
        for b in &mut self.factors {
            let norm = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 && norm.is_finite() {
                for z in b.iter_mut() {
                    *z /= norm;
                }
            }
        }
    }
}

/// Outcome of one gradient-descent run.
#[derive(Clone, Debug)]
pub struct Descent {
    pub state: SearchState,
    pub objective: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective before the first step and after each accepted step.
    pub trace: Vec<f64>,
}

/// Gradient descent with Armijo backtracking until the gradient vanishes,
/// the objective reaches the target, the line search stalls, or the
/// iteration cap is hit.
pub fn descend(mut state: SearchState, cfg: &SearchConfig) -> Result<Descent> {
    state.normalize();
    let mut eval = state.evaluate()?;
    let mut grad = state.gradient_from(&eval);
    let mut grad_norm = SearchState::gradient_norm(&grad);
    let mut trace = vec![eval.objective];
    let mut iterations = 0;
    let step = cfg.step;
    let mut trial_step = step.initial_step;

    while iterations < cfg.max_iterations
        && eval.objective > cfg.target_residual
        && grad_norm >= GRADIENT_TOL
    {
        let g2 = grad_norm * grad_norm;
        let mut t = trial_step;
        let accepted = loop {
            let mut trial = state.stepped(&grad, t);
            trial.normalize();
            if let Ok(e) = trial.evaluate() {
                if e.objective <= eval.objective - step.slope * t * g2 {
                    break Some((trial, e));
                }
            }
            t *= step.shrink;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((next, next_eval)) = accepted else {
            break;
        };
        let next_grad = next.gradient_from(&next_eval);
        trial_step = if step.barzilai_borwein {
            let (ss, sy) = curvature(&state, &next, &grad, &next_grad);
            if sy > 0.0 && ss > 0.0 {
                (ss / sy).clamp(BB_MIN_STEP, BB_MAX_STEP)
            } else {
                step.initial_step
            }
        } else {
            step.initial_step
        };
        state = next;
        eval = next_eval;
        grad = next_grad;
        grad_norm = SearchState::gradient_norm(&grad);
        iterations += 1;
        if cfg.record_trace {
            trace.push(eval.objective);
        }
    }
    if !cfg.record_trace {
        trace.push(eval.objective);
    }
    Ok(Descent {
        converged: eval.objective <= cfg.target_residual,
        objective: eval.objective,
        gradient_norm: grad_norm,
        iterations,
        state,
        trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub restart: usize,
    pub seed: u64,
    pub final_objective: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective_trace: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub best_family: MubFamily,
    pub best_objective: f64,
    pub best_restart: usize,
    /// Iterations of the best restart.
    pub iterations_used: usize,
    pub restarts_used: usize,
    pub converged: bool,
    pub history: Vec<RestartRecord>,
}

impl SearchResult {
    pub fn status(&self) -> &'static str {
        if self.converged {
            "converged"
        } else {
            "residual floor reached"
        }
    }
}

fn record(restart: usize, seed: u64, run: &Descent, keep_trace: bool) -> RestartRecord {
    RestartRecord {
        restart,
        seed,
        final_objective: run.objective,
        gradient_norm: run.gradient_norm,
        iterations: run.iterations,
        converged: run.converged,
        objective_trace: keep_trace.then(|| run.trace.clone()),
    }
}

/// Multi-start search. Restart `k` uses seed `cfg.seed + k`. Restarts run in
/// parallel batches but the result only depends on the configuration: the
/// search stops after the lowest-index converged restart, and ties on the
/// objective go to the lower index.
pub fn run_search(cfg: &SearchConfig) -> Result<SearchResult> {
    cfg.validate()?;
    let batch = rayon::current_num_threads().max(1);
    let mut runs: Vec<(u64, Descent)> = Vec::new();
    let mut start = 0;
    while start < cfg.restarts {
        let end = (start + batch).min(cfg.restarts);
        let results: Vec<Result<(u64, Descent)>> = (start..end)
            .into_par_iter()
            .map(|k| {
                let seed = cfg.seed.wrapping_add(k as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let init = SearchState::random(cfg.d, cfg.num_bases, cfg.factor_rank, &mut rng);
                descend(init, cfg).map(|run| (seed, run))
            })
            .collect();
        let mut done = false;
        for r in results {
            let item = r?;
            done = item.1.converged;
            runs.push(item);
            if done {
                break;
            }
        }
        if done {
            break;
        }
        start = end;
    }
    finish(runs, cfg)
}

fn finish(runs: Vec<(u64, Descent)>, cfg: &SearchConfig) -> Result<SearchResult> {
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(i, (_, x)), (j, (_, y))| x.objective.total_cmp(&y.objective).then(i.cmp(j)))
        .map(|(i, _)| i)
        .ok_or(MubError::InvalidConfig("no restarts".into()))?;
    let history = runs
        .iter()
        .enumerate()
        .map(|(k, (seed, run))| record(k, *seed, run, cfg.record_trace))
        .collect();
    let run = &runs[best].1;
    Ok(SearchResult {
        best_family: run.state.to_family()?,
        best_objective: run.objective,
        best_restart: best,
        iterations_used: run.iterations,
        restarts_used: runs.len(),
        converged: run.converged,
        history,
    })
}

/// Factors for a given family: `B = M^{1/2}` for a full-rank factor, or the
/// leading `rank` rows `sqrt(lambda_k) v_k^dag` otherwise.
pub fn factors_from_family(family: &MubFamily, rank: usize) -> Result<SearchState> {
    let d = family.dim();
    let mut factors = Vec::with_capacity(d * family.num_bases());
    for (a, alpha, m) in family.iter() {
        let eig = eigen_hermitian(m).map_err(|e| e.at(a, alpha))?;
        let lowest = eig.min_eigenvalue();
        if lowest < -POLISH_NEGATIVE_TOL {
            return Err(MubError::NegativeEigenvalue {
                a,
                alpha,
                eigenvalue: lowest,
            });
        }
        let roots: &Vec<f64> = &eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
        let v = &eig.eigenvectors;
        let b: Vec<C64> = if rank == d {
            ProjectorMatrix::from_fn(d, |p, q| {
                (0..d).map(|k| v[k][p] * v[k][q].conj() * roots[k]).sum()
            })
            .entries()
            .to_vec()
        } else {
            (0..rank)
                .flat_map(|k| v[k].iter().map(move |z| z.conj() * roots[k]))
                .collect()
        };
        factors.push(b);
    }
    SearchState::from_factors(d, family.num_bases(), factors)
}

/// Refines a given family, e.g. a near-solution found elsewhere.
pub fn polish(family: &MubFamily, cfg: &SearchConfig) -> Result<SearchResult> {
    let mut cfg = cfg.clone();
    cfg.d = family.dim();
    cfg.num_bases = family.num_bases();
    if cfg.num_bases >= 2 {
        cfg.validate()?;
    }
    let state = factors_from_family(family, cfg.factor_rank)?;
    let run = descend(state, &cfg)?;
    finish(vec![(cfg.seed, run)], &cfg)
}
