//! Ascent on `ln ‖f‖₂² − ln ‖f‖₁ − ln ‖f̂‖₁` over truncated eigen-expansions.
//!
//! Iterates live in orthonormal coordinates `b` with `|b| = 1`, where the
//! numerator is constant and only the two `L¹` norms move.

use crate::bounds::theorem2_constant;
use crate::numerics::kronrod::for_each_k15_node;
use crate::numerics::laguerre::orthonormal_values;
use crate::radial::{log_norm_prefactor, EigenExpansion, Prepared};
use crate::verify::verify_main;
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_DEGREE: usize = 12;
pub const DEFAULT_RESTARTS: usize = 32;

const MAX_HALVINGS: usize = 40;
const INITIAL_STEP: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub dim: usize,
    pub best: EigenExpansion,
    pub ratio: f64,
    pub bound: f64,
    pub gaussian_ratio: f64,
    pub restarts: usize,
    pub iterations: u64,
    pub seed: u64,
    /// Restart that produced `best`.
    pub best_restart: usize,
}

/// Objective and the pieces needed for its gradient.
struct Point {
    b: Vec<f64>,
    f: Prepared,
    h: Prepared,
    f_l1: f64,
    h_l1: f64,
    log_ratio: f64,
}

impl Point {
    fn new(dim: usize, b: Vec<f64>) -> Option<Self> {
        let e = EigenExpansion::from_orthonormal(dim, &b);
        if e.trimmed().is_zero() {
            return None;
        }
        let f = Prepared::new(&e);
        let h = Prepared::new(&e.fourier());
        let f_l1 = f.norm(1.0);
        let h_l1 = h.norm(1.0);
        let l2 = f.norm_l2_sq();
        if !(f_l1 > 0.0 && h_l1 > 0.0 && l2 > 0.0) {
            return None;
        }
        let log_ratio = l2.ln() - f_l1.ln() - h_l1.ln();
        if !log_ratio.is_finite() {
            return None;
        }
        Some(Self { b, f, h, f_l1, h_l1, log_ratio })
    }

    fn dim(&self) -> usize {
        self.f.dim
    }

    fn expansion(&self) -> EigenExpansion {
        EigenExpansion::from_orthonormal(self.dim(), &self.b)
    }

    /// Gradient of the log ratio in `b`.
    fn gradient(&self) -> Vec<f64> {
        let n = self.b.len();
        let gf = sign_moments(&self.f, n);
        let gh = sign_moments(&self.h, n);
        let b2: f64 = self.b.iter().map(|x| x * x).sum();
        (0..n)
            .map(|k| {
                let s = if k % 2 == 1 { -1.0 } else { 1.0 };
                2.0 * self.b[k] / b2 - gf[k] / self.f_l1 - s * gh[k] / self.h_l1
            })
            .collect()
    }
}

/// `∂‖f‖₁/∂b_k = ∫ sign(f) q_k` over `ℝ^d`, by fixed Kronrod panels in
/// `u = sqrt(t)` between the sign changes.
fn sign_moments(f: &Prepared, n: usize) -> Vec<f64> {
    let alpha = f.dim as f64 / 2.0 - 1.0;
    let dm1 = f.dim as f64 - 1.0;
    let last = f.breaks.last().copied().unwrap_or(0.0);
    let t_max = (4.0 * n as f64 + 2.0 * alpha.abs() + 80.0).max(last + 80.0);
    let mut cuts: Vec<f64> = std::iter::once(0.0).chain(f.breaks.iter().map(|t| t.sqrt())).collect();
    cuts.push(t_max.sqrt());
    let mut out = vec![0.0; n];
    let mut q = vec![0.0; n];
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let panels = ((b - a) / 0.125).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for_each_k15_node(lo, lo + h, |u, wt| {
                let t = u * u;
                orthonormal_values(alpha, t, &mut q);
                let v: f64 = q.iter().zip(&f.b).map(|(x, y)| x * y).sum();
                if v == 0.0 {
                    return;
                }
                let jac = 2.0 * if dm1 == 0.0 { 1.0 } else { u.powf(dm1) };
                let c = v.signum() * wt * jac;
                for (o, qk) in out.iter_mut().zip(&q) {
                    *o += c * qk;
                }
            });
        }
    }
    let pref = log_norm_prefactor(f.dim).exp();
    out.iter().map(|x| x * pref).collect()
}

fn normalize(b: &mut [f64]) -> bool {
    let n = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(n > 0.0 && n.is_finite()) {
        return false;
    }
    b.iter_mut().for_each(|x| *x /= n);
    true
}

/// Log ratio `ln(‖f‖₂²/(‖f‖₁‖f̂‖₁))`.
pub fn log_ratio(f: &EigenExpansion) -> Result<f64> {
    f.validate()?;
    Point::new(f.dim, f.orthonormal_coeffs())
        .map(|p| p.log_ratio)
        .ok_or(Error::ZeroFunction)
}

/// Gradient of [`log_ratio`] with respect to the orthonormal coefficients.
pub fn log_ratio_gradient(f: &EigenExpansion) -> Result<Vec<f64>> {
    f.validate()?;
    Point::new(f.dim, f.orthonormal_coeffs())
        .map(|p| p.gradient())
        .ok_or(Error::ZeroFunction)
}

/// Outcome of one backtracking step.
struct Step {
    point: Point,
    step: f64,
    accepted: bool,
}

fn ascent(p: Point, step: f64) -> Step {
    if step == 0.0 {
        return Step { point: p, step, accepted: false };
    }
    let g = p.gradient();
    let mut s = step;
    for _ in 0..MAX_HALVINGS {
        let mut b: Vec<f64> = p.b.iter().zip(&g).map(|(x, y)| x + s * y).collect();
        if normalize(&mut b) {
            if let Some(q) = Point::new(p.dim(), b) {
                if q.log_ratio > p.log_ratio {
                    return Step { point: q, step: s, accepted: true };
                }
            }
        }
        s *= 0.5;
    }
    Step { point: p, step: s, accepted: false }
}

/// One backtracking gradient step on the log ratio. The result has
/// `‖f‖₂ = 1`; if no halving of `step` increases the ratio, `f` comes back
/// unchanged.
pub fn ratio_ascent_step(f: &EigenExpansion, step: f64) -> Result<EigenExpansion> {
    f.validate()?;
    if step == 0.0 {
        return Ok(f.clone());
    }
    let mut b = f.orthonormal_coeffs();
    if !normalize(&mut b) {
        return Err(Error::ZeroFunction);
    }
    let p = Point::new(f.dim, b).ok_or(Error::ZeroFunction)?;
    let out = ascent(p, step);
    if out.accepted {
        Ok(out.point.expansion())
    } else {
        Ok(f.clone())
    }
}

struct RestartOutcome {
    point: Point,
    iterations: u64,
}

fn start_vector(index: usize, seed: u64, n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n];
    b[0] = 1.0;
    if index == 0 {
        return b;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    for (k, x) in b.iter_mut().enumerate() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *x += z * 0.7f64.powi(k as i32);
    }
    b
}

fn run_restart(d: usize, n: usize, budget: u64, seed: u64, index: usize, cap: f64) -> Result<RestartOutcome> {
    let mut attempt = 0u64;
    let mut point = loop {
        let mut b = start_vector(index, seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15)), n);
        if normalize(&mut b) {
            if let Some(p) = Point::new(d, b) {
                break p;
            }
        }
        attempt += 1;
        if attempt > 64 {
            return Err(Error::Degenerate("could not draw a nonzero start".into()));
        }
    };
    let mut step = INITIAL_STEP;
    let mut iterations = 0;
    while iterations < budget {
        iterations += 1;
        let s = ascent(point, step);
        point = s.point;
        if point.log_ratio > cap {
            return Err(Error::BoundViolated { value: point.log_ratio.exp(), bound: cap.exp() });
        }
        if !s.accepted {
            break;
        }
        step = (s.step * 2.0).min(1.0);
    }
    Ok(RestartOutcome { point, iterations })
}

/// Best ratio over `restarts` backtracking ascents of at most `budget`
/// iterations each. Restart 0 starts at the Gaussian.
pub fn maximize_ratio(d: usize, n: usize, budget: u64, restarts: usize, seed: u64) -> Result<OptimizeResult> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if budget == 0 {
        return Err(Error::Domain("budget must be at least 1".into()));
    }
    let restarts = restarts.max(1);
    let log_bound = theorem2_constant(d)?;
    let cap = log_bound + 1e-9;
    let outcomes: Vec<RestartOutcome> = (0..restarts)
        .into_par_iter()
        .map(|i| run_restart(d, n + 1, budget, seed, i, cap))
        .collect::<Result<_>>()?;
    let iterations = outcomes.iter().map(|o| o.iterations).sum();
    let (best_restart, best) = outcomes
        .iter()
        .enumerate()
        .fold(None::<(usize, &RestartOutcome)>, |acc, (i, o)| match acc {
            Some((_, b)) if b.point.log_ratio >= o.point.log_ratio => acc,
            _ => Some((i, o)),
        })
        .expect("at least one restart");
    let expansion = best.point.expansion();
    let report = verify_main(&expansion)?;
    if !report.main_ok() {
        return Err(Error::BoundViolated { value: report.ratio, bound: report.bound });
    }
    Ok(OptimizeResult {
        dim: d,
        best: expansion,
        ratio: report.ratio,
        bound: report.bound,
        gaussian_ratio: 2f64.powf(-(d as f64) / 2.0),
        restarts,
        iterations,
        seed,
        best_restart,
    })
}
