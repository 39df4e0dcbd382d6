//! Generalized Gauss–Laguerre rules for the weight `t^α e^{−t}` on `(0, ∞)`.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::numerics::gamma::log_gamma_unchecked;
use crate::numerics::laguerre::ScaledRecurrence;

/// An `order`-point Gauss–Laguerre rule.
///
/// Weights are stored as logarithms: beyond order ~180 the tail weights fall
/// below the smallest positive double even though they are positive.
#[derive(Debug)]
pub struct QuadratureRule {
    alpha: f64,
    nodes: Vec<f64>,
    log_weights: Vec<f64>,
    /// `ln ‖(q_0(t_i), …, q_{n−1}(t_i))‖`; `−2×` this is `ln(w_i e^{t_i})`.
    log_row_norms: Vec<f64>,
    projection: OnceLock<Arc<Vec<f64>>>,
}

impl QuadratureRule {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Linear weights. Tail entries may underflow to zero at high order.
    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w.exp()).collect()
    }

    /// `sqrt(w_i e^{t_i})`, the factor that turns samples of a function into
    /// coordinates of the orthogonal projection matrix.
    pub(crate) fn sqrt_scaled_weight(&self, i: usize) -> f64 {
        (-self.log_row_norms[i]).exp()
    }

    /// `Σ w_i g(t_i)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.log_weights)
            .map(|(&t, &lw)| {
                let v = g(t);
                if v == 0.0 {
                    0.0
                } else {
                    v.signum() * (v.abs().ln() + lw).exp()
                }
            })
            .sum()
    }

    /// Row-major `order × order` matrix `Q[i][k] = sqrt(w_i e^{t_i}) q_k(t_i)`.
    /// It is orthogonal; built on first use and shared afterwards.
    pub(crate) fn projection_matrix(&self) -> Arc<Vec<f64>> {
        self.projection
            .get_or_init(|| {
                let n = self.order();
                let mut m = vec![0.0; n * n];
                for (i, &t) in self.nodes.iter().enumerate() {
                    let (row, _) = crate::numerics::laguerre::normalized_row(self.alpha, t, n);
                    m[i * n..(i + 1) * n].copy_from_slice(&row);
                }
                Arc::new(m)
            })
            .clone()
    }
}

impl PartialEq for QuadratureRule {
    fn eq(&self, other: &Self) -> bool {
        self.alpha == other.alpha && self.nodes == other.nodes
    }
}

/// Builds the `order`-point rule for `t^α e^{−t}`.
///
/// Nodes are isolated one at a time by Sturm-count bisection on the Jacobi
/// matrix of the orthonormal Laguerre recurrence, then polished by Newton
/// steps on `L_n^{(α)}` that are only accepted inside the isolating bracket.
/// Weights come from the Christoffel sum `1/w_i = Σ_{k<n} p_k(t_i)²`.
pub fn gauss_laguerre(order: usize, alpha: f64) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::Domain("quadrature order must be at least 1".into()));
    }
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("Laguerre parameter must exceed -1, got {alpha}")));
    }
    let n = order;
    let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    // off[k] couples rows k-1 and k
    let off_sq: Vec<f64> = (0..n).map(|k| k as f64 * (k as f64 + alpha)).collect();
    let upper = (0..n)
        .map(|k| {
            let left = if k > 0 { off_sq[k].sqrt() } else { 0.0 };
            let right = if k + 1 < n { off_sq[k + 1].sqrt() } else { 0.0 };
            diag[k] + left + right
        })
        .fold(0.0f64, f64::max);

    let count_below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = diag[0] - x;
        if d < 0.0 {
            count += 1;
        }
        for k in 1..n {
            let prev = if d == 0.0 { f64::MIN_POSITIVE } else { d };
            d = diag[k] - x - off_sq[k] / prev;
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };

    let mut nodes = Vec::with_capacity(n);
    let mut lo = 0.0;
    for i in 0..n {
        // smallest x with count_below(x) > i lies in (lo, upper]
        let mut a = lo;
        let mut b = upper;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if count_below(mid) > i {
                b = mid;
            } else {
                a = mid;
            }
        }
        let root = polish_root(n, alpha, 0.5 * (a + b), a, b);
        if !(root > 0.0) || (i > 0 && root <= nodes[i - 1]) {
            return Err(Error::Convergence {
                what: "Gauss-Laguerre node isolation",
                detail: format!("order {n}, alpha {alpha}: node {i} at {root} not increasing"),
            });
        }
        nodes.push(root);
        lo = a;
    }

    let mut log_weights = Vec::with_capacity(n);
    let mut log_row_norms = Vec::with_capacity(n);
    for &t in &nodes {
        let ln_norm = row_log_norm(alpha, t, n);
        log_row_norms.push(ln_norm);
        log_weights.push(-t - 2.0 * ln_norm);
    }

    let rule = QuadratureRule {
        alpha,
        nodes,
        log_weights,
        log_row_norms,
        projection: OnceLock::new(),
    };
    check_zeroth_moment(&rule)?;
    Ok(rule)
}

fn row_log_norm(alpha: f64, t: f64, n: usize) -> f64 {
    let mut rec = ScaledRecurrence::new(alpha, t);
    let mut sum = rec.mantissa() * rec.mantissa();
    for _ in 1..n {
        let f = rec.advance();
        sum *= f * f;
        sum += rec.mantissa() * rec.mantissa();
    }
    0.5 * sum.ln() + rec.log_scale
}

/// Newton on `L_n` using `t L_n' = n L_n − (n+α) L_{n−1}`, kept inside `[a, b]`.
fn polish_root(n: usize, alpha: f64, mut t: f64, a: f64, b: f64) -> f64 {
    let nf = n as f64;
    for _ in 0..6 {
        let (qn, qn1) = top_two(n, alpha, t);
        let denom = nf * qn - (nf * (nf + alpha)).sqrt() * qn1;
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = t * qn / denom;
        let next = t - step;
        if !(next >= a && next <= b) {
            break;
        }
        let done = (next - t).abs() <= 4.0 * f64::EPSILON * t;
        t = next;
        if done {
            break;
        }
    }
    t
}

/// Mantissas of `q_n(t)` and `q_{n−1}(t)` on a common scale.
fn top_two(n: usize, alpha: f64, t: f64) -> (f64, f64) {
    let mut rec = ScaledRecurrence::new(alpha, t);
    let mut prev = 0.0;
    for _ in 0..n {
        prev = rec.mantissa();
        let f = rec.advance();
        prev *= f;
    }
    (rec.mantissa(), prev)
}

fn check_zeroth_moment(rule: &QuadratureRule) -> Result<()> {
    let expected = log_gamma_unchecked(rule.alpha + 1.0);
    let got = log_sum_exp(&rule.log_weights);
    if (got - expected).abs() > 1e-11 {
        return Err(Error::Convergence {
            what: "Gauss-Laguerre weights",
            detail: format!(
                "order {}, alpha {}: ln Σw = {got} but ln Γ(α+1) = {expected}",
                rule.order(),
                rule.alpha
            ),
        });
    }
    Ok(())
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
