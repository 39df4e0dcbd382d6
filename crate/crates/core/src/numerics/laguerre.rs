//! Generalized Laguerre polynomials and the orthonormal Laguerre functions
//! `q_k(t) = L_k^{(α)}(t) e^{−t/2} / h_k`, `h_k² = Γ(k+α+1)/k!`, which satisfy
//! `∫₀^∞ q_j q_k t^α dt = δ_jk`.

use crate::error::{Error, Result};
use crate::numerics::gamma::log_gamma_unchecked;

/// `L_k^{(α)}(t)` by the three-term recurrence.
pub fn laguerre_eval(k: usize, alpha: f64, t: f64) -> Result<f64> {
    if !(alpha > -1.0) {
        return Err(Error::Domain(format!("Laguerre parameter must exceed -1, got {alpha}")));
    }
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("Laguerre argument must be nonnegative, got {t}")));
    }
    Ok(laguerre_raw(k, alpha, t))
}

pub(crate) fn laguerre_raw(k: usize, alpha: f64, t: f64) -> f64 {
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - t;
    for j in 1..k {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + alpha - t) * cur - (jf + alpha) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_k^{(α)}(0) = Γ(k+α+1) / (Γ(α+1) k!)`.
pub(crate) fn laguerre_at_zero(k: usize, alpha: f64) -> f64 {
    let mut v = 1.0;
    for j in 1..=k {
        v *= (j as f64 + alpha) / j as f64;
    }
    v
}

/// Norm factors `h_k = sqrt(Γ(k+α+1)/k!)` for `k < n`.
pub(crate) fn norm_factors(n: usize, alpha: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut log_sq = log_gamma_unchecked(alpha + 1.0);
    for k in 0..n {
        if k > 0 {
            log_sq += ((k as f64 + alpha) / k as f64).ln();
        }
        out.push((0.5 * log_sq).exp());
    }
    out
}

/// `ln Γ(α+1)`, tabulated for the half-integer `α = d/2 − 1` of `d ≤ 512`.
fn log_gamma_alpha1(alpha: f64) -> f64 {
    static TABLE: std::sync::OnceLock<Vec<f64>> = std::sync::OnceLock::new();
    let twice = 2.0 * (alpha + 1.0);
    if twice.fract() == 0.0 && (1.0..=512.0).contains(&twice) {
        let table = TABLE.get_or_init(|| (1..=512).map(|k| log_gamma_unchecked(k as f64 / 2.0)).collect());
        return table[twice as usize - 1];
    }
    log_gamma_unchecked(alpha + 1.0)
}

const RESCALE_HIGH: f64 = 1e150;
const RESCALE_LOW: f64 = 1e-150;

/// Forward recurrence for `q_k(t)` carried as `mantissa · e^{log_scale}` so
/// that neither the Gaussian factor nor the growth in `k` leaves the double
/// range.
pub(crate) struct ScaledRecurrence {
    alpha: f64,
    t: f64,
    k: usize,
    prev: f64,
    cur: f64,
    pub(crate) log_scale: f64,
}

impl ScaledRecurrence {
    pub(crate) fn new(alpha: f64, t: f64) -> Self {
        Self {
            alpha,
            t,
            k: 0,
            prev: 0.0,
            cur: 1.0,
            log_scale: -0.5 * t - 0.5 * log_gamma_alpha1(alpha),
        }
    }

    /// Mantissa of `q_k` at the current `k`.
    #[inline]
    pub(crate) fn mantissa(&self) -> f64 {
        self.cur
    }

    /// Advance to `k+1`. Returns the factor by which earlier mantissas must be
    /// multiplied to stay consistent with the (possibly changed) scale.
    #[inline]
    pub(crate) fn advance(&mut self) -> f64 {
        let k = self.k as f64;
        let a = self.alpha;
        let next = ((2.0 * k + a + 1.0 - self.t) * self.cur - (k * (k + a)).sqrt() * self.prev)
            / ((k + 1.0) * (k + a + 1.0)).sqrt();
        self.prev = self.cur;
        self.cur = next;
        self.k += 1;
        let mag = next.abs().max(self.prev.abs());
        if mag > RESCALE_HIGH {
            self.prev *= RESCALE_LOW;
            self.cur *= RESCALE_LOW;
            self.log_scale += RESCALE_HIGH.ln();
            RESCALE_LOW
        } else if mag < RESCALE_LOW && mag > 0.0 {
            self.prev *= RESCALE_HIGH;
            self.cur *= RESCALE_HIGH;
            self.log_scale -= RESCALE_HIGH.ln();
            RESCALE_HIGH
        } else {
            1.0
        }
    }
}

/// Combine a mantissa with its log-scale without intermediate overflow.
#[inline]
pub(crate) fn unscale(mantissa: f64, log_scale: f64) -> f64 {
    if mantissa == 0.0 {
        return 0.0;
    }
    if log_scale.abs() < 300.0 {
        return mantissa * log_scale.exp();
    }
    mantissa.signum() * (mantissa.abs().ln() + log_scale).exp()
}

/// `Σ_k b_k q_k(t)` for orthonormal coefficients `b`.
pub(crate) fn orthonormal_series(b: &[f64], alpha: f64, t: f64) -> f64 {
    if b.is_empty() {
        return 0.0;
    }
    let mut rec = ScaledRecurrence::new(alpha, t);
    let mut acc = b[0] * rec.mantissa();
    for &bk in &b[1..] {
        acc *= rec.advance();
        acc += bk * rec.mantissa();
    }
    unscale(acc, rec.log_scale)
}

/// Writes `q_k(t)` for `k < out.len()`; entries that underflow become zero.
pub(crate) fn orthonormal_values(alpha: f64, t: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let mut rec = ScaledRecurrence::new(alpha, t);
    let mut mant = vec![0.0; n];
    let mut scale_at = vec![0.0; n];
    mant[0] = rec.mantissa();
    scale_at[0] = rec.log_scale;
    for k in 1..n {
        rec.advance();
        mant[k] = rec.mantissa();
        scale_at[k] = rec.log_scale;
    }
    for k in 0..n {
        out[k] = unscale(mant[k], scale_at[k]);
    }
}

/// Row of `q_k(t)`, `k < n`, divided by its Euclidean norm, together with the
/// natural log of that norm. The scale cancels, so this is safe for any `t`.
pub(crate) fn normalized_row(alpha: f64, t: f64, n: usize) -> (Vec<f64>, f64) {
    let mut rec = ScaledRecurrence::new(alpha, t);
    let mut mant = Vec::with_capacity(n);
    mant.push(rec.mantissa());
    for _ in 1..n {
        let f = rec.advance();
        if f != 1.0 {
            for m in mant.iter_mut() {
                *m *= f;
            }
        }
        mant.push(rec.mantissa());
    }
    let norm = mant.iter().map(|m| m * m).sum::<f64>().sqrt();
    for m in mant.iter_mut() {
        *m /= norm;
    }
    (mant, norm.ln() + rec.log_scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn low_order_closed_forms() {
        for &alpha in &[-0.5, 0.0, 1.0, 3.5] {
            for &t in &[0.0, 0.3, 2.0, 7.5] {
                assert_eq!(laguerre_eval(0, alpha, t).unwrap(), 1.0);
                assert_relative_eq!(laguerre_eval(1, alpha, t).unwrap(), 1.0 + alpha - t);
                let l2 = ((t * t) - 2.0 * (alpha + 2.0) * t + (alpha + 1.0) * (alpha + 2.0)) / 2.0;
                assert_relative_eq!(laguerre_eval(2, alpha, t).unwrap(), l2, epsilon = 1e-13);
            }
        }
        assert_relative_eq!(laguerre_eval(2, 0.0, 2.0).unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(laguerre_eval(3, -1.0, 1.0).is_err());
        assert!(laguerre_eval(3, 0.0, -1.0).is_err());
    }

    #[test]
    fn value_at_zero() {
        for k in 0..12 {
            for &alpha in &[-0.5, 0.0, 2.0] {
                assert_relative_eq!(
                    laguerre_at_zero(k, alpha),
                    laguerre_raw(k, alpha, 0.0),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn orthonormal_values_match_raw_polynomials() {
        for &alpha in &[-0.5, 0.0, 3.0, 7.0] {
            let h = norm_factors(30, alpha);
            for &t in &[0.0, 0.1, 5.0, 40.0, 120.0] {
                let mut q = vec![0.0; 30];
                orthonormal_values(alpha, t, &mut q);
                for k in 0..30 {
                    let expected = laguerre_raw(k, alpha, t) * (-0.5 * t).exp() / h[k];
                    assert!(
                        (q[k] - expected).abs() <= 1e-11 * (1.0 + expected.abs()),
                        "alpha={alpha} t={t} k={k}: {} vs {expected}",
                        q[k]
                    );
                }
            }
        }
    }

    #[test]
    fn series_survives_extreme_arguments() {
        // e^{-t/2} alone underflows here; the top functions are still O(1).
        let b = vec![0.0; 1023].into_iter().chain([1.0]).collect::<Vec<_>>();
        let v = orthonormal_series(&b, 0.5, 3000.0);
        assert!(v.is_finite());
        assert!(v.abs() > 1e-6);
        assert_eq!(orthonormal_series(&[1.0], 0.5, 3000.0), 0.0);
    }

    #[test]
    fn normalized_row_has_unit_norm() {
        let (row, ln_norm) = normalized_row(1.0, 2500.0, 600);
        let s: f64 = row.iter().map(|x| x * x).sum();
        assert_relative_eq!(s, 1.0, epsilon = 1e-12);
        assert!(ln_norm.is_finite());
    }
}
