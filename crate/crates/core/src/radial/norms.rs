//! `L^p` norms of radial functions with sign-segmented integration.
//!
//! With `t = 2πr²` every norm reduces to `∫₀^∞ |F(t)|^p t^{d/2−1} dt`.
//! `|F|^p` is not polynomial×Gaussian, so the interval is cut at the sign
//! changes of `F` and each piece is integrated adaptively in `u = sqrt(t)`,
//! where the measure becomes `2u^{d−1} du` and stays smooth for every `d`.

use crate::numerics::kronrod::{integrate, Tolerance};
use crate::numerics::laguerre::orthonormal_series;
use crate::numerics::series::bisect;
use crate::numerics::tanh_sinh::tanh_sinh;
use std::sync::Mutex;
use crate::radial::expansion::{log_norm_prefactor, EigenExpansion};
use crate::radial::profile::{rule_for, RadialProfile};

/// Expansions above this degree are scanned rather than isolated by
/// derivative recursion.
pub const EXACT_ROOT_DEGREE: usize = 64;

/// A real radial function that can be evaluated anywhere in `t`.
pub trait RadialFunction {
    fn dim(&self) -> usize;

    fn alpha(&self) -> f64 {
        self.dim() as f64 / 2.0 - 1.0
    }

    /// Orthonormal coefficients of the function (possibly a projection).
    fn orthonormal(&self) -> std::borrow::Cow<'_, [f64]>;

    /// Sign changes of `F` in `t`, ascending.
    fn sign_breaks(&self) -> Vec<f64>;
}

impl RadialFunction for EigenExpansion {
    fn dim(&self) -> usize {
        self.dim
    }

    fn orthonormal(&self) -> std::borrow::Cow<'_, [f64]> {
        std::borrow::Cow::Owned(self.orthonormal_coeffs())
    }

    fn sign_breaks(&self) -> Vec<f64> {
        if self.degree() <= EXACT_ROOT_DEGREE {
            self.polynomial().sign_changes()
        } else {
            let b = self.orthonormal_coeffs();
            let order = (2 * (self.degree() + 1)).max(64);
            match rule_for(self.dim, order) {
                Ok(rule) => scan_breaks(&b, self.alpha(), rule.nodes(), 0.0),
                Err(_) => Vec::new(),
            }
        }
    }
}

impl RadialFunction for RadialProfile {
    fn dim(&self) -> usize {
        RadialProfile::dim(self)
    }

    fn orthonormal(&self) -> std::borrow::Cow<'_, [f64]> {
        std::borrow::Cow::Borrowed(self.orthonormal_coeffs())
    }

    fn sign_breaks(&self) -> Vec<f64> {
        grid_breaks(
            self.orthonormal_coeffs(),
            self.alpha(),
            self.rule().nodes(),
            self.values(),
            0.0,
        )
    }
}

/// Sign changes between consecutive grid samples whose magnitude exceeds
/// `floor`, refined by bisection on the series.
pub(crate) fn grid_breaks(b: &[f64], alpha: f64, nodes: &[f64], values: &[f64], floor: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for (&t, &v) in nodes.iter().zip(values) {
        if v.abs() <= floor || v == 0.0 {
            continue;
        }
        let s = v.signum();
        if let Some((tp, sp)) = last {
            if sp != s {
                out.push(bisect(|x| orthonormal_series(b, alpha, x), tp, t));
            }
        }
        last = Some((t, s));
    }
    out
}

pub(crate) fn scan_breaks(b: &[f64], alpha: f64, nodes: &[f64], floor: f64) -> Vec<f64> {
    let values: Vec<f64> = nodes.iter().map(|&t| orthonormal_series(b, alpha, t)).collect();
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    grid_breaks(b, alpha, nodes, &values, floor * max)
}

/// `∫₀^∞ |F(t)|^p t^α dt` for finite `p ≥ 1`.
pub(crate) fn abs_pow_integral(b: &[f64], alpha: f64, breaks: &[f64], p: f64) -> f64 {
    let dm1 = 2.0 * alpha + 1.0;
    let integrand = |u: f64| {
        let f = orthonormal_series(b, alpha, u * u);
        if f == 0.0 {
            return 0.0;
        }
        let pow = if p == 1.0 {
            f.abs()
        } else if p == 2.0 {
            f * f
        } else {
            f.abs().powf(p)
        };
        let w = if dm1 == 0.0 { 1.0 } else { u.powi(dm1 as i32) };
        2.0 * pow * w
    };
    let tol = Tolerance::default();
    let mut total = 0.0;
    let mut a = 0.0;
    // |F|^p has a fractional-power zero at every break
    let singular = |a: f64, b: f64| {
        if p == 1.0 || p == 2.0 {
            integrate(&integrand, a, b, tol).value
        } else {
            tanh_sinh(&integrand, a, b, 1e-8)
        }
    };
    for &t in breaks {
        let u = t.sqrt();
        total += singular(a, u);
        a = u;
    }
    if !breaks.is_empty() {
        total += singular(a, a + 1.0);
        a += 1.0;
    }
    // semi-infinite tail, integrated in unit windows until it stops mattering
    let mut window_prev = f64::INFINITY;
    let mut steps = 0;
    loop {
        let w = integrate(&integrand, a, a + 1.0, tol).value;
        total += w;
        a += 1.0;
        steps += 1;
        let negligible = w <= 1e-18 * total.abs() || w == 0.0;
        if (negligible && w <= window_prev) || steps > 400 {
            break;
        }
        window_prev = w;
    }
    total
}

/// `sup |F|` by sampling followed by golden-section refinement of the best
/// samples. Approximate: a peak narrower than the sampling step can be missed.
pub(crate) fn sup_abs(b: &[f64], alpha: f64, breaks: &[f64]) -> f64 {
    let degree = b.len().saturating_sub(1) as f64;
    let last = breaks.last().copied().unwrap_or(0.0);
    let t_max = (4.0 * degree + 2.0 * alpha + 60.0).max(1.5 * last + 10.0);
    let u_max = t_max.sqrt();
    let samples = 4000;
    let h = u_max / samples as f64;
    let abs_at = |u: f64| orthonormal_series(b, alpha, u * u).abs();
    let vals: Vec<f64> = (0..=samples).map(|i| abs_at(i as f64 * h)).collect();
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    let mut best = vals[idx[0]];
    for &i in idx.iter().take(8) {
        let lo = (i as f64 - 1.0).max(0.0) * h;
        let hi = (i as f64 + 1.0) * h;
        best = best.max(golden_max(&abs_at, lo, hi));
    }
    best
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.618_033_988_749_894_8;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..100 {
        if (b - a).abs() < 1e-14 * (1.0 + a.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd).max(f(a)).max(f(b))
}

/// `‖f‖_{L^p(ℝ^d)}` for `p ∈ [1, ∞]`, given precomputed coefficients and breaks.
pub(crate) fn lp_norm_parts(dim: usize, b: &[f64], breaks: &[f64], p: f64) -> f64 {
    let alpha = dim as f64 / 2.0 - 1.0;
    if p.is_infinite() {
        return sup_abs(b, alpha, breaks);
    }
    let integral = abs_pow_integral(b, alpha, breaks, p);
    if integral <= 0.0 {
        return 0.0;
    }
    ((integral.ln() + log_norm_prefactor(dim)) / p).exp()
}

/// A function with its coefficients and sign changes computed once, for
/// evaluating several norms.
pub struct Prepared {
    pub dim: usize,
    pub b: Vec<f64>,
    pub breaks: Vec<f64>,
    /// Norms already computed, keyed by the bits of `p`.
    memo: Mutex<Vec<(u64, f64)>>,
}

impl Prepared {
    pub fn new<F: RadialFunction + ?Sized>(f: &F) -> Self {
        Self {
            dim: f.dim(),
            b: f.orthonormal().into_owned(),
            breaks: f.sign_breaks(),
            memo: Mutex::new(Vec::new()),
        }
    }

    pub fn norm(&self, p: f64) -> f64 {
        if p == 2.0 {
            return self.norm_l2_sq().sqrt();
        }
        let key = p.to_bits();
        if let Some(&(_, v)) = self.memo.lock().unwrap().iter().find(|(k, _)| *k == key) {
            return v;
        }
        let v = lp_norm_parts(self.dim, &self.b, &self.breaks, p);
        self.memo.lock().unwrap().push((key, v));
        v
    }

    pub fn norm_l2_sq(&self) -> f64 {
        let s: f64 = self.b.iter().map(|x| x * x).sum();
        s * log_norm_prefactor(self.dim).exp()
    }

    pub fn eval_t(&self, t: f64) -> f64 {
        orthonormal_series(&self.b, self.dim as f64 / 2.0 - 1.0, t)
    }
}
