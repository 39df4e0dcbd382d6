//! Finite Laguerre series `P(t) = Σ_k c_k L_k^{(α)}(t)` and isolation of
//! their sign changes on `(0, ∞)`.

use crate::numerics::laguerre::laguerre_at_zero;

/// Bisection stops once the bracket is this narrow relative to `max(1, t)`.
pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LaguerreSeries {
    pub alpha: f64,
    pub coeffs: Vec<f64>,
}

impl LaguerreSeries {
    pub fn new(alpha: f64, coeffs: Vec<f64>) -> Self {
        let mut s = Self { alpha, coeffs };
        s.trim();
        s
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0.0 {
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let a = self.alpha;
        let c = &self.coeffs;
        if c.is_empty() {
            return 0.0;
        }
        let mut prev = 1.0;
        let mut acc = c[0];
        if c.len() == 1 {
            return acc;
        }
        let mut cur = 1.0 + a - t;
        acc += c[1] * cur;
        for (j, &cj) in c.iter().enumerate().skip(2) {
            let k = (j - 1) as f64;
            let next = ((2.0 * k + 1.0 + a - t) * cur - (k + a) * prev) / (k + 1.0);
            prev = cur;
            cur = next;
            acc += cj * cur;
        }
        acc
    }

    /// `P(t)` and `Σ |c_k L_k(t)|`, which bounds the rounding error of the sum.
    pub fn eval_with_magnitude(&self, t: f64) -> (f64, f64) {
        let a = self.alpha;
        let c = &self.coeffs;
        if c.is_empty() {
            return (0.0, 0.0);
        }
        let mut prev = 1.0;
        let mut acc = c[0];
        let mut mag = c[0].abs();
        if c.len() == 1 {
            return (acc, mag);
        }
        let mut cur = 1.0 + a - t;
        acc += c[1] * cur;
        mag += (c[1] * cur).abs();
        for (j, &cj) in c.iter().enumerate().skip(2) {
            let k = (j - 1) as f64;
            let next = ((2.0 * k + 1.0 + a - t) * cur - (k + a) * prev) / (k + 1.0);
            prev = cur;
            cur = next;
            acc += cj * cur;
            mag += (cj * cur).abs();
        }
        (acc, mag)
    }

    /// Sign of `P(t)`, or zero when the value is within rounding of zero.
    fn resolved_sign(&self, t: f64) -> f64 {
        let (v, mag) = self.eval_with_magnitude(t);
        let noise = 64.0 * f64::EPSILON * mag * (self.degree() as f64 + 1.0);
        if v.abs() <= noise {
            0.0
        } else {
            sign(v)
        }
    }

    pub fn value_at_zero(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c * laguerre_at_zero(k, self.alpha))
            .sum()
    }

    /// `d/dt L_k^{(α)} = −L_{k−1}^{(α+1)}`.
    pub fn derivative(&self) -> LaguerreSeries {
        if self.coeffs.len() <= 1 {
            return LaguerreSeries::new(self.alpha + 1.0, vec![0.0]);
        }
        LaguerreSeries::new(
            self.alpha + 1.0,
            self.coeffs[1..].iter().map(|c| -c).collect(),
        )
    }

    /// Series whose sign is that of `d/dt [P(t) e^{−t/2}]`, i.e. `P' − P/2`,
    /// using `L_k^{(α)} = L_k^{(α+1)} − L_{k−1}^{(α+1)}`.
    pub fn gaussian_derivative(&self) -> LaguerreSeries {
        let c = &self.coeffs;
        let coeffs = (0..c.len())
            .map(|j| -0.5 * (c[j] + c.get(j + 1).copied().unwrap_or(0.0)))
            .collect();
        LaguerreSeries::new(self.alpha + 1.0, coeffs)
    }

    /// Sign of `P(t)` as `t → ∞`: the leading term of `L_n^{(α)}` is `(−t)^n/n!`.
    pub fn sign_at_infinity(&self) -> f64 {
        let n = self.degree();
        let lead = self.coeffs[n];
        if n % 2 == 0 {
            lead.signum()
        } else {
            -lead.signum()
        }
    }

    /// Points in `(0, ∞)` where `P` changes sign, ascending.
    ///
    /// Isolation recurses on the derivative: between consecutive sign changes
    /// of `P'` the series is monotone, so each such piece holds at most one
    /// root and a sign test on its endpoints decides it. Tangential zeros are
    /// not sign changes and are not reported.
    pub fn sign_changes(&self) -> Vec<f64> {
        self.sign_changes_with_tail().0
    }

    /// Sign changes together with a point beyond which `P` and all its
    /// derivatives keep the sign they have at infinity.
    pub fn sign_changes_with_tail(&self) -> (Vec<f64>, f64) {
        if self.is_zero() || self.degree() == 0 {
            return (Vec::new(), 0.0);
        }
        let (knots, tail) = if self.degree() == 1 {
            (Vec::new(), 0.0)
        } else {
            self.derivative().sign_changes_with_tail()
        };
        let roots = self.roots_between_knots(&knots);
        let tail = roots.last().copied().unwrap_or(0.0).max(tail);
        (roots, tail)
    }

    /// Roots given the ascending turning points of `P`.
    pub(crate) fn roots_between_knots(&self, knots: &[f64]) -> Vec<f64> {
        let mut points = Vec::with_capacity(knots.len() + 1);
        points.push(0.0);
        points.extend(knots.iter().copied().filter(|&k| k > 0.0));
        let signs: Vec<f64> = points.iter().map(|&x| self.resolved_sign(x)).collect();

        let mut roots = Vec::new();
        let mut last: Option<(usize, f64)> = None;
        for (i, &s) in signs.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            if let Some((j, prev)) = last {
                if prev != s {
                    roots.push(self.root_between(&points, &signs, j, i));
                }
            }
            last = Some((i, s));
        }

        let s_inf = self.sign_at_infinity();
        if let Some((j, prev)) = last {
            if prev != s_inf {
                if let Some(z) = (j + 1..points.len()).find(|&z| signs[z] == 0.0) {
                    roots.push(points[z]);
                } else {
                    let a = points[j];
                    let mut b = (2.0 * a).max(a + 1.0);
                    let mut guard = 0;
                    while sign(self.eval(b)) != s_inf && guard < 2000 {
                        b = 2.0 * b;
                        guard += 1;
                    }
                    roots.push(bisect(|t| self.eval(t), a, b));
                }
            }
        }
        roots.retain(|&r| r > 0.0);
        roots
    }

    fn root_between(&self, points: &[f64], signs: &[f64], j: usize, i: usize) -> f64 {
        // a zero knot between two opposite signs is the root itself
        if let Some(z) = (j + 1..i).find(|&z| signs[z] == 0.0) {
            return points[z];
        }
        bisect(|t| self.eval(t), points[j], points[i])
    }
}

#[inline]
pub(crate) fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Bisection on a bracket with `sign f(a) ≠ sign f(b)`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = sign(f(a));
    for _ in 0..400 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b || b - a <= ROOT_TOL * a.max(1.0) {
            break;
        }
        let fm = sign(f(mid));
        if fm == 0.0 {
            return mid;
        }
        if fm == fa {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
