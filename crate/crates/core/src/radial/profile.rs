use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::laguerre::orthonormal_series;
use crate::numerics::quadrature::{gauss_laguerre, QuadratureRule};
use crate::radial::expansion::{log_norm_prefactor, EigenExpansion};

pub const DEFAULT_ORDER: usize = 256;

/// Fraction of the modes, counted from the top, whose energy is the
/// projection residual.
const TAIL_FRACTION: usize = 8;

/// Relative tail amplitude above which a profile counts as unresolved.
pub const RESIDUAL_LIMIT: f64 = 1e-6;

type RuleKey = (usize, usize);

fn rule_cache() -> &'static Mutex<HashMap<RuleKey, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared Gauss–Laguerre rule with `α = d/2 − 1`.
pub fn rule_for(dim: usize, order: usize) -> Result<Arc<QuadratureRule>> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if let Some(rule) = rule_cache().lock().unwrap().get(&(dim, order)) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(gauss_laguerre(order, dim as f64 / 2.0 - 1.0)?);
    rule_cache()
        .lock()
        .unwrap()
        .entry((dim, order))
        .or_insert_with(|| rule.clone());
    Ok(rule)
}

#[inline]
pub(crate) fn r_of_t(t: f64) -> f64 {
    (t / (2.0 * std::f64::consts::PI)).sqrt()
}

#[inline]
pub(crate) fn t_of_r(r: f64) -> f64 {
    2.0 * std::f64::consts::PI * r * r
}

/// A radial function sampled at the radii `r_i = sqrt(t_i / 2π)` of a
/// Gauss–Laguerre rule with `α = d/2 − 1`.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    dim: usize,
    radii: Vec<f64>,
    values: Vec<f64>,
    rule: Arc<QuadratureRule>,
    projection: OnceLock<Vec<f64>>,
}

impl RadialProfile {
    pub fn from_values(dim: usize, rule: Arc<QuadratureRule>, values: Vec<f64>) -> Result<Self> {
        check_rule(dim, &rule)?;
        if values.len() != rule.order() {
            return Err(Error::Mismatch(format!(
                "{} values for a rule of order {}",
                values.len(),
                rule.order()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("profile values must be finite".into()));
        }
        let radii = rule.nodes().iter().map(|&t| r_of_t(t)).collect();
        Ok(Self {
            dim,
            radii,
            values,
            rule,
            projection: OnceLock::new(),
        })
    }

    /// Samples `f` at the rule's radii.
    pub fn from_fn<F: Fn(f64) -> f64>(dim: usize, rule: Arc<QuadratureRule>, f: F) -> Result<Self> {
        check_rule(dim, &rule)?;
        let values = rule.nodes().iter().map(|&t| f(r_of_t(t))).collect();
        Self::from_values(dim, rule, values)
    }

    pub fn zeros(dim: usize, rule: Arc<QuadratureRule>) -> Result<Self> {
        let n = rule.order();
        Self::from_values(dim, rule, vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.rule.alpha()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rule(&self) -> &Arc<QuadratureRule> {
        &self.rule
    }

    pub fn order(&self) -> usize {
        self.rule.order()
    }

    /// `a·self + b·other` on a shared grid.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.dim != other.dim || *self.rule != *other.rule {
            return Err(Error::Mismatch("profiles live on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::from_values(self.dim, self.rule.clone(), values)
    }

    /// Orthonormal coefficients `b_k = Σ_i Q_ik sqrt(w_i e^{t_i}) f_i`,
    /// `k < order`. Exact for in-basis profiles of degree below the order.
    pub fn orthonormal_coeffs(&self) -> &[f64] {
        self.projection.get_or_init(|| {
            let n = self.order();
            let q = self.rule.projection_matrix();
            let u: Vec<f64> = (0..n)
                .map(|i| self.values[i] * self.rule.sqrt_scaled_weight(i))
                .collect();
            let mut b = vec![0.0; n];
            for (i, &ui) in u.iter().enumerate() {
                if ui == 0.0 {
                    continue;
                }
                let row = &q[i * n..(i + 1) * n];
                for (bk, &qik) in b.iter_mut().zip(row) {
                    *bk += qik * ui;
                }
            }
            b
        })
    }

    /// Relative amplitude carried by the top eighth of the modes.
    pub fn projection_residual(&self) -> f64 {
        let b = self.orthonormal_coeffs();
        let n = b.len();
        let total: f64 = b.iter().map(|x| x * x).sum();
        if total == 0.0 {
            return 0.0;
        }
        let start = n - (n / TAIL_FRACTION).max(1);
        let tail: f64 = b[start..].iter().map(|x| x * x).sum();
        (tail / total).sqrt()
    }

    /// The profile as an eigen-expansion of degree `order − 1`.
    pub fn to_expansion(&self) -> EigenExpansion {
        let mut e = EigenExpansion::from_orthonormal(self.dim, self.orthonormal_coeffs());
        e.resolution = 1e-12_f64.max(self.projection_residual());
        e
    }

    /// Interpolated value at `t = 2πr²` through the projection.
    pub fn eval_t(&self, t: f64) -> f64 {
        orthonormal_series(self.orthonormal_coeffs(), self.alpha(), t)
    }

    /// `‖f‖²_{L²}` by the rule itself (exact for in-basis profiles).
    pub fn norm_l2_sq(&self) -> f64 {
        let s: f64 = (0..self.order())
            .map(|i| {
                let u = self.values[i] * self.rule.sqrt_scaled_weight(i);
                u * u
            })
            .sum();
        s * log_norm_prefactor(self.dim).exp()
    }
}

fn check_rule(dim: usize, rule: &QuadratureRule) -> Result<()> {
    if dim == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let alpha = dim as f64 / 2.0 - 1.0;
    if rule.alpha() != alpha {
        return Err(Error::Mismatch(format!(
            "rule has alpha {} but dimension {dim} needs {alpha}",
            rule.alpha()
        )));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ProfileDoc {
    dim: usize,
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl Serialize for RadialProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProfileDoc {
            dim: self.dim,
            radii: self.radii.clone(),
            values: self.values.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RadialProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = ProfileDoc::deserialize(d)?;
        if doc.radii.len() != doc.values.len() {
            return Err(D::Error::custom("radii and values differ in length"));
        }
        let rule = rule_for(doc.dim, doc.radii.len()).map_err(D::Error::custom)?;
        let profile =
            RadialProfile::from_values(doc.dim, rule, doc.values).map_err(D::Error::custom)?;
        for (a, b) in profile.radii.iter().zip(&doc.radii) {
            if (a - b).abs() > 1e-12 * a.max(1.0) {
                return Err(D::Error::custom(format!(
                    "radius {b} is not a node of the order-{} rule",
                    profile.order()
                )));
            }
        }
        Ok(profile)
    }
}
