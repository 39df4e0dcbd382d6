use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::gamma::log_gamma_unchecked;
use crate::numerics::laguerre::{laguerre_at_zero, norm_factors, orthonormal_series};
use crate::numerics::series::LaguerreSeries;

/// `f(r) = Σ_k a_k ψ_k(r)` with `ψ_k(r) = L_k^{(d/2−1)}(2πr²) e^{−πr²}`.
///
/// `ψ̂_k = (−1)^k ψ_k`, so the Fourier transform of an expansion is the
/// expansion with its odd coefficients negated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenExpansion {
    pub dim: usize,
    pub coeffs: Vec<f64>,
    /// Relative amplitude below which features are not trusted. Zero for
    /// exactly specified expansions; set by operations that re-project.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub resolution: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl EigenExpansion {
    pub fn new(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        let e = Self {
            dim,
            coeffs,
            resolution: 0.0,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if self.coeffs.is_empty() {
            return Err(Error::Domain("expansion needs at least one coefficient".into()));
        }
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("expansion coefficients must be finite".into()));
        }
        Ok(())
    }

    /// The Gaussian `e^{−π|x|²}`.
    pub fn gaussian(dim: usize) -> Self {
        Self {
            dim,
            coeffs: vec![1.0],
            resolution: 0.0,
        }
    }

    /// The single basis function `ψ_k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        Self {
            dim,
            coeffs,
            resolution: 0.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.dim as f64 / 2.0 - 1.0
    }

    /// Index of the last nonzero coefficient (0 for the zero expansion).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Drops trailing zero coefficients.
    pub fn trimmed(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.truncate(self.degree() + 1);
        out
    }

    pub fn fourier(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &a)| if k % 2 == 1 { -a } else { a })
            .collect();
        Self {
            dim: self.dim,
            coeffs,
            resolution: self.resolution,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|a| c * a).collect(),
            resolution: self.resolution,
        }
    }

    /// `self + c · other`.
    pub fn add_scaled(&self, c: f64, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Mismatch(format!(
                "cannot combine dimension {} with dimension {}",
                self.dim, other.dim
            )));
        }
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(0.0)
                    + c * other.coeffs.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        Ok(Self {
            dim: self.dim,
            coeffs,
            resolution: self.resolution.max(other.resolution),
        })
    }

    /// Coefficients against the orthonormal functions `q_k = ψ_k / h_k`.
    pub fn orthonormal_coeffs(&self) -> Vec<f64> {
        let h = norm_factors(self.coeffs.len(), self.alpha());
        self.coeffs.iter().zip(&h).map(|(a, h)| a * h).collect()
    }

    pub fn from_orthonormal(dim: usize, b: &[f64]) -> Self {
        let alpha = dim as f64 / 2.0 - 1.0;
        let h = norm_factors(b.len(), alpha);
        Self {
            dim,
            coeffs: b.iter().zip(&h).map(|(b, h)| b / h).collect(),
            resolution: 0.0,
        }
    }

    /// The polynomial factor `P(t) = Σ a_k L_k^{(α)}(t)`, `f = P(2πr²) e^{−πr²}`.
    pub fn polynomial(&self) -> LaguerreSeries {
        LaguerreSeries::new(self.alpha(), self.coeffs.clone())
    }

    /// `f` at `t = 2πr²`.
    pub fn eval_t(&self, t: f64) -> f64 {
        orthonormal_series(&self.orthonormal_coeffs(), self.alpha(), t)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval_t(2.0 * std::f64::consts::PI * r * r)
    }

    pub fn value_at_zero(&self) -> f64 {
        let alpha = self.alpha();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, &a)| a * laguerre_at_zero(k, alpha))
            .sum()
    }

    /// `‖f‖²_{L²(ℝ^d)}`, exact by orthogonality.
    pub fn norm_l2_sq(&self) -> f64 {
        let s: f64 = self.orthonormal_coeffs().iter().map(|b| b * b).sum();
        s * log_norm_prefactor(self.dim).exp()
    }

    /// Even-index (`+1` eigen) and odd-index (`−1` eigen) components.
    pub fn eigen_parts(&self) -> (Self, Self) {
        let pick = |parity: usize| Self {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &a)| if k % 2 == parity { a } else { 0.0 })
                .collect(),
            resolution: self.resolution,
        };
        (pick(0), pick(1))
    }
}

/// `ln(2^{−d/2}/Γ(d/2))`: `‖f‖_p^p = e^{this} ∫₀^∞ |f|^p t^{d/2−1} dt` with `t = 2πr²`.
pub(crate) fn log_norm_prefactor(dim: usize) -> f64 {
    let half = dim as f64 / 2.0;
    -half * std::f64::consts::LN_2 - log_gamma_unchecked(half)
}
