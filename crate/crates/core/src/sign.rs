//! Last-sign-change radius `A(f)`, dilation, and the `±1` eigenfunction
//! constructions.

use crate::numerics::laguerre::orthonormal_series;
use crate::radial::norms::grid_breaks;
use crate::radial::{r_of_t, rule_for, EigenExpansion, RadialProfile, DEFAULT_ORDER};
use crate::{Error, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Relative noise floor for sign decisions on sampled data.
pub const SCAN_FLOOR: f64 = 1e-12;

/// Sign structure of a radial function. `a_radius` is infinite when the
/// function is not eventually nonnegative; JSON writes that as `null`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    #[serde(serialize_with = "ser_radius", deserialize_with = "de_radius")]
    pub a_radius: f64,
    pub sign_changes: Vec<f64>,
    pub eventually_nonneg: bool,
    pub tail_certificate: f64,
}

fn ser_radius<S: Serializer>(a: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if a.is_finite() {
        s.serialize_some(a)
    } else {
        s.serialize_none()
    }
}

fn de_radius<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

impl SignReport {
    /// Builds the report from ascending sign changes in `t` and the final sign.
    fn from_breaks(breaks_t: &[f64], final_sign: f64, tail_t: f64) -> Self {
        let eventually_nonneg = final_sign > 0.0;
        let a_radius = if !eventually_nonneg {
            f64::INFINITY
        } else {
            breaks_t.last().map_or(0.0, |&t| r_of_t(t))
        };
        Self {
            a_radius,
            sign_changes: breaks_t.iter().map(|&t| r_of_t(t)).collect(),
            eventually_nonneg,
            tail_certificate: r_of_t(tail_t.max(breaks_t.last().copied().unwrap_or(0.0))),
        }
    }
}

/// Anything whose last sign change can be located.
pub trait SignSource {
    fn sign_report(&self) -> Result<SignReport>;
}

impl SignSource for EigenExpansion {
    fn sign_report(&self) -> Result<SignReport> {
        last_sign_change_expansion(self)
    }
}

impl SignSource for RadialProfile {
    fn sign_report(&self) -> Result<SignReport> {
        last_sign_change_profile(self)
    }
}

pub fn last_sign_change<F: SignSource + ?Sized>(f: &F) -> Result<SignReport> {
    f.sign_report()
}

/// `A(f)`, infinite when `f` is not eventually nonnegative.
pub fn a_of<F: SignSource + ?Sized>(f: &F) -> Result<f64> {
    Ok(f.sign_report()?.a_radius)
}

fn last_sign_change_expansion(f: &EigenExpansion) -> Result<SignReport> {
    f.validate()?;
    let f = f.trimmed();
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    if f.resolution > 0.0 || f.degree() > crate::radial::norms::EXACT_ROOT_DEGREE {
        return scan_expansion(&f);
    }
    let p = f.polynomial();
    let (roots, tail) = p.sign_changes_with_tail();
    Ok(SignReport::from_breaks(&roots, p.sign_at_infinity(), tail))
}

/// Sign scan of a re-projected expansion on the nodes of its own rule,
/// ignoring samples inside the projection noise.
fn scan_expansion(f: &EigenExpansion) -> Result<SignReport> {
    let b = f.orthonormal_coeffs();
    let order = b.len().max(2 * (f.degree() + 1)).max(64);
    let rule = rule_for(f.dim, order)?;
    let alpha = f.alpha();
    let values: Vec<f64> = rule.nodes().iter().map(|&t| orthonormal_series(&b, alpha, t)).collect();
    let floor = SCAN_FLOOR.max(f.resolution);
    Ok(scan(&b, alpha, rule.nodes(), &values, floor))
}

fn last_sign_change_profile(f: &RadialProfile) -> Result<SignReport> {
    if f.values().iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroFunction);
    }
    let floor = SCAN_FLOOR.max(f.projection_residual());
    Ok(scan(f.orthonormal_coeffs(), f.alpha(), f.rule().nodes(), f.values(), floor))
}

fn scan(b: &[f64], alpha: f64, nodes: &[f64], values: &[f64], rel_floor: f64) -> SignReport {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = rel_floor * max;
    let breaks = grid_breaks(b, alpha, nodes, values, floor);
    let (last_t, final_sign) = nodes
        .iter()
        .zip(values)
        .rev()
        .find(|(_, v)| v.abs() > floor)
        .map(|(&t, &v)| (t, v.signum()))
        .unwrap_or((0.0, 1.0));
    SignReport::from_breaks(&breaks, final_sign, last_t)
}

/// Samples `x ↦ f(λx)` on the nodes of `rule`.
pub fn dilate(f: &EigenExpansion, lambda: f64, rule: &std::sync::Arc<crate::numerics::QuadratureRule>) -> Result<RadialProfile> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("dilation factor {lambda} must be positive")));
    }
    f.validate()?;
    let b = f.orthonormal_coeffs();
    let alpha = f.alpha();
    let l2 = lambda * lambda;
    let values = rule.nodes().iter().map(|&t| orthonormal_series(&b, alpha, l2 * t)).collect();
    RadialProfile::from_values(f.dim, rule.clone(), values)
}

/// `x ↦ f(λx)` re-projected onto the eigenbasis at the given order.
pub fn dilate_expansion(f: &EigenExpansion, lambda: f64, order: usize) -> Result<EigenExpansion> {
    if lambda == 1.0 {
        return Ok(f.clone());
    }
    let rule = rule_for(f.dim, order)?;
    let p = dilate(f, lambda, &rule)?;
    let residual = p.projection_residual();
    if residual > crate::radial::RESIDUAL_LIMIT {
        return Err(Error::Unresolved { order, residual });
    }
    Ok(p.to_expansion())
}

/// Balancing dilation `λ` with `A(f_λ) = A(−f̂_λ)`, by bisection on `ln λ`
/// using `A(f_λ) = A(f)/λ` and `A(−f̂_λ) = λ A(−f̂)`.
pub fn balancing_lambda(a_f: f64, a_minus_hat: f64) -> Result<f64> {
    let ok = |a: f64| a > 0.0 && a.is_finite();
    if !ok(a_f) || !ok(a_minus_hat) {
        return Err(Error::Precondition(format!(
            "balancing needs finite positive radii, got A(f) = {a_f}, A(-f^) = {a_minus_hat}"
        )));
    }
    let gap = |ln_l: f64| a_f.ln() - a_minus_hat.ln() - 2.0 * ln_l;
    let (mut lo, mut hi) = (-20.0f64, 20.0f64);
    if gap(lo) < 0.0 || gap(hi) > 0.0 {
        return Err(Error::Precondition("balancing dilation outside e^{±20}".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = gap(mid);
        if g == 0.0 {
            return Ok(mid.exp());
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// A `−1` eigenfunction `g = f_λ − f̂_λ` at the balancing dilation.
pub fn make_minus_eigenfunction(f: &EigenExpansion) -> Result<EigenExpansion> {
    make_minus_eigenfunction_at(f, DEFAULT_ORDER)
}

pub fn make_minus_eigenfunction_at(f: &EigenExpansion, order: usize) -> Result<EigenExpansion> {
    f.validate()?;
    let f = f.trimmed();
    if f.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let (_, odd) = f.eigen_parts();
    if odd.is_zero() {
        return Err(Error::Degenerate(
            "f is a +1 eigenfunction, so f_λ − f̂_λ vanishes".into(),
        ));
    }
    let a_f = a_of(&f)?;
    let a_h = a_of(&f.fourier().scaled(-1.0))?;
    let lambda = balancing_lambda(a_f, a_h)?;
    let f_l = dilate_expansion(&f, lambda, order)?;
    let g = f_l.add_scaled(-1.0, &f_l.fourier())?;
    if g.trimmed().is_zero() {
        return Err(Error::Degenerate("f_λ − f̂_λ vanishes".into()));
    }
    Ok(g.trimmed())
}

/// `g − g(0)ψ₀` for a `+1` eigenfunction with `g(0) ≤ 0`.
pub fn plus_normalize(g: &EigenExpansion) -> Result<EigenExpansion> {
    g.validate()?;
    let scale = g.coeffs.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let (_, odd) = g.eigen_parts();
    if odd.coeffs.iter().any(|a| a.abs() > 1e-12 * scale) {
        return Err(Error::Precondition("input is not a +1 eigenfunction".into()));
    }
    let g0 = g.value_at_zero();
    if g0 > 1e-12 * scale {
        return Err(Error::Precondition(format!("g(0) = {g0} is positive")));
    }
    let mut out = g.clone();
    out.coeffs[0] -= g0;
    Ok(out)
}

/// `sqrt(A(f) A(s·f̂))`, zero when either factor vanishes.
pub fn a_product(f: &EigenExpansion, sign: i32) -> Result<f64> {
    if sign != 1 && sign != -1 {
        return Err(Error::Domain(format!("sign must be ±1, got {sign}")));
    }
    let a = a_of(f)?;
    let b = a_of(&f.fourier().scaled(sign as f64))?;
    if a == 0.0 || b == 0.0 {
        return Ok(0.0);
    }
    Ok((a * b).sqrt())
}

/// The same product for a sampled profile, transforming on its grid.
pub fn a_product_profile(f: &RadialProfile, sign: i32) -> Result<f64> {
    let a = a_of(f)?;
    let h = crate::radial::radial_fourier(f)?;
    let h = RadialProfile::from_values(f.dim(), f.rule().clone(), h.values().iter().map(|v| sign as f64 * v).collect())?;
    let b = a_of(&h)?;
    if a == 0.0 || b == 0.0 {
        return Ok(0.0);
    }
    Ok((a * b).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{eigen_to_profile, t_of_r};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_has_no_sign_change() {
        for d in [1, 4, 9] {
            let r = last_sign_change(&EigenExpansion::gaussian(d)).unwrap();
            assert_eq!(r.a_radius, 0.0);
            assert!(r.eventually_nonneg);
            assert!(r.sign_changes.is_empty());
        }
    }

    // (r² − 1)e^{−πr²} = ((t − 2π)/(2π)) e^{−t/2}; in d = 2 (α = 0) this is
    // (1 − L₁ − 2π)/(2π).
    #[test]
    fn explicit_root_at_one() {
        let c = 2.0 * PI;
        let e = EigenExpansion::new(2, vec![(1.0 - c) / c, -1.0 / c]).unwrap();
        assert_relative_eq!(e.eval(0.5), (0.25 - 1.0) * (-PI * 0.25).exp(), max_relative = 1e-13);
        let r = last_sign_change(&e).unwrap();
        assert_relative_eq!(r.a_radius, 1.0, max_relative = 1e-11);
        let rule = rule_for(2, DEFAULT_ORDER).unwrap();
        let p = eigen_to_profile(&e, &rule).unwrap();
        assert_relative_eq!(a_of(&p).unwrap(), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn first_basis_function_is_eventually_negative() {
        let r = last_sign_change(&EigenExpansion::basis(2, 1)).unwrap();
        assert!(!r.eventually_nonneg);
        assert!(r.a_radius.is_infinite());
        assert_relative_eq!(r.sign_changes[0], 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-11);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"a_radius\":null"));
        let back: SignReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn zero_function_is_rejected() {
        let e = EigenExpansion::new(3, vec![0.0, 0.0]).unwrap();
        assert!(matches!(last_sign_change(&e), Err(Error::ZeroFunction)));
    }

    #[test]
    fn scaling_leaves_a_unchanged() {
        let e = EigenExpansion::new(3, vec![0.2, -0.7, 0.4]).unwrap();
        let a = a_of(&e).unwrap();
        assert_eq!(a_of(&e.scaled(3.5)).unwrap(), a);
        let mut padded = e.clone();
        padded.coeffs.extend([0.0, 0.0]);
        assert_eq!(a_of(&padded).unwrap(), a);
    }

    #[test]
    fn tail_certificate_bounds_the_roots() {
        let e = EigenExpansion::new(5, vec![0.2, -0.7, 0.4, 0.3, 0.1]).unwrap();
        let r = last_sign_change(&e).unwrap();
        let tail = t_of_r(r.tail_certificate);
        let s = e.polynomial().sign_at_infinity();
        for i in 0..200 {
            let t = tail * (1.0 + 0.05 * i as f64) + 1e-9;
            assert!(e.polynomial().eval(t) * s > 0.0);
        }
    }

    #[test]
    fn dilation_identity_and_law() {
        let rule = rule_for(2, 512).unwrap();
        let c = 2.0 * PI;
        let e = EigenExpansion::new(2, vec![(1.0 - c) / c, -1.0 / c]).unwrap();
        let same = dilate(&e, 1.0, &rule).unwrap();
        let direct = eigen_to_profile(&e, &rule).unwrap();
        assert_eq!(same.values(), direct.values());
        for lambda in [0.5, 2.0] {
            let p = dilate(&e, lambda, &rule).unwrap();
            assert_relative_eq!(a_of(&p).unwrap(), 1.0 / lambda, max_relative = 1e-9);
        }
        assert!(dilate(&e, 0.0, &rule).is_err());
    }

    #[test]
    fn minus_construction_on_an_eigenfunction() {
        let f = EigenExpansion::basis(3, 1).scaled(-1.0);
        let g = make_minus_eigenfunction(&f).unwrap();
        for (a, b) in g.coeffs.iter().zip(&f.coeffs) {
            assert_relative_eq!(*a, 2.0 * b, max_relative = 1e-15);
        }
        assert_eq!(a_of(&g).unwrap(), a_of(&f).unwrap());
    }

    #[test]
    fn minus_construction_balances() {
        // −ψ₀ − ψ₁ in d = 4: A(f)² = 3, A(−f̂)² = 1 in t-units.
        let f = EigenExpansion::new(4, vec![-1.0, -1.0]).unwrap();
        let a_f = a_of(&f).unwrap();
        let a_h = a_of(&f.fourier().scaled(-1.0)).unwrap();
        assert_relative_eq!(t_of_r(a_f), 3.0, max_relative = 1e-12);
        assert_relative_eq!(t_of_r(a_h), 1.0, max_relative = 1e-12);
        let lambda = balancing_lambda(a_f, a_h).unwrap();
        assert_relative_eq!(lambda, 3f64.powf(0.25), max_relative = 1e-12);
        let g = make_minus_eigenfunction(&f).unwrap();
        let (even, _) = g.eigen_parts();
        assert!(even.coeffs.iter().all(|&a| a == 0.0));
        let balanced = (a_f * a_h).sqrt();
        let a_g = a_of(&g).unwrap();
        assert!(a_g <= balanced + 1e-9, "{a_g} vs {balanced}");
    }

    #[test]
    fn minus_construction_rejects_plus_eigenfunctions() {
        let f = EigenExpansion::gaussian(3);
        assert!(matches!(make_minus_eigenfunction(&f), Err(Error::Degenerate(_))));
    }

    #[test]
    fn plus_normalization() {
        let g = EigenExpansion::new(3, vec![-2.0, 0.0, 0.5]).unwrap();
        assert!(g.value_at_zero() < 0.0);
        assert!(a_of(&g).unwrap().is_finite());
        let h = plus_normalize(&g).unwrap();
        assert!(h.value_at_zero().abs() <= 1e-15);
        assert!(a_of(&h).unwrap() <= a_of(&g).unwrap() + 1e-9);
        let zero_at_origin = EigenExpansion::new(2, vec![1.0, 0.0, -1.0]).unwrap();
        assert_eq!(zero_at_origin.value_at_zero(), 0.0);
        assert_eq!(plus_normalize(&zero_at_origin).unwrap(), zero_at_origin);
        assert!(plus_normalize(&EigenExpansion::gaussian(2)).is_err());
        assert!(plus_normalize(&EigenExpansion::basis(2, 1)).is_err());
    }

    #[test]
    fn products() {
        let g = EigenExpansion::new(4, vec![0.0, -1.0, 0.0, -0.05]).unwrap();
        let a = a_of(&g).unwrap();
        assert!(a.is_finite() && a > 0.0);
        assert_relative_eq!(a_product(&g, -1).unwrap(), a, max_relative = 1e-15);
        assert_eq!(a_product(&EigenExpansion::gaussian(2), 1).unwrap(), 0.0);
        assert!(a_product(&g, 0).is_err());
    }
}
