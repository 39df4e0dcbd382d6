//! Radial functions, the eigenbasis Fourier transform, and norms.

mod expansion;
pub mod norms;
mod profile;

pub use expansion::EigenExpansion;
pub(crate) use expansion::log_norm_prefactor;
pub use norms::{Prepared, RadialFunction};
pub use profile::{rule_for, RadialProfile, DEFAULT_ORDER, RESIDUAL_LIMIT};
pub(crate) use profile::{r_of_t, t_of_r};

use crate::numerics::laguerre::orthonormal_series;
use crate::numerics::QuadratureRule;
use crate::{Error, Result};
use std::sync::Arc;

/// Samples `e` on the nodes of `rule`.
pub fn eigen_to_profile(e: &EigenExpansion, rule: &Arc<QuadratureRule>) -> Result<RadialProfile> {
    e.validate()?;
    if (rule.alpha() - e.alpha()).abs() > 1e-12 {
        return Err(Error::Mismatch(format!(
            "rule has alpha {} but the expansion needs {}",
            rule.alpha(),
            e.alpha()
        )));
    }
    let b = e.orthonormal_coeffs();
    let alpha = e.alpha();
    let values = rule.nodes().iter().map(|&t| orthonormal_series(&b, alpha, t)).collect();
    RadialProfile::from_values(e.dim, rule.clone(), values)
}

/// Fourier transform of a profile on the same grid.
pub fn radial_fourier(f: &RadialProfile) -> Result<RadialProfile> {
    let residual = f.projection_residual();
    if !(residual <= RESIDUAL_LIMIT) {
        return Err(Error::Unresolved { order: f.order(), residual });
    }
    let mut b = f.orthonormal_coeffs().to_vec();
    for bk in b.iter_mut().skip(1).step_by(2) {
        *bk = -*bk;
    }
    let alpha = f.alpha();
    let values = f
        .rule()
        .nodes()
        .iter()
        .map(|&t| orthonormal_series(&b, alpha, t))
        .collect();
    RadialProfile::from_values(f.dim(), f.rule().clone(), values)
}

/// `|‖f‖₂² − ‖f̂‖₂²| / ‖f‖₂²`.
pub fn parseval_residual(f: &RadialProfile) -> Result<f64> {
    let g = radial_fourier(f)?;
    let a = f.norm_l2_sq();
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok((a - g.norm_l2_sq()).abs() / a)
}

pub fn norm_l1<F: RadialFunction + ?Sized>(f: &F) -> f64 {
    norm_lp_any(f, 1.0).expect("p = 1 is admissible")
}

pub fn norm_l2_sq<F: RadialFunction + ?Sized>(f: &F) -> f64 {
    let s: f64 = f.orthonormal().iter().map(|x| x * x).sum();
    s * log_norm_prefactor(f.dim()).exp()
}

/// `‖f‖_p` for `p ∈ [1, 2]`.
pub fn norm_lp<F: RadialFunction + ?Sized>(f: &F, p: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [1, 2]")));
    }
    norm_lp_any(f, p)
}

/// `‖f‖_p` for `p ∈ [1, ∞]`.
pub fn norm_lp_any<F: RadialFunction + ?Sized>(f: &F, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("p = {p} below 1")));
    }
    Ok(Prepared::new(f).norm(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian_profile(d: usize) -> RadialProfile {
        let rule = rule_for(d, DEFAULT_ORDER).unwrap();
        eigen_to_profile(&EigenExpansion::gaussian(d), &rule).unwrap()
    }

    #[test]
    fn gaussian_profile_values() {
        let g = gaussian_profile(3);
        for (r, v) in g.radii().iter().zip(g.values()).take(50) {
            assert_relative_eq!(*v, (-std::f64::consts::PI * r * r).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn gaussian_is_fixed_by_the_transform() {
        for d in [1, 2, 5, 12] {
            let g = gaussian_profile(d);
            let h = radial_fourier(&g).unwrap();
            for (x, y) in g.values().iter().zip(h.values()) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn first_basis_function_changes_sign() {
        let rule = rule_for(2, DEFAULT_ORDER).unwrap();
        let p = eigen_to_profile(&EigenExpansion::basis(2, 1), &rule).unwrap();
        let q = radial_fourier(&p).unwrap();
        for (x, y) in p.values().iter().zip(q.values()) {
            assert!((x + y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn transform_is_linear() {
        let rule = rule_for(3, DEFAULT_ORDER).unwrap();
        let f = eigen_to_profile(&EigenExpansion::new(3, vec![1.0, -0.5, 0.25]).unwrap(), &rule).unwrap();
        let g = eigen_to_profile(&EigenExpansion::new(3, vec![0.0, 2.0, 0.0, 1.0]).unwrap(), &rule).unwrap();
        let lhs = radial_fourier(&f.combine(2.0, &g, -3.0).unwrap()).unwrap();
        let rhs = radial_fourier(&f).unwrap().combine(2.0, &radial_fourier(&g).unwrap(), -3.0).unwrap();
        for (x, y) in lhs.values().iter().zip(rhs.values()) {
            assert!((x - y).abs() <= 1e-11);
        }
    }

    #[test]
    fn rejects_mismatched_rule() {
        let rule = rule_for(2, 32).unwrap();
        assert!(eigen_to_profile(&EigenExpansion::gaussian(3), &rule).is_err());
    }

    #[test]
    fn unresolved_profile_is_reported() {
        let rule = rule_for(1, 64).unwrap();
        let p = RadialProfile::from_fn(1, rule, |r| if r < 1.0 { 1.0 } else { 0.0 }).unwrap();
        assert!(matches!(radial_fourier(&p), Err(Error::Unresolved { .. })));
    }

    #[test]
    fn gaussian_norms() {
        for d in [1, 2, 3, 4, 7] {
            let g = gaussian_profile(d);
            assert_relative_eq!(norm_l1(&g), 1.0, max_relative = 1e-10);
            assert_relative_eq!(norm_l2_sq(&g), 2f64.powf(-(d as f64) / 2.0), max_relative = 1e-12);
            let e = EigenExpansion::gaussian(d).scaled(2.0);
            assert_relative_eq!(norm_l1(&e), 2.0, max_relative = 1e-10);
        }
        assert_relative_eq!(norm_l2_sq(&gaussian_profile(4)), 0.25, max_relative = 1e-12);
        let zero = RadialProfile::zeros(3, rule_for(3, 32).unwrap()).unwrap();
        assert_eq!(norm_l2_sq(&zero), 0.0);
        assert_eq!(norm_l1(&zero), 0.0);
    }

    #[test]
    fn gaussian_lp_closed_form() {
        for d in [1, 3, 6] {
            for p in [1.1f64, 4.0 / 3.0, 1.7] {
                let g = EigenExpansion::gaussian(d);
                let expect = p.powf(-(d as f64) / (2.0 * p));
                assert_relative_eq!(norm_lp(&g, p).unwrap(), expect, max_relative = 1e-10);
            }
        }
        let g = EigenExpansion::gaussian(1);
        assert_relative_eq!(norm_lp(&g, 4.0 / 3.0).unwrap(), 0.8977346205130202, max_relative = 1e-12);
        assert_relative_eq!(norm_lp_any(&g, f64::INFINITY).unwrap(), 1.0, max_relative = 1e-12);
        assert!(norm_lp(&g, 2.5).is_err());
        assert!(norm_lp(&g, 0.5).is_err());
    }

    // Independent oracle: plain composite Simpson in r on a fine grid, with
    // the root of 1 − 2πr² inserted as a breakpoint.
    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn l1_of_sign_changing_basis_function() {
        let pi = std::f64::consts::PI;
        let f = |r: f64| ((1.0 - 2.0 * pi * r * r) * (-pi * r * r).exp()).abs() * r;
        let root = 1.0 / (2.0 * pi).sqrt();
        let oracle = 2.0 * pi * (simpson(f, 0.0, root, 20000) + simpson(f, root, 12.0, 200000));
        let e = EigenExpansion::basis(2, 1);
        assert_relative_eq!(norm_l1(&e), oracle, max_relative = 1e-10);
        let rule = rule_for(2, DEFAULT_ORDER).unwrap();
        let p = eigen_to_profile(&e, &rule).unwrap();
        assert_relative_eq!(norm_l1(&p), oracle, max_relative = 1e-10);
        assert_relative_eq!(oracle, 4.0 / 0.5f64.exp() - 1.0, max_relative = 1e-9);
    }

    #[test]
    fn lp_consistency() {
        let e = EigenExpansion::new(5, vec![0.3, -1.0, 0.4, 0.1]).unwrap();
        assert_relative_eq!(norm_lp(&e, 1.0).unwrap(), norm_l1(&e), max_relative = 1e-10);
        assert_relative_eq!(norm_lp(&e, 2.0).unwrap(), norm_l2_sq(&e).sqrt(), max_relative = 1e-10);
        assert_relative_eq!(
            norms::lp_norm_parts(5, &e.orthonormal_coeffs(), &e.sign_breaks(), 2.0),
            norm_l2_sq(&e).sqrt(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn parseval_holds_in_basis() {
        let rule = rule_for(6, DEFAULT_ORDER).unwrap();
        let e = EigenExpansion::new(6, vec![1.0, 0.5, -0.25, 0.125, 0.3]).unwrap();
        let p = eigen_to_profile(&e, &rule).unwrap();
        assert!(parseval_residual(&p).unwrap() <= 1e-8);
    }
}
