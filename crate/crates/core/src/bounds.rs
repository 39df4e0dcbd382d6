//! Closed-form constants and bounds, evaluated in log space.

use crate::numerics::{log_gamma, log_unit_ball_volume};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

/// Truncated Kabatiansky–Levenshtein exponent.
pub const KL_EXPONENT: f64 = 0.599;

/// Below this distance from `θ = 1` the combined constant switches to its series.
pub const THETA_SERIES_SWITCH: f64 = 1e-4;

/// `1/(2√π)`, the limit of `a_lower(d)/√d`.
pub fn asymptotic_slope() -> f64 {
    0.5 / PI.sqrt()
}

/// `sqrt(2/e)`, the per-dimension constant of the main inequality.
pub fn sqrt_two_over_e() -> f64 {
    (-(1.0 - LN_2) / 2.0).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub dim: usize,
    pub log_theorem2_constant: f64,
    pub a_lower: f64,
    pub a_lower_over_sqrt_d: f64,
    pub log_delta_lp_lower: f64,
    pub log_unit_ball_volume: f64,
    pub threshold_ok: bool,
}

impl BoundsReport {
    pub fn new(d: usize) -> Result<Self> {
        let a = a_lower(d)?;
        Ok(Self {
            dim: d,
            log_theorem2_constant: theorem2_constant(d)?,
            a_lower: a,
            a_lower_over_sqrt_d: a / (d as f64).sqrt(),
            log_delta_lp_lower: delta_lp_lower(d)?,
            log_unit_ball_volume: log_unit_ball_volume(d)?,
            threshold_ok: a >= (d as f64).sqrt() * asymptotic_slope(),
        })
    }
}

/// Writes one CSV row per report, with a header.
pub fn write_csv<W: std::io::Write>(reports: &[BoundsReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if reports.is_empty() {
        w.write_record([
            "dim",
            "log_theorem2_constant",
            "a_lower",
            "a_lower_over_sqrt_d",
            "log_delta_lp_lower",
            "log_unit_ball_volume",
            "threshold_ok",
        ])?;
    }
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn check_dim(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    Ok(d as f64)
}

/// `ln (2/e)^{d/2}`.
pub fn theorem2_constant(d: usize) -> Result<f64> {
    let d = check_dim(d)?;
    Ok(0.5 * d * (LN_2 - 1.0))
}

/// Lower bound `sqrt(e/2π) (Γ(d/2+1)/4)^{1/d}` for the sign-uncertainty radius.
pub fn a_lower(d: usize) -> Result<f64> {
    let df = check_dim(d)?;
    let lg = log_gamma(df / 2.0 + 1.0)?;
    Ok((0.5 * (1.0 - (2.0 * PI).ln()) + (lg - 4f64.ln()) / df).exp())
}

/// The same bound, solved for from `A^d (2/e)^{d/2} ≥ 1/(4|B₁|)`.
pub fn a_lower_from_ball(d: usize) -> Result<f64> {
    let df = check_dim(d)?;
    let log_a = (-(4f64.ln()) - log_unit_ball_volume(d)? - theorem2_constant(d)?) / df;
    Ok(log_a.exp())
}

/// Whether `a_lower(d) ≥ √d/(2√π)`.
pub fn threshold_check(d: usize) -> Result<bool> {
    Ok(a_lower(d)? >= (d as f64).sqrt() * asymptotic_slope())
}

/// `ln((1/4)(e/8)^{d/2})`.
pub fn delta_lp_lower(d: usize) -> Result<f64> {
    let d = check_dim(d)?;
    Ok(0.25f64.ln() + 0.5 * d * (1.0 - 8f64.ln()))
}

/// `ln(|B₁| (a/2)^d)` for a radius `a`.
pub fn log_density(d: usize, a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("radius {a} must be positive")));
    }
    Ok(log_unit_ball_volume(d)? + d as f64 * (a / 2.0).ln())
}

/// `(1/4) 2^{−d} / w`.
pub fn delta_lp_from_wd(w: f64, d: usize) -> Result<f64> {
    let df = check_dim(d)?;
    if !(w > 0.0) {
        return Err(Error::Domain(format!("w = {w} must be positive")));
    }
    if w.is_infinite() {
        return Ok(0.0);
    }
    Ok((0.25f64.ln() - df * LN_2 - w.ln()).exp())
}

/// `ln(p^{1/p} / (p*)^{1/p*})`, zero at both endpoints.
fn log_beckner_ratio(p: f64) -> f64 {
    let inv_conj = 1.0 - 1.0 / p;
    let conj_term = if inv_conj == 0.0 { 0.0 } else { -inv_conj * inv_conj.ln() };
    p.ln() / p - conj_term
}

/// Sharp Hausdorff–Young constant `(p^{1/p}/(p*)^{1/p*})^{d/2}`.
pub fn hy_constant(p: f64, d: usize) -> Result<f64> {
    let df = check_dim(d)?;
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [1, 2]")));
    }
    Ok((0.5 * df * log_beckner_ratio(p)).exp())
}

/// Interpolation exponent `p_θ = 2/(2−θ)`.
pub fn p_theta(theta: f64) -> f64 {
    2.0 / (2.0 - theta)
}

/// `ln` of the per-dimension constant `C(θ)`, valid on `[0, 1]`.
pub fn log_c_theta(theta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} outside [0, 1]")));
    }
    let eps = 1.0 - theta;
    if eps < THETA_SERIES_SWITCH {
        // (θ/2)·ln B / (1−θ) expanded around θ = 1
        let mut sum = -(1.0 - LN_2);
        let mut pow = eps * eps;
        let mut n = 3.0;
        while pow > 1e-30 {
            sum += pow / (n * (n - 1.0));
            pow *= eps * eps;
            n += 2.0;
        }
        return Ok(0.5 * theta * sum);
    }
    if theta == 0.0 {
        return Ok(0.0);
    }
    let h = theta / 2.0;
    let log_b = h * h.ln() - (1.0 - h) * (1.0 - h).ln();
    Ok(theta / (2.0 * eps) * log_b)
}

/// `C(θ) = (p_θ^{1/p_θ}/(p_θ*)^{1/p_θ*})^{θ/(2(1−θ))}`, with `C(1) = sqrt(2/e)`.
pub fn c_theta(theta: f64) -> Result<f64> {
    Ok(log_c_theta(theta)?.exp())
}

/// `ln` of the full chain bound at `θ ∈ [0, 1)`: `‖f‖₂² ≤ e^{·} ‖f‖₁‖f̂‖₁`.
pub fn log_chain_bound(theta: f64, d: usize) -> Result<f64> {
    let df = check_dim(d)?;
    Ok(df * (0.5 * log_beckner_ratio(p_theta(theta)) + log_c_theta(theta)?))
}

/// `2^{(0.599−1)d}`. Asymptotic only: the `o(1)` is dropped.
pub fn kl_wd_lower(d: usize) -> Result<f64> {
    let df = check_dim(d)?;
    Ok(((KL_EXPONENT - 1.0) * df * LN_2).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_constants() {
        assert_relative_eq!(sqrt_two_over_e(), 0.857_763_884_960_706_8, max_relative = 1e-15);
        assert_relative_eq!(theorem2_constant(1).unwrap().exp(), 0.857_763_884_960_706_8, max_relative = 1e-15);
        assert_relative_eq!(theorem2_constant(2).unwrap().exp(), 2.0 / std::f64::consts::E, max_relative = 1e-15);
        assert_relative_eq!(asymptotic_slope(), 0.282_094_791_773_878_14, max_relative = 1e-15);
        assert!(theorem2_constant(0).is_err());
    }

    #[test]
    fn a_lower_values() {
        let cases = [
            (1, 0.145_727_748_849_820_26),
            (4, 0.553_095_096_036_279_5),
            (5, 0.633_812_135_336_517_8),
            (12, 1.013_903_639_968_145_9),
            (128, 3.232_020_878_458_947),
        ];
        for (d, v) in cases {
            assert_relative_eq!(a_lower(d).unwrap(), v, max_relative = 1e-13);
            assert_relative_eq!(a_lower_from_ball(d).unwrap().ln(), v.ln(), epsilon = 1e-12);
        }
        assert!(a_lower(12).unwrap() <= 2.0);
    }

    #[test]
    fn threshold_values() {
        for d in 1..=4 {
            assert!(!threshold_check(d).unwrap());
        }
        assert!(threshold_check(5).unwrap());
        assert!(threshold_check(128).unwrap());
    }

    #[test]
    fn asymptotic_ratio() {
        for (d, v) in [(2000, 0.282_516_359_337_733_87), (4096, 0.282_325_258_299_338_12)] {
            let r = a_lower(d).unwrap() / (d as f64).sqrt();
            assert_relative_eq!(r, v, max_relative = 1e-12);
            assert!((r - asymptotic_slope()).abs() <= 0.01);
        }
    }

    #[test]
    fn delta_lp_values() {
        assert_relative_eq!(delta_lp_lower(1).unwrap().exp(), 0.145_727_748_849_820_26, max_relative = 1e-14);
        assert_relative_eq!(delta_lp_lower(8).unwrap().exp(), 0.003_332_406_618_233_901_3, max_relative = 1e-14);
        for d in 1..=64 {
            let via_ball = log_density(d, a_lower(d).unwrap()).unwrap();
            assert!((via_ball - delta_lp_lower(d).unwrap()).abs() <= 1e-10);
        }
    }

    #[test]
    fn delta_from_wd() {
        for d in [1, 3, 8] {
            let w = theorem2_constant(d).unwrap().exp();
            assert_relative_eq!(
                delta_lp_from_wd(w, d).unwrap(),
                delta_lp_lower(d).unwrap().exp(),
                max_relative = 1e-13
            );
        }
        assert_relative_eq!(delta_lp_from_wd(0.5, 2).unwrap(), 0.125, max_relative = 1e-15);
        assert_eq!(delta_lp_from_wd(f64::INFINITY, 2).unwrap(), 0.0);
        assert!(delta_lp_from_wd(1e300, 2).unwrap() < 1e-300);
        assert!(delta_lp_from_wd(0.0, 2).is_err());
    }

    #[test]
    fn hausdorff_young_constant() {
        for d in [1, 4, 9] {
            assert_eq!(hy_constant(2.0, d).unwrap(), 1.0);
            assert_eq!(hy_constant(1.0, d).unwrap(), 1.0);
            assert!(hy_constant(1.5, d).unwrap() < 1.0);
        }
        assert_relative_eq!(hy_constant(4.0 / 3.0, 1).unwrap(), 0.936_687_074_375_248_1, max_relative = 1e-14);
        assert!(hy_constant(2.5, 1).is_err());
    }

    #[test]
    fn combined_constant() {
        assert_eq!(c_theta(0.0).unwrap(), 1.0);
        assert_relative_eq!(c_theta(0.5).unwrap(), hy_constant(4.0 / 3.0, 1).unwrap(), max_relative = 1e-14);
        let cases = [
            (0.1, 0.994_401_398_466_137_6),
            (0.9, 0.871_681_208_960_217_9),
            (0.99, 0.859_088_019_042_994_5),
            (0.9999, 0.857_777_046_139_733_1),
        ];
        for (t, v) in cases {
            assert_relative_eq!(c_theta(t).unwrap(), v, max_relative = 1e-11);
        }
        assert!((c_theta(0.9999).unwrap() - sqrt_two_over_e()).abs() <= 1e-3);
        assert_relative_eq!(c_theta(1.0).unwrap(), sqrt_two_over_e(), max_relative = 1e-15);
    }

    #[test]
    fn combined_constant_is_continuous_at_the_switch() {
        let a = c_theta(1.0 - THETA_SERIES_SWITCH * (1.0 + 1e-9)).unwrap();
        let b = c_theta(1.0 - THETA_SERIES_SWITCH * (1.0 - 1e-9)).unwrap();
        assert!((a - b).abs() <= 1e-12);
        let mut prev = c_theta(1.0 - 1e-3).unwrap();
        let mut t: f64 = 1.0 - 1e-3;
        while t < 1.0 {
            t = (t + 1e-6).min(1.0);
            let c = c_theta(t).unwrap();
            assert!((c - prev).abs() <= 1e-6);
            prev = c;
        }
    }

    #[test]
    fn chain_bound_decreases_to_the_main_constant() {
        let d = 3;
        let mut prev = f64::INFINITY;
        for t in [0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.9999] {
            let b = log_chain_bound(t, d).unwrap();
            assert!(b < prev);
            assert!(b >= theorem2_constant(d).unwrap() - 1e-12);
            prev = b;
        }
        assert!((log_chain_bound(0.9999, d).unwrap() - theorem2_constant(d).unwrap()).abs() < 1e-3);
    }

    #[test]
    fn kl_comparison() {
        assert_relative_eq!(kl_wd_lower(1).unwrap(), 0.757_333_157_938_487_9, max_relative = 1e-13);
        for d in 1..=64 {
            let k = kl_wd_lower(d).unwrap();
            assert_relative_eq!(k.powf(1.0 / d as f64), 0.757_333_157_938_487_9, max_relative = 1e-12);
            assert!(k > 2f64.powf(-(d as f64) / 2.0));
        }
    }

    #[test]
    fn report_csv() {
        let rows: Vec<_> = (1..=3).map(|d| BoundsReport::new(d).unwrap()).collect();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("dim,log_theorem2_constant"));
        let json = serde_json::to_string(&rows[0]).unwrap();
        let back: BoundsReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rows[0]);
    }
}
