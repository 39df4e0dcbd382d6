//! Log-gamma and the dimension constants built on it.
//!
//! Everything that depends on the dimension is kept in log-space; `(2/e)^{d/2}`
//! and `Γ(d/2+1)` leave the double range long before `d = 10⁴`.

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this the argument is shifted up with the recurrence before the
/// asymptotic series is applied.
const SERIES_START: f64 = 10.0;

// B_{2k} / (2k (2k-1)) for k = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// `ln Γ(x)` for `x > 0`.
///
/// Uses the Stirling series for `x ≥ 10` (truncation error below 1e-18
/// relative there) and the exact recurrence `Γ(x+1) = xΓ(x)` to reach that
/// region from below.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(log_gamma_unchecked(x))
}

pub(crate) fn log_gamma_unchecked(x: f64) -> f64 {
    if x >= SERIES_START {
        return stirling(x);
    }
    let mut shifted = x;
    let mut product = 1.0;
    while shifted < SERIES_START {
        product *= shifted;
        shifted += 1.0;
    }
    stirling(shifted) - product.ln()
}

fn stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut power = inv;
    for c in STIRLING {
        corr += c * power;
        power *= inv2;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + corr
}

/// `ln |B₁|` for the unit ball in `ℝ^d`: `(d/2) ln π − ln Γ(d/2 + 1)`.
pub fn log_unit_ball_volume(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let half = d as f64 / 2.0;
    Ok(half * std::f64::consts::PI.ln() - log_gamma_unchecked(half + 1.0))
}

/// `ln |S^{d−1}| = ln 2 + (d/2) ln π − ln Γ(d/2)`.
pub fn log_sphere_area(d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let half = d as f64 / 2.0;
    Ok(std::f64::consts::LN_2 + half * std::f64::consts::PI.ln() - log_gamma_unchecked(half))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // mpmath.loggamma at 40 digits
    const REFERENCE: [(f64, f64); 11] = [
        (0.5, 0.572_364_942_924_700_087_1),
        (1.5, -0.120_782_237_635_245_222_3),
        (3.5, 1.200_973_602_347_074_224_8),
        (4.0, 1.791_759_469_228_055_000_8),
        (7.0, 6.579_251_212_010_100_995),
        (10.25, 13.368_023_671_476_046_295),
        (0.001, 6.907_178_885_383_853_682_5),
        (0.3, 1.095_797_994_818_075_521_7),
        (123.456, 469.605_547_129_929_468_73),
        (1e4, 82_099.717_496_442_377_272_6),
        (1e6, 12_815_504.569_147_611_66),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for (x, expected) in REFERENCE {
            let got = log_gamma(x).unwrap();
            assert_relative_eq!(got, expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn zeros_of_log_gamma() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(log_unit_ball_volume(1).unwrap(), 2f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(
            log_unit_ball_volume(2).unwrap(),
            std::f64::consts::PI.ln(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            log_unit_ball_volume(3).unwrap(),
            1.432_411_958_301_181_6,
            max_relative = 1e-13
        );
        // stays finite far beyond where the linear value underflows
        assert!(log_unit_ball_volume(10_000).unwrap().is_finite());
        assert!(log_unit_ball_volume(0).is_err());
    }

    #[test]
    fn sphere_area_relation() {
        // |S^{d-1}| = d |B_1|
        for d in 1..40 {
            let lhs = log_sphere_area(d).unwrap();
            let rhs = (d as f64).ln() + log_unit_ball_volume(d).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "d={d}");
        }
    }
}
