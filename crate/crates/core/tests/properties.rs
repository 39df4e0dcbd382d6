use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use sunc::bounds::{a_lower, a_lower_from_ball, log_c_theta, theorem2_constant};
use sunc::lp::{feasible_at, minimal_r, LpOptions};
use sunc::numerics::{gauss_laguerre, log_gamma};
use sunc::optimize::{log_ratio, ratio_ascent_step};
use sunc::radial::{
    eigen_to_profile, norm_l1, norm_l2_sq, norm_lp, parseval_residual, radial_fourier, rule_for, DEFAULT_ORDER,
};
use sunc::sign::{a_of, a_product, dilate_expansion, last_sign_change, plus_normalize};
use sunc::verify::{random_expansion, random_minus_witness, verify_chain, verify_main, CoefficientLaw, THETA_GRID};
use sunc::{EigenExpansion, RadialProfile};

fn law() -> impl Strategy<Value = CoefficientLaw> {
    prop_oneof![
        Just(CoefficientLaw::Normal),
        Just(CoefficientLaw::Decaying),
        Just(CoefficientLaw::Sparse)
    ]
}

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..=max_len).prop_filter("nonzero", |c| c.iter().any(|x| x.abs() > 1e-3))
}

fn rel_l2_gap(a: &RadialProfile, b: &RadialProfile) -> f64 {
    let diff = a.combine(1.0, b, -1.0).unwrap();
    (diff.norm_l2_sq() / b.norm_l2_sq()).sqrt()
}

/// Composite Simpson on `[0, hi]`.
fn simpson<F: Fn(f64) -> f64>(f: F, hi: f64, n: usize) -> f64 {
    let h = hi / n as f64;
    let mut s = f(0.0) + f(hi);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `J₀(x) = (1/π)∫₀^π cos(x sin θ) dθ`; the trapezoid rule is spectral here.
fn bessel_j0(x: f64) -> f64 {
    let n = 256;
    let h = PI / n as f64;
    let mut s = 0.5 * (1.0 + 1.0);
    for i in 1..n {
        s += (x * (i as f64 * h).sin()).cos();
    }
    s * h / PI
}

/// Fourier transform of a radial function by direct Hankel integration.
fn hankel(f: &EigenExpansion, rho: f64) -> f64 {
    let hi = 8.0;
    let n = 8000;
    match f.dim {
        1 => 2.0 * simpson(|r| f.eval(r) * (2.0 * PI * r * rho).cos(), hi, n),
        2 => 2.0 * PI * simpson(|r| f.eval(r) * bessel_j0(2.0 * PI * r * rho) * r, hi, n),
        3 => {
            if rho == 0.0 {
                4.0 * PI * simpson(|r| f.eval(r) * r * r, hi, n)
            } else {
                2.0 / rho * simpson(|r| f.eval(r) * r * (2.0 * PI * r * rho).sin(), hi, n)
            }
        }
        _ => unreachable!(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn log_gamma_recurrence(x in 1e-6f64..100.0) {
        let lhs = log_gamma(x + 1.0).unwrap() - log_gamma(x).unwrap();
        prop_assert!((lhs - x.ln()).abs() <= 1e-12, "x = {x}: {lhs} vs {}", x.ln());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laguerre_rule_moments(n in 1usize..=64, which in 0usize..3, d in 1usize..=32) {
        let alpha = match which {
            0 => -0.5,
            1 => 0.0,
            _ => d as f64 / 2.0 - 1.0,
        };
        let rule = gauss_laguerre(n, alpha).unwrap();
        for m in 0..2 * n {
            let mf = m as f64;
            let lg = log_gamma(mf + alpha + 1.0).unwrap();
            let ratio: f64 = rule
                .nodes()
                .iter()
                .zip(rule.log_weights())
                .map(|(&t, &lw)| (lw + mf * t.ln() - lg).exp())
                .sum();
            prop_assert!((ratio - 1.0).abs() <= 1e-10, "n={n} α={alpha} m={m}: {ratio}");
        }
    }

    #[test]
    fn involution(d in 1usize..=12, c in coeffs(30)) {
        let rule = rule_for(d, DEFAULT_ORDER).unwrap();
        let f = eigen_to_profile(&EigenExpansion::new(d, c).unwrap(), &rule).unwrap();
        let back = radial_fourier(&radial_fourier(&f).unwrap()).unwrap();
        prop_assert!(rel_l2_gap(&back, &f) <= 1e-8);
    }

    #[test]
    fn parseval(d in 1usize..=12, c in coeffs(40)) {
        let rule = rule_for(d, DEFAULT_ORDER).unwrap();
        let f = eigen_to_profile(&EigenExpansion::new(d, c).unwrap(), &rule).unwrap();
        prop_assert!(parseval_residual(&f).unwrap() <= 1e-8);
    }

    #[test]
    fn norm_consistency(d in 1usize..=12, c in coeffs(16)) {
        let f = EigenExpansion::new(d, c).unwrap();
        let l1 = norm_l1(&f);
        let l2 = norm_l2_sq(&f).sqrt();
        prop_assert!((norm_lp(&f, 1.0).unwrap() - l1).abs() <= 1e-10 * l1);
        prop_assert!((norm_lp(&f, 2.0).unwrap() - l2).abs() <= 1e-10 * l2);
    }

    #[test]
    fn profile_norms_match_expansion(d in 1usize..=8, c in coeffs(12)) {
        let f = EigenExpansion::new(d, c).unwrap();
        let rule = rule_for(d, DEFAULT_ORDER).unwrap();
        let p = eigen_to_profile(&f, &rule).unwrap();
        let (a, b) = (norm_l1(&p), norm_l1(&f));
        prop_assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b}");
    }

    #[test]
    fn gaussian_width_transform(d in 1usize..=12, a in 0.7f64..1.5) {
        let rule = rule_for(d, DEFAULT_ORDER).unwrap();
        let f = RadialProfile::from_fn(d, rule.clone(), |r| (-a * PI * r * r).exp()).unwrap();
        let h = radial_fourier(&f).unwrap();
        let scale = a.powf(-(d as f64) / 2.0);
        for (&r, &v) in h.radii().iter().zip(h.values()) {
            let want = scale * (-PI * r * r / a).exp();
            prop_assert!((v - want).abs() <= 1e-8 * scale, "r={r}: {v} vs {want}");
        }
    }

    #[test]
    fn hankel_oracle(d in 1usize..=3, c in coeffs(7)) {
        let f = EigenExpansion::new(d, c).unwrap();
        let rule = rule_for(d, DEFAULT_ORDER).unwrap();
        let h = radial_fourier(&eigen_to_profile(&f, &rule).unwrap()).unwrap();
        let scale = h.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (&r, &v) in h.radii().iter().zip(h.values()).filter(|(r, _)| **r <= 2.0).step_by(7) {
            let want = hankel(&f, r);
            prop_assert!((v - want).abs() <= 1e-8 * scale, "d={d} ρ={r}: {v} vs {want}");
        }
    }

    #[test]
    fn a_scale_invariant(d in 1usize..=12, c in coeffs(12), s in 0.01f64..100.0) {
        let f = EigenExpansion::new(d, c).unwrap().trimmed();
        let rep = last_sign_change(&f).unwrap();
        prop_assert!(rep.tail_certificate.is_finite());
        let a = a_of(&f).unwrap();
        let b = a_of(&f.scaled(s)).unwrap();
        prop_assert!(a == b || (a - b).abs() <= 1e-12 * a.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn plus_normalize_shrinks_a(d in 1usize..=12, half in coeffs(6)) {
        // +1 eigenfunction: even indices only, shifted so that g(0) ≤ 0
        let mut c = vec![0.0; 2 * half.len()];
        for (i, v) in half.iter().enumerate() {
            c[2 * i] = *v;
        }
        let mut g = EigenExpansion::new(d, c).unwrap();
        let g0 = g.value_at_zero();
        if g0 > 0.0 {
            g.coeffs[0] -= 1.5 * g0;
        }
        let h = plus_normalize(&g).unwrap();
        prop_assume!(!h.trimmed().is_zero());
        prop_assert!(h.value_at_zero().abs() <= 1e-12 * g.coeffs.iter().fold(1.0f64, |m, x| m.max(x.abs())));
        let (ag, ah) = (a_of(&g).unwrap(), a_of(&h).unwrap());
        prop_assert!(ah <= ag + 1e-9, "A(h) = {ah} > A(g) = {ag}");
    }

    #[test]
    fn dilation_product(d in 1usize..=6, seed in any::<u64>(), lambda in 0.6f64..1.6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_minus_witness(&mut rng, d, 5).unwrap();
        let g_l = dilate_expansion(&g, lambda, 512).unwrap();
        let (a, b) = (a_product(&g, -1).unwrap(), a_product(&g_l, -1).unwrap());
        prop_assert!((a - b).abs() <= 1e-8 * a, "{a} vs {b}");
    }

    #[test]
    fn witness_soundness(d in 1usize..=12, seed in any::<u64>(), n in prop_oneof![Just(3usize), Just(5), Just(7)]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_minus_witness(&mut rng, d, n).unwrap();
        prop_assert!(g.value_at_zero() <= 1e-12);
        let a = a_of(&g).unwrap();
        prop_assert!(a >= a_lower(d).unwrap() - 1e-9, "d={d}: A = {a}");
    }

    #[test]
    fn chain_links_and_main(d in 1usize..=12, seed in any::<u64>(), n in 0usize..=10, law in law()) {
        let f = random_expansion(seed, d, n, law).unwrap();
        let main = verify_main(&f).unwrap();
        prop_assert!(main.main_ok());
        prop_assert!(main.ratio <= main.bound * (1.0 + 1e-9));
        for rep in verify_chain(&f, &THETA_GRID[..9]).unwrap() {
            prop_assert!(rep.all_ok(), "θ = {}: {rep:?}", rep.theta);
            prop_assert!(rep.chain_residual <= 1e-9);
        }
    }

    #[test]
    fn ratio_scale_invariant(d in 1usize..=8, c in coeffs(8), s in 0.01f64..100.0) {
        let f = EigenExpansion::new(d, c).unwrap();
        let (a, b) = (log_ratio(&f).unwrap(), log_ratio(&f.scaled(s)).unwrap());
        prop_assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn ascent_step_capped_and_monotone(d in 1usize..=8, c in coeffs(8), step in 1e-4f64..0.5) {
        let f = EigenExpansion::new(d, c).unwrap();
        let g = ratio_ascent_step(&f, step).unwrap();
        let cap = theorem2_constant(d).unwrap();
        let (a, b) = (log_ratio(&f).unwrap(), log_ratio(&g).unwrap());
        prop_assert!(b >= a - 1e-12);
        prop_assert!(b <= cap + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lp_feasibility_monotone(d in 1usize..=3, r in 0.5f64..2.5, gap in 0.01f64..1.0) {
        let opts = LpOptions::default();
        if feasible_at(r, d, 8, &opts).unwrap().is_some() {
            prop_assert!(feasible_at(r + gap, d, 8, &opts).unwrap().is_some());
        }
    }
}

#[test]
fn theta_constant_continuous_near_one() {
    let mut prev = log_c_theta(1.0 - 2e-4).unwrap();
    let mut theta: f64 = 1.0 - 2e-4;
    while theta < 1.0 {
        theta = (theta + 1e-6).min(1.0);
        let cur = log_c_theta(theta).unwrap();
        assert!((cur - prev).abs() < 1e-6, "jump at θ = {theta}");
        prev = cur;
    }
    assert!((prev - (-(1.0 - 2f64.ln()) / 2.0)).abs() < 1e-15);
}

#[test]
fn chain_solved_for_radius() {
    for d in 1..=4096 {
        let a = a_lower(d).unwrap().ln();
        let b = a_lower_from_ball(d).unwrap().ln();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "d = {d}");
    }
}

#[test]
fn lp_degree_monotone() {
    let opts = LpOptions::default();
    for d in 1..=3 {
        let radii: Vec<f64> = [8, 16, 24].iter().map(|&n| minimal_r(d, n, 1e-4, &opts).unwrap().r_star).collect();
        assert!(radii[1] <= radii[0] + 1e-4 && radii[2] <= radii[1] + 1e-4, "d = {d}: {radii:?}");
    }
}
