//! Fixed inputs shared by the benchmarks in `benches/`.

use sunc::EigenExpansion;

/// A deterministic sign-changing expansion of degree `n`.
pub fn sample_expansion(dim: usize, n: usize) -> EigenExpansion {
    let coeffs = (0..=n)
        .map(|k| {
            let x = (k as f64 + 1.0) * 0.618_033_988_749_895;
            (x - x.floor() - 0.5) / (1.0 + k as f64 / 4.0)
        })
        .collect();
    EigenExpansion::new(dim, coeffs).expect("valid dimension")
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixture_is_nonzero() {
        let f = super::sample_expansion(3, 10);
        assert_eq!(f.degree(), 10);
        assert!(!f.is_zero());
    }
}
