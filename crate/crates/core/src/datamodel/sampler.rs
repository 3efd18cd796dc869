use rand::Rng;

/// Poisson subsampling: every index joins independently with probability `q`.
/// The result may be empty.
pub fn poisson_sample<R: Rng + ?Sized>(n: usize, q: f64, rng: &mut R) -> Vec<usize> {
    debug_assert!(q > 0.0 && q <= 1.0, "sampling rate must lie in (0, 1]");
    (0..n).filter(|_| rng.random::<f64>() < q).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn certain_inclusion() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(poisson_sample(50, 1.0, &mut rng), (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn mean_batch_size_matches_binomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 10_000;
        let total: usize = (0..draws).map(|_| poisson_sample(20_000, 0.0016, &mut rng).len()).sum();
        let mean = total as f64 / draws as f64;
        assert!((28.8..=35.2).contains(&mean), "mean batch {mean}");
    }

    #[test]
    fn empty_probability_at_least_binomial() {
        // P(empty) = (1-q)^n exactly; check the empirical rate is consistent
        let (n, q) = (5usize, 0.01f64);
        let p_empty = (1.0 - q).powi(n as i32);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws = 100_000;
        let empty = (0..draws).filter(|_| poisson_sample(n, q, &mut rng).is_empty()).count();
        let freq = empty as f64 / draws as f64;
        let se = (p_empty * (1.0 - p_empty) / draws as f64).sqrt();
        assert!((freq - p_empty).abs() < 4.0 * se, "{freq} vs {p_empty}");
    }

    #[test]
    fn marginal_inclusion_within_three_standard_errors() {
        let (n, q, draws) = (10usize, 0.3f64, 100_000usize);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut hits = vec![0usize; n];
        for _ in 0..draws {
            for i in poisson_sample(n, q, &mut rng) {
                hits[i] += 1;
            }
        }
        let se = (q * (1.0 - q) / draws as f64).sqrt();
        let fixed = hits[3] as f64 / draws as f64;
        assert!((fixed - q).abs() <= 3.0 * se, "{fixed}");
        for (i, &h) in hits.iter().enumerate() {
            let freq = h as f64 / draws as f64;
            assert!((freq - q).abs() <= 4.5 * se, "index {i}: {freq}");
        }
    }
}
