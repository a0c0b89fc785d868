use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Two-sided paired randomization test on the mean difference: each
/// permutation flips the sign of every per-query difference with
/// probability 1/2. Returns `(c + 1) / (n + 1)` where `c` counts
/// permutations at least as extreme as the observed difference.
pub fn significance_test(a: &[f64], b: &[f64], permutations: usize, seed: u64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Data(format!("paired samples differ in length: {} vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Ok(1.0);
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = diffs.len() as f64;
    let observed = (diffs.iter().sum::<f64>() / n).abs();
    let tol = 1e-12 * observed.max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0usize;
    for _ in 0..permutations {
        let s: f64 = diffs.iter().map(|&d| if rng.gen_bool(0.5) { d } else { -d }).sum();
        if (s / n).abs() >= observed - tol {
            extreme += 1;
        }
    }
    Ok((extreme + 1) as f64 / (permutations + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [0.1, 0.5, 0.9];
        assert_eq!(significance_test(&a, &a, 1000, 1).unwrap(), 1.0);
    }

    #[test]
    fn constant_shift_is_significant() {
        let b: Vec<f64> = (0..50).map(|i| i as f64 / 50.0).collect();
        let a: Vec<f64> = b.iter().map(|x| x + 1.0).collect();
        let p = significance_test(&a, &b, 10_000, 3).unwrap();
        assert!(p < 0.001);
        assert_eq!(p, significance_test(&a, &b, 10_000, 3).unwrap());
    }

    #[test]
    fn length_mismatch() {
        assert!(significance_test(&[1.0], &[1.0, 2.0], 10, 0).is_err());
    }
}
