use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};

/// Slack allowed on `Σ p = 1` and on tiny negative entries from round-off.
const DISTRIBUTION_SLACK: f64 = 1e-9;

/// Seed for stream `index` of a run seeded with `seed`.
///
/// Each index selects an independent ChaCha stream, so concurrent workers
/// draw the same numbers regardless of scheduling.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rand::Rng::random(&mut rng)
}

/// Clamp round-off negatives to zero and reject anything that is not a
/// probability vector.
pub fn check_distribution(probabilities: &[f64]) -> Result<Vec<f64>> {
    if probabilities.is_empty() {
        return Err(Error::InvalidDistribution("empty distribution".into()));
    }
    let mut out = Vec::with_capacity(probabilities.len());
    for (i, &p) in probabilities.iter().enumerate() {
        if !p.is_finite() || p < -DISTRIBUTION_SLACK {
            return Err(Error::InvalidDistribution(format!("entry {i} is {p}")));
        }
        out.push(p.max(0.0));
    }
    let total: f64 = out.iter().sum();
    if (total - 1.0).abs() > DISTRIBUTION_SLACK {
        return Err(Error::InvalidDistribution(format!(
            "entries sum to {total}"
        )));
    }
    Ok(out)
}

/// Multinomial outcome counts for `n` independent shots.
///
/// Drawn as a chain of conditional binomials, so the result depends only on
/// `(probabilities, n, seed)`.
pub fn sample_outcomes(probabilities: &[f64], n: u64, seed: u64) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let p = check_distribution(probabilities)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; p.len()];
    let mut remaining = n;
    let mut mass: f64 = p.iter().sum();
    let last = p.len() - 1;
    for (k, &pk) in p.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k == last {
            counts[k] = remaining;
            break;
        }
        let q = if mass > 0.0 {
            (pk / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let draw = Binomial::new(remaining, q)
            .map_err(|e| Error::InvalidDistribution(e.to_string()))?
            .sample(&mut rng);
        counts[k] = draw;
        remaining -= draw;
        mass -= pk;
    }
    Ok(counts)
}
