use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const NEGATIVE_TOLERANCE: f64 = 1e-6;

/// Rounds each X*_j to nearest, then adds or removes single units at random
/// positions until the counts sum to `n`.
///
/// Positions whose rounding moved in the direction being corrected (rounded
/// up when removing, down when adding) are tried first, in random order;
/// each position moves by at most one unit per pass.
pub fn balance_counts(xstar: &[f64], n: u64, seed: u64) -> Result<Vec<u64>> {
    if xstar.is_empty() {
        return Err(Error::invalid("no counts to balance"));
    }
    if let Some(&bad) = xstar
        .iter()
        .find(|x| !x.is_finite() || **x < -NEGATIVE_TOLERANCE)
    {
        return Err(Error::invalid(format!("count X* = {bad} is not a nonnegative real")));
    }
    let mut counts: Vec<u64> = xstar.iter().map(|&x| x.max(0.0).round() as u64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: u64 = counts.iter().sum();

    if total > n {
        let mut excess = total - n;
        while excess > 0 {
            let mut order = ranked(xstar, &counts, &mut rng, |x, c| c as f64 > x, |_, c| c > 0);
            order.truncate(excess as usize);
            for j in order {
                counts[j] -= 1;
                excess -= 1;
            }
        }
    } else if total < n {
        let mut deficit = n - total;
        while deficit > 0 {
            let mut order = ranked(xstar, &counts, &mut rng, |x, c| (c as f64) < x, |_, _| true);
            order.truncate(deficit as usize);
            for j in order {
                counts[j] += 1;
                deficit -= 1;
            }
        }
    }
    Ok(counts)
}

/// Eligible positions, shuffled, with preferred ones first.
fn ranked(
    xstar: &[f64],
    counts: &[u64],
    rng: &mut ChaCha8Rng,
    preferred: impl Fn(f64, u64) -> bool,
    eligible: impl Fn(f64, u64) -> bool,
) -> Vec<usize> {
    let mut first = Vec::new();
    let mut rest = Vec::new();
    for (j, (&x, &c)) in xstar.iter().zip(counts).enumerate() {
        if !eligible(x, c) {
            continue;
        }
        if preferred(x, c) {
            first.push(j);
        } else {
            rest.push(j);
        }
    }
    first.shuffle(rng);
    rest.shuffle(rng);
    first.extend(rest);
    first
}
