use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{balance_counts, union_of_selected, Relaxed, RoundedSolution};
use crate::constraints::ConstraintSet;
use crate::error::Result;
use crate::lp::LpSolution;

/// Draws use a stream separate from the one `balance_counts` consumes.
fn draw_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> bool {
    // One draw per variable even when p is 0 or 1, so the stream position
    // depends only on the variable index.
    let u: f64 = rng.gen();
    u < p.clamp(0.0, 1.0)
}

/// x̄_{i,j} = X̄_j with probability x*_{i,j}/X̄_j (row-major draws), then
/// J_j rebuilt as in Method 2.
pub fn randomized_round_x(ostar: &LpSolution, cs: &ConstraintSet, seed: u64) -> Result<RoundedSolution> {
    let r = Relaxed::new(ostar, cs)?;
    let counts = balance_counts(&r.big_x_all(), cs.n(), seed)?;
    let cands = cs.m() + 1;
    let mut rng = draw_rng(seed);
    let mut drawn = vec![false; cs.m() * cands];
    for i in 0..cs.m() {
        for j in 0..cands {
            let p = if counts[j] == 0 {
                0.0
            } else {
                r.x(i, j) / counts[j] as f64
            };
            drawn[i * cands + j] = bernoulli(&mut rng, p);
        }
    }
    let itemsets = union_of_selected(cs, |i, j| drawn[i * cands + j]);
    RoundedSolution::from_parts(cs, itemsets, counts)
}

/// ū_{j,k} = 1 with probability u*_{j,k} (row-major draws).
pub fn randomized_round_u(ostar: &LpSolution, cs: &ConstraintSet, seed: u64) -> Result<RoundedSolution> {
    let r = Relaxed::new(ostar, cs)?;
    let counts = balance_counts(&r.big_x_all(), cs.n(), seed)?;
    let mut rng = draw_rng(seed);
    let itemsets = (0..cs.m() + 1)
        .map(|j| {
            let mut set = cs.universe().empty_set();
            for k in 0..cs.universe().size() {
                if bernoulli(&mut rng, r.u(j, k)) {
                    set.insert(k);
                }
            }
            set
        })
        .collect();
    RoundedSolution::from_parts(cs, itemsets, counts)
}
