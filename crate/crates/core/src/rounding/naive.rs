use super::{balance_counts, union_of_selected, Relaxed, RoundedSolution};
use crate::constraints::ConstraintSet;
use crate::error::Result;
use crate::lp::LpSolution;

/// ū_{j,k} = 1 iff u*_{j,k} ≥ 0.5; counts balanced from X*.
pub fn round_method1(ostar: &LpSolution, cs: &ConstraintSet, seed: u64) -> Result<RoundedSolution> {
    let r = Relaxed::new(ostar, cs)?;
    let counts = balance_counts(&r.big_x_all(), cs.n(), seed)?;
    let t = cs.universe().size();
    let itemsets = (0..cs.m() + 1)
        .map(|j| {
            let mut set = cs.universe().empty_set();
            for k in (0..t).filter(|&k| r.u(j, k) >= 0.5) {
                set.insert(k);
            }
            set
        })
        .collect();
    RoundedSolution::from_parts(cs, itemsets, counts)
}

/// x̄_{i,j} = X̄_j iff X̄_j > 0 and x*_{i,j} ≥ X̄_j/2; J_j is the union of the
/// selected I_i, and ȳ, x̄ are re-derived from it once.
pub fn round_method2(ostar: &LpSolution, cs: &ConstraintSet, seed: u64) -> Result<RoundedSolution> {
    let r = Relaxed::new(ostar, cs)?;
    let counts = balance_counts(&r.big_x_all(), cs.n(), seed)?;
    let itemsets = union_of_selected(cs, |i, j| {
        counts[j] > 0 && r.x(i, j) >= 0.5 * counts[j] as f64
    });
    RoundedSolution::from_parts(cs, itemsets, counts)
}
