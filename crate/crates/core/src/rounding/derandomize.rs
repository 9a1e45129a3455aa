//! Conditional expectations: fix one variable per step to whichever branch
//! has the smaller expected objective.

use super::probability::{abs_row, signed_row};
use super::{
    balance_counts, BranchObjective, FixOrder, ProbabilityContext, Relaxed, RoundedSolution,
    RoundingParams,
};
use crate::constraints::ConstraintSet;
use crate::error::Result;
use crate::formulation::VarRef;
use crate::lp::LpSolution;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub var: VarRef,
    /// 0, or X̄_j for x̄ and 1 for ū.
    pub value: u64,
    pub before: f64,
    pub chosen_expectation: f64,
    pub alternative_expectation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerandTrace {
    pub objective: BranchObjective,
    pub initial_expectation: f64,
    pub steps: Vec<TraceStep>,
}

impl DerandTrace {
    pub fn final_expectation(&self) -> f64 {
        self.steps
            .last()
            .map_or(self.initial_expectation, |s| s.chosen_expectation)
    }
}

fn row_value(objective: BranchObjective, counts: &[u64], probs: impl Iterator<Item = f64>, target: u64) -> f64 {
    match objective {
        BranchObjective::AbsoluteDeviation => abs_row(counts, probs, target),
        BranchObjective::SignedDeviation => signed_row(counts, probs, target),
    }
}

fn order(rows: usize, cols: usize, order: FixOrder) -> Vec<(usize, usize)> {
    match order {
        FixOrder::RowMajor => (0..rows).flat_map(|a| (0..cols).map(move |b| (a, b))).collect(),
        FixOrder::ColumnMajor => (0..cols).flat_map(|b| (0..rows).map(move |a| (a, b))).collect(),
    }
}

pub fn derandomize_x(ostar: &LpSolution, cs: &ConstraintSet, params: &RoundingParams) -> Result<RoundedSolution> {
    derandomize_x_traced(ostar, cs, params).map(|(s, _)| s)
}

/// Fixes each x̄_{i,j} to 0 or X̄_j; the ProbabilityContext supplies the
/// conditional Prob[I_i ⊆ J_j]. J_j is finally the union of the I_i fixed
/// at X̄_j.
pub fn derandomize_x_traced(
    ostar: &LpSolution,
    cs: &ConstraintSet,
    params: &RoundingParams,
) -> Result<(RoundedSolution, DerandTrace)> {
    let r = Relaxed::new(ostar, cs)?;
    let counts = balance_counts(&r.big_x_all(), cs.n(), params.seed)?;
    let mut ctx = ProbabilityContext::from_lp(ostar, cs, counts.clone(), params.refine_rounds)?;
    let m = cs.m();
    let cands = m + 1;
    let objective = params.objective;
    let eval_row = |ctx: &ProbabilityContext, i: usize, j: usize, p: f64| {
        let probs = ctx
            .row(i)
            .iter()
            .enumerate()
            .map(|(jj, &q)| if jj == j { p } else { q });
        row_value(objective, &counts, probs, cs.target(i))
    };

    let mut rows: Vec<f64> = (0..m)
        .map(|i| row_value(objective, &counts, ctx.row(i).iter().copied(), cs.target(i)))
        .collect();
    let mut total: f64 = rows.iter().sum();
    let mut trace = DerandTrace {
        objective,
        initial_expectation: total,
        steps: Vec::with_capacity(m * cands),
    };

    for (i, j) in order(m, cands, params.order) {
        let var = VarRef::XX { i, j };
        if counts[j] == 0 {
            // Both branches leave column j empty.
            let col = ctx.column_if_fixed(i, j, false);
            ctx.commit(i, j, false, &col);
            trace.steps.push(TraceStep {
                var,
                value: 0,
                before: total,
                chosen_expectation: total,
                alternative_expectation: total,
            });
            continue;
        }
        let branch = |value: bool| {
            let col = ctx.column_if_fixed(i, j, value);
            let mut changed = Vec::new();
            let mut e = total;
            for (i2, &p) in col.iter().enumerate() {
                if p != ctx.prob(i2, j) {
                    let v = eval_row(&ctx, i2, j, p);
                    e += v - rows[i2];
                    changed.push((i2, v));
                }
            }
            (e, col, changed)
        };
        let zero = branch(false);
        let full = branch(true);
        let (value, chosen, alternative) = if full.0 < zero.0 {
            (true, full, zero)
        } else {
            (false, zero, full)
        };
        trace.steps.push(TraceStep {
            var,
            value: if value { counts[j] } else { 0 },
            before: total,
            chosen_expectation: chosen.0,
            alternative_expectation: alternative.0,
        });
        ctx.commit(i, j, value, &chosen.1);
        for (i2, v) in chosen.2 {
            rows[i2] = v;
        }
        // Re-sum rather than accumulate, so drift does not build up.
        total = rows.iter().sum();
    }

    let itemsets = (0..cands).map(|j| ctx.covered(j).clone()).collect();
    Ok((RoundedSolution::from_parts(cs, itemsets, counts)?, trace))
}

pub fn derandomize_u(ostar: &LpSolution, cs: &ConstraintSet, params: &RoundingParams) -> Result<RoundedSolution> {
    derandomize_u_traced(ostar, cs, params).map(|(s, _)| s)
}

/// Fixes each ū_{j,k} to 0 or 1 with Prob[I_i ⊆ J_j] = Π_{k∈I_i} û_{j,k},
/// where û is the fixed value or u* for unfixed entries.
pub fn derandomize_u_traced(
    ostar: &LpSolution,
    cs: &ConstraintSet,
    params: &RoundingParams,
) -> Result<(RoundedSolution, DerandTrace)> {
    let r = Relaxed::new(ostar, cs)?;
    let counts = balance_counts(&r.big_x_all(), cs.n(), params.seed)?;
    let m = cs.m();
    let t = cs.universe().size();
    let cands = m + 1;
    let objective = params.objective;

    let mut u_hat: Vec<f64> = (0..cands)
        .flat_map(|j| (0..t).map(move |k| (j, k)))
        .map(|(j, k)| r.u(j, k).clamp(0.0, 1.0))
        .collect();
    let items: Vec<Vec<usize>> = (0..m).map(|i| cs.itemset(i).items().collect()).collect();
    let prob = |u_hat: &[f64], i: usize, j: usize| -> f64 {
        items[i].iter().map(|&k| u_hat[j * t + k]).product()
    };
    let mut probs: Vec<f64> = (0..m)
        .flat_map(|i| (0..cands).map(move |j| (i, j)))
        .map(|(i, j)| prob(&u_hat, i, j))
        .collect();
    let row_of = |probs: &[f64], i: usize| -> f64 {
        row_value(objective, &counts, probs[i * cands..(i + 1) * cands].iter().copied(), cs.target(i))
    };
    let mut rows: Vec<f64> = (0..m).map(|i| row_of(&probs, i)).collect();
    let mut total: f64 = rows.iter().sum();
    let mut trace = DerandTrace {
        objective,
        initial_expectation: total,
        steps: Vec::with_capacity(cands * t),
    };

    for (j, k) in order(cands, t, params.order) {
        let var = VarRef::U { j, k };
        let affected: Vec<usize> = (0..m).filter(|&i| cs.itemset(i).contains(k)).collect();
        if counts[j] == 0 || affected.is_empty() {
            u_hat[j * t + k] = 0.0;
            for &i in &affected {
                probs[i * cands + j] = prob(&u_hat, i, j);
            }
            trace.steps.push(TraceStep {
                var,
                value: 0,
                before: total,
                chosen_expectation: total,
                alternative_expectation: total,
            });
            continue;
        }
        let branch = |value: f64| {
            let mut u2 = u_hat.clone();
            u2[j * t + k] = value;
            let mut p2 = probs.clone();
            let mut e = total;
            let mut changed = Vec::with_capacity(affected.len());
            for &i in &affected {
                p2[i * cands + j] = prob(&u2, i, j);
                let v = row_of(&p2, i);
                e += v - rows[i];
                changed.push((i, v));
            }
            (e, u2, p2, changed)
        };
        let zero = branch(0.0);
        let one = branch(1.0);
        let (value, chosen, alternative) = if one.0 < zero.0 {
            (1, one, zero)
        } else {
            (0, zero, one)
        };
        trace.steps.push(TraceStep {
            var,
            value,
            before: total,
            chosen_expectation: chosen.0,
            alternative_expectation: alternative.0,
        });
        u_hat = chosen.1;
        probs = chosen.2;
        for (i, v) in chosen.3 {
            rows[i] = v;
        }
        total = rows.iter().sum();
    }

    let itemsets = (0..cands)
        .map(|j| {
            let mut set = cs.universe().empty_set();
            for k in (0..t).filter(|&k| u_hat[j * t + k] >= 0.5) {
                set.insert(k);
            }
            set
        })
        .collect();
    Ok((RoundedSolution::from_parts(cs, itemsets, counts)?, trace))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::{cs, ostar};
    use super::super::{round_method1, RoundingParams};
    use super::*;
    use crate::formulation::VarRef::{U, X, XX};
    use crate::itemset::ItemSet;

    #[test]
    fn integral_relaxation_is_reproduced() {
        let c = cs(3, 4, &[(&[0], 3), (&[0, 1], 1), (&[2], 1)]);
        let o = ostar(
            &c,
            &[
                (X { j: 0 }, 2.0),
                (X { j: 1 }, 1.0),
                (X { j: 2 }, 1.0),
                (XX { i: 0, j: 0 }, 2.0),
                (XX { i: 0, j: 1 }, 1.0),
                (XX { i: 1, j: 1 }, 1.0),
                (XX { i: 2, j: 2 }, 1.0),
            ],
        );
        let (s, trace) = derandomize_x_traced(&o, &c, &RoundingParams::default()).unwrap();
        assert_eq!(s.realized_objective(), 0.0);
        assert_eq!(s.itemsets()[0], ItemSet::from_items(3, [0]).unwrap());
        assert_eq!(s.itemsets()[1], ItemSet::from_items(3, [0, 1]).unwrap());
        assert_eq!(s.itemsets()[2], ItemSet::from_items(3, [2]).unwrap());
        assert_eq!(trace.steps.len(), 3 * 4);
        assert!(trace.steps.iter().all(|st| st.chosen_expectation <= st.alternative_expectation));
    }

    #[test]
    fn single_constraint_steps_match_branch_enumeration() {
        // m = 1: J_j is I_1 or ∅, drawn independently with p_j = x*_j/X̄_j.
        let counts = [2u64, 3];
        for (x0, x1, target) in [(1.0, 2.0, 2u64), (0.4, 0.3, 3), (2.0, 0.0, 1), (0.5, 2.5, 5)] {
            let c = cs(2, 5, &[(&[0, 1], target)]);
            let o = ostar(
                &c,
                &[(X { j: 0 }, 2.0), (X { j: 1 }, 3.0), (XX { i: 0, j: 0 }, x0), (XX { i: 0, j: 1 }, x1)],
            );
            let p = [x0 / 2.0, x1 / 3.0];
            // E|z| with the first `fixed.len()` draws fixed and the rest random.
            let expect = |fixed: &[bool]| -> f64 {
                let mut e = 0.0;
                for mask in 0..4u32 {
                    let draw = |j: usize| mask >> j & 1 == 1;
                    if (0..fixed.len()).any(|j| draw(j) != fixed[j]) {
                        continue;
                    }
                    let w: f64 = (fixed.len()..2)
                        .map(|j| if draw(j) { p[j] } else { 1.0 - p[j] })
                        .product();
                    let s: u64 = (0..2).filter(|&j| draw(j)).map(|j| counts[j]).sum();
                    e += w * (s as f64 - target as f64).abs();
                }
                e
            };
            let (sol, trace) = derandomize_x_traced(&o, &c, &RoundingParams::default()).unwrap();
            assert!((trace.initial_expectation - expect(&[])).abs() < 1e-12);
            let mut fixed = Vec::new();
            for step in &trace.steps[..2] {
                let zero = expect(&[fixed.clone(), vec![false]].concat());
                let full = expect(&[fixed.clone(), vec![true]].concat());
                let took_full = step.value > 0;
                let (want_chosen, want_alt) = if took_full { (full, zero) } else { (zero, full) };
                assert!((step.chosen_expectation - want_chosen).abs() < 1e-12);
                assert!((step.alternative_expectation - want_alt).abs() < 1e-12);
                assert!(want_chosen <= want_alt);
                fixed.push(took_full);
            }
            assert!(sol.realized_objective() <= trace.initial_expectation + 1e-12);
        }
    }

    #[test]
    fn signed_objective_is_available() {
        let c = cs(2, 4, &[(&[0], 3)]);
        let o = ostar(&c, &[(X { j: 0 }, 4.0), (XX { i: 0, j: 0 }, 3.0)]);
        let params = RoundingParams {
            objective: BranchObjective::SignedDeviation,
            ..RoundingParams::default()
        };
        let (s, trace) = derandomize_x_traced(&o, &c, &params).unwrap();
        assert_eq!(trace.initial_expectation, 0.0);
        // The signed expectation never prefers covering.
        assert_eq!(s.z(0), -3);
        let (s, _) = derandomize_x_traced(&o, &c, &RoundingParams::default()).unwrap();
        assert_eq!(s.z(0), 1);
    }

    #[test]
    fn column_major_order_visits_all() {
        let c = cs(2, 3, &[(&[0], 2), (&[1], 1)]);
        let o = ostar(&c, &[(X { j: 0 }, 3.0), (XX { i: 0, j: 0 }, 2.0), (XX { i: 1, j: 0 }, 1.0)]);
        let params = RoundingParams {
            order: FixOrder::ColumnMajor,
            ..RoundingParams::default()
        };
        let (_, trace) = derandomize_x_traced(&o, &c, &params).unwrap();
        let first: Vec<VarRef> = trace.steps.iter().take(2).map(|s| s.var).collect();
        assert_eq!(first, vec![XX { i: 0, j: 0 }, XX { i: 1, j: 0 }]);
        assert_eq!(trace.steps.len(), 6);
    }

    #[test]
    fn integral_u_reproduces_method1_supports() {
        let c = cs(3, 4, &[(&[0], 3), (&[0, 1], 1)]);
        let o = ostar(
            &c,
            &[
                (U { j: 0, k: 0 }, 1.0),
                (U { j: 1, k: 0 }, 1.0),
                (U { j: 1, k: 1 }, 1.0),
                (U { j: 2, k: 2 }, 1.0),
                (X { j: 0 }, 2.0),
                (X { j: 1 }, 1.0),
                (X { j: 2 }, 1.0),
            ],
        );
        let d = derandomize_u(&o, &c, &RoundingParams::default()).unwrap();
        let m1 = round_method1(&o, &c, 0).unwrap();
        assert_eq!(d.deviations(), m1.deviations());
        assert_eq!(d.counts(), m1.counts());
        assert_eq!(&d.itemsets()[..2], &m1.itemsets()[..2]);
    }

    #[test]
    fn one_free_u_matches_two_way_enumeration() {
        // Only u_{1,2} is fractional; items 1 and 2 of J_1 already set.
        for (u, s) in [(0.3, 3u64), (0.7, 0), (0.5, 2)] {
            let c2 = cs(2, 3, &[(&[0, 1], s)]);
            let o = ostar(
                &c2,
                &[(U { j: 0, k: 0 }, 1.0), (U { j: 0, k: 1 }, u), (X { j: 0 }, 3.0)],
            );
            let d = derandomize_u(&o, &c2, &RoundingParams::default()).unwrap();
            let best = [0i64, 3].iter().map(|&v| (v - s as i64).unsigned_abs()).min().unwrap();
            assert_eq!(d.realized_objective(), best as f64);
        }
    }
}
