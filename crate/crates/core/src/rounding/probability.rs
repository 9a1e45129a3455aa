//! Approximate Prob[I_i ⊆ J_j] under randomized rounding of x̄, given the
//! variables fixed so far.
//!
//! J_j is the union of the I_i drawn into column j. With J⁰_j the union of
//! the I_i already fixed at X̄_j, and R = I_i \ J⁰_j, the pool L_{i,j} holds
//! the unfixed I_{i'} (i' ≠ i) meeting R, and U′_{i,j} the minimal subsets of
//! L_{i,j} whose union covers R. Then
//!
//! ```text
//! Prob[I_i ⊆ J_j] ≈ b + (1 − b)·Σ_{K∈U′} Π_{i'∈K} Prob[I_{i'} ⊆ J_j]
//! ```
//!
//! with b = x*_{i,j}/X̄_j for unfixed pairs and 0 for pairs fixed at 0. The
//! product terms start from the b values and are refined by re-evaluating
//! the formula against the previous round's table.

use std::collections::BTreeSet;

use super::Relaxed;
use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::lp::LpSolution;

/// Pools up to this size get exact minimal-cover enumeration.
pub const EXACT_COVER_POOL: usize = 15;
/// Cover size limit for larger pools.
pub const TRUNCATED_COVER_SIZE: usize = 3;

#[derive(Debug, Clone)]
pub struct ProbabilityContext {
    itemsets: Vec<ItemSet>,
    counts: Vec<u64>,
    cands: usize,
    /// x*_{i,j}, row-major.
    xstar: Vec<f64>,
    fixed: Vec<Option<bool>>,
    covered: Vec<ItemSet>,
    refine_rounds: usize,
    probs: Vec<f64>,
}

impl ProbabilityContext {
    /// `xstar` is m × (m+1), row-major; `counts` are the balanced X̄_j.
    pub fn new(cs: &ConstraintSet, counts: Vec<u64>, xstar: Vec<f64>, refine_rounds: usize) -> Result<Self> {
        let m = cs.m();
        let cands = m + 1;
        if counts.len() != cands {
            return Err(Error::Dimension {
                expected: cands,
                found: counts.len(),
            });
        }
        if xstar.len() != m * cands {
            return Err(Error::Dimension {
                expected: m * cands,
                found: xstar.len(),
            });
        }
        let mut ctx = Self {
            itemsets: cs.constraints().iter().map(|c| c.itemset.clone()).collect(),
            counts,
            cands,
            xstar,
            fixed: vec![None; m * cands],
            covered: vec![cs.universe().empty_set(); cands],
            refine_rounds,
            probs: vec![0.0; m * cands],
        };
        for j in 0..cands {
            let col = ctx.column_with(j, None);
            ctx.store_column(j, &col);
        }
        Ok(ctx)
    }

    pub fn from_lp(ostar: &LpSolution, cs: &ConstraintSet, counts: Vec<u64>, refine_rounds: usize) -> Result<Self> {
        let r = Relaxed::new(ostar, cs)?;
        let cands = cs.m() + 1;
        let xstar = (0..cs.m())
            .flat_map(|i| (0..cands).map(move |j| (i, j)))
            .map(|(i, j)| r.x(i, j))
            .collect();
        Self::new(cs, counts, xstar, refine_rounds)
    }

    pub fn m(&self) -> usize {
        self.itemsets.len()
    }

    pub fn candidates(&self) -> usize {
        self.cands
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn refine_rounds(&self) -> usize {
        self.refine_rounds
    }

    pub fn prob(&self, i: usize, j: usize) -> f64 {
        self.probs[i * self.cands + j]
    }

    /// Prob[I_i ⊆ J_j] for every j.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.probs[i * self.cands..(i + 1) * self.cands]
    }

    pub fn fixed(&self, i: usize, j: usize) -> Option<bool> {
        self.fixed[i * self.cands + j]
    }

    /// J⁰_j.
    pub fn covered(&self, j: usize) -> &ItemSet {
        &self.covered[j]
    }

    /// Fixes x̄_{i,j} to X̄_j (`true`) or 0 and updates column j.
    pub fn fix(&mut self, i: usize, j: usize, value: bool) {
        let col = self.column_if_fixed(i, j, value);
        self.commit(i, j, value, &col);
    }

    /// Column j as it would be after fixing (i, j), without changing state.
    pub fn column_if_fixed(&self, i: usize, j: usize, value: bool) -> Vec<f64> {
        self.column_with(j, Some((i, value)))
    }

    /// Fixes (i, j) with a column previously computed by `column_if_fixed`.
    pub(crate) fn commit(&mut self, i: usize, j: usize, value: bool, col: &[f64]) {
        self.fixed[i * self.cands + j] = Some(value);
        if value {
            let set = self.itemsets[i].clone();
            self.covered[j].union_with(&set);
        }
        self.store_column(j, col);
    }

    fn store_column(&mut self, j: usize, col: &[f64]) {
        for (i, &p) in col.iter().enumerate() {
            self.probs[i * self.cands + j] = p;
        }
    }

    /// L_{i,j} in the current state.
    pub fn candidate_pool(&self, i: usize, j: usize) -> Vec<usize> {
        let view = ColumnView::new(self, j, None);
        view.pool(i)
    }

    /// U′_{i,j} in the current state, each cover as ascending constraint indices.
    pub fn minimal_covers(&self, i: usize, j: usize) -> Vec<Vec<usize>> {
        let view = ColumnView::new(self, j, None);
        view.covers(i)
    }

    fn column_with(&self, j: usize, hypothetical: Option<(usize, bool)>) -> Vec<f64> {
        let m = self.m();
        let view = ColumnView::new(self, j, hypothetical);
        let certain: Vec<bool> = (0..m).map(|i| view.certain(i)).collect();
        let base: Vec<f64> = (0..m).map(|i| view.base(i)).collect();
        if self.counts[j] == 0 {
            return certain.iter().map(|&c| if c { 1.0 } else { 0.0 }).collect();
        }
        let covers: Vec<Vec<Vec<usize>>> = (0..m)
            .map(|i| if certain[i] { Vec::new() } else { view.covers(i) })
            .collect();
        let mut prev = base.clone();
        let mut cur = vec![0.0; m];
        for _ in 0..=self.refine_rounds {
            for i in 0..m {
                cur[i] = if certain[i] {
                    1.0
                } else {
                    let b = base[i];
                    let correction: f64 = covers[i]
                        .iter()
                        .map(|k| k.iter().map(|&i2| prev[i2]).product::<f64>())
                        .sum();
                    (b + (1.0 - b) * correction).clamp(0.0, 1.0)
                };
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        prev
    }
}

/// Column j's fixing state, optionally with one extra hypothetical fix.
struct ColumnView<'a> {
    ctx: &'a ProbabilityContext,
    j: usize,
    extra: Option<(usize, bool)>,
    covered: ItemSet,
}

impl<'a> ColumnView<'a> {
    fn new(ctx: &'a ProbabilityContext, j: usize, extra: Option<(usize, bool)>) -> Self {
        let mut covered = ctx.covered[j].clone();
        if let Some((i, true)) = extra {
            covered.union_with(&ctx.itemsets[i]);
        }
        Self {
            ctx,
            j,
            extra,
            covered,
        }
    }

    fn fixed(&self, i: usize) -> Option<bool> {
        match self.extra {
            Some((e, v)) if e == i => Some(v),
            _ => self.ctx.fixed(i, self.j),
        }
    }

    fn certain(&self, i: usize) -> bool {
        self.fixed(i) == Some(true) || self.ctx.itemsets[i].is_subset_unchecked(&self.covered)
    }

    fn base(&self, i: usize) -> f64 {
        if self.certain(i) {
            return 1.0;
        }
        let c = self.ctx.counts[self.j];
        if self.fixed(i) == Some(false) || c == 0 {
            return 0.0;
        }
        (self.ctx.xstar[i * self.ctx.cands + self.j] / c as f64).clamp(0.0, 1.0)
    }

    fn residual(&self, i: usize) -> ItemSet {
        let mut r = self.ctx.itemsets[i].clone();
        for k in self.covered.items() {
            r.remove(k);
        }
        r
    }

    fn pool(&self, i: usize) -> Vec<usize> {
        let r = self.residual(i);
        if r.is_empty() {
            return Vec::new();
        }
        (0..self.ctx.m())
            .filter(|&i2| i2 != i && self.fixed(i2).is_none() && self.ctx.itemsets[i2].intersects(&r))
            .collect()
    }

    fn covers(&self, i: usize) -> Vec<Vec<usize>> {
        let r = self.residual(i);
        if r.is_empty() {
            return Vec::new();
        }
        let pool: Vec<(usize, ItemSet)> = self
            .pool(i)
            .into_iter()
            .map(|i2| {
                let mut part = r.clone();
                for k in r.items() {
                    if !self.ctx.itemsets[i2].contains(k) {
                        part.remove(k);
                    }
                }
                (i2, part)
            })
            .collect();
        let max_size = if pool.len() <= EXACT_COVER_POOL {
            pool.len()
        } else {
            TRUNCATED_COVER_SIZE
        };
        minimal_covers(&r, &pool, max_size)
    }
}

/// Minimal subsets of `pool` (by their restricted sets) covering `target`,
/// up to `max_size` members.
fn minimal_covers(target: &ItemSet, pool: &[(usize, ItemSet)], max_size: usize) -> Vec<Vec<usize>> {
    fn is_minimal(target: &ItemSet, pool: &[(usize, ItemSet)], chosen: &[usize]) -> bool {
        chosen.iter().all(|&skip| {
            let mut u = ItemSet::empty(target.universe_size());
            for &p in chosen.iter().filter(|&&p| p != skip) {
                u.union_with(&pool[p].1);
            }
            !target.is_subset_unchecked(&u)
        })
    }

    fn rec(
        target: &ItemSet,
        pool: &[(usize, ItemSet)],
        max_size: usize,
        chosen: &mut Vec<usize>,
        covered: &ItemSet,
        out: &mut BTreeSet<Vec<usize>>,
    ) {
        if target.is_subset_unchecked(covered) {
            if is_minimal(target, pool, chosen) {
                let mut k: Vec<usize> = chosen.iter().map(|&p| pool[p].0).collect();
                k.sort_unstable();
                out.insert(k);
            }
            return;
        }
        if chosen.len() == max_size {
            return;
        }
        // Branch on the members covering the lowest uncovered item.
        let e = target
            .items()
            .find(|&k| !covered.contains(k))
            .expect("target not yet covered");
        for p in 0..pool.len() {
            if chosen.contains(&p) || !pool[p].1.contains(e) {
                continue;
            }
            let mut next = covered.clone();
            next.union_with(&pool[p].1);
            chosen.push(p);
            rec(target, pool, max_size, chosen, &next, out);
            chosen.pop();
        }
    }

    let mut out = BTreeSet::new();
    let empty = ItemSet::empty(target.universe_size());
    rec(target, pool, max_size, &mut Vec::new(), &empty, &mut out);
    out.into_iter().collect()
}

pub fn prob_subset(ctx: &ProbabilityContext, i: usize, j: usize) -> f64 {
    ctx.prob(i, j)
}

/// Σ_i E(z_i) with E(z_i) = Σ_j X̄_j·Prob[I_i ⊆ J_j] − s_i (signed).
pub fn expected_objective(ctx: &ProbabilityContext, cs: &ConstraintSet) -> f64 {
    (0..ctx.m())
        .map(|i| signed_row(ctx.counts(), ctx.row(i).iter().copied(), cs.target(i)))
        .sum()
}

/// Σ_i E|z_i|, treating the indicators of one row as independent across j.
pub fn expected_abs_deviation(ctx: &ProbabilityContext, cs: &ConstraintSet) -> f64 {
    (0..ctx.m())
        .map(|i| abs_row(ctx.counts(), ctx.row(i).iter().copied(), cs.target(i)))
        .sum()
}

pub(crate) fn signed_row(counts: &[u64], probs: impl Iterator<Item = f64>, target: u64) -> f64 {
    counts
        .iter()
        .zip(probs)
        .map(|(&c, p)| c as f64 * p)
        .sum::<f64>()
        - target as f64
}

/// E|Σ_j X̄_j·B_j − s| for independent B_j ~ Bernoulli(p_j), by a DP over
/// the distribution of the sum.
pub(crate) fn abs_row(counts: &[u64], probs: impl Iterator<Item = f64>, target: u64) -> f64 {
    let mut offset = 0usize;
    let mut dist = vec![1.0f64];
    for (&c, p) in counts.iter().zip(probs) {
        let c = c as usize;
        if c == 0 || p <= 0.0 {
            continue;
        }
        if p >= 1.0 {
            offset += c;
            continue;
        }
        let mut next = vec![0.0; dist.len() + c];
        for (s, &d) in dist.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            next[s] += d * (1.0 - p);
            next[s + c] += d * p;
        }
        dist = next;
    }
    let target = target as i64;
    dist.iter()
        .enumerate()
        .map(|(s, &d)| d * ((offset + s) as i64 - target).abs() as f64)
        .sum()
}
