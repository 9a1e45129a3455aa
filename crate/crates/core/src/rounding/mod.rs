//! From the relaxed optimum to an integer solution: candidate itemsets
//! J_1..J_{m+1} with counts X̄_j summing to n.
//!
//! Every method sits behind [`RoundingMethod`] and is looked up by name in a
//! [`RoundingRegistry`]:
//!
//! | name         | what is rounded                                         |
//! |--------------|---------------------------------------------------------|
//! | `round-u`    | u* to nearest, ties up                                  |
//! | `round-x`    | x* to 0 or X̄ at the X̄/2 threshold, J_j rebuilt as a union |
//! | `random-u`   | u* as Bernoulli probabilities                           |
//! | `random-x`   | x*/X̄ as Bernoulli probabilities                         |
//! | `derandom-x` | x̄ fixed one at a time by conditional expectation        |
//! | `derandom-u` | ū fixed one at a time by conditional expectation        |
//!
//! Counts always come from [`balance_counts`].

mod balance;
mod derandomize;
mod naive;
mod probability;
mod purify;
mod randomized;

use std::collections::BTreeMap;

pub use balance::balance_counts;
pub use derandomize::{
    derandomize_u, derandomize_u_traced, derandomize_x, derandomize_x_traced, DerandTrace,
    TraceStep,
};
pub use naive::{round_method1, round_method2};
pub use probability::{expected_abs_deviation, expected_objective, prob_subset, ProbabilityContext};
pub use purify::{purify, tighten, MAX_TYPE_ITEMS};
pub use randomized::{randomized_round_u, randomized_round_x};

use crate::constraints::ConstraintSet;
use crate::database::TransactionDatabase;
use crate::error::{Error, Result};
use crate::formulation::{Layout, VarRef};
use crate::itemset::{ItemSet, ItemUniverse};
use crate::lp::LpSolution;

/// Integer candidates, counts, and everything derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundedSolution {
    itemsets: Vec<ItemSet>,
    counts: Vec<u64>,
    /// m × (m+1), row-major: I_i ⊆ J_j.
    y: Vec<bool>,
    /// Signed deviation support(I_i) − s_i.
    z: Vec<i64>,
}

impl RoundedSolution {
    /// Derives ȳ, x̄ and z̄ from the candidates and their counts.
    pub fn from_parts(cs: &ConstraintSet, itemsets: Vec<ItemSet>, counts: Vec<u64>) -> Result<Self> {
        let cands = cs.m() + 1;
        if itemsets.len() != cands || counts.len() != cands {
            return Err(Error::Dimension {
                expected: cands,
                found: if itemsets.len() != cands { itemsets.len() } else { counts.len() },
            });
        }
        let t = cs.universe().size();
        if let Some(bad) = itemsets.iter().find(|s| s.universe_size() != t) {
            return Err(Error::Dimension {
                expected: t,
                found: bad.universe_size(),
            });
        }
        let total: u64 = counts.iter().sum();
        if total != cs.n() {
            return Err(Error::invalid(format!(
                "candidate counts sum to {total}, expected n = {}",
                cs.n()
            )));
        }
        let mut y = Vec::with_capacity(cs.m() * cands);
        let mut z = Vec::with_capacity(cs.m());
        for i in 0..cs.m() {
            let mut support = 0;
            for (j, set) in itemsets.iter().enumerate() {
                let covered = cs.itemset(i).is_subset_unchecked(set);
                y.push(covered);
                if covered {
                    support += counts[j];
                }
            }
            z.push(support as i64 - cs.target(i) as i64);
        }
        Ok(Self {
            itemsets,
            counts,
            y,
            z,
        })
    }

    pub fn itemsets(&self) -> &[ItemSet] {
        &self.itemsets
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn m(&self) -> usize {
        self.z.len()
    }

    pub fn y(&self, i: usize, j: usize) -> bool {
        self.y[i * self.counts.len() + j]
    }

    /// x̄_{i,j} = X̄_j·ȳ_{i,j}.
    pub fn x(&self, i: usize, j: usize) -> u64 {
        if self.y(i, j) {
            self.counts[j]
        } else {
            0
        }
    }

    pub fn z(&self, i: usize) -> i64 {
        self.z[i]
    }

    pub fn deviations(&self) -> &[i64] {
        &self.z
    }

    /// Σ_i |z̄_i|.
    pub fn realized_objective(&self) -> f64 {
        self.z.iter().map(|z| z.unsigned_abs()).sum::<u64>() as f64
    }

    /// Σ_i z̄_i, the overshoot objective when no constraint is undershot.
    pub fn signed_objective(&self) -> i64 {
        self.z.iter().sum()
    }

    /// Integer assignment for every model column, in layout order.
    pub fn assignment(&self, cs: &ConstraintSet) -> Vec<f64> {
        let layout = Layout::new(cs.m(), cs.universe().size());
        layout
            .vars()
            .map(|v| match v {
                VarRef::U { j, k } => f64::from(u8::from(self.itemsets[j].contains(k))),
                VarRef::X { j } => self.counts[j] as f64,
                VarRef::XX { i, j } => self.x(i, j) as f64,
                VarRef::Y { i, j } => f64::from(u8::from(self.y(i, j))),
                VarRef::Z { i } => self.z[i] as f64,
            })
            .collect()
    }
}

/// X̄_j copies of J_j, in candidate order, with tids 1..n.
pub fn build_database(sol: &RoundedSolution, universe: &ItemUniverse) -> Result<TransactionDatabase> {
    let mut rows = Vec::with_capacity(sol.counts.iter().sum::<u64>() as usize);
    for (set, &c) in sol.itemsets.iter().zip(&sol.counts) {
        rows.extend(std::iter::repeat_n(set.clone(), c as usize));
    }
    TransactionDatabase::from_itemsets(universe.clone(), rows)
}

/// Variable-fixing order for the derandomized methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FixOrder {
    #[default]
    RowMajor,
    ColumnMajor,
}

/// What the derandomized methods minimize at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchObjective {
    /// Σ_i E|z_i|.
    #[default]
    AbsoluteDeviation,
    /// Σ_i E(z_i), signed.
    SignedDeviation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundingParams {
    pub seed: u64,
    pub refine_rounds: usize,
    pub order: FixOrder,
    pub objective: BranchObjective,
}

impl Default for RoundingParams {
    fn default() -> Self {
        Self {
            seed: 0,
            refine_rounds: 2,
            order: FixOrder::RowMajor,
            objective: BranchObjective::AbsoluteDeviation,
        }
    }
}

impl RoundingParams {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Read access to the relaxed optimum by variable.
#[derive(Debug, Clone, Copy)]
pub struct Relaxed<'a> {
    layout: Layout,
    values: &'a [f64],
}

impl<'a> Relaxed<'a> {
    pub fn new(ostar: &'a LpSolution, cs: &ConstraintSet) -> Result<Self> {
        if !ostar.is_optimal() {
            return Err(Error::invalid(format!(
                "rounding needs an optimal LP solution, got {:?}",
                ostar.status
            )));
        }
        let layout = Layout::new(cs.m(), cs.universe().size());
        if ostar.values.len() != layout.column_count() {
            return Err(Error::Dimension {
                expected: layout.column_count(),
                found: ostar.values.len(),
            });
        }
        Ok(Self {
            layout,
            values: &ostar.values,
        })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn get(&self, v: VarRef) -> f64 {
        self.values[self.layout.index(v)]
    }

    pub fn u(&self, j: usize, k: usize) -> f64 {
        self.get(VarRef::U { j, k })
    }

    pub fn big_x(&self, j: usize) -> f64 {
        self.get(VarRef::X { j })
    }

    pub fn x(&self, i: usize, j: usize) -> f64 {
        self.get(VarRef::XX { i, j })
    }

    pub fn big_x_all(&self) -> Vec<f64> {
        (0..self.layout.candidates()).map(|j| self.big_x(j)).collect()
    }
}

/// J_j as the union of the I_i selected in column j.
pub(crate) fn union_of_selected(cs: &ConstraintSet, selected: impl Fn(usize, usize) -> bool) -> Vec<ItemSet> {
    let cands = cs.m() + 1;
    (0..cands)
        .map(|j| {
            let mut set = cs.universe().empty_set();
            for i in 0..cs.m() {
                if selected(i, j) {
                    set.union_with(cs.itemset(i));
                }
            }
            set
        })
        .collect()
}

pub trait RoundingMethod: Send + Sync {
    fn name(&self) -> &'static str;

    fn round(&self, ostar: &LpSolution, cs: &ConstraintSet, params: &RoundingParams) -> Result<RoundedSolution>;
}

macro_rules! method {
    ($ty:ident, $name:literal, |$o:ident, $c:ident, $p:ident| $body:expr) => {
        #[derive(Debug, Clone, Copy, Default)]
        pub struct $ty;

        impl RoundingMethod for $ty {
            fn name(&self) -> &'static str {
                $name
            }

            fn round(&self, $o: &LpSolution, $c: &ConstraintSet, $p: &RoundingParams) -> Result<RoundedSolution> {
                $body
            }
        }
    };
}

method!(RoundU, "round-u", |o, c, p| round_method1(o, c, p.seed));
method!(RoundX, "round-x", |o, c, p| round_method2(o, c, p.seed));
method!(RandomU, "random-u", |o, c, p| randomized_round_u(o, c, p.seed));
method!(RandomX, "random-x", |o, c, p| randomized_round_x(o, c, p.seed));
method!(DerandomX, "derandom-x", |o, c, p| derandomize_x(o, c, p));
method!(DerandomU, "derandom-u", |o, c, p| derandomize_u(o, c, p));

/// Rounding methods selectable by name.
pub struct RoundingRegistry {
    methods: BTreeMap<&'static str, Box<dyn RoundingMethod>>,
}

impl RoundingRegistry {
    pub fn empty() -> Self {
        Self {
            methods: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, method: Box<dyn RoundingMethod>) {
        self.methods.insert(method.name(), method);
    }

    pub fn get(&self, name: &str) -> Result<&dyn RoundingMethod> {
        self.methods
            .get(name)
            .map(|m| m.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "rounding method",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.methods.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn RoundingMethod> {
        self.methods.values().map(|m| m.as_ref())
    }
}

impl Default for RoundingRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(RoundU));
        r.register(Box::new(RoundX));
        r.register(Box::new(RandomU));
        r.register(Box::new(RandomX));
        r.register(Box::new(DerandomX));
        r.register(Box::new(DerandomU));
        r
    }
}

pub const DEFAULT_METHOD: &str = "derandom-x";

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::constraints::SupportConstraint;
    use crate::lp::LpStatus;

    pub fn cs(t: usize, n: u64, cons: &[(&[usize], u64)]) -> ConstraintSet {
        let constraints = cons
            .iter()
            .map(|(items, s)| SupportConstraint {
                itemset: ItemSet::from_items(t, items.iter().copied()).unwrap(),
                support: *s,
            })
            .collect();
        ConstraintSet::new(ItemUniverse::new(t).unwrap(), n, constraints).unwrap()
    }

    /// A hand-built "optimal" point; only u, X and x are read by rounding.
    pub fn ostar(cs: &ConstraintSet, set: &[(VarRef, f64)]) -> LpSolution {
        let layout = Layout::new(cs.m(), cs.universe().size());
        let mut values = vec![0.0; layout.column_count()];
        for &(v, x) in set {
            values[layout.index(v)] = x;
        }
        LpSolution {
            status: LpStatus::Optimal,
            values,
            objective: 0.0,
            iterations: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use crate::report::deviation_report;

    #[test]
    fn build_database_example() {
        let c = cs(2, 3, &[(&[0], 3), (&[0, 1], 1)]);
        let sets = vec![
            ItemSet::from_items(2, [0]).unwrap(),
            ItemSet::from_items(2, [0, 1]).unwrap(),
            ItemSet::empty(2),
        ];
        let sol = RoundedSolution::from_parts(&c, sets, vec![2, 1, 0]).unwrap();
        let db = build_database(&sol, c.universe()).unwrap();
        assert_eq!(db.len(), 3);
        assert_eq!(db.support(c.itemset(0)).unwrap(), 3);
        assert_eq!(db.support(c.itemset(1)).unwrap(), 1);
        assert_eq!(sol.deviations(), &[0, 0]);
        let tids: Vec<u64> = db.rows().iter().map(|r| r.tid).collect();
        assert_eq!(tids, vec![1, 2, 3]);
    }

    #[test]
    fn constant_database_from_one_count() {
        let c = cs(3, 4, &[(&[0], 1), (&[1, 2], 0)]);
        let full = ItemSet::full(3);
        let sol = RoundedSolution::from_parts(&c, vec![ItemSet::empty(3), full.clone(), ItemSet::empty(3)], vec![0, 4, 0]).unwrap();
        let db = build_database(&sol, c.universe()).unwrap();
        assert!(db.rows().iter().all(|r| r.items == full));
        let rep = deviation_report(&db, &c, None).unwrap();
        let z: Vec<i64> = rep.per_constraint.iter().map(|d| d.deviation).collect();
        assert_eq!(z, sol.deviations());
    }

    #[test]
    fn from_parts_checks_shape_and_sum() {
        let c = cs(2, 3, &[(&[0], 3)]);
        let e = ItemSet::empty(2);
        assert!(RoundedSolution::from_parts(&c, vec![e.clone()], vec![3]).is_err());
        assert!(RoundedSolution::from_parts(&c, vec![e.clone(), e.clone()], vec![1, 1]).is_err());
        let sol = RoundedSolution::from_parts(&c, vec![e.clone(), e], vec![1, 2]).unwrap();
        assert_eq!(sol.z(0), -3);
        assert_eq!(sol.realized_objective(), 3.0);
        assert_eq!(sol.signed_objective(), -3);
    }

    #[test]
    fn assignment_is_integral_feasible_when_overshooting() {
        let c = cs(2, 3, &[(&[0], 2), (&[1], 1)]);
        let sets = vec![
            ItemSet::from_items(2, [0, 1]).unwrap(),
            ItemSet::from_items(2, [0]).unwrap(),
            ItemSet::empty(2),
        ];
        let sol = RoundedSolution::from_parts(&c, sets, vec![1, 2, 0]).unwrap();
        assert_eq!(sol.deviations(), &[1, 0]);
        assert!(crate::formulation::integral_feasible(&c, &sol.assignment(&c)).unwrap());
    }

    #[test]
    fn registry_lists_all_methods() {
        let r = RoundingRegistry::default();
        assert_eq!(
            r.names(),
            vec!["derandom-u", "derandom-x", "random-u", "random-x", "round-u", "round-x"]
        );
        assert!(r.get(DEFAULT_METHOD).is_ok());
        assert!(matches!(r.get("nope"), Err(Error::UnknownStrategy { .. })));
    }

    #[test]
    fn non_optimal_input_rejected() {
        let c = cs(2, 3, &[(&[0], 2)]);
        let mut o = ostar(&c, &[]);
        o.status = crate::lp::LpStatus::IterationLimit;
        for m in RoundingRegistry::default().iter() {
            assert!(m.round(&o, &c, &RoundingParams::default()).is_err(), "{}", m.name());
        }
    }
}
