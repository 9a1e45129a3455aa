//! The integer program over `m + 1` candidate itemsets J_1..J_{m+1} and its
//! continuous relaxation.
//!
//! Columns, in this fixed order:
//!
//! | block | variable  | meaning                                   |
//! |-------|-----------|-------------------------------------------|
//! | U     | u_{j,k}   | item k belongs to candidate J_j           |
//! | X     | X_j       | copies of J_j in the database             |
//! | XX    | x_{i,j}   | X_j·y_{i,j}, J_j's contribution to s_i    |
//! | Y     | y_{i,j}   | I_i ⊆ J_j                                 |
//! | Z     | z_i       | overshoot of support(I_i) above s_i       |
//!
//! Subset indicators use the inner-product rows
//! `|I_i|·y ≤ Σ_{k∈I_i} u_{j,k} ≤ y + |I_i| − 1`, and the product
//! `x = X·y` is linearized by `x ≤ n·y`, `x ≤ X`, `n·y + X − x ≤ n`, `x ≥ 0`.
//! With `u` and `y` integral these admit exactly the intended points.
//!
//! Rows are emitted in the order of the three condition groups, and bound rows
//! are included so that a model has `t(m+1) + 2m² + 4m + 1` columns and
//! `6m² + 9m + mt + t + 2` rows.

use crate::constraints::{ConstraintSet, SupportConstraint};
use crate::error::{Error, Result};
use crate::itemset::ItemSet;
use crate::lp::{LpModel, Relation, RowKind};

/// A model variable. Indices are 0-based; names in dumps are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRef {
    U { j: usize, k: usize },
    X { j: usize },
    XX { i: usize, j: usize },
    Y { i: usize, j: usize },
    Z { i: usize },
}

impl VarRef {
    pub fn name(&self) -> String {
        match *self {
            VarRef::U { j, k } => format!("u_{}_{}", j + 1, k + 1),
            VarRef::X { j } => format!("X_{}", j + 1),
            VarRef::XX { i, j } => format!("xx_{}_{}", i + 1, j + 1),
            VarRef::Y { i, j } => format!("y_{}_{}", i + 1, j + 1),
            VarRef::Z { i } => format!("z_{}", i + 1),
        }
    }
}

/// Column layout for `m` constraints, `m + 1` candidates and `t` items.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub m: usize,
    pub t: usize,
}

impl Layout {
    pub fn new(m: usize, t: usize) -> Self {
        Self { m, t }
    }

    pub fn candidates(&self) -> usize {
        self.m + 1
    }

    fn x_base(&self) -> usize {
        self.candidates() * self.t
    }

    fn xx_base(&self) -> usize {
        self.x_base() + self.candidates()
    }

    fn y_base(&self) -> usize {
        self.xx_base() + self.m * self.candidates()
    }

    fn z_base(&self) -> usize {
        self.y_base() + self.m * self.candidates()
    }

    pub fn column_count(&self) -> usize {
        self.z_base() + self.m
    }

    pub fn index(&self, v: VarRef) -> usize {
        let c = self.candidates();
        match v {
            VarRef::U { j, k } => j * self.t + k,
            VarRef::X { j } => self.x_base() + j,
            VarRef::XX { i, j } => self.xx_base() + i * c + j,
            VarRef::Y { i, j } => self.y_base() + i * c + j,
            VarRef::Z { i } => self.z_base() + i,
        }
    }

    pub fn var(&self, index: usize) -> VarRef {
        let c = self.candidates();
        if index < self.x_base() {
            VarRef::U {
                j: index / self.t,
                k: index % self.t,
            }
        } else if index < self.xx_base() {
            VarRef::X { j: index - self.x_base() }
        } else if index < self.y_base() {
            let r = index - self.xx_base();
            VarRef::XX { i: r / c, j: r % c }
        } else if index < self.z_base() {
            let r = index - self.y_base();
            VarRef::Y { i: r / c, j: r % c }
        } else {
            VarRef::Z { i: index - self.z_base() }
        }
    }

    /// Variables in column order.
    pub fn vars(&self) -> impl Iterator<Item = VarRef> + '_ {
        (0..self.column_count()).map(|c| self.var(c))
    }
}

/// Closed-form column count t(m+1) + 2m² + 4m + 1.
pub fn expected_column_count(m: usize, t: usize) -> usize {
    t * (m + 1) + 2 * m * m + 4 * m + 1
}

/// Closed-form row count 6m² + 9m + mt + t + 2.
pub fn expected_row_count(m: usize, t: usize) -> usize {
    6 * m * m + 9 * m + m * t + t + 2
}

/// The continuous relaxation: `0 ≤ u, y ≤ 1`, `z, X ≥ 0`, objective Σ z_i.
pub fn build_relaxed_lp(cs: &ConstraintSet) -> LpModel {
    build_model(cs, &vec![true; cs.m()], &vec![f64::INFINITY; cs.m()])
}

/// Relaxation of `cs ∪ {(itemset, s′)}` with `lo ≤ s′ ≤ hi`.
///
/// The extra constraint is appended as constraint `m` (0-based) with target
/// `lo`; its `z` column carries the slack `s′ − lo ≤ hi − lo` and is left out
/// of the objective, so the objective is still the overshoot over `cs`.
/// Returns the model and the augmented constraint set whose layout it uses.
pub fn build_augmented_lp(
    cs: &ConstraintSet,
    itemset: &ItemSet,
    lo: u64,
    hi: u64,
) -> Result<(LpModel, ConstraintSet)> {
    if itemset.universe_size() != cs.universe().size() {
        return Err(Error::Dimension {
            expected: cs.universe().size(),
            found: itemset.universe_size(),
        });
    }
    if lo > hi || hi > cs.n() {
        return Err(Error::invalid(format!(
            "augmented support range [{lo}, {hi}] outside [0, {}]",
            cs.n()
        )));
    }
    let mut constraints = cs.constraints().to_vec();
    constraints.push(SupportConstraint {
        itemset: itemset.clone(),
        support: lo,
    });
    let augmented = ConstraintSet::new_allow_duplicates(cs.universe().clone(), cs.n(), constraints);
    let mut in_objective = vec![true; cs.m()];
    in_objective.push(false);
    let mut z_upper = vec![f64::INFINITY; cs.m()];
    z_upper.push((hi - lo) as f64);
    Ok((build_model(&augmented, &in_objective, &z_upper), augmented))
}

fn build_model(cs: &ConstraintSet, z_in_objective: &[bool], z_upper: &[f64]) -> LpModel {
    let m = cs.m();
    let t = cs.universe().size();
    let layout = Layout::new(m, t);
    let cands = layout.candidates();
    let n = cs.n() as f64;

    let mut model = LpModel::new();
    for v in layout.vars() {
        let (upper, cost) = match v {
            VarRef::U { .. } | VarRef::Y { .. } => (1.0, 0.0),
            VarRef::X { .. } | VarRef::XX { .. } => (f64::INFINITY, 0.0),
            VarRef::Z { i } => (z_upper[i], if z_in_objective[i] { 1.0 } else { 0.0 }),
        };
        model.add_column(v.name(), 0.0, upper, cost);
    }
    let col = |v: VarRef| layout.index(v);

    // Subset indicator rows, then 0 ≤ u ≤ 1.
    for i in 0..m {
        let items: Vec<usize> = cs.itemset(i).items().collect();
        let size = items.len() as f64;
        for j in 0..cands {
            let y = col(VarRef::Y { i, j });
            let mut lower = vec![(y, size)];
            lower.extend(items.iter().map(|&k| (col(VarRef::U { j, k }), -1.0)));
            model.add_row(RowKind::TriangleLower, lower, Relation::Le, 0.0);

            let mut upper: Vec<(usize, f64)> =
                items.iter().map(|&k| (col(VarRef::U { j, k }), 1.0)).collect();
            upper.push((y, -1.0));
            model.add_row(RowKind::TriangleUpper, upper, Relation::Le, size - 1.0);
        }
    }
    for j in 0..cands {
        for k in 0..t {
            model.add_row(RowKind::Bound, vec![(col(VarRef::U { j, k }), 1.0)], Relation::Le, 1.0);
        }
    }

    // Product linearization x_{i,j} = X_j·y_{i,j}.
    for i in 0..m {
        for j in 0..cands {
            let x = col(VarRef::XX { i, j });
            let y = col(VarRef::Y { i, j });
            let big = col(VarRef::X { j });
            model.add_row(RowKind::TetraZero, vec![(x, 1.0), (y, -n)], Relation::Le, 0.0);
            model.add_row(RowKind::TetraCap, vec![(x, 1.0), (big, -1.0)], Relation::Le, 0.0);
            model.add_row(
                RowKind::TetraFloor,
                vec![(y, n), (big, 1.0), (x, -1.0)],
                Relation::Le,
                n,
            );
            model.add_row(RowKind::Bound, vec![(x, 1.0)], Relation::Ge, 0.0);
        }
    }

    // Size and support coupling, z ≥ 0, X ≥ 0.
    model.add_row(
        RowKind::Coupling,
        (0..cands).map(|j| (col(VarRef::X { j }), 1.0)).collect(),
        Relation::Eq,
        n,
    );
    for i in 0..m {
        let mut coefs: Vec<(usize, f64)> = (0..cands).map(|j| (col(VarRef::XX { i, j }), 1.0)).collect();
        coefs.push((col(VarRef::Z { i }), -1.0));
        model.add_row(RowKind::Support, coefs, Relation::Eq, cs.target(i) as f64);
    }
    for i in 0..m {
        model.add_row(RowKind::Bound, vec![(col(VarRef::Z { i }), 1.0)], Relation::Ge, 0.0);
    }
    for j in 0..cands {
        model.add_row(RowKind::Bound, vec![(col(VarRef::X { j }), 1.0)], Relation::Ge, 0.0);
    }

    model.layout = Some(layout);
    model
}

/// Whether `values` is a feasible point of the integer program of `cs`:
/// every row holds exactly, `u` and `y` are binary, and `X`, `x`, `z` are
/// nonnegative integers.
pub fn integral_feasible(cs: &ConstraintSet, values: &[f64]) -> Result<bool> {
    let model = build_relaxed_lp(cs);
    let layout = model.layout.expect("built models carry a layout");
    if values.len() != model.column_count() {
        return Err(Error::Dimension {
            expected: model.column_count(),
            found: values.len(),
        });
    }
    for (c, v) in layout.vars().enumerate() {
        let x = values[c];
        let ok = match v {
            VarRef::U { .. } | VarRef::Y { .. } => x == 0.0 || x == 1.0,
            _ => x >= 0.0 && x.fract() == 0.0,
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(model.rows.iter().all(|r| r.holds(values, 0.0)))
}

/// The integer point encoding a database made of `counts[j]` copies of
/// `itemsets[j]`. At most `m + 1` row types are allowed; missing candidates
/// are padded with empty itemsets and zero counts. `z_i` is set to
/// `support(I_i) − s_i`, so the point is feasible only when no support falls
/// short of its target.
pub fn assignment_from_candidates(
    cs: &ConstraintSet,
    itemsets: &[ItemSet],
    counts: &[u64],
) -> Result<Vec<f64>> {
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    assignment_from_weights(cs, itemsets, &weights)
}

/// As [`assignment_from_candidates`], with real multiplicities: integral in
/// `u` and `y`, with `x = X·y`.
pub fn assignment_from_weights(
    cs: &ConstraintSet,
    itemsets: &[ItemSet],
    weights: &[f64],
) -> Result<Vec<f64>> {
    let layout = Layout::new(cs.m(), cs.universe().size());
    let cands = layout.candidates();
    if itemsets.len() != weights.len() || itemsets.len() > cands {
        return Err(Error::invalid(format!(
            "expected at most {cands} candidate itemsets with one count each"
        )));
    }
    let mut values = vec![0.0; layout.column_count()];
    for (j, set) in itemsets.iter().enumerate() {
        if set.universe_size() != layout.t {
            return Err(Error::Dimension {
                expected: layout.t,
                found: set.universe_size(),
            });
        }
        for k in set.items() {
            values[layout.index(VarRef::U { j, k })] = 1.0;
        }
        values[layout.index(VarRef::X { j })] = weights[j];
    }
    for i in 0..cs.m() {
        let mut support = 0.0;
        for j in 0..itemsets.len() {
            if cs.itemset(i).is_subset_unchecked(&itemsets[j]) {
                values[layout.index(VarRef::Y { i, j })] = 1.0;
                values[layout.index(VarRef::XX { i, j })] = weights[j];
                support += weights[j];
            }
        }
        values[layout.index(VarRef::Z { i })] = support - cs.target(i) as f64;
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::itemset::ItemUniverse;

    fn cs(t: usize, n: u64, cons: &[(&[usize], u64)]) -> ConstraintSet {
        let constraints = cons
            .iter()
            .map(|(items, s)| SupportConstraint {
                itemset: ItemSet::from_items(t, items.iter().copied()).unwrap(),
                support: *s,
            })
            .collect();
        ConstraintSet::new(ItemUniverse::new(t).unwrap(), n, constraints).unwrap()
    }

    #[test]
    fn counts_for_smallest_model() {
        let model = build_relaxed_lp(&cs(1, 3, &[(&[0], 1)]));
        assert_eq!(model.column_count(), 9);
        assert_eq!(model.row_count(), 19);
    }

    #[test]
    fn counts_for_m3_t5() {
        let c = cs(5, 10, &[(&[0], 5), (&[1, 2], 3), (&[0, 3, 4], 1)]);
        let model = build_relaxed_lp(&c);
        assert_eq!(model.column_count(), 51);
        assert_eq!(model.row_count(), 103);
        assert_eq!(expected_column_count(3, 5), 51);
        assert_eq!(expected_row_count(3, 5), 103);
    }

    #[test]
    fn layout_round_trips_every_index() {
        let layout = Layout::new(3, 4);
        for c in 0..layout.column_count() {
            assert_eq!(layout.index(layout.var(c)), c);
        }
        assert_eq!(layout.var(0), VarRef::U { j: 0, k: 0 });
        assert_eq!(layout.var(layout.column_count() - 1), VarRef::Z { i: 2 });
    }

    #[test]
    fn objective_is_sum_of_z() {
        let c = cs(3, 4, &[(&[0], 2), (&[1], 1)]);
        let model = build_relaxed_lp(&c);
        let layout = model.layout.unwrap();
        for (idx, v) in layout.vars().enumerate() {
            let want = if matches!(v, VarRef::Z { .. }) { 1.0 } else { 0.0 };
            assert_eq!(model.objective[idx], want);
        }
    }

    #[test]
    fn zero_point_is_infeasible() {
        let c = cs(2, 2, &[(&[0], 0)]);
        let zeros = vec![0.0; build_relaxed_lp(&c).column_count()];
        assert!(!integral_feasible(&c, &zeros).unwrap());
    }

    #[test]
    fn wrong_dimension_is_an_error() {
        let c = cs(2, 2, &[(&[0], 0)]);
        assert!(integral_feasible(&c, &[0.0; 3]).is_err());
    }

    #[test]
    fn witness_database_is_integral_feasible() {
        // Rows {e1}×3, {e1,e2}×2 over t=3, n=5.
        let c = cs(3, 5, &[(&[0], 5), (&[1], 2), (&[0, 1], 2)]);
        let types = vec![
            ItemSet::from_items(3, [0]).unwrap(),
            ItemSet::from_items(3, [0, 1]).unwrap(),
        ];
        let values = assignment_from_candidates(&c, &types, &[3, 2]).unwrap();
        assert!(integral_feasible(&c, &values).unwrap());
    }

    #[test]
    fn overshooting_witness_has_z_equal_to_overshoot() {
        let c = cs(2, 4, &[(&[0], 1), (&[1], 2)]);
        let types = vec![ItemSet::from_items(2, [0, 1]).unwrap()];
        let values = assignment_from_candidates(&c, &types, &[4]).unwrap();
        assert!(integral_feasible(&c, &values).unwrap());
        let model = build_relaxed_lp(&c);
        assert_eq!(model.objective_value(&values), 3.0 + 2.0);
    }

    #[test]
    fn broken_product_is_infeasible() {
        let c = cs(2, 4, &[(&[0], 4)]);
        let types = vec![ItemSet::from_items(2, [0]).unwrap()];
        let mut values = assignment_from_candidates(&c, &types, &[4]).unwrap();
        let layout = Layout::new(1, 2);
        // y = 1 but x ≠ X.
        values[layout.index(VarRef::XX { i: 0, j: 0 })] = 3.0;
        values[layout.index(VarRef::Z { i: 0 })] = -1.0;
        assert!(!integral_feasible(&c, &values).unwrap());
    }

    #[test]
    fn augmented_model_frees_the_extra_target() {
        let c = cs(3, 6, &[(&[0], 3)]);
        let rule = ItemSet::from_items(3, [1]).unwrap();
        let (model, aug) = build_augmented_lp(&c, &rule, 0, 2).unwrap();
        assert_eq!(aug.m(), 2);
        let layout = model.layout.unwrap();
        let z_extra = layout.index(VarRef::Z { i: 1 });
        assert_eq!(model.objective[z_extra], 0.0);
        assert_eq!(model.columns[z_extra].upper, 2.0);
        assert!(build_augmented_lp(&c, &rule, 3, 2).is_err());
        assert!(build_augmented_lp(&c, &rule, 0, 7).is_err());
    }

    #[test]
    fn dump_names_columns() {
        let c = cs(1, 2, &[(&[0], 1)]);
        let text = build_relaxed_lp(&c).dump();
        assert!(text.starts_with("minimize 1*z_1\n"));
        assert!(text.contains("1*y_1_1 -1*u_1_1 <= 0\n"));
        assert!(text.contains("1*X_1 1*X_2 = 2\n"));
        assert!(text.contains("bound 0 <= u_2_1 <= 1\n"));
    }
}
