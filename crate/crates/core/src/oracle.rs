//! Ground truth for tiny instances, and hard instances from graph 3-coloring.
//!
//! A database over `t` items is determined up to row order by its count
//! vector over the `2^t` itemset types; type `τ` is the itemset whose
//! characteristic array is the bit pattern of `τ`. [`brute_force_optimum`]
//! scans every count vector summing to `n`.

use crate::constraints::{ConstraintSet, SupportConstraint};
use crate::database::TransactionDatabase;
use crate::error::{Error, Result};
use crate::itemset::{ItemSet, ItemUniverse};

pub const MAX_ORACLE_ITEMS: usize = 4;
pub const MAX_ORACLE_ROWS: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleModel {
    /// Supports may only exceed targets; objective Σ (support − s_i).
    Overshoot,
    /// Objective Σ |support − s_i|.
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub optimum: u64,
    /// Lexicographically smallest optimal count vector, indexed by type.
    pub witness: Vec<u64>,
}

/// Visits every vector of `types` nonnegative counts summing to `n`, in
/// lexicographic order.
pub fn enumerate_count_vectors(types: usize, n: u64, mut visit: impl FnMut(&[u64])) {
    fn rec(counts: &mut Vec<u64>, pos: usize, left: u64, visit: &mut dyn FnMut(&[u64])) {
        if pos + 1 == counts.len() {
            counts[pos] = left;
            visit(counts);
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            rec(counts, pos + 1, left - c, visit);
        }
        counts[pos] = 0;
    }
    if types == 0 {
        return;
    }
    let mut counts = vec![0; types];
    rec(&mut counts, 0, n, &mut visit);
}

/// Supports of each constraint in the database described by `counts`.
pub fn supports_of_counts(cs: &ConstraintSet, counts: &[u64]) -> Vec<u64> {
    let t = cs.universe().size();
    let masks = constraint_masks(cs);
    debug_assert_eq!(counts.len(), 1 << t);
    masks
        .iter()
        .map(|&mask| {
            counts
                .iter()
                .enumerate()
                .filter(|&(tau, _)| tau as u64 & mask == mask)
                .map(|(_, &c)| c)
                .sum()
        })
        .collect()
}

/// Objective of a count vector, `None` when the overshoot model rejects it.
pub fn objective_of_counts(cs: &ConstraintSet, counts: &[u64], model: OracleModel) -> Option<u64> {
    let supports = supports_of_counts(cs, counts);
    objective_of_supports(cs, &supports, model)
}

fn objective_of_supports(cs: &ConstraintSet, supports: &[u64], model: OracleModel) -> Option<u64> {
    let mut total = 0;
    for (i, &s) in supports.iter().enumerate() {
        let target = cs.target(i);
        match model {
            OracleModel::Overshoot if s < target => return None,
            _ => total += s.abs_diff(target),
        }
    }
    Some(total)
}

fn constraint_masks(cs: &ConstraintSet) -> Vec<u64> {
    cs.constraints()
        .iter()
        .map(|c| c.itemset.items().fold(0u64, |m, k| m | 1 << k))
        .collect()
}

fn check_guard(cs: &ConstraintSet) -> Result<()> {
    let t = cs.universe().size();
    if t > MAX_ORACLE_ITEMS || cs.n() > MAX_ORACLE_ROWS {
        return Err(Error::Scale(format!(
            "oracle handles t <= {MAX_ORACLE_ITEMS} and n <= {MAX_ORACLE_ROWS}, got t = {t}, n = {}",
            cs.n()
        )));
    }
    Ok(())
}

pub fn brute_force_optimum(cs: &ConstraintSet, model: OracleModel) -> Result<OracleResult> {
    check_guard(cs)?;
    let types = 1usize << cs.universe().size();
    let masks = constraint_masks(cs);
    // covers[τ] lists the constraints whose itemset is contained in type τ.
    let covers: Vec<Vec<usize>> = (0..types)
        .map(|tau| {
            (0..masks.len())
                .filter(|&i| tau as u64 & masks[i] == masks[i])
                .collect()
        })
        .collect();

    let mut best: Option<(u64, Vec<u64>)> = None;
    let mut supports = vec![0u64; cs.m()];
    let mut counts = vec![0u64; types];

    #[allow(clippy::too_many_arguments)]
    fn rec(
        pos: usize,
        left: u64,
        cs: &ConstraintSet,
        model: OracleModel,
        covers: &[Vec<usize>],
        counts: &mut Vec<u64>,
        supports: &mut Vec<u64>,
        best: &mut Option<(u64, Vec<u64>)>,
    ) {
        let last = pos + 1 == counts.len();
        let range = if last { left..=left } else { 0..=left };
        for c in range {
            counts[pos] = c;
            for &i in &covers[pos] {
                supports[i] += c;
            }
            if last {
                if let Some(obj) = objective_of_supports(cs, supports, model) {
                    if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                        *best = Some((obj, counts.clone()));
                    }
                }
            } else {
                rec(pos + 1, left - c, cs, model, covers, counts, supports, best);
            }
            for &i in &covers[pos] {
                supports[i] -= c;
            }
        }
        counts[pos] = 0;
    }
    rec(0, cs.n(), cs, model, &covers, &mut counts, &mut supports, &mut best);

    // The all-items database meets every overshoot constraint, so an optimum exists.
    let (optimum, witness) = best.expect("some count vector is always admissible");
    Ok(OracleResult { optimum, witness })
}

/// Database with `counts[τ]` copies of type `τ`, in type order.
pub fn database_from_counts(universe: &ItemUniverse, counts: &[u64]) -> Result<TransactionDatabase> {
    let t = universe.size();
    if t > 63 || counts.len() != 1 << t {
        return Err(Error::Dimension {
            expected: 1usize.checked_shl(t as u32).unwrap_or(0),
            found: counts.len(),
        });
    }
    let mut rows = Vec::new();
    for (tau, &c) in counts.iter().enumerate() {
        let set = ItemSet::from_mask(t, tau as u64);
        rows.extend(std::iter::repeat_n(set, c as usize));
    }
    TransactionDatabase::from_itemsets(universe.clone(), rows)
}

/// Simple undirected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in &edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) outside {vertex_count} vertices"
                )));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::invalid(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(Self {
            vertex_count,
            edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Color {
    Red,
    Green,
    Blue,
}

impl Color {
    fn offset(self) -> usize {
        self as usize
    }

    /// R → G → B → R.
    pub fn rotate(self) -> Color {
        match self {
            Color::Red => Color::Green,
            Color::Green => Color::Blue,
            Color::Blue => Color::Red,
        }
    }
}

/// Item id of color `c` at vertex `v`: items are R_v, G_v, B_v = 3v, 3v+1, 3v+2.
pub fn color_item(v: usize, c: Color) -> usize {
    3 * v + c.offset()
}

/// `[n/3]`, rounded to nearest.
pub fn third(n: u64) -> u64 {
    (n + 1) / 3
}

/// The instance with `m = 6|V| + 3|E|` constraints and `n = k0·m²`:
/// each color of each vertex has support `[n/3]`, no vertex carries two
/// colors, and no edge has the same color at both ends.
pub fn reduce_3coloring(g: &Graph, k0: u64) -> Result<ConstraintSet> {
    if k0 == 0 {
        return Err(Error::invalid("k0 must be positive"));
    }
    let t = 3 * g.vertex_count();
    let universe = ItemUniverse::new(t)?;
    let m = (6 * g.vertex_count() + 3 * g.edges().len()) as u64;
    let n = k0 * m * m;
    let set = |items: [usize; 2]| ItemSet::from_items(t, items);
    let colors = [Color::Red, Color::Green, Color::Blue];
    let mut constraints = Vec::with_capacity(m as usize);
    for v in 0..g.vertex_count() {
        for c in colors {
            constraints.push(SupportConstraint {
                itemset: ItemSet::from_items(t, [color_item(v, c)])?,
                support: third(n),
            });
        }
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            constraints.push(SupportConstraint {
                itemset: set([color_item(v, colors[a]), color_item(v, colors[b])])?,
                support: 0,
            });
        }
    }
    for &(u, v) in g.edges() {
        for c in colors {
            constraints.push(SupportConstraint {
                itemset: set([color_item(u, c), color_item(v, c)])?,
                support: 0,
            });
        }
    }
    ConstraintSet::new(universe, n, constraints)
}

/// `n` rows built from a proper coloring and its two cyclic recolorings:
/// `⌊n/3⌋` copies of each, plus `n mod 3` extra copies of the first.
pub fn coloring_to_database(g: &Graph, coloring: &[Color], n: u64) -> Result<TransactionDatabase> {
    if coloring.len() != g.vertex_count() {
        return Err(Error::Dimension {
            expected: g.vertex_count(),
            found: coloring.len(),
        });
    }
    if let Some(&(u, v)) = g.edges().iter().find(|&&(u, v)| coloring[u] == coloring[v]) {
        return Err(Error::invalid(format!(
            "coloring is not proper: edge ({u}, {v}) has both ends {:?}",
            coloring[u]
        )));
    }
    let t = 3 * g.vertex_count();
    let universe = ItemUniverse::new(t)?;
    let transaction = |shift: usize| -> Result<ItemSet> {
        ItemSet::from_items(
            t,
            coloring.iter().enumerate().map(|(v, &c)| {
                let c = (0..shift).fold(c, |c, _| c.rotate());
                color_item(v, c)
            }),
        )
    };
    let per = n / 3;
    let extra = n % 3;
    let mut rows = Vec::with_capacity(n as usize);
    rows.extend(std::iter::repeat_n(transaction(0)?, (per + extra) as usize));
    rows.extend(std::iter::repeat_n(transaction(1)?, per as usize));
    rows.extend(std::iter::repeat_n(transaction(2)?, per as usize));
    TransactionDatabase::from_itemsets(universe, rows)
}
