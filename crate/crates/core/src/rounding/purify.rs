//! Re-expresses a fractional optimum as an equally good one that is
//! integral in u and y.
//!
//! Two constructions are tried, and a result is used only if it is feasible
//! for the model and no worse in objective:
//!
//! * Type program (t ≤ [`MAX_TYPE_ITEMS`]): one count per itemset type over
//!   all 2^t types, with the support rows and the coupling row. Its basic
//!   optima use at most m + 1 types, which become the candidates.
//! * Layers: a column with ratios r_i = x*_{i,j}/X*_j is split at each
//!   distinct level v_1 > … > v_p > 0 into ∪{I_i : r_i ≥ v_q} with weight
//!   X*_j·(v_q − v_{q+1}), plus an empty candidate for X*_j·(1 − v_1).

use super::Relaxed;
use crate::constraints::ConstraintSet;
use crate::error::Result;
use crate::formulation::{assignment_from_weights, Layout, VarRef};
use crate::itemset::ItemSet;
use crate::lp::{LpModel, LpSolution, LpSolver, LpStatus, Relation, RowKind, SolverConfig};

/// Largest universe for which the type program is built.
pub const MAX_TYPE_ITEMS: usize = 12;

const RATIO_SNAP: f64 = 1e-9;
const WEIGHT_FLOOR: f64 = 1e-9;

pub fn purify(
    cs: &ConstraintSet,
    model: &LpModel,
    ostar: &LpSolution,
    solver: &dyn LpSolver,
    config: &SolverConfig,
    tolerance: f64,
) -> Result<Option<LpSolution>> {
    Relaxed::new(ostar, cs)?;
    if let Some((LpStatus::Optimal, candidates)) = type_candidates(cs, model, solver, config)? {
        if let Some(sol) = accept(cs, model, ostar, candidates, tolerance, 0.0)? {
            return Ok(Some(sol));
        }
    }
    match layer_candidates(cs, ostar)? {
        Some(candidates) => accept(cs, model, ostar, candidates, tolerance, 0.0),
        None => Ok(None),
    }
}

/// The type program's optimum in the relaxation's variables, even when it
/// is worse than `ostar`: the type program is itself a relaxation of the
/// same integer program, and a tighter one, so its optimum is still a lower
/// bound. An infeasible type program means no database meets the model
/// (possible once z is bounded), reported as an infeasible solution. `None`
/// when t is too large or no such point fits the model.
pub fn tighten(
    cs: &ConstraintSet,
    model: &LpModel,
    ostar: &LpSolution,
    solver: &dyn LpSolver,
    config: &SolverConfig,
    tolerance: f64,
) -> Result<Option<LpSolution>> {
    Relaxed::new(ostar, cs)?;
    match type_candidates(cs, model, solver, config)? {
        Some((LpStatus::Optimal, candidates)) => accept(cs, model, ostar, candidates, tolerance, f64::INFINITY),
        Some((LpStatus::Infeasible, _)) => Ok(Some(LpSolution::without_point(
            LpStatus::Infeasible,
            model.column_count(),
            ostar.iterations,
        ))),
        _ => Ok(None),
    }
}

fn accept(
    cs: &ConstraintSet,
    model: &LpModel,
    ostar: &LpSolution,
    candidates: Vec<(ItemSet, f64)>,
    tolerance: f64,
    max_increase: f64,
) -> Result<Option<LpSolution>> {
    if candidates.len() > cs.m() + 1 {
        return Ok(None);
    }
    let (sets, weights): (Vec<ItemSet>, Vec<f64>) = candidates.into_iter().unzip();
    let mut values = assignment_from_weights(cs, &sets, &weights)?;
    // Undo float noise in the support rows' slack.
    let layout = Layout::new(cs.m(), cs.universe().size());
    for i in 0..cs.m() {
        let z = layout.index(VarRef::Z { i });
        if values[z] < 0.0 && values[z] > -tolerance {
            values[z] = 0.0;
        }
    }
    if model.max_violation(&values) > tolerance {
        return Ok(None);
    }
    let objective = model.objective_value(&values);
    if objective > ostar.objective + tolerance + max_increase {
        return Ok(None);
    }
    Ok(Some(LpSolution {
        status: ostar.status,
        values,
        objective,
        iterations: ostar.iterations,
    }))
}

/// Status and optimal type counts, with the z bounds and costs taken from
/// `model`.
fn type_candidates(
    cs: &ConstraintSet,
    model: &LpModel,
    solver: &dyn LpSolver,
    config: &SolverConfig,
) -> Result<Option<(LpStatus, Vec<(ItemSet, f64)>)>> {
    let t = cs.universe().size();
    if t > MAX_TYPE_ITEMS {
        return Ok(None);
    }
    let layout = Layout::new(cs.m(), t);
    let types = 1usize << t;
    let masks: Vec<u64> = (0..cs.m())
        .map(|i| cs.itemset(i).items().fold(0u64, |a, k| a | 1 << k))
        .collect();

    let mut lp = LpModel::new();
    for tau in 0..types {
        lp.add_column(format!("T_{tau}"), 0.0, f64::INFINITY, 0.0);
    }
    let z0 = types;
    for i in 0..cs.m() {
        let zc = layout.index(VarRef::Z { i });
        lp.add_column(format!("z_{}", i + 1), 0.0, model.columns[zc].upper, model.objective[zc]);
    }
    lp.add_row(RowKind::Coupling, (0..types).map(|tau| (tau, 1.0)).collect(), Relation::Eq, cs.n() as f64);
    for (i, &mask) in masks.iter().enumerate() {
        let mut coefs: Vec<(usize, f64)> = (0..types)
            .filter(|&tau| tau as u64 & mask == mask)
            .map(|tau| (tau, 1.0))
            .collect();
        coefs.push((z0 + i, -1.0));
        lp.add_row(RowKind::Support, coefs, Relation::Eq, cs.target(i) as f64);
    }
    let sol = solver.solve(&lp, config)?;
    if !sol.is_optimal() {
        return Ok(Some((sol.status, Vec::new())));
    }
    Ok(Some((
        sol.status,
        (0..types)
            .filter(|&tau| sol.values[tau] > WEIGHT_FLOOR)
            .map(|tau| (ItemSet::from_mask(t, tau as u64), sol.values[tau]))
            .collect(),
    )))
}

/// Layer decomposition of every column; equal itemsets merge.
fn layer_candidates(cs: &ConstraintSet, ostar: &LpSolution) -> Result<Option<Vec<(ItemSet, f64)>>> {
    let r = Relaxed::new(ostar, cs)?;
    let mut layers: Vec<(ItemSet, f64)> = Vec::new();
    let mut push = |set: ItemSet, w: f64| {
        if w <= WEIGHT_FLOOR {
            return;
        }
        match layers.iter_mut().find(|(s, _)| *s == set) {
            Some((_, acc)) => *acc += w,
            None => layers.push((set, w)),
        }
    };

    for j in 0..cs.m() + 1 {
        let big = r.big_x(j);
        if big <= WEIGHT_FLOOR {
            continue;
        }
        let ratios: Vec<f64> = (0..cs.m())
            .map(|i| {
                let q = (r.x(i, j) / big).clamp(0.0, 1.0);
                if q < RATIO_SNAP {
                    0.0
                } else if q > 1.0 - RATIO_SNAP {
                    1.0
                } else {
                    q
                }
            })
            .collect();
        let mut levels: Vec<f64> = ratios.iter().copied().filter(|&q| q > 0.0).collect();
        levels.sort_by(|a, b| b.total_cmp(a));
        levels.dedup();
        let top = levels.first().copied().unwrap_or(0.0);
        push(cs.universe().empty_set(), big * (1.0 - top));
        for (q, &v) in levels.iter().enumerate() {
            let next = levels.get(q + 1).copied().unwrap_or(0.0);
            let mut set = cs.universe().empty_set();
            for (i, &ri) in ratios.iter().enumerate() {
                if ri >= v {
                    set.union_with(cs.itemset(i));
                }
            }
            push(set, big * (v - next));
        }
    }
    Ok(Some(layers))
}
