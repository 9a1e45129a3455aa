//! Two-phase bounded-variable simplex on a dense tableau.
//!
//! Columns keep their bounds (nonbasic columns sit at a bound), so the `u, y ≤ 1`
//! bounds of the itemset program never become rows. Single-variable rows are
//! folded into column bounds before the tableau is built.
//!
//! Pricing is Dantzig's largest reduced cost with a Harris-style ratio test.
//! After a run of degenerate pivots the solver switches to Bland's rule
//! (lowest index entering and leaving) until the objective moves again, which
//! rules out cycling.

use super::exact::solve_exact;
use super::{LpModel, LpSolution, LpSolver, LpStatus, Relation, SolverConfig};
use crate::error::Result;

/// Infeasibility claims on models up to this many columns are re-checked in
/// exact arithmetic.
const EXACT_RECHECK_COLUMNS: usize = 12;
const PIVOT_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone, Copy, Default)]
pub struct DenseSimplex;

impl LpSolver for DenseSimplex {
    fn name(&self) -> &'static str {
        "dense-simplex"
    }

    fn solve(&self, model: &LpModel, config: &SolverConfig) -> Result<LpSolution> {
        model.validate()?;
        config.validate()?;
        let sol = solve_float(model, config);
        if sol.status == LpStatus::Infeasible && model.column_count() <= EXACT_RECHECK_COLUMNS {
            return solve_exact(model, config);
        }
        Ok(sol)
    }
}

/// Bounds after folding singleton rows; `None` if they contradict.
struct Presolved {
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// (coefficients, relation, rhs) of rows with two or more nonzeros.
    rows: Vec<(Vec<(usize, f64)>, Relation, f64)>,
}

fn presolve(model: &LpModel, tol: f64) -> Option<Presolved> {
    let ncols = model.column_count();
    let mut lower: Vec<f64> = model.columns.iter().map(|c| c.lower).collect();
    let mut upper: Vec<f64> = model.columns.iter().map(|c| c.upper).collect();
    let mut rows = Vec::new();
    let mut dense = vec![0.0; ncols];
    for row in &model.rows {
        let mut touched = Vec::new();
        for &(c, a) in &row.coefs {
            if dense[c] == 0.0 {
                touched.push(c);
            }
            dense[c] += a;
        }
        touched.sort_unstable();
        let coefs: Vec<(usize, f64)> = touched
            .iter()
            .filter(|&&c| dense[c] != 0.0)
            .map(|&c| (c, dense[c]))
            .collect();
        for &c in &touched {
            dense[c] = 0.0;
        }
        match coefs.len() {
            0 => {
                let ok = match row.relation {
                    Relation::Le => row.rhs >= -tol,
                    Relation::Ge => row.rhs <= tol,
                    Relation::Eq => row.rhs.abs() <= tol,
                };
                if !ok {
                    return None;
                }
            }
            1 => {
                let (c, a) = coefs[0];
                let v = row.rhs / a;
                let rel = match (row.relation, a > 0.0) {
                    (Relation::Eq, _) => Relation::Eq,
                    (r, true) => r,
                    (Relation::Le, false) => Relation::Ge,
                    (Relation::Ge, false) => Relation::Le,
                };
                if matches!(rel, Relation::Le | Relation::Eq) {
                    upper[c] = upper[c].min(v);
                }
                if matches!(rel, Relation::Ge | Relation::Eq) {
                    lower[c] = lower[c].max(v);
                }
            }
            _ => rows.push((coefs, row.relation, row.rhs)),
        }
    }
    for c in 0..ncols {
        if lower[c] > upper[c] {
            if lower[c] - upper[c] > tol {
                return None;
            }
            upper[c] = lower[c];
        }
    }
    Some(Presolved { lower, upper, rows })
}

struct Tableau {
    nrows: usize,
    ncols: usize,
    a: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    at_upper: Vec<bool>,
    ub: Vec<f64>,
    d: Vec<f64>,
    cost: Vec<f64>,
}

enum Outcome {
    Optimal,
    Unbounded,
    Limit,
}

impl Tableau {
    fn row(&self, r: usize) -> &[f64] {
        &self.a[r * self.ncols..(r + 1) * self.ncols]
    }

    fn recompute_reduced_costs(&mut self) {
        self.d.clone_from(&self.cost);
        for r in 0..self.nrows {
            let cb = self.cost[self.basis[r]];
            if cb != 0.0 {
                let base = r * self.ncols;
                for j in 0..self.ncols {
                    self.d[j] -= cb * self.a[base + j];
                }
            }
        }
        for r in 0..self.nrows {
            self.d[self.basis[r]] = 0.0;
        }
    }

    fn objective(&self) -> f64 {
        let basic: f64 = (0..self.nrows).map(|r| self.cost[self.basis[r]] * self.beta[r]).sum();
        let upper: f64 = (0..self.ncols)
            .filter(|&j| !self.is_basic[j] && self.at_upper[j])
            .map(|j| self.cost[j] * self.ub[j])
            .sum();
        basic + upper
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.a[r * nc + q];
        let mut prow = self.row(r).to_vec();
        for v in prow.iter_mut() {
            *v /= piv;
        }
        prow[q] = 1.0;
        let nz: Vec<usize> = (0..nc).filter(|&j| prow[j] != 0.0).collect();
        for i in 0..self.nrows {
            if i == r {
                continue;
            }
            let f = self.a[i * nc + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * nc..(i + 1) * nc];
            for &j in &nz {
                let v = row[j] - f * prow[j];
                row[j] = if v.abs() < DROP_TOL { 0.0 } else { v };
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in &nz {
                self.d[j] -= f * prow[j];
            }
            self.d[q] = 0.0;
        }
        self.a[r * nc..(r + 1) * nc].copy_from_slice(&prow);
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
    }

    fn run(&mut self, cfg: &SolverConfig, iterations: &mut usize, budget: usize) -> Outcome {
        let opt_tol = cfg.optimality_tolerance;
        let feas_tol = cfg.feasibility_tolerance;
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            // Pricing.
            let mut enter = None;
            let mut best = 0.0;
            for j in 0..self.ncols {
                if self.is_basic[j] || self.ub[j] == 0.0 {
                    continue;
                }
                let dj = self.d[j];
                let gain = if self.at_upper[j] { dj } else { -dj };
                if gain > opt_tol {
                    if bland {
                        enter = Some(j);
                        break;
                    }
                    if gain > best {
                        best = gain;
                        enter = Some(j);
                    }
                }
            }
            let Some(q) = enter else {
                return Outcome::Optimal;
            };
            if *iterations >= budget {
                return Outcome::Limit;
            }
            *iterations += 1;
            let dir = if self.at_upper[q] { -1.0 } else { 1.0 };

            // Ratio test: Harris pass for a bound, then the largest pivot under it.
            let nc = self.ncols;
            let slack_to_bound = |r: usize, alpha: f64, tol: f64| -> Option<f64> {
                if alpha > PIVOT_TOL {
                    Some((self.beta[r].max(0.0) + tol) / alpha)
                } else if alpha < -PIVOT_TOL {
                    let u = self.ub[self.basis[r]];
                    u.is_finite()
                        .then(|| ((u - self.beta[r]).max(0.0) + tol) / -alpha)
                } else {
                    None
                }
            };
            let mut leave: Option<usize> = None;
            let mut theta;
            if bland {
                theta = f64::INFINITY;
                for r in 0..self.nrows {
                    let alpha = dir * self.a[r * nc + q];
                    if let Some(t) = slack_to_bound(r, alpha, 0.0) {
                        let better = match leave {
                            None => true,
                            Some(l) => {
                                t < theta - 1e-12
                                    || (t <= theta + 1e-12 && self.basis[r] < self.basis[l])
                            }
                        };
                        if better {
                            theta = t;
                            leave = Some(r);
                        }
                    }
                }
            } else {
                let mut bound = f64::INFINITY;
                for r in 0..self.nrows {
                    let alpha = dir * self.a[r * nc + q];
                    if let Some(t) = slack_to_bound(r, alpha, feas_tol) {
                        bound = bound.min(t);
                    }
                }
                let mut best_alpha = 0.0;
                theta = f64::INFINITY;
                if bound.is_finite() {
                    for r in 0..self.nrows {
                        let alpha = dir * self.a[r * nc + q];
                        if let Some(t) = slack_to_bound(r, alpha, 0.0) {
                            if t <= bound && alpha.abs() > best_alpha {
                                best_alpha = alpha.abs();
                                theta = t;
                                leave = Some(r);
                            }
                        }
                    }
                }
            }
            let flip = self.ub[q];
            if flip.is_finite() && flip <= theta {
                // Entering column runs to its other bound; no basis change.
                for r in 0..self.nrows {
                    let a = self.a[r * nc + q];
                    if a != 0.0 {
                        self.beta[r] -= a * dir * flip;
                    }
                }
                self.at_upper[q] = !self.at_upper[q];
                degenerate = 0;
                continue;
            }
            let Some(r) = leave else {
                return Outcome::Unbounded;
            };
            let theta = theta.max(0.0);
            for i in 0..self.nrows {
                let a = self.a[i * nc + q];
                if a != 0.0 {
                    self.beta[i] -= a * dir * theta;
                }
            }
            let entering_value = if self.at_upper[q] { self.ub[q] - theta } else { theta };
            let leaving = self.basis[r];
            let alpha = dir * self.a[r * nc + q];
            self.at_upper[leaving] = alpha < 0.0;
            self.at_upper[q] = false;
            self.pivot(r, q);
            self.beta[r] = entering_value;
            if theta <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
        }
    }

    fn value(&self, j: usize, row_of: &[Option<usize>]) -> f64 {
        match row_of[j] {
            Some(r) => self.beta[r],
            None if self.at_upper[j] => self.ub[j],
            None => 0.0,
        }
    }
}

pub(crate) fn solve_float(model: &LpModel, cfg: &SolverConfig) -> LpSolution {
    let ncols_model = model.column_count();
    let budget = cfg.iteration_budget(model);
    let Some(pre) = presolve(model, cfg.feasibility_tolerance) else {
        return LpSolution::without_point(LpStatus::Infeasible, ncols_model, 0);
    };

    // Shift every column to [0, upper − lower].
    let nrows = pre.rows.len();
    let mut rhs = Vec::with_capacity(nrows);
    let mut slack_sign = Vec::with_capacity(nrows);
    for (coefs, rel, b) in &pre.rows {
        let shift: f64 = coefs.iter().map(|&(c, a)| a * pre.lower[c]).sum();
        rhs.push(b - shift);
        slack_sign.push(match rel {
            Relation::Le => Some(1.0),
            Relation::Ge => Some(-1.0),
            Relation::Eq => None,
        });
    }
    let nslack = slack_sign.iter().filter(|s| s.is_some()).count();
    let negate: Vec<bool> = rhs.iter().map(|&b| b < 0.0).collect();
    let needs_art: Vec<bool> = (0..nrows)
        .map(|r| match slack_sign[r] {
            Some(s) => (if negate[r] { -s } else { s }) < 0.0,
            None => true,
        })
        .collect();
    let nart = needs_art.iter().filter(|&&x| x).count();
    let ncols = ncols_model + nslack + nart;

    let mut a = vec![0.0; nrows * ncols];
    let mut beta = vec![0.0; nrows];
    let mut basis = vec![0; nrows];
    let mut ub = vec![f64::INFINITY; ncols];
    for j in 0..ncols_model {
        ub[j] = pre.upper[j] - pre.lower[j];
    }
    let mut next_slack = ncols_model;
    let mut next_art = ncols_model + nslack;
    for (r, (coefs, _, _)) in pre.rows.iter().enumerate() {
        let sign = if negate[r] { -1.0 } else { 1.0 };
        let row = &mut a[r * ncols..(r + 1) * ncols];
        for &(c, v) in coefs {
            row[c] = sign * v;
        }
        beta[r] = sign * rhs[r];
        if let Some(s) = slack_sign[r] {
            row[next_slack] = sign * s;
            if !needs_art[r] {
                basis[r] = next_slack;
            }
            next_slack += 1;
        }
        if needs_art[r] {
            row[next_art] = 1.0;
            basis[r] = next_art;
            next_art += 1;
        }
    }
    let mut is_basic = vec![false; ncols];
    for &b in &basis {
        is_basic[b] = true;
    }
    let art_start = ncols_model + nslack;
    let mut phase1_cost = vec![0.0; ncols];
    for c in phase1_cost.iter_mut().skip(art_start) {
        *c = 1.0;
    }
    let mut tab = Tableau {
        nrows,
        ncols,
        a,
        beta,
        basis,
        is_basic,
        at_upper: vec![false; ncols],
        ub,
        d: vec![0.0; ncols],
        cost: phase1_cost,
    };
    let mut iterations = 0;

    if nart > 0 {
        tab.recompute_reduced_costs();
        match tab.run(cfg, &mut iterations, budget) {
            Outcome::Limit => {
                return LpSolution::without_point(LpStatus::IterationLimit, ncols_model, iterations)
            }
            Outcome::Unbounded => unreachable!("phase one is bounded below by zero"),
            Outcome::Optimal => {}
        }
        let bmax = rhs.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        if tab.objective() > cfg.feasibility_tolerance * (1.0 + bmax) {
            return LpSolution::without_point(LpStatus::Infeasible, ncols_model, iterations);
        }
        // Pin artificials at zero and swap basic ones out where possible.
        for j in art_start..ncols {
            tab.ub[j] = 0.0;
            tab.at_upper[j] = false;
        }
        for r in 0..nrows {
            if tab.basis[r] < art_start {
                continue;
            }
            let cand = (0..art_start)
                .filter(|&j| !tab.is_basic[j])
                .max_by(|&x, &y| {
                    tab.a[r * ncols + x]
                        .abs()
                        .total_cmp(&tab.a[r * ncols + y].abs())
                        .then(y.cmp(&x))
                });
            if let Some(j) = cand {
                if tab.a[r * ncols + j].abs() > 1e-7 {
                    let value = if tab.at_upper[j] { tab.ub[j] } else { 0.0 };
                    let shift = tab.beta[r];
                    // Degenerate exchange: the entering column keeps its value.
                    let col: Vec<f64> = (0..nrows).map(|i| tab.a[i * ncols + j]).collect();
                    let piv = col[r];
                    for i in 0..nrows {
                        if i != r && col[i] != 0.0 {
                            tab.beta[i] -= col[i] / piv * shift;
                        }
                    }
                    tab.at_upper[j] = false;
                    tab.pivot(r, j);
                    tab.beta[r] = value + shift / piv;
                }
            }
        }
    }

    let mut cost = vec![0.0; ncols];
    cost[..ncols_model].copy_from_slice(&model.objective);
    tab.cost = cost;
    tab.recompute_reduced_costs();
    let outcome = tab.run(cfg, &mut iterations, budget);
    match outcome {
        Outcome::Limit => {
            return LpSolution::without_point(LpStatus::IterationLimit, ncols_model, iterations)
        }
        Outcome::Unbounded => {
            return LpSolution::without_point(LpStatus::Unbounded, ncols_model, iterations)
        }
        Outcome::Optimal => {}
    }

    let mut row_of = vec![None; ncols];
    for (r, &b) in tab.basis.iter().enumerate() {
        row_of[b] = Some(r);
    }
    let values: Vec<f64> = (0..ncols_model)
        .map(|j| {
            let v = pre.lower[j] + tab.value(j, &row_of);
            v.clamp(pre.lower[j], pre.upper[j])
        })
        .collect();
    let objective = model.objective_value(&values);
    LpSolution {
        status: LpStatus::Optimal,
        values,
        objective,
        iterations,
    }
}
