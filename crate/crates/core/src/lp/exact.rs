//! Textbook two-phase simplex in exact rational arithmetic with Bland's rule.
//!
//! Dense and slow; meant for models with a handful of columns, where it
//! settles feasibility questions without tolerances.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{LpModel, LpSolution, LpSolver, LpStatus, Relation, SolverConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSimplex;

impl LpSolver for ExactSimplex {
    fn name(&self) -> &'static str {
        "exact-simplex"
    }

    fn solve(&self, model: &LpModel, config: &SolverConfig) -> Result<LpSolution> {
        solve_exact(model, config)
    }
}

fn rat(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::invalid(format!("non-finite value {x}")))
}

struct Tableau {
    /// rows × (cols + 1); the last entry of each row is the rhs.
    a: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, q: usize) {
        let piv = self.a[r][q].clone();
        for v in self.a[r].iter_mut() {
            *v /= &piv;
        }
        let prow = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r || row[q].is_zero() {
                continue;
            }
            let f = row[q].clone();
            for (v, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[r] = q;
    }

    fn reduced_costs(&self, cost: &[BigRational]) -> Vec<BigRational> {
        let mut d = cost.to_vec();
        for (r, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for j in 0..self.cols {
                d[j] -= &cost[b] * &self.a[r][j];
            }
        }
        d
    }

    /// Bland's rule. `allowed` masks columns that may enter.
    fn run(
        &mut self,
        cost: &[BigRational],
        allowed: &[bool],
        iterations: &mut usize,
        budget: usize,
    ) -> Option<bool> {
        loop {
            let d = self.reduced_costs(cost);
            let Some(q) = (0..self.cols).find(|&j| allowed[j] && d[j].is_negative()) else {
                return Some(true);
            };
            if *iterations >= budget {
                return None;
            }
            *iterations += 1;
            let rhs = self.cols;
            let mut leave: Option<(usize, BigRational)> = None;
            for r in 0..self.a.len() {
                if !self.a[r][q].is_positive() {
                    continue;
                }
                let ratio = &self.a[r][rhs] / &self.a[r][q];
                let better = match &leave {
                    None => true,
                    Some((l, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*l])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                None => return Some(false),
                Some((r, _)) => self.pivot(r, q),
            }
        }
    }
}

/// Solves `model` exactly. Column upper bounds become rows.
pub fn solve_exact(model: &LpModel, config: &SolverConfig) -> Result<LpSolution> {
    model.validate()?;
    let n = model.column_count();
    let budget = config.iteration_budget(model).max(1000);

    // Rows over shifted columns x' = x − lower ≥ 0.
    let lower = model
        .columns
        .iter()
        .map(|c| rat(c.lower))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<(Vec<BigRational>, Relation, BigRational)> = Vec::new();
    for row in &model.rows {
        let mut coefs = vec![BigRational::zero(); n];
        let mut shift = BigRational::zero();
        for &(c, a) in &row.coefs {
            let a = rat(a)?;
            shift += &a * &lower[c];
            coefs[c] += a;
        }
        rows.push((coefs, row.relation, rat(row.rhs)? - shift));
    }
    for (c, col) in model.columns.iter().enumerate() {
        if col.upper.is_finite() {
            let mut coefs = vec![BigRational::zero(); n];
            coefs[c] = BigRational::one();
            rows.push((coefs, Relation::Le, rat(col.upper)? - &lower[c]));
        }
    }

    let nrows = rows.len();
    let nslack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let cols = n + nslack + nrows;
    let mut a = vec![vec![BigRational::zero(); cols + 1]; nrows];
    let mut basis = vec![0; nrows];
    let mut slack = n;
    for (r, (coefs, rel, b)) in rows.into_iter().enumerate() {
        let sign = if b.is_negative() { -BigRational::one() } else { BigRational::one() };
        for (j, v) in coefs.into_iter().enumerate() {
            a[r][j] = &sign * v;
        }
        match rel {
            Relation::Le => {
                a[r][slack] = sign.clone();
                slack += 1;
            }
            Relation::Ge => {
                a[r][slack] = -sign.clone();
                slack += 1;
            }
            Relation::Eq => {}
        }
        let art = n + nslack + r;
        a[r][art] = BigRational::one();
        a[r][cols] = &sign * b;
        basis[r] = art;
    }
    let mut tab = Tableau { a, basis, cols };
    let art_start = n + nslack;
    let mut iterations = 0;

    let phase1: Vec<BigRational> = (0..cols)
        .map(|j| if j >= art_start { BigRational::one() } else { BigRational::zero() })
        .collect();
    let all = vec![true; cols];
    if tab.run(&phase1, &all, &mut iterations, budget).is_none() {
        return Ok(LpSolution::without_point(LpStatus::IterationLimit, n, iterations));
    }
    let infeas: BigRational = (0..nrows)
        .filter(|&r| tab.basis[r] >= art_start)
        .map(|r| tab.a[r][cols].clone())
        .sum();
    if infeas.is_positive() {
        return Ok(LpSolution::without_point(LpStatus::Infeasible, n, iterations));
    }
    for r in 0..nrows {
        if tab.basis[r] >= art_start {
            if let Some(j) = (0..art_start).find(|&j| !tab.a[r][j].is_zero()) {
                tab.pivot(r, j);
            }
        }
    }

    let mut phase2 = vec![BigRational::zero(); cols];
    for (j, &c) in model.objective.iter().enumerate() {
        phase2[j] = rat(c)?;
    }
    let allowed: Vec<bool> = (0..cols).map(|j| j < art_start).collect();
    match tab.run(&phase2, &allowed, &mut iterations, budget) {
        None => return Ok(LpSolution::without_point(LpStatus::IterationLimit, n, iterations)),
        Some(false) => return Ok(LpSolution::without_point(LpStatus::Unbounded, n, iterations)),
        Some(true) => {}
    }

    let mut exact = lower;
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            exact[b] += &tab.a[r][cols];
        }
    }
    let objective: BigRational = exact
        .iter()
        .zip(&phase2)
        .map(|(x, c)| x * c)
        .sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values: exact.iter().map(to_f64).collect(),
        objective: to_f64(&objective),
        iterations,
    })
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        let num: &BigInt = x.numer();
        let den: &BigInt = x.denom();
        num.to_f64().unwrap_or(f64::NAN) / den.to_f64().unwrap_or(f64::NAN)
    })
}
