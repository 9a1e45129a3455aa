//! Linear programming: the model type, the solver contract, and the bundled
//! solvers.
//!
//! Solvers sit behind [`LpSolver`] and are looked up by name in a
//! [`SolverRegistry`]. The bundled `dense-simplex` is the reference; the exact
//! rational simplex backs it up on tiny models.

mod exact;
mod model;
mod simplex;

use std::collections::BTreeMap;

pub use exact::{solve_exact, ExactSimplex};
pub use model::{Column, LpModel, Relation, Row, RowKind};
pub use simplex::DenseSimplex;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub feasibility_tolerance: f64,
    pub optimality_tolerance: f64,
    /// Pivot budget; `None` means `10 · (columns + rows)`.
    pub max_iterations: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            feasibility_tolerance: 1e-7,
            optimality_tolerance: 1e-7,
            max_iterations: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.feasibility_tolerance > 0.0 && self.optimality_tolerance > 0.0) {
            return Err(Error::invalid("solver tolerances must be positive"));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::invalid("max_iterations must be positive"));
        }
        Ok(())
    }

    pub fn iteration_budget(&self, model: &LpModel) -> usize {
        self.max_iterations
            .unwrap_or(10 * (model.column_count() + model.row_count()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// One value per model column (meaningful when optimal).
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn without_point(status: LpStatus, columns: usize, iterations: usize) -> Self {
        Self {
            status,
            values: vec![0.0; columns],
            objective: f64::NAN,
            iterations,
        }
    }
}

pub trait LpSolver: Send + Sync {
    fn name(&self) -> &'static str;

    fn solve(&self, model: &LpModel, config: &SolverConfig) -> Result<LpSolution>;
}

/// Solvers selectable by name.
pub struct SolverRegistry {
    solvers: BTreeMap<&'static str, Box<dyn LpSolver>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        Self {
            solvers: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, solver: Box<dyn LpSolver>) {
        self.solvers.insert(solver.name(), solver);
    }

    pub fn get(&self, name: &str) -> Result<&dyn LpSolver> {
        self.solvers
            .get(name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "solver",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.keys().copied().collect()
    }
}

impl Default for SolverRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(DenseSimplex));
        r.register(Box::new(ExactSimplex));
        r
    }
}

pub const DEFAULT_SOLVER: &str = "dense-simplex";
