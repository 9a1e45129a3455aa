//! Constraints in, database and report out.

use crate::constraints::ConstraintSet;
use crate::database::TransactionDatabase;
use crate::error::{Error, Result};
use crate::formulation::build_relaxed_lp;
use crate::lp::{LpModel, LpSolution, LpSolver, LpStatus, SolverConfig};
use crate::report::{deviation_report, SynthesisReport};
use crate::rounding::{build_database, purify, tighten, RoundedSolution, RoundingMethod, RoundingParams};

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub lp: LpSolution,
    pub rounded: RoundedSolution,
    pub database: TransactionDatabase,
    pub report: SynthesisReport,
}

/// What happens to the solver's optimum before rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Purify {
    /// Round the optimum as returned.
    Off,
    /// Swap in an equally good optimum that is integral in u and y, when
    /// one is found (see [`purify`]).
    KeepObjective,
    /// Use the type program's optimum when the universe is small enough
    /// (see [`tighten`]); its objective may exceed the relaxation's, as a
    /// tighter lower bound. Otherwise as `KeepObjective`.
    #[default]
    Tighten,
}

/// Solver, rounding method, and their settings.
#[derive(Clone, Copy)]
pub struct Pipeline<'a> {
    pub solver: &'a dyn LpSolver,
    pub solver_config: SolverConfig,
    pub method: &'a dyn RoundingMethod,
    pub params: RoundingParams,
    pub purify: Purify,
}

impl<'a> Pipeline<'a> {
    pub fn new(solver: &'a dyn LpSolver, method: &'a dyn RoundingMethod) -> Self {
        Self {
            solver,
            solver_config: SolverConfig::default(),
            method,
            params: RoundingParams::default(),
            purify: Purify::default(),
        }
    }

    /// Solves `model` (built over `cs`'s layout) and applies `purify`.
    /// Infeasible and unbounded results are returned as statuses; an
    /// iteration limit is an error.
    pub fn solve_model(&self, cs: &ConstraintSet, model: &LpModel) -> Result<LpSolution> {
        let sol = self.solver.solve(model, &self.solver_config)?;
        match sol.status {
            LpStatus::IterationLimit => Err(Error::Solver(format!(
                "{} hit its iteration limit after {} pivots",
                self.solver.name(),
                sol.iterations
            ))),
            LpStatus::Optimal if self.purify != Purify::Off => {
                let tol = self.solver_config.feasibility_tolerance.max(1e-9) * 10.0;
                let (solver, config) = (self.solver, &self.solver_config);
                if self.purify == Purify::Tighten {
                    if let Some(t) = tighten(cs, model, &sol, solver, config, tol)? {
                        return Ok(t);
                    }
                }
                Ok(purify(cs, model, &sol, solver, config, tol)?.unwrap_or(sol))
            }
            _ => Ok(sol),
        }
    }

    /// The (possibly tightened) optimum; anything but optimal is an error.
    pub fn solve(&self, cs: &ConstraintSet) -> Result<LpSolution> {
        let sol = self.solve_model(cs, &build_relaxed_lp(cs))?;
        if !sol.is_optimal() {
            return Err(Error::NotOptimal(format!(
                "{} reported {:?} for the relaxation",
                self.solver.name(),
                sol.status
            )));
        }
        Ok(sol)
    }

    /// Rounding and reporting for an already solved relaxation.
    pub fn round(&self, cs: &ConstraintSet, lp: LpSolution) -> Result<Synthesis> {
        let rounded = self.method.round(&lp, cs, &self.params)?;
        let database = build_database(&rounded, cs.universe())?;
        let report = deviation_report(&database, cs, Some(lp.objective))?;
        Ok(Synthesis {
            lp,
            rounded,
            database,
            report,
        })
    }

    pub fn synthesize(&self, cs: &ConstraintSet) -> Result<Synthesis> {
        let lp = self.solve(cs)?;
        self.round(cs, lp)
    }
}
