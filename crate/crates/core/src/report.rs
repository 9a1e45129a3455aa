use crate::constraints::ConstraintSet;
use crate::database::TransactionDatabase;
use crate::error::{Error, Result};
use crate::itemset::ItemSet;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintDeviation {
    pub itemset: ItemSet,
    pub target: u64,
    pub actual: u64,
    /// actual − target
    pub deviation: i64,
}

/// How far a database lands from a constraint set.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisReport {
    pub n_target: u64,
    pub n_actual: u64,
    pub per_constraint: Vec<ConstraintDeviation>,
    pub sum_abs_deviation: u64,
    pub max_abs_deviation: u64,
    /// Relaxed LP optimum, when the database came out of the LP pipeline.
    pub lp_objective: Option<f64>,
}

impl SynthesisReport {
    pub fn from_rows(
        n_target: u64,
        n_actual: u64,
        per_constraint: Vec<ConstraintDeviation>,
        lp_objective: Option<f64>,
    ) -> Self {
        let sum_abs_deviation = per_constraint.iter().map(|r| r.deviation.unsigned_abs()).sum();
        let max_abs_deviation = per_constraint
            .iter()
            .map(|r| r.deviation.unsigned_abs())
            .max()
            .unwrap_or(0);
        Self {
            n_target,
            n_actual,
            per_constraint,
            sum_abs_deviation,
            max_abs_deviation,
            lp_objective,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.sum_abs_deviation == 0
    }
}

pub fn deviation_report(
    db: &TransactionDatabase,
    constraints: &ConstraintSet,
    lp_objective: Option<f64>,
) -> Result<SynthesisReport> {
    if db.universe().size() != constraints.universe().size() {
        return Err(Error::Dimension {
            expected: constraints.universe().size(),
            found: db.universe().size(),
        });
    }
    let rows = constraints
        .constraints()
        .iter()
        .map(|c| {
            let actual = db.support(&c.itemset)?;
            Ok(ConstraintDeviation {
                itemset: c.itemset.clone(),
                target: c.support,
                actual,
                deviation: actual as i64 - c.support as i64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SynthesisReport::from_rows(
        constraints.n(),
        db.len() as u64,
        rows,
        lp_objective,
    ))
}
