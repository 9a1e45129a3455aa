use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::formulation::Layout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// Where a row comes from. Single-variable `Bound` rows mirror column bounds
/// and are kept so the row tally of the itemset program is explicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    /// |I_i|·y_{i,j} ≤ χ(J_j)·χ(I_i)
    TriangleLower,
    /// χ(J_j)·χ(I_i) ≤ y_{i,j} + |I_i| − 1
    TriangleUpper,
    /// x_{i,j} − n·y_{i,j} ≤ 0
    TetraZero,
    /// x_{i,j} ≤ X_j
    TetraCap,
    /// n·y_{i,j} + X_j − x_{i,j} ≤ n
    TetraFloor,
    /// Σ_j X_j = n
    Coupling,
    /// s_i + z_i = Σ_j x_{i,j}
    Support,
    Bound,
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub kind: RowKind,
    pub coefs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coefs.iter().map(|&(c, a)| a * values[c]).sum()
    }

    /// Amount by which `values` violate this row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }

    pub fn holds(&self, values: &[f64], tol: f64) -> bool {
        self.violation(values) <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

/// A minimization LP: `min c·x` subject to rows and column bounds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpModel {
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
    pub objective: Vec<f64>,
    /// Present for models built from a constraint set.
    pub layout: Option<Layout>,
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_column(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> usize {
        self.columns.push(Column {
            name: name.into(),
            lower,
            upper,
        });
        self.objective.push(cost);
        self.columns.len() - 1
    }

    pub fn add_row(&mut self, kind: RowKind, coefs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.rows.push(Row {
            kind,
            coefs,
            relation,
            rhs,
        });
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, x)| c * x).sum()
    }

    /// Largest row or bound violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(values));
        let bounds = self
            .columns
            .iter()
            .zip(values)
            .map(|(c, &x)| (c.lower - x).max(x - c.upper).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.columns.len() {
            return Err(Error::Dimension {
                expected: self.columns.len(),
                found: self.objective.len(),
            });
        }
        for c in &self.columns {
            if !c.lower.is_finite() || c.upper.is_nan() || c.lower > c.upper {
                return Err(Error::invalid(format!(
                    "column {} needs a finite lower bound not above its upper bound",
                    c.name
                )));
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::invalid(format!("row {r} has a non-finite rhs")));
            }
            for &(c, a) in &row.coefs {
                if c >= self.columns.len() || !a.is_finite() {
                    return Err(Error::invalid(format!("row {r} has a bad coefficient")));
                }
            }
        }
        Ok(())
    }

    /// LP-format-style text: objective, one row per line, then column bounds.
    pub fn dump(&self) -> String {
        let mut out = String::from("minimize");
        for (c, &a) in self.objective.iter().enumerate() {
            if a != 0.0 {
                let _ = write!(out, " {}*{}", a, self.columns[c].name);
            }
        }
        out.push('\n');
        for row in &self.rows {
            let terms: Vec<String> = row
                .coefs
                .iter()
                .map(|&(c, a)| format!("{}*{}", a, self.columns[c].name))
                .collect();
            let _ = writeln!(out, "{} {} {}", terms.join(" "), row.relation.symbol(), row.rhs);
        }
        for c in &self.columns {
            if c.upper.is_finite() {
                let _ = writeln!(out, "bound {} <= {} <= {}", c.lower, c.name, c.upper);
            } else {
                let _ = writeln!(out, "bound {} <= {}", c.lower, c.name);
            }
        }
        out
    }
}
