use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::itemset::{ItemSet, ItemUniverse};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transaction {
    pub tid: u64,
    pub items: ItemSet,
}

/// Ordered multiset of transactions over one item universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionDatabase {
    universe: ItemUniverse,
    rows: Vec<Transaction>,
}

impl TransactionDatabase {
    pub fn new(universe: ItemUniverse, rows: Vec<Transaction>) -> Result<Self> {
        let t = universe.size();
        let mut seen = std::collections::HashSet::with_capacity(rows.len());
        for row in &rows {
            if row.items.universe_size() != t {
                return Err(Error::Dimension {
                    expected: t,
                    found: row.items.universe_size(),
                });
            }
            if !seen.insert(row.tid) {
                return Err(Error::invalid(format!("duplicate tid {}", row.tid)));
            }
        }
        Ok(Self { universe, rows })
    }

    /// Assigns tids 1..=n in order.
    pub fn from_itemsets(universe: ItemUniverse, itemsets: Vec<ItemSet>) -> Result<Self> {
        let rows = itemsets
            .into_iter()
            .enumerate()
            .map(|(i, items)| Transaction {
                tid: i as u64 + 1,
                items,
            })
            .collect();
        Self::new(universe, rows)
    }

    pub fn universe(&self) -> &ItemUniverse {
        &self.universe
    }

    pub fn rows(&self) -> &[Transaction] {
        &self.rows
    }

    pub(crate) fn rows_mut(&mut self) -> &mut [Transaction] {
        &mut self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn check_universe(&self, itemset: &ItemSet) -> Result<()> {
        if itemset.universe_size() != self.universe.size() {
            return Err(Error::Dimension {
                expected: self.universe.size(),
                found: itemset.universe_size(),
            });
        }
        Ok(())
    }

    /// Number of transactions containing `itemset`.
    pub fn support(&self, itemset: &ItemSet) -> Result<u64> {
        self.check_universe(itemset)?;
        Ok(self
            .rows
            .iter()
            .filter(|r| itemset.is_subset_unchecked(&r.items))
            .count() as u64)
    }

    /// support / |rows| as an exact rational.
    pub fn frequency(&self, itemset: &ItemSet) -> Result<Ratio<u64>> {
        let s = self.support(itemset)?;
        if self.rows.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        Ok(Ratio::new(s, self.rows.len() as u64))
    }
}
