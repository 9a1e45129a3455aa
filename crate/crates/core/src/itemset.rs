//! Item universes and itemsets stored as characteristic arrays.
//!
//! An [`ItemSet`] over a universe of `t` items is the bit vector χ(I) ∈ {0,1}^t.
//! Subset tests go through the inner product: χ(I)·χ(J) = |I| exactly when I ⊆ J.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ItemUniverse {
    size: usize,
    labels: Option<Vec<String>>,
}

impl ItemUniverse {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::invalid("item universe must contain at least one item"));
        }
        Ok(Self { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("item universe must contain at least one item"));
        }
        Ok(Self {
            size: labels.len(),
            labels: Some(labels),
        })
    }

    /// Number of items `t`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, item: usize) -> String {
        match &self.labels {
            Some(l) => l[item].clone(),
            None => format!("e{}", item + 1),
        }
    }

    pub fn empty_set(&self) -> ItemSet {
        ItemSet::empty(self.size)
    }

    pub fn full_set(&self) -> ItemSet {
        ItemSet::full(self.size)
    }

    pub fn itemset<I: IntoIterator<Item = usize>>(&self, items: I) -> Result<ItemSet> {
        ItemSet::from_items(self.size, items)
    }
}

/// Characteristic array χ(I) of an itemset over `len` items.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ItemSet {
    words: Vec<u64>,
    len: usize,
}

impl ItemSet {
    pub fn empty(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn full(len: usize) -> Self {
        let mut s = Self::empty(len);
        for k in 0..len {
            s.insert(k);
        }
        s
    }

    pub fn from_items<I: IntoIterator<Item = usize>>(len: usize, items: I) -> Result<Self> {
        let mut s = Self::empty(len);
        for k in items {
            if k >= len {
                return Err(Error::invalid(format!(
                    "item id {k} outside universe of {len} items"
                )));
            }
            s.insert(k);
        }
        Ok(s)
    }

    /// Builds an itemset from a 0/1 characteristic array.
    pub fn from_chi(chi: &[u8]) -> Result<Self> {
        let mut s = Self::empty(chi.len());
        for (k, &b) in chi.iter().enumerate() {
            match b {
                0 => {}
                1 => s.insert(k),
                other => {
                    return Err(Error::invalid(format!(
                        "characteristic array entry {other} is not binary"
                    )))
                }
            }
        }
        Ok(s)
    }

    /// Itemset whose characteristic array is the low `len` bits of `mask`.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        debug_assert!(len <= WORD);
        let mut s = Self::empty(len);
        if len > 0 {
            let keep = if len == WORD { u64::MAX } else { (1u64 << len) - 1 };
            s.words[0] = mask & keep;
        }
        s
    }

    /// Universe size `t` this itemset lives in.
    pub fn universe_size(&self) -> usize {
        self.len
    }

    pub fn contains(&self, k: usize) -> bool {
        k < self.len && self.words[k / WORD] >> (k % WORD) & 1 == 1
    }

    pub fn insert(&mut self, k: usize) {
        assert!(k < self.len, "item {k} outside universe of {}", self.len);
        self.words[k / WORD] |= 1 << (k % WORD);
    }

    pub fn remove(&mut self, k: usize) {
        assert!(k < self.len, "item {k} outside universe of {}", self.len);
        self.words[k / WORD] &= !(1 << (k % WORD));
    }

    /// Number of items |I|.
    pub fn cardinality(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Item ids in ascending order.
    pub fn items(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&k| self.contains(k))
    }

    pub fn chi(&self) -> Vec<u8> {
        (0..self.len).map(|k| self.contains(k) as u8).collect()
    }

    fn check_same(&self, other: &ItemSet) -> Result<()> {
        if self.len != other.len {
            return Err(Error::Dimension {
                expected: self.len,
                found: other.len,
            });
        }
        Ok(())
    }

    /// χ(self)·χ(other).
    pub fn inner_product(&self, other: &ItemSet) -> Result<usize> {
        self.check_same(other)?;
        Ok(self.inner_product_unchecked(other))
    }

    pub(crate) fn inner_product_unchecked(&self, other: &ItemSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `self ⊆ other`, decided by χ(self)·χ(other) = |self|.
    pub fn is_subset(&self, other: &ItemSet) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.is_subset_unchecked(other))
    }

    pub(crate) fn is_subset_unchecked(&self, other: &ItemSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &ItemSet) -> Result<ItemSet> {
        self.check_same(other)?;
        let mut out = self.clone();
        out.union_with(other);
        Ok(out)
    }

    pub(crate) fn union_with(&mut self, other: &ItemSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersection(&self, other: &ItemSet) -> Result<ItemSet> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
        Ok(out)
    }

    pub fn difference(&self, other: &ItemSet) -> Result<ItemSet> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
        Ok(out)
    }

    pub(crate) fn intersects(&self, other: &ItemSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    /// Orders by cardinality, then by ascending item-id sequence.
    pub fn cmp_size_then_items(&self, other: &ItemSet) -> Ordering {
        self.cardinality()
            .cmp(&other.cardinality())
            .then_with(|| self.items().cmp(other.items()))
    }
}

impl fmt::Display for ItemSet {
    /// Space-separated ascending item ids, the on-disk form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for k in self.items() {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{k}")?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(t: usize, items: &[usize]) -> ItemSet {
        ItemSet::from_items(t, items.iter().copied()).unwrap()
    }

    #[test]
    fn inner_product_counts_shared_items() {
        assert_eq!(set(3, &[0, 1]).inner_product(&set(3, &[0, 1, 2])).unwrap(), 2);
        assert_eq!(set(3, &[]).inner_product(&set(3, &[0, 2])).unwrap(), 0);
    }

    #[test]
    fn subset_examples() {
        assert!(set(3, &[]).is_subset(&set(3, &[1])).unwrap());
        assert!(set(3, &[0, 2]).is_subset(&set(3, &[0, 1, 2])).unwrap());
        assert!(!set(3, &[0, 2]).is_subset(&set(3, &[0, 1])).unwrap());
    }

    #[test]
    fn universe_mismatch_is_a_dimension_error() {
        let err = set(3, &[0]).inner_product(&set(4, &[0])).unwrap_err();
        assert_eq!(err, Error::Dimension { expected: 3, found: 4 });
        assert!(set(3, &[0]).is_subset(&set(4, &[0])).is_err());
    }

    #[test]
    fn out_of_range_item_rejected() {
        assert!(ItemSet::from_items(3, [3]).is_err());
        assert!(ItemSet::from_chi(&[0, 2]).is_err());
    }

    #[test]
    fn wide_universe_spans_words() {
        let a = set(130, &[0, 64, 129]);
        let b = set(130, &[0, 1, 64, 100, 129]);
        assert_eq!(a.cardinality(), 3);
        assert!(a.is_subset(&b).unwrap());
        assert_eq!(a.inner_product(&b).unwrap(), 3);
        assert_eq!(a.to_string(), "0 64 129");
    }

    #[test]
    fn exhaustive_subset_law_t4() {
        // χ(a)·χ(b) = |a| ⇔ elementwise containment, over all 16×16 pairs.
        let t = 4;
        for ma in 0u64..16 {
            for mb in 0u64..16 {
                let a = ItemSet::from_mask(t, ma);
                let b = ItemSet::from_mask(t, mb);
                let elementwise = (0..t).all(|k| (ma >> k & 1) <= (mb >> k & 1));
                assert_eq!(a.is_subset(&b).unwrap(), elementwise);
                let ip = a.inner_product(&b).unwrap();
                assert_eq!(ip, b.inner_product(&a).unwrap());
                assert!(ip <= a.cardinality().min(b.cardinality()));
                assert_eq!(ip == a.cardinality(), elementwise);
            }
        }
    }
}
