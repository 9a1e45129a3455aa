//! Level-wise frequent itemset mining with exact integer supports.

use std::collections::HashSet;

use crate::constraints::{ConstraintSet, SupportConstraint};
use crate::database::TransactionDatabase;
use crate::error::{Error, Result};
use crate::itemset::ItemSet;

/// All itemsets `I` with `1 ≤ |I| ≤ maxlen` and `support(I) ≥ minsup`, with
/// their supports, sorted by size and then by ascending item ids.
///
/// `maxlen` larger than the universe is clamped to it. A threshold above the
/// database size simply yields nothing.
pub fn mine_frequent(
    db: &TransactionDatabase,
    minsup: u64,
    maxlen: usize,
) -> Result<Vec<(ItemSet, u64)>> {
    if maxlen == 0 {
        return Err(Error::invalid("maxlen must be at least 1"));
    }
    let t = db.universe().size();
    let maxlen = maxlen.min(t);
    let mut out = Vec::new();

    // Level 1.
    let mut level: Vec<Vec<usize>> = Vec::new();
    for k in 0..t {
        let set = ItemSet::from_items(t, [k])?;
        let s = db.support(&set)?;
        if s >= minsup {
            level.push(vec![k]);
            out.push((set, s));
        }
    }

    for _size in 2..=maxlen {
        if level.is_empty() {
            break;
        }
        let frequent: HashSet<&[usize]> = level.iter().map(Vec::as_slice).collect();
        let mut next = Vec::new();
        // `level` is sorted lexicographically, so sets sharing a prefix are adjacent.
        for a in 0..level.len() {
            for b in a + 1..level.len() {
                let (pa, pb) = (&level[a], &level[b]);
                let k = pa.len();
                if pa[..k - 1] != pb[..k - 1] {
                    break;
                }
                let mut cand = pa.clone();
                cand.push(pb[k - 1]);
                let all_subsets_frequent = (0..cand.len()).all(|drop| {
                    let sub: Vec<usize> = cand
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != drop)
                        .map(|(_, &x)| x)
                        .collect();
                    frequent.contains(sub.as_slice())
                });
                if !all_subsets_frequent {
                    continue;
                }
                let set = ItemSet::from_items(t, cand.iter().copied())?;
                let s = db.support(&set)?;
                if s >= minsup {
                    out.push((set, s));
                    next.push(cand);
                }
            }
        }
        level = next;
    }

    out.sort_by(|a, b| a.0.cmp_size_then_items(&b.0));
    Ok(out)
}

/// Mined itemsets as a constraint set with `n = |rows|`.
pub fn extract_constraints(
    db: &TransactionDatabase,
    minsup: u64,
    maxlen: usize,
) -> Result<ConstraintSet> {
    let mined = mine_frequent(db, minsup, maxlen)?;
    if mined.is_empty() {
        return Err(Error::NoConstraints(format!(
            "no itemset reaches support {minsup}"
        )));
    }
    let constraints = mined
        .into_iter()
        .map(|(itemset, support)| SupportConstraint { itemset, support })
        .collect();
    ConstraintSet::new(db.universe().clone(), db.len() as u64, constraints)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::itemset::ItemUniverse;
    use crate::report::deviation_report;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_db(seed: u64, n: usize, t: usize, density: f64) -> TransactionDatabase {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sets = (0..n)
            .map(|_| ItemSet::from_items(t, (0..t).filter(|_| rng.gen_bool(density))).unwrap())
            .collect();
        TransactionDatabase::from_itemsets(ItemUniverse::new(t).unwrap(), sets).unwrap()
    }

    /// Every nonempty itemset of size ≤ maxlen, supports by row scan.
    fn exhaustive(db: &TransactionDatabase, minsup: u64, maxlen: usize) -> Vec<(ItemSet, u64)> {
        let t = db.universe().size();
        let mut out = Vec::new();
        for mask in 1u64..(1 << t) {
            if mask.count_ones() as usize > maxlen {
                continue;
            }
            let set = ItemSet::from_mask(t, mask);
            let s = db
                .rows()
                .iter()
                .filter(|r| (0..t).all(|k| mask >> k & 1 == 0 || r.items.contains(k)))
                .count() as u64;
            if s >= minsup {
                out.push((set, s));
            }
        }
        out.sort_by(|a, b| a.0.cmp_size_then_items(&b.0));
        out
    }

    #[test]
    fn threshold_zero_returns_every_itemset() {
        let t = 2;
        let db = TransactionDatabase::from_itemsets(
            ItemUniverse::new(t).unwrap(),
            vec![ItemSet::from_items(t, [0]).unwrap()],
        )
        .unwrap();
        let got = mine_frequent(&db, 0, 2).unwrap();
        let shown: Vec<(String, u64)> = got.iter().map(|(s, c)| (s.to_string(), *c)).collect();
        assert_eq!(
            shown,
            vec![("0".into(), 1), ("1".into(), 0), ("0 1".into(), 0)]
        );
    }

    #[test]
    fn threshold_above_all_supports_is_empty() {
        let db = random_db(1, 10, 4, 0.5);
        assert!(mine_frequent(&db, 11, 4).unwrap().is_empty());
    }

    #[test]
    fn matches_exhaustive_enumeration() {
        let db = random_db(42, 15, 5, 0.5);
        assert_eq!(mine_frequent(&db, 4, 5).unwrap(), exhaustive(&db, 4, 5));
        for seed in 0..20 {
            let t = 2 + (seed as usize % 5);
            let db = random_db(seed, 12, t, 0.6);
            for minsup in [0, 1, 3, 6] {
                for maxlen in 1..=t {
                    assert_eq!(
                        mine_frequent(&db, minsup, maxlen).unwrap(),
                        exhaustive(&db, minsup, maxlen)
                    );
                }
            }
        }
    }

    #[test]
    fn extract_from_identical_rows() {
        let t = 3;
        let e1 = ItemSet::from_items(t, [0]).unwrap();
        let db = TransactionDatabase::from_itemsets(
            ItemUniverse::new(t).unwrap(),
            vec![e1.clone(); 10],
        )
        .unwrap();
        let cs = extract_constraints(&db, 5, 1).unwrap();
        assert_eq!(cs.n(), 10);
        assert_eq!(cs.constraints(), &[SupportConstraint { itemset: e1, support: 10 }]);
        assert!(matches!(
            extract_constraints(&db, 11, 1),
            Err(Error::NoConstraints(_))
        ));
    }

    #[test]
    fn extracted_constraints_hold_on_source() {
        for seed in 0..10 {
            let db = random_db(seed, 20, 6, 0.5);
            let cs = extract_constraints(&db, 3, 3).unwrap();
            let r = deviation_report(&db, &cs, None).unwrap();
            assert!(r.is_exact());
        }
    }

    #[test]
    fn anti_monotone_output() {
        let db = random_db(7, 30, 6, 0.55);
        let mined = mine_frequent(&db, 5, 4).unwrap();
        for (set, s) in &mined {
            for k in set.items() {
                let mut sub = set.clone();
                sub.remove(k);
                if !sub.is_empty() {
                    let (_, s_sub) = mined.iter().find(|(x, _)| *x == sub).expect("subset mined");
                    assert!(s_sub >= s);
                }
            }
        }
    }

    #[test]
    fn zero_maxlen_rejected() {
        let db = random_db(1, 3, 3, 0.5);
        assert!(mine_frequent(&db, 0, 0).is_err());
    }
}
