//! Disclosure auditing and scrubbing.
//!
//! A rule `(I, s_min, s_max)` says the support of `I` must not be inferable
//! to lie in `[s_min, s_max]`. [`audit`] tries to realize the constraints with
//! `support(I)` below or above that interval; if neither is possible within
//! a small deviation, the constraints effectively disclose it.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constraints::{ConstraintSet, ScrubMarker, SupportConstraint};
use crate::database::TransactionDatabase;
use crate::error::{Error, Result};
use crate::formulation::{build_augmented_lp, VarRef};
use crate::itemset::ItemSet;
use crate::lp::LpStatus;
use crate::pipeline::Pipeline;
use crate::rounding::{build_database, Relaxed};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivacyRule {
    pub itemset: ItemSet,
    pub s_min: u64,
    pub s_max: u64,
}

impl PrivacyRule {
    pub fn new(itemset: ItemSet, s_min: u64, s_max: u64) -> Result<Self> {
        if s_min > s_max {
            return Err(Error::invalid(format!("s_min {s_min} exceeds s_max {s_max}")));
        }
        Ok(Self { itemset, s_min, s_max })
    }
}

/// Outcome of one branch of the audit.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchOutcome {
    pub lo: u64,
    pub hi: u64,
    /// Optimum of the augmented relaxation (a lower bound for any database).
    pub lp_objective: f64,
    /// Σ_i |deviation_i| of the rounded database plus the distance of its
    /// support(I) from `[lo, hi]`; infinite when the relaxation is infeasible.
    pub confidence: f64,
    pub database: Option<TransactionDatabase>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditFinding {
    pub rule: PrivacyRule,
    /// Branch with support(I) < s_min; absent when s_min = 0.
    pub confidence_low_branch: Option<f64>,
    /// Branch with support(I) > s_max; absent when s_max = n.
    pub confidence_high_branch: Option<f64>,
    /// Minimum over present branches; infinite when none is present.
    pub confidence: f64,
    pub lp_bound_low_branch: Option<f64>,
    pub lp_bound_high_branch: Option<f64>,
    /// A database realizing the best branch with support(I) outside
    /// `[s_min, s_max]`, when the confidence is within the threshold.
    pub witness: Option<TransactionDatabase>,
    pub leaked: bool,
}

pub const DEFAULT_THRESHOLD: f64 = 1.0;

pub struct AuditConfig<'a> {
    pub threshold: f64,
    pub pipeline: Pipeline<'a>,
}

/// One augmented solve plus rounding, for `lo ≤ support(I) ≤ hi`.
pub fn audit_branch(cs: &ConstraintSet, itemset: &ItemSet, lo: u64, hi: u64, config: &AuditConfig) -> Result<BranchOutcome> {
    let (model, augmented) = build_augmented_lp(cs, itemset, lo, hi)?;
    let sol = config.pipeline.solve_model(&augmented, &model)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Ok(BranchOutcome {
                lo,
                hi,
                lp_objective: f64::INFINITY,
                confidence: f64::INFINITY,
                database: None,
            })
        }
        status => {
            return Err(Error::NotOptimal(format!("augmented relaxation reported {status:?}")))
        }
    }

    // Round against the branch's own point target for the extra constraint.
    let m = cs.m();
    let slack = Relaxed::new(&sol, &augmented)?.get(VarRef::Z { i: m });
    let target = (lo as f64 + slack).round().clamp(lo as f64, hi as f64) as u64;
    let mut constraints = augmented.constraints().to_vec();
    constraints[m] = SupportConstraint {
        itemset: itemset.clone(),
        support: target,
    };
    let retargeted = ConstraintSet::new_allow_duplicates(cs.universe().clone(), cs.n(), constraints);
    let rounded = config.pipeline.method.round(&sol, &retargeted, &config.pipeline.params)?;
    let db = build_database(&rounded, cs.universe())?;

    let base: u64 = (0..m).map(|i| rounded.z(i).unsigned_abs()).sum();
    let s = db.support(itemset)?;
    let outside = if s < lo {
        lo - s
    } else {
        s.saturating_sub(hi)
    };
    Ok(BranchOutcome {
        lo,
        hi,
        lp_objective: sol.objective,
        confidence: (base + outside) as f64,
        database: (outside == 0).then_some(db),
    })
}

pub fn audit_rule(cs: &ConstraintSet, rule: &PrivacyRule, config: &AuditConfig) -> Result<AuditFinding> {
    let t = cs.universe().size();
    if rule.itemset.universe_size() != t {
        return Err(Error::Dimension {
            expected: t,
            found: rule.itemset.universe_size(),
        });
    }
    if rule.s_min > rule.s_max || rule.s_max > cs.n() {
        return Err(Error::invalid(format!(
            "rule bounds [{}, {}] not within [0, {}]",
            rule.s_min,
            rule.s_max,
            cs.n()
        )));
    }
    let low = if rule.s_min > 0 {
        Some(audit_branch(cs, &rule.itemset, 0, rule.s_min - 1, config)?)
    } else {
        None
    };
    let high = if rule.s_max < cs.n() {
        Some(audit_branch(cs, &rule.itemset, rule.s_max + 1, cs.n(), config)?)
    } else {
        None
    };

    let best = [low.as_ref(), high.as_ref()]
        .into_iter()
        .flatten()
        .min_by(|a, b| a.confidence.total_cmp(&b.confidence));
    let confidence = best.map_or(f64::INFINITY, |b| b.confidence);
    let leaked = best.is_none() || confidence >= config.threshold;
    let witness = best
        .filter(|b| b.confidence <= config.threshold)
        .and_then(|b| b.database.clone());
    Ok(AuditFinding {
        rule: rule.clone(),
        confidence_low_branch: low.as_ref().map(|b| b.confidence),
        confidence_high_branch: high.as_ref().map(|b| b.confidence),
        confidence,
        lp_bound_low_branch: low.as_ref().map(|b| b.lp_objective),
        lp_bound_high_branch: high.as_ref().map(|b| b.lp_objective),
        witness,
        leaked,
    })
}

pub fn audit(cs: &ConstraintSet, rules: &[PrivacyRule], config: &AuditConfig) -> Result<Vec<AuditFinding>> {
    if !(config.threshold >= 0.0) {
        return Err(Error::invalid("audit threshold must be a nonnegative number"));
    }
    rules.iter().map(|r| audit_rule(cs, r, config)).collect()
}

/// For each rule in order, draws r uniformly from `[0, n]` and edits rows
/// until support(I) = r: adding I to random rows that lack it, or clearing a
/// random nonempty part of I from random rows that contain it. Returns the
/// scrubbed database and the drawn r values.
pub fn scrub_database(db: &TransactionDatabase, rules: &[PrivacyRule], seed: u64) -> Result<(TransactionDatabase, Vec<u64>)> {
    let t = db.universe().size();
    for r in rules {
        if r.itemset.universe_size() != t {
            return Err(Error::Dimension {
                expected: t,
                found: r.itemset.universe_size(),
            });
        }
        if r.itemset.is_empty() {
            return Err(Error::invalid("cannot scrub the support of the empty itemset"));
        }
    }
    let mut out = db.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = out.len() as u64;
    let mut drawn = Vec::with_capacity(rules.len());
    for rule in rules {
        let target = rng.gen_range(0..=n);
        drawn.push(target);
        let items: Vec<usize> = rule.itemset.items().collect();
        let rows = out.rows_mut();
        let (mut with, mut without): (Vec<usize>, Vec<usize>) =
            (0..rows.len()).partition(|&r| rule.itemset.is_subset_unchecked(&rows[r].items));
        let current = with.len() as u64;
        if current < target {
            without.shuffle(&mut rng);
            for &r in &without[..(target - current) as usize] {
                for &k in &items {
                    rows[r].items.insert(k);
                }
            }
        } else if current > target {
            with.shuffle(&mut rng);
            for &r in &with[..(current - target) as usize] {
                loop {
                    let part: Vec<usize> = items.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
                    if !part.is_empty() {
                        for k in part {
                            rows[r].items.remove(k);
                        }
                        break;
                    }
                }
            }
        }
    }
    Ok((out, drawn))
}

/// Randomizes the support of the constraint sharing the most items with
/// `sensitive` (lowest index on ties), then lowers supersets so that
/// I_a ⊆ I_b ⇒ s_a ≥ s_b. Refuses a set that has been scrubbed before.
pub fn scrub_constraints(cs: &ConstraintSet, sensitive: &ItemSet, seed: u64) -> Result<ConstraintSet> {
    if let Some(marker) = cs.scrub_marker() {
        return Err(Error::AlreadyScrubbed { seed: marker.seed });
    }
    let t = cs.universe().size();
    if sensitive.universe_size() != t {
        return Err(Error::Dimension {
            expected: t,
            found: sensitive.universe_size(),
        });
    }
    let mut constraints = cs.constraints().to_vec();
    let overlap = |c: &SupportConstraint| c.itemset.inner_product_unchecked(sensitive);
    let best = overlap(
        constraints
            .iter()
            .max_by_key(|c| overlap(c))
            .expect("a constraint set is nonempty"),
    );
    let chosen = constraints
        .iter()
        .position(|c| overlap(c) == best)
        .expect("maximum is attained");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    constraints[chosen].support = rng.gen_range(0..=cs.n());

    let mut by_size: Vec<usize> = (0..constraints.len()).collect();
    by_size.sort_by_key(|&i| constraints[i].itemset.cardinality());
    for &b in &by_size {
        for a in 0..constraints.len() {
            if a != b && constraints[a].itemset.is_subset_unchecked(&constraints[b].itemset) {
                constraints[b].support = constraints[b].support.min(constraints[a].support);
            }
        }
    }
    Ok(ConstraintSet::new(cs.universe().clone(), cs.n(), constraints)?.with_scrub_marker(Some(ScrubMarker {
        seed,
        sensitive: sensitive.clone(),
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::itemset::ItemUniverse;
    use crate::lp::DenseSimplex;
    use crate::rounding::DerandomX;

    fn set(t: usize, items: &[usize]) -> ItemSet {
        ItemSet::from_items(t, items.iter().copied()).unwrap()
    }

    fn cs(t: usize, n: u64, cons: &[(&[usize], u64)]) -> ConstraintSet {
        let constraints = cons
            .iter()
            .map(|(items, s)| SupportConstraint {
                itemset: set(t, items),
                support: *s,
            })
            .collect();
        ConstraintSet::new(ItemUniverse::new(t).unwrap(), n, constraints).unwrap()
    }

    fn config() -> AuditConfig<'static> {
        AuditConfig {
            threshold: DEFAULT_THRESHOLD,
            pipeline: Pipeline::new(&DenseSimplex, &DerandomX),
        }
    }

    #[test]
    fn no_rules_no_findings() {
        let c = cs(3, 6, &[(&[0], 3)]);
        assert!(audit(&c, &[], &config()).unwrap().is_empty());
    }

    #[test]
    fn forced_leak() {
        let c = cs(3, 6, &[(&[0], 6), (&[1], 6)]);
        let rule = PrivacyRule::new(set(3, &[0, 1]), 6, 6).unwrap();
        let f = audit_rule(&c, &rule, &config()).unwrap();
        assert_eq!(f.confidence_high_branch, None);
        assert!(f.confidence_low_branch.unwrap() >= 1.0);
        assert!(f.leaked);
    }

    #[test]
    fn unconstrained_item_does_not_leak() {
        let c = cs(3, 6, &[(&[0], 3)]);
        let rule = PrivacyRule::new(set(3, &[1]), 3, 3).unwrap();
        let f = audit_rule(&c, &rule, &config()).unwrap();
        assert_eq!(f.confidence, 0.0);
        assert!(!f.leaked);
        let w = f.witness.expect("witness");
        let s = w.support(&rule.itemset).unwrap();
        assert!(!(3..=3).contains(&s));
        assert_eq!(w.support(&set(3, &[0])).unwrap(), 3);
    }

    #[test]
    fn both_branches_absent_is_a_leak() {
        let c = cs(2, 4, &[(&[0], 2)]);
        let rule = PrivacyRule::new(set(2, &[1]), 0, 4).unwrap();
        let f = audit_rule(&c, &rule, &config()).unwrap();
        assert!(f.leaked);
        assert!(f.confidence.is_infinite());
    }

    #[test]
    fn rule_outside_universe_rejected() {
        let c = cs(2, 4, &[(&[0], 2)]);
        let rule = PrivacyRule::new(set(3, &[2]), 0, 1).unwrap();
        assert!(audit(&c, &[rule], &config()).is_err());
        assert!(PrivacyRule::new(set(2, &[1]), 3, 2).is_err());
    }

    fn db(t: usize, rows: &[&[usize]]) -> TransactionDatabase {
        TransactionDatabase::from_itemsets(
            ItemUniverse::new(t).unwrap(),
            rows.iter().map(|r| set(t, r)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn scrub_hits_drawn_supports() {
        let d = db(4, &[&[0, 1], &[0], &[1, 2], &[0, 1, 3], &[], &[2, 3], &[0, 1]]);
        let rules = vec![
            PrivacyRule::new(set(4, &[0, 1]), 0, 7).unwrap(),
            PrivacyRule::new(set(4, &[2]), 0, 7).unwrap(),
        ];
        for seed in 0..40 {
            let (out, drawn) = scrub_database(&d, &rules, seed).unwrap();
            assert_eq!(out.len(), d.len());
            for (r, &want) in rules.iter().zip(&drawn) {
                assert_eq!(out.support(&r.itemset).unwrap(), want);
            }
            assert_eq!(scrub_database(&d, &rules, seed).unwrap().1, drawn);
        }
    }

    #[test]
    fn scrub_to_zero_touches_every_container() {
        let d = db(2, &[&[0], &[0], &[1], &[0, 1]]);
        let rule = PrivacyRule::new(set(2, &[0]), 0, 4).unwrap();
        let seed = (0..1000)
            .find(|&s| scrub_database(&d, &[rule.clone()], s).unwrap().1[0] == 0)
            .unwrap();
        let (out, _) = scrub_database(&d, &[rule.clone()], seed).unwrap();
        assert_eq!(out.support(&rule.itemset).unwrap(), 0);
        for (a, b) in d.rows().iter().zip(out.rows()) {
            assert_eq!(a.items.contains(0), a.items != b.items);
        }
    }

    #[test]
    fn scrub_with_current_support_is_identity() {
        let d = db(2, &[&[0], &[1], &[0, 1]]);
        let rule = PrivacyRule::new(set(2, &[0]), 0, 3).unwrap();
        let seed = (0..1000)
            .find(|&s| scrub_database(&d, &[rule.clone()], s).unwrap().1[0] == 2)
            .unwrap();
        assert_eq!(scrub_database(&d, &[rule], seed).unwrap().0, d);
    }

    #[test]
    fn single_constraint_scrub() {
        let c = cs(2, 9, &[(&[0], 4)]);
        let s = scrub_constraints(&c, &set(2, &[1]), 3).unwrap();
        assert!(s.target(0) <= 9);
        assert_eq!(s.scrub_marker().unwrap().seed, 3);
    }

    #[test]
    fn repair_lowers_superset() {
        let c = cs(2, 9, &[(&[0], 5), (&[0, 1], 5)]);
        // Find a seed whose draw for {e1,e2} (max overlap with {e2}) exceeds 5.
        let seed = (0..1000)
            .find(|&s| {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                rng.gen_range(0..=9u64) == 7
            })
            .unwrap();
        let s = scrub_constraints(&c, &set(2, &[1]), seed).unwrap();
        assert_eq!(s.target(0), 5);
        assert_eq!(s.target(1), 5);
    }

    #[test]
    fn second_scrub_refused() {
        let c = cs(3, 9, &[(&[0], 5), (&[0, 1], 3), (&[2], 2)]);
        let once = scrub_constraints(&c, &set(3, &[0]), 1).unwrap();
        assert_eq!(
            scrub_constraints(&once, &set(3, &[0]), 2),
            Err(Error::AlreadyScrubbed { seed: 1 })
        );
    }
}
