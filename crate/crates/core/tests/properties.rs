use itemsynth::formats::{read_constraints, read_database, read_report, write_constraints, write_database, write_report};
use itemsynth::formulation::build_relaxed_lp;
use itemsynth::lp::{DenseSimplex, LpSolver, SolverConfig};
use itemsynth::miner::{extract_constraints, mine_frequent};
use itemsynth::oracle::{brute_force_optimum, enumerate_count_vectors, OracleModel};
use itemsynth::pipeline::Pipeline;
use itemsynth::privacy::{audit_rule, scrub_constraints, AuditConfig, PrivacyRule, DEFAULT_THRESHOLD};
use itemsynth::rounding::{balance_counts, prob_subset, DerandomX, ProbabilityContext, RoundingParams, RoundingRegistry};
use itemsynth::{deviation_report, ConstraintSet, ItemSet, ItemUniverse, SupportConstraint, TransactionDatabase};
use proptest::prelude::*;

fn mask_set(t: usize, mask: u64) -> ItemSet {
    ItemSet::from_mask(t, mask)
}

fn database(t: usize, masks: &[u64]) -> TransactionDatabase {
    let rows = masks.iter().map(|&m| mask_set(t, m)).collect();
    TransactionDatabase::from_itemsets(ItemUniverse::new(t).unwrap(), rows).unwrap()
}

fn support_by_mask(masks: &[u64], want: u64) -> u64 {
    masks.iter().filter(|&&m| m & want == want).count() as u64
}

/// Up to three distinct nonempty itemsets over 3 items, n = 6.
fn tiny_instance() -> impl Strategy<Value = ConstraintSet> {
    (proptest::sample::subsequence((1u64..8).collect::<Vec<_>>(), 1..=3), proptest::collection::vec(0u64..=6, 3))
        .prop_map(|(masks, supports)| {
            let constraints = masks
                .iter()
                .zip(supports)
                .map(|(&m, s)| SupportConstraint {
                    itemset: mask_set(3, m),
                    support: s,
                })
                .collect();
            ConstraintSet::new(ItemUniverse::new(3).unwrap(), 6, constraints).unwrap()
        })
}

proptest! {
    #[test]
    fn inner_product_laws(t in 1usize..=16, a in any::<u64>(), b in any::<u64>()) {
        let keep = (1u64 << t) - 1;
        let (a, b) = (mask_set(t, a & keep), mask_set(t, b & keep));
        let ab = a.inner_product(&b).unwrap();
        prop_assert_eq!(ab, b.inner_product(&a).unwrap());
        prop_assert!(ab <= a.cardinality().min(b.cardinality()));
        prop_assert_eq!(ab == a.cardinality(), a.is_subset(&b).unwrap());
    }

    #[test]
    fn support_is_antitone(t in 1usize..=6, rows in proptest::collection::vec(any::<u64>(), 0..30), i in any::<u64>(), extra in any::<u64>()) {
        let keep = (1u64 << t) - 1;
        let rows: Vec<u64> = rows.iter().map(|r| r & keep).collect();
        let db = database(t, &rows);
        let small = i & keep;
        let big = small | (extra & keep);
        let s_small = db.support(&mask_set(t, small)).unwrap();
        let s_big = db.support(&mask_set(t, big)).unwrap();
        prop_assert!(s_small >= s_big);
        prop_assert_eq!(s_small, support_by_mask(&rows, small));
        prop_assert_eq!(db.support(&mask_set(t, 0)).unwrap(), rows.len() as u64);
    }

    #[test]
    fn mining_matches_enumeration(t in 1usize..=6, rows in proptest::collection::vec(any::<u64>(), 1..25), minsup in 1u64..6, maxlen in 1usize..=4) {
        let keep = (1u64 << t) - 1;
        let rows: Vec<u64> = rows.iter().map(|r| r & keep).collect();
        let db = database(t, &rows);
        let mined = mine_frequent(&db, minsup, maxlen).unwrap();
        let mut expected: Vec<(u64, u64)> = (1..=keep)
            .filter(|m| m.count_ones() as usize <= maxlen)
            .map(|m| (m, support_by_mask(&rows, m)))
            .filter(|&(_, s)| s >= minsup)
            .collect();
        let mut got: Vec<(u64, u64)> = mined
            .iter()
            .map(|(set, s)| (set.items().fold(0, |a, k| a | 1 << k), *s))
            .collect();
        expected.sort();
        got.sort();
        prop_assert_eq!(&got, &expected);
        // Every nonempty subset of a mined itemset is at least as frequent.
        for &(m, s) in &got {
            let mut sub = (m - 1) & m;
            while sub > 0 {
                prop_assert!(support_by_mask(&rows, sub) >= s);
                sub = (sub - 1) & m;
            }
        }
        if !got.is_empty() {
            let cs = extract_constraints(&db, minsup, maxlen).unwrap();
            prop_assert!(deviation_report(&db, &cs, None).unwrap().is_exact());
        }
    }

    #[test]
    fn files_round_trip(t in 1usize..=10, rows in proptest::collection::vec(any::<u64>(), 1..20)) {
        let keep = (1u64 << t) - 1;
        let rows: Vec<u64> = rows.iter().map(|r| r & keep).collect();
        let db = database(t, &rows);
        let text = write_database(&db);
        let back = read_database(&text, Some(t)).unwrap();
        prop_assert_eq!(&back, &db);
        prop_assert_eq!(write_database(&back), text);
        if let Ok(cs) = extract_constraints(&db, 1, 2) {
            let ctext = write_constraints(&cs);
            let cback = read_constraints(&ctext).unwrap();
            prop_assert_eq!(write_constraints(&cback), ctext);
            let report = deviation_report(&db, &cs, Some(0.0)).unwrap();
            prop_assert_eq!(read_report(&write_report(&report), t).unwrap(), report);
        }
    }

    #[test]
    fn balanced_counts_sum_to_n(xs in proptest::collection::vec(0.0f64..20.0, 1..8), seed in any::<u64>()) {
        let n = xs.iter().sum::<f64>().round() as u64;
        let counts = balance_counts(&xs, n, seed).unwrap();
        prop_assert_eq!(counts.iter().sum::<u64>(), n);
        prop_assert_eq!(&counts, &balance_counts(&xs, n, seed).unwrap());
        let drift: f64 = xs.iter().zip(&counts).map(|(&x, &c)| (x - c as f64).abs()).sum();
        prop_assert!(drift <= xs.len() as f64);
    }

    #[test]
    fn scrubbed_constraints_are_monotone(t in 2usize..=6, rows in proptest::collection::vec(any::<u64>(), 5..25), sensitive in 1u64..64, seed in any::<u64>()) {
        let keep = (1u64 << t) - 1;
        let rows: Vec<u64> = rows.iter().map(|r| r & keep).collect();
        let db = database(t, &rows);
        let sensitive = mask_set(t, (sensitive & keep).max(1));
        if let Ok(cs) = extract_constraints(&db, 2, 3) {
            let out = scrub_constraints(&cs, &sensitive, seed).unwrap();
            for a in out.constraints() {
                for b in out.constraints() {
                    if a.itemset.is_subset(&b.itemset).unwrap() {
                        prop_assert!(a.support >= b.support);
                    }
                }
            }
            prop_assert!(scrub_constraints(&out, &sensitive, seed).is_err());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relaxation_is_deterministic_and_below_oracle(cs in tiny_instance()) {
        let model = build_relaxed_lp(&cs);
        let a = DenseSimplex.solve(&model, &SolverConfig::default()).unwrap();
        let b = DenseSimplex.solve(&model, &SolverConfig::default()).unwrap();
        prop_assert_eq!(a.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        let oracle = brute_force_optimum(&cs, OracleModel::Overshoot).unwrap().optimum as f64;
        prop_assert!(a.objective <= oracle + 1e-6);
        let tightened = Pipeline::new(&DenseSimplex, &DerandomX).solve(&cs).unwrap();
        prop_assert!(a.objective <= tightened.objective + 1e-6);
        prop_assert!(tightened.objective <= oracle + 1e-6);
    }

    #[test]
    fn rounding_methods_are_well_formed(cs in tiny_instance(), seed in any::<u64>()) {
        let registry = RoundingRegistry::default();
        let mut p = Pipeline::new(&DenseSimplex, &DerandomX);
        p.params = RoundingParams::with_seed(seed);
        let lp = p.solve(&cs).unwrap();
        let oracle = brute_force_optimum(&cs, OracleModel::Overshoot).unwrap().optimum;
        for method in registry.iter() {
            let a = method.round(&lp, &cs, &p.params).unwrap();
            prop_assert_eq!(&a, &method.round(&lp, &cs, &p.params).unwrap());
            prop_assert_eq!(a.counts().iter().sum::<u64>(), cs.n());
            prop_assert_eq!(a.itemsets().len(), cs.m() + 1);
            let s = Pipeline { method, ..p }.round(&cs, lp.clone()).unwrap();
            prop_assert_eq!(s.database.len() as u64, cs.n());
            prop_assert_eq!(s.report.sum_abs_deviation as f64, a.realized_objective());
            if a.deviations().iter().all(|&d| d >= 0) {
                prop_assert!(oracle as i64 <= a.signed_objective());
            }
        }
    }

    #[test]
    fn subset_probabilities_are_probabilities(cs in tiny_instance(), refine in 0usize..3, fixes in proptest::collection::vec((0usize..3, 0usize..4, any::<bool>()), 0..6)) {
        let lp = DenseSimplex.solve(&build_relaxed_lp(&cs), &SolverConfig::default()).unwrap();
        let r = itemsynth::rounding::Relaxed::new(&lp, &cs).unwrap();
        let counts = balance_counts(&r.big_x_all(), cs.n(), 0).unwrap();
        let mut ctx = ProbabilityContext::from_lp(&lp, &cs, counts, refine).unwrap();
        for (i, j, v) in fixes {
            let (i, j) = (i % cs.m(), j % (cs.m() + 1));
            if ctx.fixed(i, j).is_none() {
                ctx.fix(i, j, v);
            }
        }
        for i in 0..cs.m() {
            for j in 0..cs.m() + 1 {
                let p = prob_subset(&ctx, i, j);
                prop_assert!((0.0..=1.0).contains(&p));
                if cs.itemset(i).is_subset(ctx.covered(j)).unwrap() {
                    prop_assert_eq!(p, 1.0);
                }
            }
        }
    }

    /// Leaked exactly when no exact database puts support(I) outside
    /// [s_min, s_max]. One direction is forced (every branch then pays at
    /// least 1); the other depends on rounding finding an exact database.
    #[test]
    fn audit_agrees_with_oracle(cs in tiny_instance(), rule_mask in 1u64..8, lo in 0u64..=6, width in 0u64..=6) {
        let hi = (lo + width).min(6);
        let rule = PrivacyRule::new(mask_set(3, rule_mask), lo, hi).unwrap();
        let masks: Vec<u64> = cs.constraints().iter().map(|c| c.itemset.items().fold(0, |a, k| a | 1 << k)).collect();
        let mut outside = false;
        enumerate_count_vectors(8, 6, |counts| {
            let supp = |want: u64| -> u64 { (0..8u64).filter(|tau| tau & want == want).map(|tau| counts[tau as usize]).sum() };
            let exact = masks.iter().zip(cs.constraints()).all(|(&m, c)| supp(m) == c.support);
            let s = supp(rule_mask);
            outside |= exact && (s < lo || s > hi);
        });
        let config = AuditConfig { threshold: DEFAULT_THRESHOLD, pipeline: Pipeline::new(&DenseSimplex, &DerandomX) };
        let f = audit_rule(&cs, &rule, &config).unwrap();
        prop_assert_eq!(f.leaked, !outside);
        if let Some(w) = &f.witness {
            let s = w.support(&rule.itemset).unwrap();
            prop_assert!(s < lo || s > hi);
        }
        prop_assert_eq!(&f, &audit_rule(&cs, &rule, &config).unwrap());
    }
}

/// With disjoint itemsets, a candidate contains I_i exactly when its own
/// x̄_{i,j} was drawn, so the signed expectation is exact and the sample
/// mean of randomized roundings must agree with it.
#[test]
fn expected_objective_matches_monte_carlo() {
    use itemsynth::formulation::{Layout, VarRef};
    use itemsynth::lp::{LpSolution, LpStatus};
    use itemsynth::rounding::{expected_objective, randomized_round_x};

    let t = 6;
    let constraints = [(0b000011u64, 5u64), (0b001100, 9), (0b010000, 4)]
        .iter()
        .map(|&(m, s)| SupportConstraint {
            itemset: mask_set(t, m),
            support: s,
        })
        .collect();
    let cs = ConstraintSet::new(ItemUniverse::new(t).unwrap(), 12, constraints).unwrap();
    let layout = Layout::new(3, t);
    let mut values = vec![0.0; layout.column_count()];
    // Integral column sizes keep X̄ fixed across seeds.
    for (j, big) in [(0, 7.0), (1, 5.0)] {
        values[layout.index(VarRef::X { j })] = big;
    }
    for (i, j, x) in [(0, 0, 2.1), (0, 1, 3.3), (1, 0, 6.2), (1, 1, 1.4), (2, 0, 0.9), (2, 1, 2.5)] {
        values[layout.index(VarRef::XX { i, j })] = x;
    }
    let lp = LpSolution {
        status: LpStatus::Optimal,
        values,
        objective: 0.0,
        iterations: 0,
    };
    let ctx = ProbabilityContext::from_lp(&lp, &cs, vec![7, 5, 0, 0], 2).unwrap();
    let expected = expected_objective(&ctx, &cs);

    let runs = 100_000u64;
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for seed in 0..runs {
        let z = randomized_round_x(&lp, &cs, seed).unwrap().signed_objective() as f64;
        sum += z;
        sum_sq += z * z;
    }
    let mean = sum / runs as f64;
    let var = sum_sq / runs as f64 - mean * mean;
    let se = (var / runs as f64).sqrt();
    assert!((mean - expected).abs() <= 2.0 * se, "mean {mean}, expected {expected}, se {se}");
}
