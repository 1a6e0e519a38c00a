//! Random operation sequences against a sorted-vector oracle, with the full
//! validator run after every operation.

use bucket_rbtree::{Config, Locator, OracleSet, Side, Tree, TreeError};
use proptest::prelude::*;
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
enum Op {
    Insert(i64),
    Delete(i64),
    Query(i64),
    /// Insert next to the `pick`-th live key, offset by `delta`.
    InsertNear { pick: usize, delta: i64, after: bool },
    DeleteAt(usize),
}

fn op(range: i64) -> impl Strategy<Value = Op> {
    prop_oneof![
        4 => (0..range).prop_map(Op::Insert),
        3 => (0..range).prop_map(Op::Delete),
        1 => (0..range).prop_map(Op::Query),
        2 => (any::<usize>(), -3i64..=3, any::<bool>())
            .prop_map(|(pick, delta, after)| Op::InsertNear { pick, delta, after }),
        1 => any::<usize>().prop_map(Op::DeleteAt),
    ]
}

/// What a positional insert must do, derived from the oracle's neighbors.
fn expected_near(keys: &[i64], i: usize, key: i64, after: bool) -> Result<(), TreeError> {
    let anchor = keys[i];
    let (lo, hi) = if after { (Some(anchor), keys.get(i + 1).copied()) } else { (i.checked_sub(1).map(|j| keys[j]), Some(anchor)) };
    if lo == Some(key) || hi == Some(key) {
        Err(TreeError::Duplicate)
    } else if lo.is_some_and(|lo| key < lo) || hi.is_some_and(|hi| key > hi) {
        Err(TreeError::OrderViolation)
    } else {
        Ok(())
    }
}

fn assert_consistent(tree: &Tree<i64>, oracle: &OracleSet<i64>, step: usize) {
    let report = tree.validate_all();
    assert!(report.ok, "step {step}: {:?}", report.violations);
    assert!(oracle.matches(tree), "step {step}: contents differ");
    // locator navigation agrees with iteration in both directions
    let mut fwd = Vec::new();
    let mut cur = tree.first();
    while let Some(l) = cur {
        fwd.push(*tree.get(l).unwrap());
        cur = tree.next(l);
    }
    assert_eq!(fwd, oracle.keys(), "step {step}: forward walk");
    let mut back = Vec::new();
    let mut cur = tree.last();
    while let Some(l) = cur {
        back.push(*tree.get(l).unwrap());
        cur = tree.prev(l);
    }
    back.reverse();
    assert_eq!(back, oracle.keys(), "step {step}: backward walk");
}

fn run(config: Config, ops: &[Op]) {
    let mut tree = Tree::with_config(config);
    let mut oracle = OracleSet::new();
    let mut held: BTreeMap<i64, Locator> = BTreeMap::new();
    for (step, op) in ops.iter().enumerate() {
        match *op {
            Op::Insert(k) => match tree.insert_key(k) {
                Ok(l) => {
                    assert!(oracle.insert(k));
                    held.insert(k, l);
                }
                Err(e) => {
                    assert_eq!(e, TreeError::Duplicate);
                    assert!(oracle.contains(&k));
                }
            },
            Op::Delete(k) => match tree.delete_key(&k) {
                Ok(got) => {
                    assert_eq!(got, k);
                    assert!(oracle.remove(&k));
                    let stale = held.remove(&k).unwrap();
                    assert_eq!(tree.get(stale), None);
                    assert_eq!(tree.delete(stale), Err(TreeError::StaleLocator));
                }
                Err(e) => {
                    assert_eq!(e, TreeError::NotFound);
                    assert!(!oracle.contains(&k));
                }
            },
            Op::Query(k) => {
                let res = tree.search(&k);
                assert_eq!(res.locator.is_some(), oracle.contains(&k));
                assert!(res.comparisons <= 3 * tree.h() as usize, "step {step}: {} comparisons", res.comparisons);
            }
            Op::InsertNear { pick, delta, after } => {
                if oracle.is_empty() {
                    continue;
                }
                let i = pick % oracle.len();
                let anchor = oracle.keys()[i];
                let key = anchor + delta;
                let want = expected_near(oracle.keys(), i, key, after);
                let loc = held[&anchor];
                let got = if after { tree.insert_after(loc, key) } else { tree.insert_before(loc, key) };
                assert_eq!(got.clone().map(|_| ()), want, "step {step}: key {key} near {anchor}");
                if let Ok(l) = got {
                    assert!(oracle.insert(key));
                    held.insert(key, l);
                }
            }
            Op::DeleteAt(pick) => {
                if oracle.is_empty() {
                    continue;
                }
                let k = oracle.keys()[pick % oracle.len()];
                let loc = held.remove(&k).unwrap();
                assert_eq!(tree.delete(loc), Ok(k));
                assert!(oracle.remove(&k));
                assert_eq!(tree.insert_after(loc, k + 1), Err(TreeError::StaleLocator));
            }
        }
        assert_consistent(&tree, &oracle, step);
    }
    // locators survive every split, merge and borrow that happened meanwhile
    for (k, l) in &held {
        assert_eq!(tree.get(*l), Some(k));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn matches_oracle_default_config(ops in prop::collection::vec(op(600), 1..900)) {
        run(Config::default(), &ops);
    }

    #[test]
    fn matches_oracle_dense_keys(ops in prop::collection::vec(op(120), 1..900)) {
        run(Config::default(), &ops);
    }

    #[test]
    fn matches_oracle_small_scan_budget(ops in prop::collection::vec(op(600), 1..900)) {
        run(Config { scan_budget: 3, ..Config::default() }, &ops);
    }

    #[test]
    fn matches_oracle_right_split_fixup(ops in prop::collection::vec(op(600), 1..900)) {
        run(Config { split_fixup_side: Side::Right, ..Config::default() }, &ops);
    }
}

#[test]
fn positional_insert_oracle() {
    let keys = [10, 20, 30];
    assert_eq!(expected_near(&keys, 0, 15, true), Ok(()));
    assert_eq!(expected_near(&keys, 0, 20, true), Err(TreeError::Duplicate));
    assert_eq!(expected_near(&keys, 0, 25, true), Err(TreeError::OrderViolation));
    assert_eq!(expected_near(&keys, 0, 5, false), Ok(()));
    assert_eq!(expected_near(&keys, 2, 99, true), Ok(()));
    assert_eq!(expected_near(&keys, 1, 9, false), Err(TreeError::OrderViolation));
}

#[test]
fn ascending_then_descending_bulk() {
    // long monotone runs stress the push-to-root and middle repair paths
    let mut tree = Tree::new();
    let mut oracle = OracleSet::new();
    for k in 0..20_000i64 {
        tree.insert_key(k).unwrap();
        oracle.insert(k);
    }
    assert!(tree.validate_all().ok);
    for k in (0..20_000i64).rev().filter(|k| k % 3 != 0) {
        tree.delete_key(&k).unwrap();
        oracle.remove(&k);
    }
    let report = tree.validate_all();
    assert!(report.ok, "{:?}", report.violations);
    assert!(oracle.matches(&tree));
    assert_eq!(tree.stats().split_size_violations + tree.stats().merge_size_violations, 0);
}

#[test]
fn insert_after_chain_from_a_single_locator() {
    let mut tree = Tree::new();
    let mut loc = tree.insert_key(0i64).unwrap();
    for k in 1..5_000 {
        loc = tree.insert_after(loc, k).unwrap();
    }
    assert_eq!(tree.keys(), (0..5_000).collect::<Vec<_>>());
    assert!(tree.validate_all().ok);
    assert!(tree.stats().max_push_steps <= tree.config().push_cap as u64);
}
