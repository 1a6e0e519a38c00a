//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line to
//! stderr (bypassing the harness capture) and then asserts it.
//!
//! The expensive runs are shared per scan budget through a `OnceLock`, so
//! criterion 5 reuses the exact checks of criteria 1–4 with budget 3.

use bucket_rbtree::FixupCase::{self, *};
use bucket_rbtree::{Config, Layout, Tree};
use rbt_bench::{generate_workload, run_ops, Mix, Pattern, RunOptions, RunReport, ValidateMode, WorkloadSpec};
use std::io::Write as _;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

const SEED: u64 = 0;
const MIX: Mix = Mix { insert: 2, delete: 1, query: 1 };
const KEY_RANGE: (i64, i64) = (0, 1_000_000);

const ORACLE_OPS: usize = 100_000;
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(10);
const INVARIANT_OPS: usize = 10_000;
const LONG_OPS: usize = 1_000_000;
const LONG_VALIDATE_EVERY: usize = 1_000;
const SCALES: [usize; 4] = [1_000, 10_000, 100_000, 1_000_000];
/// Ceiling measured with the small scan budget and frozen as a regression bound.
const FROZEN_MAX_WORK: u64 = 33;
const PUSH_CAP: u64 = 11;
const MIN_H_TRANSITIONS: u64 = 4;
const MIN_INSERTS_BEFORE_SPLIT: u64 = 11;
const MIN_DELETES_BEFORE_MERGE: u64 = 7;
const QUERY_FACTOR: u64 = 3;

const PATTERNS: [Pattern; 3] = [Pattern::Uniform, Pattern::GrowShrink, Pattern::Sawtooth];

struct Suite {
    budget: usize,
    oracle: RunReport,
    oracle_time: Duration,
    /// Validated after every operation, one per pattern.
    every: Vec<(Pattern, RunReport)>,
    /// 10^6 ops validated every 10^3, one per pattern.
    long: Vec<(Pattern, RunReport)>,
    /// max_work_per_op per entry of `SCALES`.
    scaling: Vec<u64>,
}

impl Suite {
    fn all_runs(&self) -> impl Iterator<Item = &RunReport> {
        std::iter::once(&self.oracle)
            .chain(self.every.iter().map(|(_, r)| r))
            .chain(self.long.iter().map(|(_, r)| r))
    }

    fn long_run(&self, p: Pattern) -> &RunReport {
        &self.long.iter().find(|(q, _)| *q == p).unwrap().1
    }
}

fn workload(pattern: Pattern, count: usize) -> Vec<rbt_bench::TraceOp> {
    generate_workload(&WorkloadSpec { seed: SEED, count, mix: MIX, lo: KEY_RANGE.0, hi: KEY_RANGE.1, pattern })
}

fn run(budget: usize, pattern: Pattern, count: usize, validate: ValidateMode, oracle: bool) -> RunReport {
    let opts = RunOptions { scan_fixups: budget, validate, oracle, ..RunOptions::default() };
    run_ops(&workload(pattern, count), &opts).expect("run completes without contract errors")
}

fn build(budget: usize) -> Suite {
    let ops = workload(Pattern::Uniform, ORACLE_OPS);
    let opts = RunOptions { scan_fixups: budget, oracle: true, ..RunOptions::default() };
    let start = Instant::now();
    let oracle = run_ops(&ops, &opts).unwrap();
    let oracle_time = start.elapsed();
    let every = PATTERNS.iter().map(|&p| (p, run(budget, p, INVARIANT_OPS, ValidateMode::Every, true))).collect();
    let long: Vec<_> = PATTERNS
        .iter()
        .map(|&p| (p, run(budget, p, LONG_OPS, ValidateMode::Periodic(LONG_VALIDATE_EVERY), false)))
        .collect();
    let scaling = SCALES
        .iter()
        .map(|&n| {
            if n == LONG_OPS {
                long[0].1.max_work_per_op
            } else {
                run(budget, Pattern::Uniform, n, ValidateMode::None, false).max_work_per_op
            }
        })
        .collect();
    Suite { budget, oracle, oracle_time, every, long, scaling }
}

fn suite(budget: usize) -> &'static Suite {
    static FULL: OnceLock<Suite> = OnceLock::new();
    static APPENDIX: OnceLock<Suite> = OnceLock::new();
    match budget {
        11 => FULL.get_or_init(|| build(11)),
        3 => APPENDIX.get_or_init(|| build(3)),
        _ => unreachable!(),
    }
}

fn report(n: u32, verdict: (bool, String)) {
    let (ok, detail) = verdict;
    let status = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n}: {status} — {detail}");
    assert!(ok, "criterion {n}: {detail}");
}

fn check_oracle(s: &Suite) -> (bool, String) {
    let r = &s.oracle;
    let ok = r.oracle_mismatches == 0 && r.queries > 0 && s.oracle_time < ORACLE_TIME_LIMIT;
    (ok, format!(
        "budget {}: {} ops, {} queries, {} mismatches, {:.2?} (limit {:?})",
        s.budget, r.ops_total, r.queries, r.oracle_mismatches, s.oracle_time, ORACLE_TIME_LIMIT
    ))
}

fn check_invariants(s: &Suite) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, runs) in [("every op", &s.every), ("every 10^3", &s.long)] {
        for (p, r) in runs.iter() {
            let expected_checks = match label {
                "every op" => r.ops_total,
                _ => r.ops_total / LONG_VALIDATE_EVERY as u64,
            };
            ok &= r.validation_failures == 0 && r.oracle_mismatches == 0 && r.validations_run == expected_checks;
            parts.push(format!("{p}/{label}: {}/{} failed", r.validation_failures, r.validations_run));
            if let Some(rule) = &r.first_failure_rule {
                parts.push(format!("first failure `{rule}` at op {}", r.first_failure.unwrap()));
            }
        }
    }
    (ok, format!("budget {}: {}", s.budget, parts.join(", ")))
}

fn check_constant_work(s: &Suite) -> (bool, String) {
    let equal = s.scaling.windows(2).all(|w| w[0] == w[1]);
    let non_increasing = s.scaling.windows(2).all(|w| w[1] <= w[0]);
    let mut ok = equal && non_increasing;
    let mut detail = format!("budget {}: max_work_per_op at 10^3..10^6 = {:?}", s.budget, s.scaling);
    if s.budget == 3 {
        ok &= s.scaling.iter().all(|&w| w <= FROZEN_MAX_WORK);
        detail += &format!(" (frozen bound {FROZEN_MAX_WORK})");
    }
    (ok, detail)
}

fn check_push_cap(s: &Suite) -> (bool, String) {
    let max_push = s.all_runs().map(|r| r.max_push_steps).max().unwrap();
    let exceeded: u64 = s.all_runs().map(|r| r.push_cap_exceeded).sum();
    let transitions = s.long_run(Pattern::GrowShrink).h_changes;
    let ok = max_push <= PUSH_CAP && exceeded == 0 && transitions >= MIN_H_TRANSITIONS;
    (ok, format!(
        "budget {}: max_push_steps {max_push} (cap {PUSH_CAP}), grow-shrink H transitions {transitions} (need ≥ {MIN_H_TRANSITIONS})",
        s.budget
    ))
}

#[test]
fn criterion_1_oracle_equivalence() {
    report(1, check_oracle(suite(11)));
}

#[test]
fn criterion_2_invariant_suite() {
    report(2, check_invariants(suite(11)));
}

#[test]
fn criterion_3_constant_update_work() {
    report(3, check_constant_work(suite(11)));
}

#[test]
fn criterion_4_push_to_root_cap() {
    report(4, check_push_cap(suite(11)));
}

#[test]
fn criterion_5_small_scan_budget() {
    let s = suite(3);
    let checks = [check_oracle(s), check_invariants(s), check_constant_work(s), check_push_cap(s)];
    let mut ok = checks.iter().all(|c| c.0);
    let mut detail: Vec<String> = checks.iter().enumerate().map(|(i, c)| format!("[{}] {}", i + 1, c.1)).collect();
    // spacing between H changes and the next split or merge of a bucket
    for budget in [11, 3] {
        let gs = suite(budget).long_run(Pattern::GrowShrink);
        let ins = gs.min_inserts_before_split;
        let del = gs.min_deletes_before_merge;
        ok &= gs.h_up_events > 0 && gs.h_down_events > 0;
        ok &= ins.is_some_and(|v| v >= MIN_INSERTS_BEFORE_SPLIT) && del.is_some_and(|v| v >= MIN_DELETES_BEFORE_MERGE);
        detail.push(format!(
            "budget {budget}: min inserts before split {ins:?} (need ≥ {MIN_INSERTS_BEFORE_SPLIT}), min deletes before merge {del:?} (need ≥ {MIN_DELETES_BEFORE_MERGE})"
        ));
    }
    report(5, (ok, detail.join("; ")));
}

#[test]
fn criterion_6_split_merge_sizes() {
    let mut ok = true;
    let mut detail = Vec::new();
    for budget in [11, 3] {
        let s = suite(budget);
        let splits: u64 = s.all_runs().map(|r| r.splits).sum();
        let merges: u64 = s.all_runs().map(|r| r.merges).sum();
        let bad_split: u64 = s.all_runs().map(|r| r.split_size_violations).sum();
        let bad_merge: u64 = s.all_runs().map(|r| r.merge_size_violations).sum();
        ok &= splits > 0 && merges > 0 && bad_split == 0 && bad_merge == 0;
        detail.push(format!(
            "budget {budget}: {bad_split}/{splits} splits outside [H-5, H], {bad_merge}/{merges} merges outside [H, H+6)"
        ));
    }
    report(6, (ok, detail.join("; ")));
}

#[test]
fn criterion_7_query_cost() {
    let mut ok = true;
    let mut detail = Vec::new();
    for budget in [11, 3] {
        let r = &suite(budget).oracle;
        ok &= r.queries > 0 && r.query_bound_violations == 0;
        detail.push(format!(
            "budget {budget}: {} of {} queries above {QUERY_FACTOR}·H (max {} comparisons, final H {})",
            r.query_bound_violations, r.queries, r.max_query_comparisons, r.h_final
        ));
    }
    report(7, (ok, detail.join("; ")));
}

fn l() -> Layout {
    Layout::leaf(1)
}

fn b(x: Layout, y: Layout) -> Layout {
    Layout::black(x, y)
}

fn r(x: Layout, y: Layout) -> Layout {
    Layout::red(x, y)
}

fn tall() -> Layout {
    b(b(l(), l()), b(l(), l()))
}

/// (case, before, path to the violation, double-red?, after)
fn case_table() -> Vec<(FixupCase, Layout, &'static str, bool, Layout)> {
    vec![
        (DoubleRed1, b(r(r(l(), l()), l()), r(l(), l())), "LL", true, b(b(r(l(), l()), l()), b(l(), l()))),
        (
            DoubleRed1_1,
            b(b(r(r(l(), l()), l()), r(l(), l())).db(), tall()),
            "LLL",
            true,
            b(b(b(r(l(), l()), l()), b(l(), l())), tall()),
        ),
        (DoubleRed2, b(r(l(), r(l(), l())), l()), "LR", true, b(r(l(), l()), r(l(), l()))),
        (DoubleRed3, b(r(r(l(), l()), l()), l()), "LL", true, b(r(l(), l()), r(l(), l()))),
        (
            DoubleRed3_1,
            b(b(r(r(l(), l()), l()), l()).db(), tall()),
            "LLL",
            true,
            b(b(r(l(), l()), r(l(), l())).db(), tall()),
        ),
        (DoublyBlack1, b(l().db(), r(b(l(), l()), b(l(), l()))), "L", false, b(b(l(), r(l(), l())), b(l(), l()))),
        (
            DoublyBlack1_1,
            b(r(l().db(), r(b(l(), l()), b(l(), l()))), b(l(), l())),
            "LL",
            false,
            b(r(b(l(), r(l(), l())), b(l(), l())), b(l(), l())),
        ),
        (DoublyBlack1_2a, b(r(l().db(), l().db()), b(l(), l())), "LL", false, b(b(l(), l()), b(l(), l()))),
        (DoublyBlack1_2b, b(b(l().db(), l().db()), tall()), "LL", false, b(b(l(), l()).db(), tall())),
        (DoublyBlack2a, b(r(l().db(), b(l(), l())), b(l(), l())), "LL", false, b(b(l(), r(l(), l())), b(l(), l()))),
        (DoublyBlack2b, b(b(l().db(), b(l(), l())), tall()), "LL", false, b(b(l(), r(l(), l())).db(), tall())),
        (DoublyBlack3, b(l().db(), b(r(l(), l()), l())), "L", false, b(b(l(), l()), b(l(), l()))),
        (DoublyBlack4, b(l().db(), b(l(), r(l(), l()))), "L", false, b(b(l(), l()), b(l(), l()))),
    ]
}

#[test]
fn criterion_8_case_table() {
    let mut failed = Vec::new();
    let table = case_table();
    for (case, before, path, double_red, after) in &table {
        for mirrored in [false, true] {
            let (before, after) = if mirrored { (before.mirror(), after.mirror()) } else { (before.clone(), after.clone()) };
            let path: String = path.chars().map(|c| if mirrored == (c == 'L') { 'R' } else { 'L' }).collect();
            let mut tree = Tree::from_layout(&before, Config::default());
            let at = tree.node_at(&path).unwrap();
            let out = if *double_red {
                tree.double_red_fixup(at.internal().unwrap())
            } else {
                tree.doubly_black_fixup(at)
            };
            let expected = Tree::from_layout(&after, Config::default()).render();
            let ok = out.is_ok_and(|o| o.cases().next() == Some(*case)) && tree.render() == expected;
            if !ok {
                failed.push(format!("{case:?}{}", if mirrored { " (mirrored)" } else { "" }));
            }
        }
    }
    let detail = format!("{} cases × 2 orientations, failed: {:?}", table.len(), failed);
    report(8, (failed.is_empty(), detail));
}
