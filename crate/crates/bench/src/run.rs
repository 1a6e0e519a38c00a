//! Applies a trace to a tree, optionally shadowed by the brute-force oracle,
//! and collects the instrumentation report.

use crate::trace::TraceOp;
use crate::BenchError;
use bucket_rbtree::{Config, OracleSet, Tree, TreeError};
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidateMode {
    None,
    Every,
    Periodic(usize),
}

impl FromStr for ValidateMode {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "none" => Ok(ValidateMode::None),
            "every" => Ok(ValidateMode::Every),
            _ => match s.strip_prefix("periodic:").map(str::parse::<usize>) {
                Some(Ok(k)) if k > 0 => Ok(ValidateMode::Periodic(k)),
                _ => Err(BenchError::Usage(format!("bad validation mode `{s}` (none, every, periodic:K)"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub scan_fixups: usize,
    pub hmin: u32,
    pub validate: ValidateMode,
    pub oracle: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { scan_fixups: 11, hmin: bucket_rbtree::H_MIN_DEFAULT, validate: ValidateMode::None, oracle: false }
    }
}

/// Metrics of one run. Everything except `wall_time_ms` is a deterministic
/// function of the trace and the options.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunReport {
    pub ops_total: u64,
    pub updates: u64,
    pub max_work_per_op: u64,
    pub p99_work_per_op: u64,
    pub rotations_total: u64,
    pub max_push_steps: u64,
    pub height_final: u64,
    pub n_final: u64,
    pub h_final: u64,
    pub size_final: u64,
    pub validation_failures: u64,
    pub validations_run: u64,
    pub oracle_mismatches: u64,
    pub queries: u64,
    pub query_hits: u64,
    pub max_query_comparisons: u64,
    /// Queries whose comparison count exceeded `3 * H` at query time.
    pub query_bound_violations: u64,
    pub splits: u64,
    pub merges: u64,
    pub borrows: u64,
    pub split_size_violations: u64,
    pub merge_size_violations: u64,
    pub push_cap_exceeded: u64,
    pub h_changes: u64,
    pub h_up_events: u64,
    pub h_down_events: u64,
    pub min_inserts_before_split: Option<u64>,
    pub min_deletes_before_merge: Option<u64>,
    pub consolidation_fallbacks: u64,
    pub middle_repair_fallbacks: u64,
    /// Zero-based index of the first operation after which validation or the
    /// oracle comparison failed.
    pub first_failure: Option<u64>,
    pub first_failure_rule: Option<String>,
    pub wall_time_ms: u64,
}

impl RunReport {
    /// Whether any check failed.
    pub fn failed(&self) -> bool {
        self.validation_failures > 0 || self.oracle_mismatches > 0
    }

    /// `metric=value` lines in a fixed order. Absent optional values print
    /// as `none`.
    pub fn to_lines(&self) -> String {
        let opt = |v: Option<u64>| v.map_or_else(|| "none".to_string(), |v| v.to_string());
        let rows: Vec<(&str, String)> = vec![
            ("ops_total", self.ops_total.to_string()),
            ("max_work_per_op", self.max_work_per_op.to_string()),
            ("p99_work_per_op", self.p99_work_per_op.to_string()),
            ("rotations_total", self.rotations_total.to_string()),
            ("max_push_steps", self.max_push_steps.to_string()),
            ("height_final", self.height_final.to_string()),
            ("n_final", self.n_final.to_string()),
            ("H_final", self.h_final.to_string()),
            ("validation_failures", self.validation_failures.to_string()),
            ("wall_time_ms", self.wall_time_ms.to_string()),
            ("updates", self.updates.to_string()),
            ("size_final", self.size_final.to_string()),
            ("validations_run", self.validations_run.to_string()),
            ("oracle_mismatches", self.oracle_mismatches.to_string()),
            ("queries", self.queries.to_string()),
            ("query_hits", self.query_hits.to_string()),
            ("max_query_comparisons", self.max_query_comparisons.to_string()),
            ("query_bound_violations", self.query_bound_violations.to_string()),
            ("splits", self.splits.to_string()),
            ("merges", self.merges.to_string()),
            ("borrows", self.borrows.to_string()),
            ("split_size_violations", self.split_size_violations.to_string()),
            ("merge_size_violations", self.merge_size_violations.to_string()),
            ("push_cap_exceeded", self.push_cap_exceeded.to_string()),
            ("h_changes", self.h_changes.to_string()),
            ("h_up_events", self.h_up_events.to_string()),
            ("h_down_events", self.h_down_events.to_string()),
            ("min_inserts_before_split", opt(self.min_inserts_before_split)),
            ("min_deletes_before_merge", opt(self.min_deletes_before_merge)),
            ("consolidation_fallbacks", self.consolidation_fallbacks.to_string()),
            ("middle_repair_fallbacks", self.middle_repair_fallbacks.to_string()),
            ("first_failure", opt(self.first_failure)),
            ("first_failure_rule", self.first_failure_rule.clone().unwrap_or_else(|| "none".into())),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

/// Writes the report to `path`, or stdout when `None`.
pub fn report_emit(report: &RunReport, path: Option<&std::path::Path>) -> Result<(), BenchError> {
    let text = report.to_lines();
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| BenchError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Replays `ops` against a fresh tree.
pub fn run_ops(ops: &[TraceOp], opts: &RunOptions) -> Result<RunReport, BenchError> {
    let config = Config { h_min: opts.hmin, scan_budget: opts.scan_fixups, ..Config::default() };
    let mut tree: Tree<i64> = Tree::with_config(config);
    let mut oracle = opts.oracle.then(OracleSet::new);
    let mut report = RunReport::default();
    let mut work = Vec::new();
    let start = Instant::now();

    for (i, op) in ops.iter().enumerate() {
        report.ops_total += 1;
        let mut mismatch = false;
        let mut validate_now = match opts.validate {
            ValidateMode::None => false,
            ValidateMode::Every => true,
            ValidateMode::Periodic(k) => (i + 1) % k == 0,
        };
        match *op {
            TraceOp::Insert(k) => {
                let done = accept(tree.insert_key(k), TreeError::Duplicate)?;
                if done {
                    work.push(tree.last_op_work().total());
                }
                if let Some(o) = oracle.as_mut() {
                    mismatch |= o.insert(k) != done;
                }
            }
            TraceOp::Delete(k) => {
                let done = accept(tree.delete_key(&k), TreeError::NotFound)?;
                if done {
                    work.push(tree.last_op_work().total());
                }
                if let Some(o) = oracle.as_mut() {
                    mismatch |= o.remove(&k) != done;
                }
            }
            TraceOp::Query(k) => {
                let res = tree.search(&k);
                let hit = res.locator.is_some_and(|l| tree.get(l) == Some(&k));
                report.queries += 1;
                report.query_hits += hit as u64;
                report.max_query_comparisons = report.max_query_comparisons.max(res.comparisons as u64);
                if res.comparisons > 3 * tree.h() as usize {
                    report.query_bound_violations += 1;
                }
                if let Some(o) = oracle.as_ref() {
                    mismatch |= o.contains(&k) != hit;
                }
            }
            TraceOp::Validate => validate_now = true,
        }
        if validate_now {
            report.validations_run += 1;
            let r = tree.validate_all();
            if !r.ok {
                report.validation_failures += 1;
                note_failure(&mut report, i, r.violations[0].rule);
            }
            if let Some(o) = oracle.as_ref() {
                mismatch |= !o.matches(&tree);
            }
        }
        if mismatch {
            report.oracle_mismatches += 1;
            note_failure(&mut report, i, "oracle");
        }
    }
    if let Some(o) = oracle.as_ref() {
        if !o.matches(&tree) {
            report.oracle_mismatches += 1;
            note_failure(&mut report, ops.len().saturating_sub(1), "oracle");
        }
    }

    report.wall_time_ms = start.elapsed().as_millis() as u64;
    report.updates = work.len() as u64;
    report.max_work_per_op = work.iter().copied().max().unwrap_or(0);
    report.p99_work_per_op = percentile(&mut work, 99);
    report.rotations_total = tree.total_work().rotations;
    report.height_final = tree.height() as u64;
    report.n_final = tree.internal_nodes() as u64;
    report.h_final = tree.h() as u64;
    report.size_final = tree.len() as u64;
    let st = tree.stats();
    report.max_push_steps = st.max_push_steps;
    report.splits = st.splits;
    report.merges = st.merges;
    report.borrows = st.borrows;
    report.split_size_violations = st.split_size_violations;
    report.merge_size_violations = st.merge_size_violations;
    report.push_cap_exceeded = st.push_cap_exceeded;
    report.h_changes = st.h_increases + st.h_decreases;
    report.h_up_events = st.spacing.up_events;
    report.h_down_events = st.spacing.down_events;
    report.min_inserts_before_split = st.spacing.min_inserts_before_split;
    report.min_deletes_before_merge = st.spacing.min_deletes_before_merge;
    report.consolidation_fallbacks = st.consolidation_fallbacks;
    report.middle_repair_fallbacks = st.middle_repair_fallbacks;
    Ok(report)
}

/// `Ok(true)` on success, `Ok(false)` for the one expected refusal, and a
/// contract error for anything else.
fn accept<T>(r: Result<T, TreeError>, expected: TreeError) -> Result<bool, BenchError> {
    match r {
        Ok(_) => Ok(true),
        Err(e) if e == expected => Ok(false),
        Err(e) => Err(BenchError::Contract(e.to_string())),
    }
}

fn note_failure(report: &mut RunReport, i: usize, rule: &str) {
    if report.first_failure.is_none() {
        report.first_failure = Some(i as u64);
        report.first_failure_rule = Some(rule.to_string());
    }
}

/// Nearest-rank percentile; 0 for no samples.
fn percentile(samples: &mut [u64], p: usize) -> u64 {
    if samples.is_empty() {
        return 0;
    }
    samples.sort_unstable();
    let rank = (p * samples.len()).div_ceil(100).max(1);
    samples[rank - 1]
}
