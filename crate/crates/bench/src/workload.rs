//! Seeded workload generation.
//!
//! * `uniform`: each operation's kind is drawn from the mix; keys are uniform
//!   in the range, deletes and half of the queries target present keys.
//! * `grow-shrink`: the key count is driven up by a factor of four and back
//!   down, repeatedly, so `H` moves up and down across several values.
//! * `sawtooth`: ascending keys are appended at the right end until a peak,
//!   then the oldest half is removed from the left end, repeatedly.
//!
//! For the two shaped patterns only the query share of the mix is used.

use crate::trace::TraceOp;
use crate::BenchError;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, VecDeque};
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pattern {
    Uniform,
    GrowShrink,
    Sawtooth,
}

impl FromStr for Pattern {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "uniform" => Ok(Pattern::Uniform),
            "grow-shrink" => Ok(Pattern::GrowShrink),
            "sawtooth" => Ok(Pattern::Sawtooth),
            _ => Err(BenchError::Usage(format!("unknown pattern `{s}` (uniform, grow-shrink, sawtooth)"))),
        }
    }
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pattern::Uniform => "uniform",
            Pattern::GrowShrink => "grow-shrink",
            Pattern::Sawtooth => "sawtooth",
        })
    }
}

/// Relative weights of inserts, deletes and queries, written `I:D:Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mix {
    pub insert: u32,
    pub delete: u32,
    pub query: u32,
}

impl FromStr for Mix {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        let bad = || BenchError::Usage(format!("bad mix `{s}`, expected I:D:Q with nonnegative integers"));
        let parts: Vec<u32> = s.split(':').map(|p| p.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        let [insert, delete, query] = parts[..] else { return Err(bad()) };
        if insert + delete + query == 0 {
            return Err(BenchError::Usage("mix weights are all zero".into()));
        }
        Ok(Mix { insert, delete, query })
    }
}

/// Parses `LO:HI` (inclusive).
pub fn parse_range(s: &str) -> Result<(i64, i64), BenchError> {
    let bad = || BenchError::Usage(format!("bad range `{s}`, expected LO:HI with LO <= HI"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let (lo, hi): (i64, i64) = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorkloadSpec {
    pub seed: u64,
    pub count: usize,
    pub mix: Mix,
    pub lo: i64,
    pub hi: i64,
    pub pattern: Pattern,
}

/// Live keys with O(1) insert, remove and uniform sampling.
#[derive(Default)]
struct LiveSet {
    keys: Vec<i64>,
    pos: HashMap<i64, usize>,
}

impl LiveSet {
    fn insert(&mut self, k: i64) {
        if let std::collections::hash_map::Entry::Vacant(v) = self.pos.entry(k) {
            v.insert(self.keys.len());
            self.keys.push(k);
        }
    }

    fn remove(&mut self, k: i64) {
        if let Some(i) = self.pos.remove(&k) {
            self.keys.swap_remove(i);
            if let Some(&moved) = self.keys.get(i) {
                self.pos.insert(moved, i);
            }
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> Option<i64> {
        (!self.keys.is_empty()).then(|| self.keys[rng.gen_range(0..self.keys.len())])
    }

    fn len(&self) -> usize {
        self.keys.len()
    }
}

pub fn generate_workload(spec: &WorkloadSpec) -> Vec<TraceOp> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.pattern {
        Pattern::Uniform => uniform(spec, &mut rng),
        Pattern::GrowShrink => grow_shrink(spec, &mut rng),
        Pattern::Sawtooth => sawtooth(spec, &mut rng),
    }
}

fn query_share(mix: &Mix) -> f64 {
    mix.query as f64 / (mix.insert + mix.delete + mix.query) as f64
}

fn random_query(spec: &WorkloadSpec, live: &LiveSet, rng: &mut ChaCha8Rng) -> TraceOp {
    let k = match live.sample(rng) {
        Some(k) if rng.gen_bool(0.5) => k,
        _ => rng.gen_range(spec.lo..=spec.hi),
    };
    TraceOp::Query(k)
}

fn uniform(spec: &WorkloadSpec, rng: &mut ChaCha8Rng) -> Vec<TraceOp> {
    let weights = [spec.mix.insert, spec.mix.delete, spec.mix.query];
    let kinds = WeightedIndex::new(weights).expect("mix validated as non-zero");
    let mut live = LiveSet::default();
    let mut ops = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let op = match kinds.sample(rng) {
            0 => {
                let k = rng.gen_range(spec.lo..=spec.hi);
                live.insert(k);
                TraceOp::Insert(k)
            }
            1 => {
                let k = match live.sample(rng) {
                    Some(k) if rng.gen_bool(0.9) => k,
                    _ => rng.gen_range(spec.lo..=spec.hi),
                };
                live.remove(k);
                TraceOp::Delete(k)
            }
            _ => random_query(spec, &live, rng),
        };
        ops.push(op);
    }
    ops
}

fn grow_shrink(spec: &WorkloadSpec, rng: &mut ChaCha8Rng) -> Vec<TraceOp> {
    let span = (spec.hi - spec.lo) as u64 + 1;
    let base = (spec.count / 50).clamp(64, 1 << 16).min((span / 8).max(1) as usize);
    let q = query_share(&spec.mix);
    let mut live = LiveSet::default();
    let mut growing = true;
    let mut ops = Vec::with_capacity(spec.count);
    while ops.len() < spec.count {
        if growing && live.len() >= 4 * base {
            growing = false;
        } else if !growing && live.len() <= base {
            growing = true;
        }
        if rng.gen_bool(q) {
            ops.push(random_query(spec, &live, rng));
            continue;
        }
        let insert = rng.gen_bool(if growing { 0.9 } else { 0.1 });
        match live.sample(rng) {
            Some(k) if !insert => {
                live.remove(k);
                ops.push(TraceOp::Delete(k));
            }
            _ => {
                let k = rng.gen_range(spec.lo..=spec.hi);
                live.insert(k);
                ops.push(TraceOp::Insert(k));
            }
        }
    }
    ops
}

fn sawtooth(spec: &WorkloadSpec, rng: &mut ChaCha8Rng) -> Vec<TraceOp> {
    let span = (spec.hi - spec.lo) as u64 + 1;
    let peak = (spec.count / 20).clamp(64, 1 << 17).min((span / 2).max(2) as usize);
    let q = query_share(&spec.mix);
    let mut window: VecDeque<i64> = VecDeque::new();
    let mut next = spec.lo;
    let mut growing = true;
    let mut ops = Vec::with_capacity(spec.count);
    while ops.len() < spec.count {
        if growing && window.len() >= peak {
            growing = false;
        } else if !growing && window.len() <= peak / 2 {
            growing = true;
        }
        if rng.gen_bool(q) {
            let k = match window.len() {
                0 => next,
                n => window[rng.gen_range(0..n)],
            };
            ops.push(TraceOp::Query(k));
            continue;
        }
        if growing {
            window.push_back(next);
            ops.push(TraceOp::Insert(next));
            next = if next == spec.hi { spec.lo } else { next + 1 };
        } else {
            let k = window.pop_front().expect("shrinking a non-empty window");
            ops.push(TraceOp::Delete(k));
        }
    }
    ops
}
