//! Instrumentation: per-operation work tallies and run-wide statistics.

use std::ops::AddAssign;

/// Structural work performed by one operation (or summed over many).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WorkCounter {
    pub rotations: u64,
    pub recolorings: u64,
    pub fixup_steps: u64,
    pub entry_moves: u64,
    pub cursor_redirects: u64,
}

impl WorkCounter {
    pub fn total(&self) -> u64 {
        self.rotations + self.recolorings + self.fixup_steps + self.entry_moves + self.cursor_redirects
    }
}

impl AddAssign for WorkCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.rotations += rhs.rotations;
        self.recolorings += rhs.recolorings;
        self.fixup_steps += rhs.fixup_steps;
        self.entry_moves += rhs.entry_moves;
        self.cursor_redirects += rhs.cursor_redirects;
    }
}

/// Run-wide counters kept by the tree. None of these feed back into the
/// algorithm.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TreeStats {
    pub updates: u64,
    pub splits: u64,
    pub merges: u64,
    pub borrows: u64,
    pub sibling_rotations: u64,
    pub max_work_per_op: u64,
    /// Breakdown of the first update that reached `max_work_per_op`.
    pub max_work_breakdown: WorkCounter,
    pub max_push_steps: u64,
    /// Pushes that needed more fix-ups than the configured cap.
    pub push_cap_exceeded: u64,
    /// Splits whose halves fell outside `[H - 5, H]`.
    pub split_size_violations: u64,
    /// Merges whose result fell outside `[H, H + 6)`.
    pub merge_size_violations: u64,
    /// Splits that found the middle marker still under repair and had to
    /// finish it on the spot.
    pub middle_repair_fallbacks: u64,
    /// Splits or merges that found cursor-copy consolidation unfinished.
    pub consolidation_fallbacks: u64,
    pub tombstones_created: u64,
    pub tombstones_released: u64,
    pub h_increases: u64,
    pub h_decreases: u64,
    pub max_copies_per_bucket: u64,
    pub spacing: SpacingStats,
}

/// Tracks the spacing arguments behind the scan budget.
///
/// A *window* starts whenever `H` sets a new low (for the up direction) and
/// *fires* once `H` has grown by five from there, i.e. once `n` has roughly
/// doubled. A bucket that already existed when a fired window started is
/// measured at its first split afterwards: the number of insertions it took
/// since the window started. The down direction is symmetric, with merges of
/// sibling pairs and deletions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpacingStats {
    pub up_events: u64,
    pub down_events: u64,
    pub(crate) up: Windows,
    pub(crate) down: Windows,
    pub min_inserts_before_split: Option<u64>,
    pub min_deletes_before_merge: Option<u64>,
    pub splits_measured: u64,
    pub merges_measured: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct Windows {
    pub current: u64,
    anchor: u32,
    /// Most recent fired window and its anchor `H`.
    pub fired: Option<(u64, u32)>,
}

impl Windows {
    fn restart(&mut self, h: u32) {
        self.current += 1;
        self.anchor = h;
    }
}

/// Operation count of one bucket since the start of the window it last saw,
/// and since the start of the window before that.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub(crate) struct WindowCount {
    pub born: u64,
    cur: (u64, u64),
    prev: Option<(u64, u64)>,
}

impl WindowCount {
    pub fn new(window: u64) -> Self {
        WindowCount { born: window, cur: (window, 0), prev: None }
    }

    pub fn bump(&mut self, window: u64) {
        if self.cur.0 != window {
            self.prev = Some(self.cur);
            self.cur = (window, 0);
        }
        self.cur.1 += 1;
        if let Some(p) = self.prev.as_mut() {
            p.1 += 1;
        }
    }

    /// Operations since window `w` started, or `None` if the bucket was born
    /// after that.
    pub fn since(&self, w: u64) -> Option<u64> {
        if self.born >= w {
            return None;
        }
        Some(match self.cur.0.cmp(&w) {
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => self.cur.1,
            std::cmp::Ordering::Greater => match self.prev {
                Some((pw, c)) if pw == w => c,
                _ => self.cur.1,
            },
        })
    }
}

impl SpacingStats {
    pub(crate) fn init(&mut self, h: u32) {
        self.up.anchor = h;
        self.down.anchor = h;
    }

    fn on_h_change(&mut self, new: u32) {
        if new < self.up.anchor {
            self.up.restart(new);
        } else if new >= self.up.anchor + 5 {
            self.up_events += 1;
            self.up.fired = Some((self.up.current, self.up.anchor));
            self.up.restart(new);
        }
        if new > self.down.anchor {
            self.down.restart(new);
        } else if new + 5 <= self.down.anchor {
            self.down_events += 1;
            self.down.fired = Some((self.down.current, self.down.anchor));
            self.down.restart(new);
        }
    }

    /// The fired up-window a split at height budget `h` is measured against.
    pub(crate) fn split_window(&self, h: u32) -> Option<u64> {
        self.up.fired.filter(|&(_, anchor)| h >= anchor + 5).map(|(w, _)| w)
    }

    pub(crate) fn merge_window(&self, h: u32) -> Option<u64> {
        self.down.fired.filter(|&(_, anchor)| h + 5 <= anchor).map(|(w, _)| w)
    }

    pub(crate) fn record_split(&mut self, inserts: u64) {
        self.splits_measured += 1;
        self.min_inserts_before_split = Some(self.min_inserts_before_split.map_or(inserts, |m| m.min(inserts)));
    }

    pub(crate) fn record_merge(&mut self, deletes: u64) {
        self.merges_measured += 1;
        self.min_deletes_before_merge = Some(self.min_deletes_before_merge.map_or(deletes, |m| m.min(deletes)));
    }
}

impl TreeStats {
    pub(crate) fn on_h_change(&mut self, old: u32, new: u32) {
        if new > old {
            self.h_increases += 1;
        } else {
            self.h_decreases += 1;
        }
        self.spacing.on_h_change(new);
    }
}
