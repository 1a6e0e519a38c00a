//! Update algorithms: insertion with bucket splits, deletion with borrow and
//! merge, and the global scan that keeps every bucket legal while `H` drifts.
//!
//! Only the locator-based entry points ([`Tree::insert_before`],
//! [`Tree::insert_after`], [`Tree::delete`]) do constant work; the `*_key`
//! wrappers add an `O(log n)` search in front.

use crate::bucket::{Locator, Side};
use crate::counters::WorkCounter;
use crate::error::TreeError;
use crate::store::{BucketId, Color, Internal, NodeRef, Tree};
use std::cmp::Ordering;

impl<K: Ord + Clone> Tree<K> {
    fn begin_op(&mut self) {
        self.op = WorkCounter::default();
    }

    fn end_op(&mut self) {
        self.totals += self.op;
        self.stats.updates += 1;
        if self.op.total() > self.stats.max_work_per_op {
            self.stats.max_work_per_op = self.op.total();
            self.stats.max_work_breakdown = self.op;
        }
    }

    /// Work done by the most recent update.
    pub fn last_op_work(&self) -> WorkCounter {
        self.op
    }

    pub fn total_work(&self) -> WorkCounter {
        self.totals
    }

    fn split_due(&self, b: BucketId) -> bool {
        self.bucket(b).len as i64 > 2 * self.h as i64 - 10
    }

    fn underflow_due(&self, b: BucketId) -> bool {
        !self.is_root(NodeRef::Bucket(b)) && 2 * self.bucket(b).len < self.h as usize + 6
    }

    fn sibling_rich(&self, b: BucketId) -> bool {
        2 * self.bucket(b).len > self.h as usize + 6
    }

    // ---- public update surface ----

    /// Inserts `key`, locating its position by search first.
    pub fn insert_key(&mut self, key: K) -> Result<Locator, TreeError> {
        let (b, _) = self.search_descend(&key);
        let found = self.bucket_search(b, &key);
        if found.found.is_some() {
            return Err(TreeError::Duplicate);
        }
        self.insert_in_bucket(b, found.before, key)
    }

    /// Inserts `key` immediately before the entry at `loc`.
    pub fn insert_before(&mut self, loc: Locator, key: K) -> Result<Locator, TreeError> {
        let e = self.resolve(loc)?;
        check_order(&key, self.key_of(e))?;
        let b = self.bucket_of_entry(e);
        if let Some(p) = self.entries[e as usize].prev {
            check_order(self.key_of(p), &key)?;
            return self.insert_in_bucket(b, Some(e), key);
        }
        match &self.bucket(b).lower {
            Some(lower) if key <= *lower => {
                let pb = self.bucket(b).prev.ok_or_else(|| TreeError::contract("lower fence without a predecessor"))?;
                if let Some(t) = self.bucket(pb).tail {
                    check_order(self.key_of(t), &key)?;
                }
                self.insert_in_bucket(pb, None, key)
            }
            _ => self.insert_in_bucket(b, Some(e), key),
        }
    }

    /// Inserts `key` immediately after the entry at `loc`.
    pub fn insert_after(&mut self, loc: Locator, key: K) -> Result<Locator, TreeError> {
        let e = self.resolve(loc)?;
        check_order(self.key_of(e), &key)?;
        let b = self.bucket_of_entry(e);
        if let Some(nx) = self.entries[e as usize].next {
            check_order(&key, self.key_of(nx))?;
            return self.insert_in_bucket(b, Some(nx), key);
        }
        match &self.bucket(b).upper {
            Some(upper) if key > *upper => {
                let nb = self.bucket(b).next.ok_or_else(|| TreeError::contract("upper fence without a successor"))?;
                let head = self.bucket(nb).head;
                if let Some(h) = head {
                    check_order(&key, self.key_of(h))?;
                }
                self.insert_in_bucket(nb, head, key)
            }
            _ => self.insert_in_bucket(b, None, key),
        }
    }

    /// Removes `key`, locating it by search first.
    pub fn delete_key(&mut self, key: &K) -> Result<K, TreeError> {
        let (b, _) = self.search_descend(key);
        let e = self.bucket_search(b, key).found.ok_or(TreeError::NotFound)?;
        let loc = self.locator(e);
        self.delete(loc)
    }

    /// Removes the entry at `loc`.
    pub fn delete(&mut self, loc: Locator) -> Result<K, TreeError> {
        let e = self.resolve(loc)?;
        let b = self.bucket_of_entry(e);
        self.begin_op();
        let key = self.bucket_remove(b, e);
        self.len -= 1;
        self.track_delete(b);
        self.redirect_cursor_refs(b);
        self.fixup_step(b)?;
        self.fixup_step(b)?;
        if self.underflow_due(b) {
            self.fix_underflow(b)?;
        }
        self.global_scan_step()?;
        self.end_op();
        Ok(key)
    }

    fn insert_in_bucket(&mut self, b: BucketId, before: Option<u32>, key: K) -> Result<Locator, TreeError> {
        self.begin_op();
        let e = self.bucket_insert_at(b, before, key);
        self.len += 1;
        self.track_insert(b);
        self.redirect_cursor_refs(b);
        self.fixup_step(b)?;
        if self.split_due(b) {
            self.push_cursor_to_root(b, self.config.push_cap)?;
            self.split(b)?;
        }
        self.global_scan_step()?;
        self.end_op();
        Ok(self.locator(e))
    }

    // ---- structural steps ----

    /// Replaces bucket `b` (cursor at the root) by a new internal node with
    /// the two halves as children. Returns the new right bucket.
    pub(crate) fn split(&mut self, b: BucketId) -> Result<BucketId, TreeError> {
        if !self.is_root(self.cursor_of(b)) {
            return Err(TreeError::contract("split with the fixing cursor below the root"));
        }
        if self.bucket(b).doubly_black {
            return Err(TreeError::contract("split of a doubly-black bucket"));
        }
        if self.finish_pending(b) {
            self.stats.consolidation_fallbacks += 1;
        }
        if !self.bucket(b).middle_valid() {
            let len = self.bucket(b).len;
            self.rebalance_middle(b, len);
            self.stats.middle_repair_fallbacks += 1;
        }
        self.record_split_spacing(b);

        let h = self.h as usize;
        let (b2, sep) = self.split_bucket_contents(b)?;
        let (l, r) = (self.bucket(b).len, self.bucket(b2).len);
        if !(h.saturating_sub(5)..=h).contains(&l) || !(h.saturating_sub(5)..=h).contains(&r) {
            self.stats.split_size_violations += 1;
        }

        let parent = self.bucket(b).parent;
        let color = if parent.is_none() { Color::Black } else { Color::Red };
        let x = self.alloc_node(Internal {
            color,
            doubly_black: false,
            separator: sep,
            left: NodeRef::Bucket(b),
            right: NodeRef::Bucket(b2),
            parent,
            pins: 0,
        });
        self.replace_child(parent, NodeRef::Bucket(b), NodeRef::Internal(x));
        self.set_parent(NodeRef::Bucket(b), Some(x));
        self.set_parent(NodeRef::Bucket(b2), Some(x));
        self.set_cursor(b, NodeRef::Internal(x));
        self.set_cursor(b2, NodeRef::Internal(x));
        self.bucket_mut(b).track = self.fresh_track();
        self.n += 1;
        self.stats.splits += 1;
        self.recompute_h();

        let chosen = match self.config.split_fixup_side {
            Side::Left => b,
            Side::Right => b2,
        };
        self.fixup_step(chosen)?;
        Ok(b2)
    }

    /// Pushes `b`'s cursor to the root, then borrows from or merges with its
    /// sibling. Returns the bucket that now holds `b`'s entries.
    fn fix_underflow(&mut self, b: BucketId) -> Result<BucketId, TreeError> {
        self.push_cursor_to_root(b, self.config.push_cap)?;
        let sib = self.ensure_bucket_sibling(b)?;
        if self.sibling_rich(sib) {
            self.borrow_from_sibling(b, sib)?;
            Ok(b)
        } else {
            self.merge(b, sib)
        }
    }

    /// Makes `b`'s sibling a bucket with at most one rotation at `b`'s parent.
    pub fn ensure_bucket_sibling(&mut self, b: BucketId) -> Result<BucketId, TreeError> {
        let p = self.bucket(b).parent.ok_or_else(|| TreeError::contract("root bucket has no sibling"))?;
        let b_left = self.node(p).left == NodeRef::Bucket(b);
        let s = if b_left { self.node(p).right } else { self.node(p).left };
        let s = match s {
            NodeRef::Bucket(s) => return Ok(s),
            NodeRef::Internal(s) => s,
        };
        if self.node(s).color != Color::Red {
            return Err(TreeError::contract("bucket sibling is a black internal node"));
        }
        let near = if b_left { self.node(s).left } else { self.node(s).right };
        let near = near
            .bucket()
            .ok_or_else(|| TreeError::contract("red sibling of a bucket has an internal near child"))?;
        if self.node(p).color != Color::Black || self.node(p).doubly_black {
            return Err(TreeError::contract("red sibling under a red or doubly-black parent"));
        }
        if b_left {
            self.rotate_left(p)?;
        } else {
            self.rotate_right(p)?;
        }
        self.set_color(s, Color::Black);
        self.set_color(p, Color::Red);
        self.stats.sibling_rotations += 1;
        Ok(near)
    }

    /// Moves the boundary entry of `sib` into `b` and updates their common
    /// parent's separator.
    pub(crate) fn borrow_from_sibling(&mut self, b: BucketId, sib: BucketId) -> Result<(), TreeError> {
        let p = self.bucket(b).parent.ok_or_else(|| TreeError::contract("borrow at the root"))?;
        if self.bucket(sib).parent != Some(p) {
            return Err(TreeError::contract("borrow between non-siblings"));
        }
        let b_left = self.node(p).left == NodeRef::Bucket(b);
        let sep = if b_left {
            let e = self.detach_head(sib);
            self.attach_tail(b, e);
            self.key_of(e).clone()
        } else {
            let e = self.detach_tail(sib);
            self.attach_head(b, e);
            let t = self.bucket(sib).tail.ok_or_else(|| TreeError::contract("borrow emptied the sibling"))?;
            self.key_of(t).clone()
        };
        self.node_mut(p).separator = sep.clone();
        let (lo, hi) = if b_left { (b, sib) } else { (sib, b) };
        self.bucket_mut(lo).upper = Some(sep.clone());
        self.bucket_mut(hi).lower = Some(sep);
        self.stats.borrows += 1;
        self.fixup_step(sib)?;
        self.fixup_step(sib)?;
        Ok(())
    }

    /// Merges sibling buckets and removes their parent. Returns the merged
    /// bucket.
    pub(crate) fn merge(&mut self, b: BucketId, sib: BucketId) -> Result<BucketId, TreeError> {
        let p = self.bucket(b).parent.ok_or_else(|| TreeError::contract("merge at the root"))?;
        if self.bucket(sib).parent != Some(p) {
            return Err(TreeError::contract("merge of non-siblings"));
        }
        if self.bucket(b).doubly_black || self.bucket(sib).doubly_black {
            return Err(TreeError::contract("merge of a doubly-black bucket"));
        }
        let (bl, br) = if self.node(p).left == NodeRef::Bucket(b) { (b, sib) } else { (sib, b) };
        for x in [bl, br] {
            if self.finish_pending(x) {
                self.stats.consolidation_fallbacks += 1;
            }
        }
        self.record_merge_spacing(bl, br);

        let h = self.h as usize;
        let total = self.bucket(bl).len + self.bucket(br).len;
        if !(h..h + 6).contains(&total) {
            self.stats.merge_size_violations += 1;
        }
        let parent_black = self.node(p).color == Color::Black;
        let q = self.node(p).parent;
        let m = self.merge_bucket_contents(bl, br)?;
        self.replace_child(q, NodeRef::Internal(p), NodeRef::Bucket(m));
        self.set_cursor(m, NodeRef::Bucket(m));
        self.release_node(p, q);
        if q.is_some() && parent_black {
            self.set_doubly_black(NodeRef::Bucket(m), true);
        }
        self.bucket_mut(m).track = self.fresh_track();
        self.stats.max_copies_per_bucket = self.stats.max_copies_per_bucket.max(2 + self.bucket(m).pending_count() as u64);
        if self.scan == Some(br) {
            self.scan = Some(m);
        }
        self.n -= 1;
        self.stats.merges += 1;
        self.recompute_h();
        Ok(m)
    }

    /// Visits the next `buckets_per_op` buckets of the circular scan.
    pub fn global_scan_step(&mut self) -> Result<(), TreeError> {
        for _ in 0..self.config.buckets_per_op {
            let c = match self.scan {
                Some(c) if self.is_live_bucket(c) => c,
                _ => self.first_bucket,
            };
            let next = self.scan_visit(c)?;
            self.scan = Some(next.unwrap_or(self.first_bucket));
        }
        Ok(())
    }

    fn scan_visit(&mut self, c: BucketId) -> Result<Option<BucketId>, TreeError> {
        for _ in 0..self.config.scan_budget {
            if self.is_root(self.cursor_of(c)) {
                break;
            }
            self.fixup_step(c)?;
        }
        self.redirect_cursor_refs(c);
        if self.split_due(c) {
            self.push_cursor_to_root(c, self.config.push_cap)?;
            let b2 = self.split(c)?;
            return Ok(self.bucket(b2).next);
        }
        if self.underflow_due(c) {
            let m = self.fix_underflow(c)?;
            return Ok(self.bucket(m).next);
        }
        Ok(self.bucket(c).next)
    }

    // ---- spacing instrumentation ----

    fn track_insert(&mut self, b: BucketId) {
        let w = self.stats.spacing.up.current;
        self.bucket_mut(b).track.inserts.bump(w);
    }

    fn track_delete(&mut self, b: BucketId) {
        let w = self.stats.spacing.down.current;
        self.bucket_mut(b).track.deletes.bump(w);
    }

    fn record_split_spacing(&mut self, b: BucketId) {
        let Some(w) = self.stats.spacing.split_window(self.h) else { return };
        if let Some(inserts) = self.bucket(b).track.inserts.since(w) {
            self.stats.spacing.record_split(inserts);
        }
    }

    fn record_merge_spacing(&mut self, bl: BucketId, br: BucketId) {
        let Some(w) = self.stats.spacing.merge_window(self.h) else { return };
        let (l, r) = (self.bucket(bl).track.deletes.since(w), self.bucket(br).track.deletes.since(w));
        if let (Some(l), Some(r)) = (l, r) {
            self.stats.spacing.record_merge(l + r);
        }
    }
}

fn check_order<K: Ord>(lo: &K, hi: &K) -> Result<(), TreeError> {
    match lo.cmp(hi) {
        Ordering::Less => Ok(()),
        Ordering::Equal => Err(TreeError::Duplicate),
        Ordering::Greater => Err(TreeError::OrderViolation),
    }
}
