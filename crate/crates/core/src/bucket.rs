//! Bucket leaves: sorted doubly-linked entry lists with a middle marker and
//! per-side copies of the bucket's fixing cursor.
//!
//! Every entry refers to one [`CursorCopy`], and the copy knows its bucket.
//! That indirection is what makes split and merge O(1): the entries right of
//! the middle marker all share one copy, so handing them to a new bucket is a
//! single write to that copy.
//!
//! The middle marker is stored as the last entry of the left side (`split`).
//! In steady state `left_count - right_count` is 0 or 1. After a split each
//! half starts with an empty left side and a fresh left copy; the marker then
//! walks forward a bounded number of steps per update, moving entries onto
//! the new copy as it passes them, until the balance is restored. After a
//! merge the two copies that ended up on the wrong side become *pending* and
//! are drained by walkers, two entries per side per update.

use crate::counters::WindowCount;
use crate::error::TreeError;
use crate::store::{BucketId, NodeId, NodeRef, Tree};

/// Opaque reference to one stored key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Locator {
    pub(crate) idx: u32,
    pub(crate) gen: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug)]
pub(crate) struct EntrySlot<K> {
    pub key: Option<K>,
    pub prev: Option<u32>,
    pub next: Option<u32>,
    pub copy: u32,
    pub gen: u32,
}

#[derive(Clone, Debug)]
pub(crate) struct CursorCopy {
    pub bucket: BucketId,
    pub target: NodeRef,
    pub side: Side,
    pub refs: u32,
    pub live: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Pending {
    pub copy: u32,
    pub walker: Option<u32>,
}

#[derive(Clone, Debug)]
pub(crate) struct Bucket<K> {
    pub len: usize,
    pub head: Option<u32>,
    pub tail: Option<u32>,
    /// Last entry of the left side; `None` when the left side is empty.
    pub split: Option<u32>,
    pub left_count: usize,
    pub right_count: usize,
    pub left_copy: u32,
    pub right_copy: u32,
    pub pending: [Option<Pending>; 2],
    pub doubly_black: bool,
    pub parent: Option<NodeId>,
    pub prev: Option<BucketId>,
    pub next: Option<BucketId>,
    /// Exclusive lower routing bound (the separator left of this bucket).
    pub lower: Option<K>,
    /// Inclusive upper routing bound.
    pub upper: Option<K>,
    pub track: BucketTrack,
}

/// Per-bucket counters for the scan-budget spacing statistics.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct BucketTrack {
    pub inserts: WindowCount,
    pub deletes: WindowCount,
}

/// Result of a linear scan of one bucket.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct BucketSearch {
    pub found: Option<u32>,
    /// First entry greater than the key, if any.
    pub before: Option<u32>,
    pub comparisons: usize,
}

impl<K> Bucket<K> {
    /// Whether the middle marker certifies `0 <= left - right <= 1`.
    pub fn middle_valid(&self) -> bool {
        self.len == 0 || (self.left_count >= self.right_count && self.left_count <= self.right_count + 1)
    }

    pub fn pending_count(&self) -> usize {
        self.pending.iter().flatten().count()
    }
}

impl<K: Ord + Clone> Tree<K> {
    // ---- slots ----

    fn alloc_entry(&mut self, key: K, copy: u32) -> u32 {
        if let Some(i) = self.free_entries.pop() {
            let slot = &mut self.entries[i as usize];
            slot.key = Some(key);
            slot.prev = None;
            slot.next = None;
            slot.copy = copy;
            i
        } else {
            self.entries.push(EntrySlot { key: Some(key), prev: None, next: None, copy, gen: 0 });
            self.entries.len() as u32 - 1
        }
    }

    fn free_entry(&mut self, e: u32) -> K {
        let slot = &mut self.entries[e as usize];
        slot.gen = slot.gen.wrapping_add(1);
        self.free_entries.push(e);
        slot.key.take().expect("freed an empty entry slot")
    }

    pub(crate) fn alloc_copy(&mut self, bucket: BucketId, target: NodeRef, side: Side) -> u32 {
        let copy = CursorCopy { bucket, target, side, refs: 0, live: true };
        if let Some(i) = self.free_copies.pop() {
            self.copies[i as usize] = copy;
            i
        } else {
            self.copies.push(copy);
            self.copies.len() as u32 - 1
        }
    }

    fn free_copy(&mut self, c: u32) {
        self.copies[c as usize].live = false;
        self.free_copies.push(c);
    }

    /// Allocates an empty, unlinked bucket whose cursor targets itself.
    pub(crate) fn alloc_empty_bucket(
        &mut self,
        parent: Option<NodeId>,
        prev: Option<BucketId>,
        next: Option<BucketId>,
    ) -> BucketId {
        let id = match self.free_buckets.pop() {
            Some(i) => BucketId(i),
            None => {
                self.buckets.push(None);
                BucketId(self.buckets.len() as u32 - 1)
            }
        };
        let target = NodeRef::Bucket(id);
        let left_copy = self.alloc_copy(id, target, Side::Left);
        let right_copy = self.alloc_copy(id, target, Side::Right);
        self.buckets[id.index()] = Some(Bucket {
            len: 0,
            head: None,
            tail: None,
            split: None,
            left_count: 0,
            right_count: 0,
            left_copy,
            right_copy,
            pending: [None, None],
            doubly_black: false,
            parent,
            prev,
            next,
            lower: None,
            upper: None,
            track: self.fresh_track(),
        });
        id
    }

    pub(crate) fn fresh_track(&self) -> BucketTrack {
        let a = &self.stats.spacing;
        BucketTrack { inserts: WindowCount::new(a.up.current), deletes: WindowCount::new(a.down.current) }
    }

    // ---- entries and locators ----

    pub(crate) fn key_of(&self, e: u32) -> &K {
        self.entries[e as usize].key.as_ref().expect("dead entry")
    }

    pub(crate) fn locator(&self, e: u32) -> Locator {
        Locator { idx: e, gen: self.entries[e as usize].gen }
    }

    pub(crate) fn resolve(&self, loc: Locator) -> Result<u32, TreeError> {
        match self.entries.get(loc.idx as usize) {
            Some(slot) if slot.gen == loc.gen && slot.key.is_some() => Ok(loc.idx),
            _ => Err(TreeError::StaleLocator),
        }
    }

    pub(crate) fn bucket_of_entry(&self, e: u32) -> BucketId {
        self.copies[self.entries[e as usize].copy as usize].bucket
    }

    pub(crate) fn side_of(&self, e: u32) -> Side {
        self.copies[self.entries[e as usize].copy as usize].side
    }

    fn primary_copy(&self, b: BucketId, side: Side) -> u32 {
        let bk = self.bucket(b);
        match side {
            Side::Left => bk.left_copy,
            Side::Right => bk.right_copy,
        }
    }

    // ---- fixing cursor ----

    /// Target shared by all cursor copies of `b`.
    pub fn cursor_of(&self, b: BucketId) -> NodeRef {
        self.copies[self.bucket(b).left_copy as usize].target
    }

    pub(crate) fn set_cursor(&mut self, b: BucketId, target: NodeRef) {
        let old = self.cursor_of(b);
        if old == target {
            return;
        }
        self.pin(target);
        self.unpin(old);
        let bk = self.bucket(b);
        let ids = [Some(bk.left_copy), Some(bk.right_copy), bk.pending[0].map(|p| p.copy), bk.pending[1].map(|p| p.copy)];
        for c in ids.into_iter().flatten() {
            self.copies[c as usize].target = target;
        }
    }

    /// Moves `e`'s reference to copy `to`, discarding the old copy if it was a
    /// drained pending copy.
    fn redirect(&mut self, e: u32, to: u32) {
        let from = self.entries[e as usize].copy;
        if from == to {
            return;
        }
        self.copies[from as usize].refs -= 1;
        self.copies[to as usize].refs += 1;
        self.entries[e as usize].copy = to;
        self.op.cursor_redirects += 1;
        self.maybe_discard(from);
    }

    fn release_ref(&mut self, e: u32) {
        let c = self.entries[e as usize].copy;
        self.copies[c as usize].refs -= 1;
        self.maybe_discard(c);
    }

    fn maybe_discard(&mut self, c: u32) {
        let copy = &self.copies[c as usize];
        if copy.refs != 0 {
            return;
        }
        let b = copy.bucket;
        let bk = self.bucket_mut(b);
        for slot in bk.pending.iter_mut() {
            if slot.is_some_and(|p| p.copy == c) {
                *slot = None;
                self.free_copy(c);
                return;
            }
        }
    }

    // ---- linking ----

    /// Links a detached entry into `b` before `before` (or at the tail) and
    /// gives it the copy of the side it lands on.
    fn attach(&mut self, b: BucketId, e: u32, before: Option<u32>) {
        let side = match before {
            Some(x) => self.side_of(x),
            None => Side::Right,
        };
        let prev = match before {
            Some(x) => self.entries[x as usize].prev,
            None => self.bucket(b).tail,
        };
        {
            let slot = &mut self.entries[e as usize];
            slot.prev = prev;
            slot.next = before;
        }
        match prev {
            Some(p) => self.entries[p as usize].next = Some(e),
            None => self.bucket_mut(b).head = Some(e),
        }
        match before {
            Some(x) => self.entries[x as usize].prev = Some(e),
            None => self.bucket_mut(b).tail = Some(e),
        }
        let copy = self.primary_copy(b, side);
        self.entries[e as usize].copy = copy;
        self.copies[copy as usize].refs += 1;
        let bk = self.bucket_mut(b);
        bk.len += 1;
        match side {
            Side::Left => bk.left_count += 1,
            Side::Right => bk.right_count += 1,
        }
        self.op.entry_moves += 1;
    }

    /// Unlinks `e` from `b` without freeing it; markers, walkers and copy
    /// refcounts are repaired.
    fn detach(&mut self, b: BucketId, e: u32) {
        let side = self.side_of(e);
        let (prev, next) = {
            let slot = &self.entries[e as usize];
            (slot.prev, slot.next)
        };
        let bk = self.bucket_mut(b);
        for p in bk.pending.iter_mut().flatten() {
            if p.walker == Some(e) {
                p.walker = next;
            }
        }
        if bk.split == Some(e) {
            bk.split = prev;
        }
        match side {
            Side::Left => bk.left_count -= 1,
            Side::Right => bk.right_count -= 1,
        }
        bk.len -= 1;
        if bk.head == Some(e) {
            bk.head = next;
        }
        if bk.tail == Some(e) {
            bk.tail = prev;
        }
        if let Some(p) = prev {
            self.entries[p as usize].next = next;
        }
        if let Some(n) = next {
            self.entries[n as usize].prev = prev;
        }
        self.entries[e as usize].prev = None;
        self.entries[e as usize].next = None;
        self.release_ref(e);
        self.op.entry_moves += 1;
    }

    /// Moves the middle marker up to `steps` entries toward balance.
    pub(crate) fn rebalance_middle(&mut self, b: BucketId, steps: usize) {
        for _ in 0..steps {
            let bk = self.bucket(b);
            if bk.len == 0 {
                return;
            }
            if bk.left_count < bk.right_count {
                let e = match bk.split {
                    Some(s) => self.entries[s as usize].next.expect("right side is non-empty"),
                    None => bk.head.expect("non-empty bucket"),
                };
                let to = bk.left_copy;
                self.redirect(e, to);
                let bk = self.bucket_mut(b);
                bk.split = Some(e);
                bk.left_count += 1;
                bk.right_count -= 1;
            } else if bk.left_count > bk.right_count + 1 {
                let e = bk.split.expect("left side is non-empty");
                let to = bk.right_copy;
                let prev = self.entries[e as usize].prev;
                self.redirect(e, to);
                let bk = self.bucket_mut(b);
                bk.split = prev;
                bk.left_count -= 1;
                bk.right_count += 1;
            } else {
                return;
            }
            self.op.entry_moves += 1;
        }
    }

    // ---- bucket operations ----

    /// Links `key` into `b` before `before` (or at the tail). The caller has
    /// checked ordering.
    pub(crate) fn bucket_insert_at(&mut self, b: BucketId, before: Option<u32>, key: K) -> u32 {
        let e = self.alloc_entry(key, 0);
        self.attach(b, e, before);
        self.rebalance_middle(b, 1);
        e
    }

    pub(crate) fn bucket_remove(&mut self, b: BucketId, e: u32) -> K {
        self.detach(b, e);
        self.rebalance_middle(b, 1);
        self.free_entry(e)
    }

    /// Per-update incremental work: drains pending copies two entries per
    /// side and advances middle-marker repair.
    pub fn redirect_cursor_refs(&mut self, b: BucketId) {
        for slot in 0..2 {
            for _ in 0..2 {
                let Some(p) = self.bucket(b).pending[slot] else { break };
                let Some(e) = p.walker else { break };
                let next = self.entries[e as usize].next;
                if let Some(q) = self.bucket_mut(b).pending[slot].as_mut() {
                    q.walker = next;
                }
                if self.entries[e as usize].copy == p.copy {
                    let side = self.copies[p.copy as usize].side;
                    let to = self.primary_copy(b, side);
                    self.redirect(e, to);
                }
            }
        }
        if !self.bucket(b).middle_valid() {
            self.rebalance_middle(b, 2);
        }
    }

    /// Completes pending-copy consolidation immediately. Returns whether there
    /// was anything to do.
    pub(crate) fn finish_pending(&mut self, b: BucketId) -> bool {
        if self.bucket(b).pending_count() == 0 {
            return false;
        }
        let mut cur = self.bucket(b).head;
        while let Some(e) = cur {
            cur = self.entries[e as usize].next;
            let c = self.entries[e as usize].copy;
            let is_pending = self.bucket(b).pending.iter().flatten().any(|p| p.copy == c);
            if is_pending {
                let side = self.copies[c as usize].side;
                let to = self.primary_copy(b, side);
                self.redirect(e, to);
            }
        }
        debug_assert_eq!(self.bucket(b).pending_count(), 0);
        true
    }

    /// Cuts `b` after its middle marker. `b` keeps the left half (including
    /// the middle entry); the right half moves to a new bucket. Returns the
    /// new bucket and a copy of the middle key.
    pub fn split_bucket_contents(&mut self, b: BucketId) -> Result<(BucketId, K), TreeError> {
        let bk = self.bucket(b);
        if bk.len < 2 || !bk.middle_valid() || bk.pending_count() != 0 {
            return Err(TreeError::contract("split precondition: balanced middle, no pending copies"));
        }
        let mid = bk.split.expect("balanced non-empty bucket has a middle");
        let right_head = self.entries[mid as usize].next.expect("right side non-empty");
        let sep = self.key_of(mid).clone();
        let (l, r) = (bk.left_count, bk.right_count);
        let (old_left, old_right) = (bk.left_copy, bk.right_copy);
        let (old_tail, old_next, parent) = (bk.tail, bk.next, bk.parent);
        let target = self.cursor_of(b);

        let b2 = self.alloc_empty_bucket(parent, Some(b), old_next);
        // the fresh right copy of b2 is replaced by b's old right copy
        let spare = self.bucket(b2).right_copy;
        self.free_copy(spare);
        self.copies[old_right as usize].bucket = b2;
        let b2_left = self.bucket(b2).left_copy;
        self.copies[b2_left as usize].target = target;
        self.pin(target);
        let upper = self.bucket_mut(b).upper.take();
        {
            let nb = self.bucket_mut(b2);
            nb.len = r;
            nb.head = Some(right_head);
            nb.tail = old_tail;
            nb.split = None;
            nb.left_count = 0;
            nb.right_count = r;
            nb.right_copy = old_right;
            nb.lower = Some(sep.clone());
            nb.upper = upper;
        }
        if let Some(nn) = old_next {
            self.bucket_mut(nn).prev = Some(b2);
        }
        self.entries[mid as usize].next = None;
        self.entries[right_head as usize].prev = None;

        self.copies[old_left as usize].side = Side::Right;
        let new_left = self.alloc_copy(b, target, Side::Left);
        let bk = self.bucket_mut(b);
        bk.len = l;
        bk.tail = Some(mid);
        bk.split = None;
        bk.left_count = 0;
        bk.right_count = l;
        bk.right_copy = old_left;
        bk.left_copy = new_left;
        bk.upper = Some(sep.clone());
        bk.next = Some(b2);
        self.op.entry_moves += 1;
        Ok((b2, sep))
    }

    /// Appends `right`'s list after `left`'s tail in O(1). `right`'s slot is
    /// freed; the result lives in `left`. The cursor of the result is left at
    /// `left`'s old target; the caller re-targets it.
    pub fn merge_bucket_contents(&mut self, left: BucketId, right: BucketId) -> Result<BucketId, TreeError> {
        if self.bucket(left).pending_count() != 0 || self.bucket(right).pending_count() != 0 {
            return Err(TreeError::contract("merge precondition: no pending copies"));
        }
        let rb = self.buckets[right.index()].take().expect("live right bucket");
        self.free_buckets.push(right.0);
        let right_target = self.copies[rb.left_copy as usize].target;
        self.unpin(right_target);
        let target = self.cursor_of(left);

        let lb = self.bucket(left);
        let (l1, r1) = (lb.left_copy, lb.right_copy);
        let (l2, r2) = (rb.left_copy, rb.right_copy);
        let r1_walker = match lb.split {
            Some(s) => self.entries[s as usize].next,
            None => lb.head,
        };
        let left_tail = lb.tail;
        let left_len = lb.len;
        for c in [l2, r2] {
            let copy = &mut self.copies[c as usize];
            copy.bucket = left;
            copy.target = target;
        }
        self.copies[r1 as usize].side = Side::Left;
        self.copies[l2 as usize].side = Side::Right;

        if let (Some(t), Some(h)) = (left_tail, rb.head) {
            self.entries[t as usize].next = Some(h);
            self.entries[h as usize].prev = Some(t);
        }
        if let Some(nn) = rb.next {
            self.bucket_mut(nn).prev = Some(left);
        }
        let lb = self.bucket_mut(left);
        if lb.head.is_none() {
            lb.head = rb.head;
        }
        if rb.tail.is_some() {
            lb.tail = rb.tail;
        }
        lb.split = left_tail;
        lb.left_count = left_len;
        lb.right_count = rb.len;
        lb.len = left_len + rb.len;
        lb.right_copy = r2;
        lb.left_copy = l1;
        lb.pending = [Some(Pending { copy: r1, walker: r1_walker }), Some(Pending { copy: l2, walker: rb.head })];
        lb.upper = rb.upper;
        lb.next = rb.next;
        self.maybe_discard(r1);
        self.maybe_discard(l2);
        self.op.entry_moves += 1;
        Ok(left)
    }

    /// Removes the first entry of `b` without freeing it.
    pub(crate) fn detach_head(&mut self, b: BucketId) -> u32 {
        let e = self.bucket(b).head.expect("non-empty bucket");
        self.detach(b, e);
        self.rebalance_middle(b, 1);
        e
    }

    pub(crate) fn detach_tail(&mut self, b: BucketId) -> u32 {
        let e = self.bucket(b).tail.expect("non-empty bucket");
        self.detach(b, e);
        self.rebalance_middle(b, 1);
        e
    }

    pub(crate) fn attach_tail(&mut self, b: BucketId, e: u32) {
        self.attach(b, e, None);
        self.rebalance_middle(b, 1);
    }

    pub(crate) fn attach_head(&mut self, b: BucketId, e: u32) {
        let head = self.bucket(b).head;
        self.attach(b, e, head);
        self.rebalance_middle(b, 1);
    }

    /// Linear scan of `b` for `key`.
    pub(crate) fn bucket_search(&self, b: BucketId, key: &K) -> BucketSearch {
        let mut comparisons = 0;
        let mut cur = self.bucket(b).head;
        while let Some(e) = cur {
            comparisons += 1;
            match self.key_of(e).cmp(key) {
                std::cmp::Ordering::Less => cur = self.entries[e as usize].next,
                std::cmp::Ordering::Equal => return BucketSearch { found: Some(e), before: self.entries[e as usize].next, comparisons },
                std::cmp::Ordering::Greater => return BucketSearch { found: None, before: Some(e), comparisons },
            }
        }
        BucketSearch { found: None, before: None, comparisons }
    }

    /// Keys of `b` in order.
    #[cfg(test)]
    pub(crate) fn bucket_keys(&self, b: BucketId) -> Vec<K> {
        let mut out = Vec::with_capacity(self.bucket(b).len);
        let mut cur = self.bucket(b).head;
        while let Some(e) = cur {
            out.push(self.key_of(e).clone());
            cur = self.entries[e as usize].next;
        }
        out
    }
}
