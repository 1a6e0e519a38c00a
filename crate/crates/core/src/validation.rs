//! Full-traversal structural validator and a brute-force reference set.
//!
//! Nothing here runs on the update path. [`Tree::validate`] checks the
//! coloring properties, bucket sizes, the height bound, search-order
//! bookkeeping and the cursor machinery.
//! [`Tree::check_doubly_black_separation`] and
//! [`Tree::check_double_red_separation`] check that pending violations stay
//! separated by a termination case.

use crate::bucket::Side;
use crate::store::{raw_h, BucketId, Color, NodeId, NodeRef, NodeSlot, Tree};
use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub node: Option<NodeRef>,
    pub description: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationStats {
    pub height: usize,
    pub n: usize,
    pub buckets: usize,
    pub min_bucket: usize,
    pub max_bucket: usize,
    pub doubly_black: usize,
    pub double_red_pairs: usize,
    /// Cursors whose target is no longer an ancestor of their bucket. Such a
    /// cursor behaves as if it pointed at the lowest common ancestor.
    pub detached_cursors: usize,
    pub tombstones: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub stats: ValidationStats,
}

impl ValidationReport {
    fn new() -> Self {
        ValidationReport { ok: true, ..Default::default() }
    }

    fn push(&mut self, rule: &'static str, node: Option<NodeRef>, description: impl Into<String>) {
        self.ok = false;
        self.violations.push(Violation { rule, node, description: description.into() });
    }

    /// Folds `other`'s violations into this report.
    pub fn absorb(&mut self, other: ValidationReport) {
        self.ok &= other.ok;
        self.violations.extend(other.violations);
    }
}

/// Euler-tour intervals and orders from one traversal of the live tree.
struct Shape {
    node_span: Vec<Option<(u32, u32)>>,
    bucket_span: Vec<Option<(u32, u32)>>,
    preorder: Vec<NodeId>,
    leaves: Vec<BucketId>,
    height: usize,
}

impl Shape {
    fn span(&self, r: NodeRef) -> Option<(u32, u32)> {
        match r {
            NodeRef::Internal(id) => self.node_span.get(id.index()).copied().flatten(),
            NodeRef::Bucket(id) => self.bucket_span.get(id.index()).copied().flatten(),
        }
    }

    /// Whether `x` is `anc` or one of its descendants.
    fn within(&self, x: NodeRef, anc: NodeRef) -> bool {
        match (self.span(x), self.span(anc)) {
            (Some((xi, xo)), Some((ai, ao))) => ai <= xi && xo <= ao,
            _ => false,
        }
    }
}

enum Visit<'a, K> {
    Enter { r: NodeRef, parent: Option<NodeId>, depth: usize, lo: Option<&'a K>, hi: Option<&'a K> },
    Exit(NodeId),
}

impl<K: Ord + Clone> Tree<K> {
    fn shape(&self, report: &mut ValidationReport) -> Shape {
        let mut shape = Shape {
            node_span: vec![None; self.nodes.len()],
            bucket_span: vec![None; self.buckets.len()],
            preorder: Vec::new(),
            leaves: Vec::new(),
            height: 0,
        };
        let mut clock = 0u32;
        let mut stack = vec![Visit::Enter { r: self.root, parent: None, depth: 0, lo: None, hi: None }];
        while let Some(v) = stack.pop() {
            let (r, parent, depth, lo, hi) = match v {
                Visit::Exit(id) => {
                    if let Some(span) = shape.node_span[id.index()].as_mut() {
                        span.1 = clock;
                    }
                    clock += 1;
                    continue;
                }
                Visit::Enter { r, parent, depth, lo, hi } => (r, parent, depth, lo, hi),
            };
            let live = match r {
                NodeRef::Internal(id) => self.is_live_node(id),
                NodeRef::Bucket(id) => self.is_live_bucket(id),
            };
            if !live {
                report.push("structure", Some(r), "link to a dead slot");
                continue;
            }
            if shape.span(r).is_some() {
                report.push("structure", Some(r), "node reachable twice");
                continue;
            }
            if self.parent_of(r) != parent {
                report.push("structure", Some(r), "parent link disagrees with child link");
            }
            match r {
                NodeRef::Bucket(b) => {
                    shape.bucket_span[b.index()] = Some((clock, clock));
                    clock += 1;
                    shape.leaves.push(b);
                    shape.height = shape.height.max(depth);
                    let bk = self.bucket(b);
                    if bk.lower.as_ref() != lo || bk.upper.as_ref() != hi {
                        report.push("fence", Some(r), "bucket routing bounds differ from its ancestors' separators");
                    }
                    let mut cur = bk.head;
                    while let Some(e) = cur {
                        let k = self.key_of(e);
                        if lo.is_some_and(|lo| k <= lo) || hi.is_some_and(|hi| k > hi) {
                            report.push("separator", Some(r), format!("entry {e} lies outside the bucket's routing range"));
                            break;
                        }
                        cur = self.entries[e as usize].next;
                    }
                }
                NodeRef::Internal(id) => {
                    shape.node_span[id.index()] = Some((clock, clock));
                    clock += 1;
                    shape.preorder.push(id);
                    let node = self.node(id);
                    let sep = &node.separator;
                    if lo.is_some_and(|lo| sep <= lo) || hi.is_some_and(|hi| sep > hi) {
                        report.push("separator", Some(r), "separator outside the range routed to this node");
                    }
                    stack.push(Visit::Exit(id));
                    let d = depth + 1;
                    stack.push(Visit::Enter { r: node.right, parent: Some(id), depth: d, lo: Some(sep), hi });
                    stack.push(Visit::Enter { r: node.left, parent: Some(id), depth: d, lo, hi: Some(sep) });
                }
            }
        }
        shape
    }

    /// The node a bucket's cursor effectively points at: tombstones are
    /// followed to the node that replaced them, and a target that rotations
    /// moved off the bucket's path is lifted to the lowest common ancestor.
    fn effective_cursor(&self, b: BucketId, shape: &Shape) -> NodeRef {
        let mut t = self.cursor_of(b);
        while let NodeRef::Internal(id) = t {
            match &self.nodes[id.index()] {
                NodeSlot::Tombstone { forward, .. } => t = forward.map_or(self.root, NodeRef::Internal),
                _ => break,
            }
        }
        let me = NodeRef::Bucket(b);
        while !shape.within(me, t) {
            match self.parent_of(t) {
                Some(p) => t = NodeRef::Internal(p),
                None => return self.root,
            }
        }
        t
    }

    /// Checks the coloring properties, bucket sizes, height bound, ordering
    /// and cursor bookkeeping.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let shape = self.shape(&mut report);
        if !report.ok {
            return report;
        }
        self.check_colors(&shape, &mut report);
        self.check_buckets(&shape, &mut report);
        self.check_cursors(&shape, &mut report);

        let st = &mut report.stats;
        st.height = shape.height;
        st.n = self.n;
        st.buckets = shape.leaves.len();
        st.tombstones = self.nodes.iter().filter(|s| matches!(s, NodeSlot::Tombstone { .. })).count();
        let (db, dr, buckets) = (st.doubly_black, st.double_red_pairs, st.buckets);

        if shape.preorder.len() != self.n {
            report.push("count", None, format!("{} reachable internal nodes, n = {}", shape.preorder.len(), self.n));
        }
        let live_nodes = self.nodes.iter().filter(|s| matches!(s, NodeSlot::Live(_))).count();
        if live_nodes != shape.preorder.len() {
            report.push("count", None, format!("{live_nodes} live internal slots but {} reachable", shape.preorder.len()));
        }
        if self.bucket_count() != buckets {
            report.push("count", None, format!("{} live buckets but {buckets} reachable", self.bucket_count()));
        }
        if shape.height > self.h as usize {
            report.push("height", None, format!("height {} exceeds H = {}", shape.height, self.h));
        }
        if self.n >= 1000 && shape.height > raw_h(self.n) as usize {
            report.push("height-bound", None, format!("height {} exceeds the bound {} for n = {}", shape.height, raw_h(self.n), self.n));
        }
        if db > buckets || dr > buckets {
            report.push("violation-count", None, format!("{db} doubly-black nodes, {dr} double-red pairs, {buckets} buckets"));
        }
        report
    }

    fn check_colors(&self, shape: &Shape, report: &mut ValidationReport) {
        if let NodeRef::Internal(root) = self.root {
            if self.node(root).color != Color::Black {
                report.push("root-color", Some(self.root), "root is red");
            }
        }
        if self.is_doubly_black(self.root) {
            report.push("root-color", Some(self.root), "root is doubly black");
        }
        // counted black heights, children before parents
        let mut bh = vec![0u32; self.nodes.len()];
        let bh_of = |r: NodeRef, bh: &[u32]| match r {
            NodeRef::Bucket(b) => 1 + self.bucket(b).doubly_black as u32,
            NodeRef::Internal(id) => bh[id.index()],
        };
        for &id in shape.preorder.iter().rev() {
            let node = self.node(id);
            let me = Some(NodeRef::Internal(id));
            if node.color == Color::Red && node.doubly_black {
                report.push("flag-color", me, "red node carries a doubly-black flag");
            }
            if node.color == Color::Red && node.parent.is_some_and(|p| self.node(p).color == Color::Red) {
                report.stats.double_red_pairs += 1;
                if self.is_red(node.left) || self.is_red(node.right) {
                    report.push("red-chain", me, "red node with a red parent has a red child");
                }
            }
            if node.doubly_black {
                report.stats.doubly_black += 1;
            }
            let (l, r) = (bh_of(node.left, &bh), bh_of(node.right, &bh));
            if l != r {
                report.push("black-height", me, format!("children have counted black heights {l} and {r}"));
            }
            let own = match node.color {
                Color::Red => 0,
                Color::Black => 1 + node.doubly_black as u32,
            };
            bh[id.index()] = own + l.max(r);
        }
        for &b in &shape.leaves {
            if self.bucket(b).doubly_black {
                report.stats.doubly_black += 1;
            }
        }
    }

    fn check_buckets(&self, shape: &Shape, report: &mut ValidationReport) {
        let h = self.h as usize;
        let sole_root = shape.leaves.len() == 1;
        report.stats.min_bucket = usize::MAX;
        let mut total = 0;
        let mut prev_key: Option<&K> = None;
        let mut listed = self.first_bucket_chain(report);
        if listed != shape.leaves {
            report.push("bucket-order", None, "bucket list differs from the in-order leaf sequence");
            listed.clear();
        }
        for &b in &shape.leaves {
            let bk = self.bucket(b);
            let me = Some(NodeRef::Bucket(b));
            let l = bk.len;
            total += l;
            report.stats.min_bucket = report.stats.min_bucket.min(l);
            report.stats.max_bucket = report.stats.max_bucket.max(l);
            if !sole_root && (2 * l < h || l > 2 * h) {
                report.push("bucket-size", me, format!("bucket size {l} outside [{}, {}]", h.div_ceil(2), 2 * h));
            }

            let copies = self.bucket_copies(b);
            let mut refs: HashMap<u32, u32> = HashMap::new();
            let (mut count, mut left, mut right) = (0, 0, 0);
            let mut last_left = None;
            let mut seen_right = false;
            let mut prev = None;
            let mut cur = bk.head;
            while let Some(e) = cur {
                let slot = &self.entries[e as usize];
                count += 1;
                if count > l {
                    report.push("entries", me, "entry list longer than the recorded size");
                    break;
                }
                if slot.prev != prev {
                    report.push("entries", me, format!("entry {e} has a wrong back link"));
                }
                let k = self.key_of(e);
                if prev_key.is_some_and(|p| p >= k) {
                    report.push("order", me, format!("entry {e} is not greater than its predecessor"));
                }
                prev_key = Some(k);
                if !copies.contains(&slot.copy) {
                    report.push("copies", me, format!("entry {e} refers to a copy of another bucket"));
                } else {
                    *refs.entry(slot.copy).or_default() += 1;
                }
                match self.copies[slot.copy as usize].side {
                    Side::Left => {
                        left += 1;
                        last_left = Some(e);
                        if seen_right {
                            report.push("middle", me, format!("left-side entry {e} after a right-side entry"));
                        }
                    }
                    Side::Right => {
                        right += 1;
                        seen_right = true;
                    }
                }
                prev = Some(e);
                cur = slot.next;
            }
            if count != l || bk.tail != prev {
                report.push("entries", me, "size or tail link disagrees with the entry list");
            }
            if left != bk.left_count || right != bk.right_count || bk.split != last_left {
                report.push("middle", me, "middle marker or side counts disagree with the entries");
            }
            for &c in &copies {
                let copy = &self.copies[c as usize];
                let n = refs.get(&c).copied().unwrap_or(0);
                if !copy.live || copy.bucket != b {
                    report.push("copies", me, format!("copy {c} is dead or owned by another bucket"));
                }
                if copy.refs != n {
                    report.push("refcount", me, format!("copy {c} records {} refs, has {n}", copy.refs));
                }
            }
            if copies.len() > 4 {
                report.push("copies", me, format!("{} cursor copies", copies.len()));
            }
        }
        if total != self.len {
            report.push("count", None, format!("{total} entries in buckets, len = {}", self.len));
        }
        if report.stats.min_bucket == usize::MAX {
            report.stats.min_bucket = 0;
        }
    }

    fn first_bucket_chain(&self, report: &mut ValidationReport) -> Vec<BucketId> {
        let mut out = Vec::new();
        let mut prev = None;
        let mut cur = Some(self.first_bucket);
        while let Some(b) = cur {
            if !self.is_live_bucket(b) || out.len() > self.buckets.len() {
                report.push("bucket-order", Some(NodeRef::Bucket(b)), "bucket list is broken or cyclic");
                break;
            }
            if self.bucket(b).prev != prev {
                report.push("bucket-order", Some(NodeRef::Bucket(b)), "bucket list back link is wrong");
            }
            out.push(b);
            prev = Some(b);
            cur = self.bucket(b).next;
        }
        out
    }

    fn bucket_copies(&self, b: BucketId) -> Vec<u32> {
        let bk = self.bucket(b);
        let mut v = vec![bk.left_copy, bk.right_copy];
        v.extend(bk.pending.iter().flatten().map(|p| p.copy));
        v
    }

    fn check_cursors(&self, shape: &Shape, report: &mut ValidationReport) {
        let mut expected: HashMap<u32, u32> = HashMap::new();
        for &b in &shape.leaves {
            let me = Some(NodeRef::Bucket(b));
            let target = self.cursor_of(b);
            if self.bucket_copies(b).iter().any(|&c| self.copies[c as usize].target != target) {
                report.push("cursor", me, "cursor copies disagree on the target");
            }
            match target {
                NodeRef::Bucket(t) if t != b => report.push("cursor", me, "cursor targets another bucket"),
                NodeRef::Internal(id) => {
                    if matches!(self.nodes.get(id.index()), None | Some(NodeSlot::Free)) {
                        report.push("cursor", me, "cursor targets a free slot");
                        continue;
                    }
                    *expected.entry(id.0).or_default() += 1;
                }
                _ => {}
            }
            if self.bucket(b).doubly_black && target != NodeRef::Bucket(b) {
                report.push("cursor", me, "doubly-black bucket whose cursor has left it");
            }
            let live_target = matches!(target, NodeRef::Bucket(_)) || self.is_live_node(target.internal().unwrap());
            if live_target && !shape.within(NodeRef::Bucket(b), target) {
                report.stats.detached_cursors += 1;
            }
        }
        for slot in &self.nodes {
            if let NodeSlot::Tombstone { forward: Some(f), .. } = slot {
                *expected.entry(f.0).or_default() += 1;
            }
        }
        for (i, slot) in self.nodes.iter().enumerate() {
            let pins = match slot {
                NodeSlot::Live(n) => n.pins,
                NodeSlot::Tombstone { pins, .. } => {
                    if *pins == 0 {
                        report.push("pins", None, format!("tombstone {i} has no pins"));
                    }
                    *pins
                }
                NodeSlot::Free => continue,
            };
            let want = expected.get(&(i as u32)).copied().unwrap_or(0);
            if pins != want {
                report.push("pins", None, format!("slot {i} has {pins} pins, expected {want}"));
            }
        }
    }

    /// Every path from a doubly-black node down to another doubly-black node,
    /// or to a bucket that is not proper for it, passes a red node.
    pub fn check_doubly_black_separation(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let shape = self.shape(&mut report);
        if !report.ok {
            return report;
        }
        let cursors: Vec<(BucketId, NodeRef)> =
            shape.leaves.iter().map(|&b| (b, self.effective_cursor(b, &shape))).collect();
        let cursor_of: HashMap<BucketId, NodeRef> = cursors.into_iter().collect();
        for &id in &shape.preorder {
            if !self.node(id).doubly_black {
                continue;
            }
            let top = NodeRef::Internal(id);
            let node = self.node(id);
            let mut stack = vec![node.left, node.right];
            while let Some(r) = stack.pop() {
                match r {
                    NodeRef::Bucket(b) => {
                        if self.bucket(b).doubly_black {
                            report.push("db-separation", Some(top), format!("doubly-black bucket {} below without a red node between", b.0));
                        } else if !shape.within(cursor_of[&b], top) {
                            report.push("db-separation", Some(top), format!("non-proper bucket {} below without a red node between", b.0));
                        }
                    }
                    NodeRef::Internal(c) => {
                        let cn = self.node(c);
                        if cn.color == Color::Red {
                            continue;
                        }
                        if cn.doubly_black {
                            report.push("db-separation", Some(top), format!("doubly-black node {} below without a red node between", c.0));
                            continue;
                        }
                        stack.push(cn.left);
                        stack.push(cn.right);
                    }
                }
            }
        }
        report
    }

    /// Every path from a double-red pair down to another double-red pair, or
    /// to a bucket that is not proper for it, passes two consecutive black
    /// nodes or a doubly-black node. A black bucket right under a black node
    /// completes a pair.
    pub fn check_double_red_separation(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let shape = self.shape(&mut report);
        if !report.ok {
            return report;
        }
        let cursor_of: HashMap<BucketId, NodeRef> =
            shape.leaves.iter().map(|&b| (b, self.effective_cursor(b, &shape))).collect();
        for &id in &shape.preorder {
            let node = self.node(id);
            if node.color != Color::Red || !node.parent.is_some_and(|p| self.node(p).color == Color::Red) {
                continue;
            }
            let top = NodeRef::Internal(id);
            // (node, parent was black)
            let mut stack = vec![(node.left, false), (node.right, false)];
            while let Some((r, prev_black)) = stack.pop() {
                match r {
                    NodeRef::Bucket(b) => {
                        if prev_black || self.bucket(b).doubly_black {
                            continue;
                        }
                        if !shape.within(cursor_of[&b], top) {
                            report.push("dr-separation", Some(top), format!("non-proper bucket {} below without a termination case", b.0));
                        }
                    }
                    NodeRef::Internal(c) => {
                        let cn = self.node(c);
                        match cn.color {
                            Color::Black if cn.doubly_black || prev_black => continue,
                            Color::Black => {
                                stack.push((cn.left, true));
                                stack.push((cn.right, true));
                            }
                            Color::Red => {
                                if cn.parent.is_some_and(|p| self.node(p).color == Color::Red) {
                                    report.push("dr-separation", Some(top), format!("double-red pair at {} below without a termination case", c.0));
                                    continue;
                                }
                                stack.push((cn.left, false));
                                stack.push((cn.right, false));
                            }
                        }
                    }
                }
            }
        }
        report
    }

    /// [`Tree::validate`] plus both separation checks.
    pub fn validate_all(&self) -> ValidationReport {
        let mut report = self.validate();
        if report.violations.iter().any(|v| v.rule == "structure") {
            return report;
        }
        report.absorb(self.check_doubly_black_separation());
        report.absorb(self.check_double_red_separation());
        report
    }
}

/// Sorted-vector set used as a differential-testing reference.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleSet<K> {
    keys: Vec<K>,
}

impl<K: Ord + Clone> OracleSet<K> {
    pub fn new() -> Self {
        OracleSet { keys: Vec::new() }
    }

    /// Returns false if `key` was already present.
    pub fn insert(&mut self, key: K) -> bool {
        match self.keys.binary_search(&key) {
            Ok(_) => false,
            Err(i) => {
                self.keys.insert(i, key);
                true
            }
        }
    }

    /// Returns false if `key` was absent.
    pub fn remove(&mut self, key: &K) -> bool {
        match self.keys.binary_search(key) {
            Ok(i) => {
                self.keys.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    pub fn contains(&self, key: &K) -> bool {
        self.keys.binary_search(key).is_ok()
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }

    /// Whether `tree` holds exactly the same keys.
    pub fn matches(&self, tree: &Tree<K>) -> bool {
        tree.len() == self.keys.len() && tree.iter().eq(self.keys.iter())
    }
}
