//! Slot-indexed node storage, rotations and search descent.
//!
//! Internal nodes and bucket leaves live in two separate arenas addressed by
//! [`NodeId`] and [`BucketId`]. Freed slots go on a free list and are reused.
//! An internal node that is unlinked from the tree while some bucket's fixing
//! cursor still targets it is kept as a tombstone that forwards to the node
//! that took its place, so cursors never dangle.

use crate::bucket::{Bucket, CursorCopy, EntrySlot};
use crate::counters::{TreeStats, WorkCounter};
use crate::error::TreeError;
use crate::Config;

/// Floor applied to the height budget so the size thresholds stay coherent
/// for tiny trees.
pub const H_MIN_DEFAULT: u32 = 12;

/// Index of an internal (router) node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

/// Index of a bucket leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BucketId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl BucketId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A handle to any node of the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeRef {
    Internal(NodeId),
    Bucket(BucketId),
}

impl NodeRef {
    pub fn internal(self) -> Option<NodeId> {
        match self {
            NodeRef::Internal(id) => Some(id),
            NodeRef::Bucket(_) => None,
        }
    }

    pub fn bucket(self) -> Option<BucketId> {
        match self {
            NodeRef::Bucket(id) => Some(id),
            NodeRef::Internal(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Color {
    Red,
    Black,
}

#[derive(Clone, Debug)]
pub(crate) struct Internal<K> {
    pub color: Color,
    pub doubly_black: bool,
    pub separator: K,
    pub left: NodeRef,
    pub right: NodeRef,
    pub parent: Option<NodeId>,
    /// Buckets whose cursor targets this node, plus tombstones forwarding here.
    pub pins: u32,
}

#[derive(Clone, Debug)]
pub(crate) enum NodeSlot<K> {
    Live(Internal<K>),
    Tombstone { forward: Option<NodeId>, pins: u32 },
    Free,
}

/// `max(ceil(4.32 * log2(n + 2)), h_min)`.
pub fn compute_h(n: usize, h_min: u32) -> u32 {
    raw_h(n).max(h_min)
}

/// `ceil(4.32 * log2(n + 2))` without the floor.
pub fn raw_h(n: usize) -> u32 {
    let x = height_bound(n);
    let r = x.round();
    // products that land on an integer must not be bumped up by rounding noise
    if (x - r).abs() < 1e-9 {
        r as u32
    } else {
        x.ceil() as u32
    }
}

/// The real-valued height bound `4.32 * log2(n + 2)`.
pub fn height_bound(n: usize) -> f64 {
    4.32 * ((n as f64) + 2.0).log2()
}

/// The ordered set. See the crate docs for the update model.
pub struct Tree<K> {
    pub(crate) nodes: Vec<NodeSlot<K>>,
    pub(crate) free_nodes: Vec<u32>,
    pub(crate) buckets: Vec<Option<Bucket<K>>>,
    pub(crate) free_buckets: Vec<u32>,
    pub(crate) entries: Vec<EntrySlot<K>>,
    pub(crate) free_entries: Vec<u32>,
    pub(crate) copies: Vec<CursorCopy>,
    pub(crate) free_copies: Vec<u32>,
    pub(crate) root: NodeRef,
    /// Leftmost bucket. Splits keep the left half in place and merges free
    /// the right bucket, so this never changes after construction.
    pub(crate) first_bucket: BucketId,
    pub(crate) n: usize,
    pub(crate) h: u32,
    pub(crate) len: usize,
    pub(crate) scan: Option<BucketId>,
    pub(crate) config: Config,
    pub(crate) op: WorkCounter,
    pub(crate) totals: WorkCounter,
    pub(crate) stats: TreeStats,
}

impl<K: Ord + Clone> Default for Tree<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord + Clone> Tree<K> {
    pub fn new() -> Self {
        Self::with_config(Config::default())
    }

    pub fn with_config(config: Config) -> Self {
        let mut tree = Self::bare(config);
        let b = tree.alloc_empty_bucket(None, None, None);
        debug_assert_eq!(b, BucketId(0));
        tree.set_cursor(b, NodeRef::Bucket(b));
        tree.scan = Some(b);
        tree
    }

    /// A tree with no buckets at all; callers must allocate bucket 0 first.
    pub(crate) fn bare(config: Config) -> Self {
        let h = compute_h(0, config.h_min);
        let mut stats = TreeStats::default();
        stats.spacing.init(h);
        Tree {
            nodes: Vec::new(),
            free_nodes: Vec::new(),
            buckets: Vec::new(),
            free_buckets: Vec::new(),
            entries: Vec::new(),
            free_entries: Vec::new(),
            copies: Vec::new(),
            free_copies: Vec::new(),
            root: NodeRef::Bucket(BucketId(0)),
            first_bucket: BucketId(0),
            n: 0,
            h,
            len: 0,
            scan: None,
            config,
            op: WorkCounter::default(),
            totals: WorkCounter::default(),
            stats,
        }
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    /// Number of stored keys.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of live internal nodes.
    pub fn internal_nodes(&self) -> usize {
        self.n
    }

    /// Current effective height budget.
    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn root(&self) -> NodeRef {
        self.root
    }

    // ---- arena access ----

    pub(crate) fn node(&self, id: NodeId) -> &Internal<K> {
        match &self.nodes[id.index()] {
            NodeSlot::Live(n) => n,
            _ => panic!("dereferenced dead internal node {id:?}"),
        }
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut Internal<K> {
        match &mut self.nodes[id.index()] {
            NodeSlot::Live(n) => n,
            _ => panic!("dereferenced dead internal node {id:?}"),
        }
    }

    pub(crate) fn is_live_node(&self, id: NodeId) -> bool {
        matches!(self.nodes.get(id.index()), Some(NodeSlot::Live(_)))
    }

    pub(crate) fn bucket(&self, id: BucketId) -> &Bucket<K> {
        self.buckets[id.index()]
            .as_ref()
            .unwrap_or_else(|| panic!("dereferenced dead bucket {id:?}"))
    }

    pub(crate) fn bucket_mut(&mut self, id: BucketId) -> &mut Bucket<K> {
        self.buckets[id.index()]
            .as_mut()
            .unwrap_or_else(|| panic!("dereferenced dead bucket {id:?}"))
    }

    pub(crate) fn is_live_bucket(&self, id: BucketId) -> bool {
        matches!(self.buckets.get(id.index()), Some(Some(_)))
    }

    pub(crate) fn alloc_node(&mut self, node: Internal<K>) -> NodeId {
        if let Some(i) = self.free_nodes.pop() {
            self.nodes[i as usize] = NodeSlot::Live(node);
            NodeId(i)
        } else {
            self.nodes.push(NodeSlot::Live(node));
            NodeId(self.nodes.len() as u32 - 1)
        }
    }

    /// Unlinks an internal node's slot. If cursors still target it the slot
    /// becomes a tombstone forwarding to `forward`.
    pub(crate) fn release_node(&mut self, id: NodeId, forward: Option<NodeId>) {
        let pins = self.node(id).pins;
        if pins == 0 {
            self.nodes[id.index()] = NodeSlot::Free;
            self.free_nodes.push(id.0);
        } else {
            self.nodes[id.index()] = NodeSlot::Tombstone { forward, pins };
            if let Some(f) = forward {
                self.pin(NodeRef::Internal(f));
            }
            self.stats.tombstones_created += 1;
        }
    }

    pub(crate) fn pin(&mut self, target: NodeRef) {
        if let NodeRef::Internal(id) = target {
            match &mut self.nodes[id.index()] {
                NodeSlot::Live(n) => n.pins += 1,
                NodeSlot::Tombstone { pins, .. } => *pins += 1,
                NodeSlot::Free => panic!("pinned a free node slot {id:?}"),
            }
        }
    }

    pub(crate) fn unpin(&mut self, target: NodeRef) {
        let mut cur = target.internal();
        while let Some(id) = cur {
            cur = None;
            match &mut self.nodes[id.index()] {
                NodeSlot::Live(n) => n.pins -= 1,
                NodeSlot::Tombstone { forward, pins } => {
                    *pins -= 1;
                    if *pins == 0 {
                        cur = *forward;
                        self.nodes[id.index()] = NodeSlot::Free;
                        self.free_nodes.push(id.0);
                        self.stats.tombstones_released += 1;
                    }
                }
                NodeSlot::Free => panic!("unpinned a free node slot {id:?}"),
            }
        }
    }

    // ---- generic node views ----

    pub(crate) fn parent_of(&self, r: NodeRef) -> Option<NodeId> {
        match r {
            NodeRef::Internal(id) => self.node(id).parent,
            NodeRef::Bucket(id) => self.bucket(id).parent,
        }
    }

    pub(crate) fn set_parent(&mut self, r: NodeRef, parent: Option<NodeId>) {
        match r {
            NodeRef::Internal(id) => self.node_mut(id).parent = parent,
            NodeRef::Bucket(id) => self.bucket_mut(id).parent = parent,
        }
    }

    pub(crate) fn is_red(&self, r: NodeRef) -> bool {
        match r {
            NodeRef::Internal(id) => self.node(id).color == Color::Red,
            NodeRef::Bucket(_) => false,
        }
    }

    pub(crate) fn is_doubly_black(&self, r: NodeRef) -> bool {
        match r {
            NodeRef::Internal(id) => self.node(id).doubly_black,
            NodeRef::Bucket(id) => self.bucket(id).doubly_black,
        }
    }

    pub(crate) fn set_color(&mut self, id: NodeId, color: Color) {
        let node = self.node_mut(id);
        if node.color != color {
            node.color = color;
            self.op.recolorings += 1;
        }
    }

    pub(crate) fn set_doubly_black(&mut self, r: NodeRef, flag: bool) {
        let slot = match r {
            NodeRef::Internal(id) => &mut self.node_mut(id).doubly_black,
            NodeRef::Bucket(id) => &mut self.bucket_mut(id).doubly_black,
        };
        if *slot != flag {
            *slot = flag;
            self.op.recolorings += 1;
        }
    }

    /// Points `parent`'s link that currently holds `old` at `new`; a `None`
    /// parent means `old` was the root.
    pub(crate) fn replace_child(&mut self, parent: Option<NodeId>, old: NodeRef, new: NodeRef) {
        match parent {
            None => self.root = new,
            Some(p) => {
                let node = self.node_mut(p);
                if node.left == old {
                    node.left = new;
                } else {
                    debug_assert_eq!(node.right, old);
                    node.right = new;
                }
            }
        }
        self.set_parent(new, parent);
    }

    /// Left rotation at `x`; returns the new subtree root. Colors are left to
    /// the caller.
    pub fn rotate_left(&mut self, x: NodeId) -> Result<NodeId, TreeError> {
        let y = self
            .node(x)
            .right
            .internal()
            .ok_or_else(|| TreeError::contract("left rotation with a bucket as right child"))?;
        let beta = self.node(y).left;
        let p = self.node(x).parent;
        self.node_mut(x).right = beta;
        self.set_parent(beta, Some(x));
        self.replace_child(p, NodeRef::Internal(x), NodeRef::Internal(y));
        self.node_mut(y).left = NodeRef::Internal(x);
        self.node_mut(x).parent = Some(y);
        self.op.rotations += 1;
        Ok(y)
    }

    /// Mirror of [`Tree::rotate_left`].
    pub fn rotate_right(&mut self, x: NodeId) -> Result<NodeId, TreeError> {
        let y = self
            .node(x)
            .left
            .internal()
            .ok_or_else(|| TreeError::contract("right rotation with a bucket as left child"))?;
        let beta = self.node(y).right;
        let p = self.node(x).parent;
        self.node_mut(x).left = beta;
        self.set_parent(beta, Some(x));
        self.replace_child(p, NodeRef::Internal(x), NodeRef::Internal(y));
        self.node_mut(y).right = NodeRef::Internal(x);
        self.node_mut(x).parent = Some(y);
        self.op.rotations += 1;
        Ok(y)
    }

    /// Maximum black count over downward paths; a doubly-black node counts
    /// twice and a bucket counts once (twice if doubly black).
    pub fn black_height(&self, r: NodeRef) -> u32 {
        match r {
            NodeRef::Bucket(id) => 1 + self.bucket(id).doubly_black as u32,
            NodeRef::Internal(id) => {
                let node = self.node(id);
                let own = match node.color {
                    Color::Red => 0,
                    Color::Black => 1 + node.doubly_black as u32,
                };
                own + self.black_height(node.left).max(self.black_height(node.right))
            }
        }
    }

    /// Number of internal nodes on the longest root-to-bucket path.
    pub fn height(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(self.root, 0usize)];
        while let Some((r, d)) = stack.pop() {
            match r {
                NodeRef::Bucket(_) => best = best.max(d),
                NodeRef::Internal(id) => {
                    let node = self.node(id);
                    stack.push((node.left, d + 1));
                    stack.push((node.right, d + 1));
                }
            }
        }
        best
    }

    /// Routes `key` from the root to its bucket. Returns the bucket and the
    /// number of internal nodes visited.
    pub fn search_descend(&self, key: &K) -> (BucketId, usize) {
        let mut cur = self.root;
        let mut visited = 0;
        loop {
            match cur {
                NodeRef::Bucket(b) => return (b, visited),
                NodeRef::Internal(id) => {
                    visited += 1;
                    let node = self.node(id);
                    cur = if *key <= node.separator { node.left } else { node.right };
                }
            }
        }
    }

    /// Whether `r` is the current root.
    pub(crate) fn is_root(&self, r: NodeRef) -> bool {
        self.root == r
    }

    pub(crate) fn recompute_h(&mut self) {
        let new = compute_h(self.n, self.config.h_min);
        if new != self.h {
            let old = self.h;
            self.h = new;
            self.stats.on_h_change(old, new);
        }
    }
}
