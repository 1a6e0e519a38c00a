//! Hand-built trees for tests and experiments.
//!
//! A [`Layout`] describes shape, colors and doubly-black flags; keys are
//! assigned `1, 2, 3, …` in order and every separator is the largest key of
//! its left subtree. All fixing cursors start at the root, so the built tree
//! has no outstanding local work besides the violations drawn into it.

use crate::store::{BucketId, Color, Internal, NodeId, NodeRef, Tree};
use crate::Config;
use std::fmt::{Debug, Write as _};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Layout {
    Leaf { size: usize, doubly_black: bool },
    Node { color: Color, doubly_black: bool, left: Box<Layout>, right: Box<Layout> },
}

impl Layout {
    pub fn leaf(size: usize) -> Self {
        Layout::Leaf { size, doubly_black: false }
    }

    pub fn black(left: Layout, right: Layout) -> Self {
        Layout::Node { color: Color::Black, doubly_black: false, left: Box::new(left), right: Box::new(right) }
    }

    pub fn red(left: Layout, right: Layout) -> Self {
        Layout::Node { color: Color::Red, doubly_black: false, left: Box::new(left), right: Box::new(right) }
    }

    /// Sets the doubly-black flag.
    pub fn db(self) -> Self {
        match self {
            Layout::Leaf { size, .. } => Layout::Leaf { size, doubly_black: true },
            Layout::Node { color, left, right, .. } => Layout::Node { color, doubly_black: true, left, right },
        }
    }

    /// Left-right mirror image.
    pub fn mirror(&self) -> Self {
        match self {
            Layout::Leaf { .. } => self.clone(),
            Layout::Node { color, doubly_black, left, right } => Layout::Node {
                color: *color,
                doubly_black: *doubly_black,
                left: Box::new(right.mirror()),
                right: Box::new(left.mirror()),
            },
        }
    }
}

impl Tree<i64> {
    /// Builds the tree drawn by `layout`.
    pub fn from_layout(layout: &Layout, config: Config) -> Self {
        let mut tree = Tree::bare(config);
        let mut next_key = 1i64;
        let mut prev_bucket = None;
        let root = tree.build(layout, None, &mut next_key, &mut prev_bucket);
        tree.root = root;
        tree.recompute_h();
        tree.stats = Default::default();
        tree.stats.spacing.init(tree.h);
        let buckets: Vec<BucketId> = (0..tree.buckets.len() as u32).map(BucketId).collect();
        for b in buckets {
            tree.set_cursor(b, root);
        }
        tree.scan = Some(tree.first_bucket);
        tree.op = Default::default();
        tree
    }

    fn build(
        &mut self,
        layout: &Layout,
        parent: Option<NodeId>,
        next_key: &mut i64,
        prev_bucket: &mut Option<BucketId>,
    ) -> NodeRef {
        match layout {
            Layout::Leaf { size, doubly_black } => {
                let b = self.alloc_empty_bucket(parent, *prev_bucket, None);
                if let Some(p) = *prev_bucket {
                    self.bucket_mut(p).next = Some(b);
                    self.bucket_mut(b).lower = Some(*next_key - 1);
                }
                for _ in 0..*size {
                    self.bucket_insert_at(b, None, *next_key);
                    *next_key += 1;
                }
                self.len += size;
                self.bucket_mut(b).doubly_black = *doubly_black;
                *prev_bucket = Some(b);
                NodeRef::Bucket(b)
            }
            Layout::Node { color, doubly_black, left, right } => {
                let id = self.alloc_node(Internal {
                    color: *color,
                    doubly_black: *doubly_black,
                    separator: 0,
                    left: NodeRef::Bucket(BucketId(0)),
                    right: NodeRef::Bucket(BucketId(0)),
                    parent,
                    pins: 0,
                });
                self.n += 1;
                let l = self.build(left, Some(id), next_key, prev_bucket);
                let sep = *next_key - 1;
                let last = prev_bucket.expect("left subtree has a bucket");
                self.bucket_mut(last).upper = Some(sep);
                let r = self.build(right, Some(id), next_key, prev_bucket);
                let node = self.node_mut(id);
                node.separator = sep;
                node.left = l;
                node.right = r;
                NodeRef::Internal(id)
            }
        }
    }
}

impl<K: Ord + Clone + Debug> Tree<K> {
    /// Compact drawing of the tree: `B:sep(left,right)` for a black node,
    /// `R:` for red, `BB:` for doubly black, and `[k1 k2 …]` for a bucket
    /// (followed by `!` when doubly black).
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(self.root, &mut out);
        out
    }

    fn render_into(&self, r: NodeRef, out: &mut String) {
        match r {
            NodeRef::Bucket(b) => {
                out.push('[');
                let mut cur = self.bucket(b).head;
                let mut first = true;
                while let Some(e) = cur {
                    if !first {
                        out.push(' ');
                    }
                    first = false;
                    let _ = write!(out, "{:?}", self.key_of(e));
                    cur = self.entries[e as usize].next;
                }
                out.push(']');
                if self.bucket(b).doubly_black {
                    out.push('!');
                }
            }
            NodeRef::Internal(id) => {
                let node = self.node(id);
                let tag = match (node.color, node.doubly_black) {
                    (Color::Red, false) => "R",
                    (Color::Red, true) => "R!",
                    (Color::Black, false) => "B",
                    (Color::Black, true) => "BB",
                };
                let _ = write!(out, "{tag}:{:?}(", node.separator);
                self.render_into(node.left, out);
                out.push(',');
                self.render_into(node.right, out);
                out.push(')');
            }
        }
    }
}

impl<K: Ord + Clone> Tree<K> {
    /// The node reached from the root by a path of `L`/`R` steps.
    pub fn node_at(&self, path: &str) -> Option<NodeRef> {
        let mut cur = self.root;
        for step in path.chars() {
            let id = cur.internal()?;
            let node = self.node(id);
            cur = match step {
                'L' => node.left,
                'R' => node.right,
                _ => return None,
            };
        }
        Some(cur)
    }

    /// Points bucket `b`'s fixing cursor at `target`.
    pub fn set_bucket_cursor(&mut self, b: BucketId, target: NodeRef) {
        self.set_cursor(b, target);
    }

    /// Bucket ids in key order.
    pub fn bucket_ids(&self) -> Vec<BucketId> {
        let mut out = Vec::new();
        let mut cur = Some(self.first_bucket);
        while let Some(b) = cur {
            out.push(b);
            cur = self.bucket(b).next;
        }
        out
    }
}
