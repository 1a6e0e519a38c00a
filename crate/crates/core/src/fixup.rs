//! One-iteration double-red and doubly-black fix-ups, and the per-bucket
//! dispatcher that walks a bucket's fixing cursor toward the root.
//!
//! Cases are written for the configuration where the violating node's parent
//! (double red) or the violating node itself (doubly black) is a left child;
//! the mirror image is obtained by swapping the rotation direction and the
//! near/far children.

use crate::error::TreeError;
use crate::store::{BucketId, Color, NodeId, NodeRef, NodeSlot, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutcomeKind {
    NoViolation,
    Resolved,
    PropagatedToParent,
    PropagatedToGrandparent,
}

/// Case labels of the two fix-up tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixupCase {
    DoubleRed1,
    DoubleRed1_1,
    DoubleRed2,
    DoubleRed3,
    DoubleRed3_1,
    DoublyBlack1,
    DoublyBlack1_1,
    DoublyBlack1_2a,
    DoublyBlack1_2b,
    DoublyBlack2a,
    DoublyBlack2b,
    DoublyBlack3,
    DoublyBlack4,
}

/// What one fix-up call did. `cases` lists every case body applied, in
/// order (Case 1 may repeat and Case 2/3 chain into later cases).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixupOutcome {
    pub kind: OutcomeKind,
    cases: [Option<FixupCase>; 4],
}

impl FixupOutcome {
    fn none() -> Self {
        FixupOutcome { kind: OutcomeKind::NoViolation, cases: [None; 4] }
    }

    fn push(&mut self, case: FixupCase) {
        if let Some(slot) = self.cases.iter_mut().find(|c| c.is_none()) {
            *slot = Some(case);
        }
    }

    fn with(mut self, kind: OutcomeKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn cases(&self) -> impl Iterator<Item = FixupCase> + '_ {
        self.cases.iter().flatten().copied()
    }
}

impl<K: Ord + Clone> Tree<K> {
    fn child(&self, p: NodeId, left: bool) -> NodeRef {
        let node = self.node(p);
        if left {
            node.left
        } else {
            node.right
        }
    }

    /// Rotation that moves `p` down toward its `left` side.
    fn rotate_down(&mut self, p: NodeId, toward_left: bool) -> Result<NodeId, TreeError> {
        if toward_left {
            self.rotate_left(p)
        } else {
            self.rotate_right(p)
        }
    }

    fn swap_color_state(&mut self, a: NodeId, b: NodeId) {
        let (ca, da) = (self.node(a).color, self.node(a).doubly_black);
        let (cb, db) = (self.node(b).color, self.node(b).doubly_black);
        self.set_color(a, cb);
        self.set_doubly_black(NodeRef::Internal(a), db);
        self.set_color(b, ca);
        self.set_doubly_black(NodeRef::Internal(b), da);
    }

    /// One dispatcher step for bucket `b`: fix the node under the cursor if it
    /// is violating, then advance the cursor to that node's parent.
    pub fn fixup_step(&mut self, b: BucketId) -> Result<FixupOutcome, TreeError> {
        let v = self.cursor_of(b);
        if let NodeRef::Internal(id) = v {
            if let NodeSlot::Tombstone { forward, .. } = self.nodes[id.index()] {
                let next = forward.map_or(self.root, NodeRef::Internal);
                self.set_cursor(b, next);
                self.op.fixup_steps += 1;
                return Ok(FixupOutcome::none());
            }
        }
        if self.is_root(v) {
            return Ok(FixupOutcome::none());
        }
        self.op.fixup_steps += 1;
        let outcome = match v {
            NodeRef::Internal(id)
                if self.node(id).color == Color::Red
                    && self.node(id).parent.is_some_and(|p| self.node(p).color == Color::Red) =>
            {
                self.double_red_fixup(id)?
            }
            _ if self.is_doubly_black(v) => self.doubly_black_fixup(v)?,
            _ => FixupOutcome::none(),
        };
        let next = match self.parent_of(v) {
            Some(p) => NodeRef::Internal(p),
            None => v,
        };
        self.set_cursor(b, next);
        Ok(outcome)
    }

    /// One iteration of the double-red fix-up at red node `n` with red parent.
    pub fn double_red_fixup(&mut self, n: NodeId) -> Result<FixupOutcome, TreeError> {
        let mut out = FixupOutcome::none();
        let p = self.node(n).parent.ok_or_else(|| TreeError::contract("double red at the root"))?;
        let g = self
            .node(p)
            .parent
            .ok_or_else(|| TreeError::contract("red node whose parent is a red root"))?;
        let p_is_left = self.node(g).left == NodeRef::Internal(p);
        let u = self.child(g, !p_is_left);

        if self.is_red(u) {
            let u = u.internal().expect("red nodes are internal");
            self.set_color(p, Color::Black);
            self.set_color(u, Color::Black);
            if self.node(g).doubly_black {
                self.set_doubly_black(NodeRef::Internal(g), false);
                out.push(FixupCase::DoubleRed1_1);
                return Ok(out.with(OutcomeKind::Resolved));
            }
            out.push(FixupCase::DoubleRed1);
            if self.is_root(NodeRef::Internal(g)) {
                return Ok(out.with(OutcomeKind::Resolved));
            }
            self.set_color(g, Color::Red);
            let gp_red = self.node(g).parent.is_some_and(|q| self.node(q).color == Color::Red);
            let kind = if gp_red { OutcomeKind::PropagatedToGrandparent } else { OutcomeKind::Resolved };
            return Ok(out.with(kind));
        }

        let mut upper = p;
        let n_is_left = self.node(p).left == NodeRef::Internal(n);
        if n_is_left != p_is_left {
            // inner child: rotate it to the outside, then it is the upper red
            self.rotate_down(p, p_is_left)?;
            upper = n;
            out.push(FixupCase::DoubleRed2);
        }
        let g_doubly_black = self.node(g).doubly_black;
        self.rotate_down(g, !p_is_left)?;
        if g_doubly_black {
            self.set_doubly_black(NodeRef::Internal(g), false);
            self.set_color(g, Color::Red);
            self.set_color(upper, Color::Black);
            self.set_doubly_black(NodeRef::Internal(upper), true);
            out.push(FixupCase::DoubleRed3_1);
        } else {
            self.set_color(upper, Color::Black);
            self.set_color(g, Color::Red);
            out.push(FixupCase::DoubleRed3);
        }
        Ok(out.with(OutcomeKind::Resolved))
    }

    /// One iteration of the doubly-black fix-up at `n`.
    pub fn doubly_black_fixup(&mut self, n: NodeRef) -> Result<FixupOutcome, TreeError> {
        let mut out = FixupOutcome::none();
        let Some(p) = self.parent_of(n) else {
            self.set_doubly_black(n, false);
            return Ok(out.with(OutcomeKind::Resolved));
        };
        let n_is_left = self.node(p).left == n;
        let mut repeats = 0;
        loop {
            let s = self.child(p, !n_is_left);
            if self.is_red(s) {
                repeats += 1;
                if repeats > 2 {
                    return Err(TreeError::contract("doubly-black Case 1 needed a third repetition"));
                }
                let s = s.internal().expect("red nodes are internal");
                self.rotate_down(p, n_is_left)?;
                if self.node(p).color == Color::Black {
                    // s takes over p's full state, including a deficit flag
                    self.swap_color_state(p, s);
                    out.push(FixupCase::DoublyBlack1);
                } else {
                    out.push(FixupCase::DoublyBlack1_1);
                }
                continue;
            }

            if self.is_doubly_black(s) {
                self.set_doubly_black(s, false);
                self.set_doubly_black(n, false);
                if self.node(p).color == Color::Red {
                    self.set_color(p, Color::Black);
                    out.push(FixupCase::DoublyBlack1_2a);
                    return Ok(out.with(OutcomeKind::Resolved));
                }
                out.push(FixupCase::DoublyBlack1_2b);
                return self.push_deficit_up(p, out);
            }

            let s = s
                .internal()
                .ok_or_else(|| TreeError::contract("doubly-black node with a plain bucket sibling"))?;
            let near = self.child(s, n_is_left);
            let far = self.child(s, !n_is_left);

            if !self.is_red(far) && self.is_red(near) {
                let near = near.internal().expect("red nodes are internal");
                self.rotate_down(s, !n_is_left)?;
                self.swap_color_state(s, near);
                out.push(FixupCase::DoublyBlack3);
                continue;
            }
            if self.is_red(far) {
                let far = far.internal().expect("red nodes are internal");
                self.rotate_down(p, n_is_left)?;
                self.swap_color_state(p, s);
                self.set_color(far, Color::Black);
                self.set_doubly_black(n, false);
                out.push(FixupCase::DoublyBlack4);
                return Ok(out.with(OutcomeKind::Resolved));
            }

            // both children of s black
            self.set_color(s, Color::Red);
            self.set_doubly_black(n, false);
            if self.node(p).color == Color::Red {
                self.set_color(p, Color::Black);
                out.push(FixupCase::DoublyBlack2a);
                return Ok(out.with(OutcomeKind::Resolved));
            }
            out.push(FixupCase::DoublyBlack2b);
            return self.push_deficit_up(p, out);
        }
    }

    /// Black parent absorbing a deficit from both children: flag it unless it
    /// is the root.
    fn push_deficit_up(&mut self, p: NodeId, out: FixupOutcome) -> Result<FixupOutcome, TreeError> {
        if self.is_root(NodeRef::Internal(p)) {
            return Ok(out.with(OutcomeKind::Resolved));
        }
        if self.node(p).doubly_black {
            return Err(TreeError::contract("deficit propagated into a node that is already doubly black"));
        }
        self.set_doubly_black(NodeRef::Internal(p), true);
        Ok(out.with(OutcomeKind::PropagatedToParent))
    }

    /// Runs fix-up steps for `b` until its cursor targets the root. Returns the
    /// number of steps. Steps beyond `cap` are recorded in the stats.
    pub fn push_cursor_to_root(&mut self, b: BucketId, cap: usize) -> Result<usize, TreeError> {
        let mut steps = 0usize;
        let limit = 4 * self.nodes.len() + 16;
        while !self.is_root(self.cursor_of(b)) {
            self.fixup_step(b)?;
            steps += 1;
            if steps > limit {
                return Err(TreeError::contract("fixing cursor never reached the root"));
            }
        }
        self.stats.max_push_steps = self.stats.max_push_steps.max(steps as u64);
        if steps > cap {
            self.stats.push_cap_exceeded += 1;
        }
        Ok(steps)
    }
}
