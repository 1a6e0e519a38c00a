//! A relaxed red-black tree whose leaves are buckets of `Θ(log n)` keys.
//!
//! Updates at a known position (a [`Locator`]) do a constant amount of
//! structural work in the worst case: rebalancing is not done eagerly but
//! spread out through a per-bucket *fixing cursor* that climbs toward the root
//! a few steps per update, and through a circular scan over all buckets that
//! keeps bucket sizes legal while the height budget `H` drifts.
//!
//! ```
//! use bucket_rbtree::Tree;
//!
//! let mut tree = Tree::new();
//! for k in [5, 1, 9, 3] {
//!     tree.insert_key(k).unwrap();
//! }
//! let loc = tree.search(&3).locator.unwrap();
//! tree.insert_after(loc, 4).unwrap();
//! assert_eq!(tree.keys(), vec![1, 3, 4, 5, 9]);
//! assert!(tree.validate().ok);
//! ```

mod bucket;
mod counters;
mod error;
mod fixup;
mod layout;
mod maintenance;
mod query;
mod store;
pub mod validation;

pub use bucket::{Locator, Side};
pub use counters::{SpacingStats, TreeStats, WorkCounter};
pub use error::TreeError;
pub use fixup::{FixupCase, FixupOutcome, OutcomeKind};
pub use layout::Layout;
pub use query::{Iter, SearchResult};
pub use store::{compute_h, height_bound, raw_h, BucketId, Color, NodeId, NodeRef, Tree, H_MIN_DEFAULT};
pub use validation::{OracleSet, ValidationReport, ValidationStats, Violation};

/// Tuning knobs. The defaults are the ones the constant-work bound is proven
/// for; `scan_budget: 3` is the tighter scan budget that also suffices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    /// Floor on `H`, so size thresholds make sense for tiny trees.
    pub h_min: u32,
    /// Fix-ups the global scan may spend on one bucket.
    pub scan_budget: usize,
    /// Buckets the global scan visits per update.
    pub buckets_per_op: usize,
    /// Fix-ups a push-to-root is expected to need at most. Exceeding it is
    /// recorded in [`TreeStats::push_cap_exceeded`], not enforced.
    pub push_cap: usize,
    /// Which half of a split gets the extra fix-up step.
    pub split_fixup_side: Side,
}

impl Default for Config {
    fn default() -> Self {
        Config { h_min: H_MIN_DEFAULT, scan_budget: 11, buckets_per_op: 2, push_cap: 11, split_fixup_side: Side::Left }
    }
}
