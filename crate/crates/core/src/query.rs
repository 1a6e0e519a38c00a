//! Read-only access: search, locator navigation and in-order iteration.

use crate::bucket::Locator;
use crate::counters::TreeStats;
use crate::store::{BucketId, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub locator: Option<Locator>,
    /// Key comparisons: one per internal node on the path plus those spent
    /// scanning the bucket.
    pub comparisons: usize,
    pub path_len: usize,
}

impl<K: Ord + Clone> Tree<K> {
    pub fn search(&self, key: &K) -> SearchResult {
        let (b, path_len) = self.search_descend(key);
        let s = self.bucket_search(b, key);
        SearchResult {
            locator: s.found.map(|e| self.locator(e)),
            comparisons: path_len + s.comparisons,
            path_len,
        }
    }

    pub fn contains(&self, key: &K) -> bool {
        self.search(key).locator.is_some()
    }

    /// The key at `loc`, or `None` if the locator is stale.
    pub fn get(&self, loc: Locator) -> Option<&K> {
        self.resolve(loc).ok().map(|e| self.key_of(e))
    }

    pub fn first(&self) -> Option<Locator> {
        self.head_from(Some(self.first_bucket))
    }

    pub fn last(&self) -> Option<Locator> {
        let mut b = self.first_bucket;
        let mut last = None;
        loop {
            if let Some(t) = self.bucket(b).tail {
                last = Some(t);
            }
            match self.bucket(b).next {
                Some(n) => b = n,
                None => return last.map(|e| self.locator(e)),
            }
        }
    }

    pub fn next(&self, loc: Locator) -> Option<Locator> {
        let e = self.resolve(loc).ok()?;
        if let Some(n) = self.entries[e as usize].next {
            return Some(self.locator(n));
        }
        self.head_from(self.bucket(self.bucket_of_entry(e)).next)
    }

    pub fn prev(&self, loc: Locator) -> Option<Locator> {
        let e = self.resolve(loc).ok()?;
        if let Some(p) = self.entries[e as usize].prev {
            return Some(self.locator(p));
        }
        let mut b = self.bucket(self.bucket_of_entry(e)).prev;
        while let Some(id) = b {
            if let Some(t) = self.bucket(id).tail {
                return Some(self.locator(t));
            }
            b = self.bucket(id).prev;
        }
        None
    }

    fn head_from(&self, mut b: Option<BucketId>) -> Option<Locator> {
        while let Some(id) = b {
            if let Some(h) = self.bucket(id).head {
                return Some(self.locator(h));
            }
            b = self.bucket(id).next;
        }
        None
    }

    pub fn iter(&self) -> Iter<'_, K> {
        Iter { tree: self, bucket: Some(self.first_bucket), entry: self.bucket(self.first_bucket).head }
    }

    /// All keys in order.
    pub fn keys(&self) -> Vec<K> {
        self.iter().cloned().collect()
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len() - self.free_buckets.len()
    }

    pub fn stats(&self) -> &TreeStats {
        &self.stats
    }
}

/// In-order iterator over keys.
pub struct Iter<'a, K> {
    tree: &'a Tree<K>,
    bucket: Option<BucketId>,
    entry: Option<u32>,
}

impl<'a, K: Ord + Clone> Iterator for Iter<'a, K> {
    type Item = &'a K;

    fn next(&mut self) -> Option<&'a K> {
        loop {
            if let Some(e) = self.entry {
                self.entry = self.tree.entries[e as usize].next;
                return Some(self.tree.key_of(e));
            }
            let b = self.tree.bucket(self.bucket?).next;
            self.bucket = b;
            self.entry = b.and_then(|id| self.tree.bucket(id).head);
        }
    }
}

impl<'a, K: Ord + Clone> IntoIterator for &'a Tree<K> {
    type Item = &'a K;
    type IntoIter = Iter<'a, K>;

    fn into_iter(self) -> Iter<'a, K> {
        self.iter()
    }
}
