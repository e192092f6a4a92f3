use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::cache::MemoCache;
use crate::correlator::CanonicalKey;
use crate::exec::Exec;

/// Recursion depth past which a debug build assumes the termination
/// measure has been broken.
pub(crate) const MAX_DEPTH: u32 = 4096;

/// How the recursions choose pivots, spectator marks and reduction order.
///
/// `Randomized` makes every choice by hashing the correlator key with the
/// seed, so runs are reproducible but exercise other recursion paths. Use a
/// fresh cache with it: entries are only shared with equal values anyway,
/// but a warm cache would short-circuit the paths under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Deterministic,
    Randomized { seed: u64 },
}

impl Strategy {
    /// Index in `0..len` for the decision `salt` at the correlator `key`;
    /// 0 when deterministic.
    pub(crate) fn pick(&self, key: &CanonicalKey, salt: u64, len: usize) -> usize {
        debug_assert!(len > 0);
        match *self {
            Strategy::Deterministic => 0,
            Strategy::Randomized { seed } => {
                let mut h = DefaultHasher::new();
                seed.hash(&mut h);
                salt.hash(&mut h);
                key.hash(&mut h);
                (h.finish() % len as u64) as usize
            }
        }
    }
}

/// Evaluator for Gromov-Witten invariants, descendants and twisted
/// descendants of `P^r`. Cheap to clone; clones share the memo table.
#[derive(Clone, Default)]
pub struct Engine {
    pub(crate) cache: Arc<MemoCache>,
    pub(crate) strategy: Strategy,
    pub(crate) exec: Exec,
}

impl Engine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cache(cache: Arc<MemoCache>) -> Self {
        Self { cache, ..Self::default() }
    }

    pub fn strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn cache(&self) -> &Arc<MemoCache> {
        &self.cache
    }
}
